"""Command-line front end: gen, solve, exact, verify, bench.

Exit codes: 0 ok, 2 input error, 3 solver error, 4 certification failure.
All randomness comes from ``--seed`` (default 0).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import instance as inst_io
from .combine import constants, mixture_bound, solve_best, solve_randomized
from .errors import Certificate, CertificationError, InstanceError, LPError
from .exact import MAX_EXACT_N, exact_pctsp
from .lp import solve_relaxation
from .primal_dual import primal_dual_certificate, run_primal_dual
from .tours import threshold_certificate, rounding_sweep

log = logging.getLogger("pctsp")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CERT = 0, 2, 3, 4
DEFAULT_SEED = 0
PUBLISHED_BOUND = 1.91457
MODES = ("best", "rounding", "primal-dual", "randomized", "exact")


class UsageError(Exception):
    pass


# -- output -----------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj)


def render(doc, as_json: bool) -> str:
    if as_json:
        return json.dumps(doc, indent=2) + "\n"
    pairs = list(_flatten(doc))
    width = max((len(k) for k, _ in pairs), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in pairs)


def render_table(doc) -> str:
    rows = doc["rows"]
    if not rows:
        return render(doc, False)
    cols = list(rows[0].keys())
    cells = [[json.dumps(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    out = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    out += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    rest = {k: v for k, v in doc.items() if k != "rows"}
    return "\n".join(out) + "\n" + render(rest, False)


def emit(text: str, out):
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InstanceError(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------


def cmd_gen(args):
    inst = inst_io.gen_euclidean(args.n, args.seed, args.penalty_scale)
    emit(inst_io.dumps(inst), args.out)
    return EXIT_OK


def _write_events(path, record):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(record.event_lines())


def cmd_solve(args):
    if args.trials is not None and args.mode != "randomized":
        raise UsageError("--trials only applies to --mode randomized")
    if args.eq1 and args.mode != "best":
        raise UsageError("--eq1 only applies to --mode best")
    if args.event_log and args.mode not in ("best", "primal-dual"):
        raise UsageError("--event-log needs --mode best or primal-dual")
    if args.lp_dump and args.mode == "exact":
        raise UsageError("--lp-dump does not apply to --mode exact")
    inst = inst_io.load(args.instance)
    mode = args.mode
    if mode == "exact" or (inst.n <= 2 and mode != "best"):
        doc = {"report_version": 1, "mode": "exact", "n": inst.n, **_exact_doc(inst)}
    elif mode == "best":
        rep = solve_best(inst, eq1=args.eq1, lp_dump=args.lp_dump)
        if args.event_log and rep.pd is not None:
            _write_events(args.event_log, rep.pd.record)
        doc = {"mode": "best", **rep.to_dict()}
    elif mode == "rounding":
        sol = solve_relaxation(inst, dump_path=args.lp_dump)
        sweep = rounding_sweep(inst, sol)
        doc = {
            "report_version": 1, "mode": mode, "n": inst.n,
            "H": sweep.best.objective, "tour": sweep.best.tour.to_dict(),
            "lp_value": sol.value, "cost_part": sol.cost_part,
            "penalty_part": sol.penalty_part, "sweep": sweep.to_dict(),
        }
    elif mode == "primal-dual":
        sol = solve_relaxation(inst, dump_path=args.lp_dump)
        pd = run_primal_dual(inst)
        cert = primal_dual_certificate(inst, pd.tour, sol)
        if args.event_log:
            _write_events(args.event_log, pd.record)
        if not cert.passed:
            raise CertificationError(cert)
        doc = {
            "report_version": 1, "mode": mode, "n": inst.n,
            "H": pd.tour.objective, "tour": pd.tour.to_dict(),
            "lp_value": sol.value, "cost_part": sol.cost_part,
            "penalty_part": sol.penalty_part,
            "tree": [list(e) for e in pd.tree], "pruned_tree": [list(e) for e in pd.pruned],
            "dual_total": pd.record.dual_total, "certificates": [cert.to_dict()],
        }
    else:
        trials = 1000 if args.trials is None else args.trials
        if trials < 1:
            raise UsageError("--trials must be >= 1")
        sol = solve_relaxation(inst, dump_path=args.lp_dump)
        res = solve_randomized(inst, args.seed, trials, sol=sol)
        doc = {
            "report_version": 1, "mode": mode, "n": inst.n, "seed": args.seed,
            **res.to_dict(),
            "lp_value": sol.value,
            "mixture_bound": mixture_bound(sol.cost_part, sol.penalty_part),
        }
    emit(render(doc, args.json), args.out)
    return EXIT_OK


def _exact_doc(inst):
    ex = exact_pctsp(inst)
    return {"opt": ex.objective, "visited": sorted(ex.visited), "tour": ex.tour.to_dict()}


def cmd_exact(args):
    inst = inst_io.load(args.instance)
    if inst.n > MAX_EXACT_N:
        raise InstanceError(f"exact oracle is capped at n={MAX_EXACT_N}")
    doc = {"report_version": 1, "mode": "exact", "n": inst.n, **_exact_doc(inst)}
    emit(render(doc, args.json), args.out)
    return EXIT_OK


def verify_instance(inst):
    """Every certificate for one instance, none raised."""
    if inst.n > MAX_EXACT_N:
        raise InstanceError(f"verify needs n <= {MAX_EXACT_N}")
    rep = solve_best(inst, exact=True, eq1=inst.n >= 3, check=False)
    certs = list(rep.certificates)
    if rep.sweep is not None:
        certs += [threshold_certificate(r) for r in rep.sweep.rows]
    if rep.exact is not None and rep.lp_value is not None:
        certs.append(Certificate("optimum-ratio-published", rep.ratio_opt, PUBLISHED_BOUND, 0.0))
    return rep, certs


def cmd_verify(args):
    inst = inst_io.load(args.instance)
    rep, certs = verify_instance(inst)
    doc = {
        "report_version": 1, "n": inst.n, "H": rep.H, "lp_value": rep.lp_value,
        "opt": rep.opt, "ratio": rep.ratio, "ratio_opt": rep.ratio_opt,
        "all_passed": all(c.passed for c in certs),
        "certificates": [c.to_dict() for c in certs],
    }
    emit(render(doc, args.json), args.out)
    failed = [c for c in certs if not c.passed]
    for c in failed:
        print(f"FAILED {c.name}: {c.lhs!r} > {c.rhs!r}", file=sys.stderr)
    return EXIT_CERT if failed else EXIT_OK


def parse_range(text):
    try:
        lo, _, hi = text.partition(":")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise UsageError(f"bad --n-range {text!r}; expected LO:HI") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad --n-range {text!r}")
    return lo, hi


def _bench_one(job):
    n, idx, seed, scale, oracle_max = job
    inst = inst_io.gen_euclidean(n, [seed, n, idx], scale)
    t0 = time.perf_counter()
    rep = solve_best(inst, exact=n <= oracle_max)
    wall = time.perf_counter() - t0
    ratio = rep.ratio if rep.ratio is not None else 1.0
    gap = None
    if rep.exact is not None and rep.lp_value is not None:
        gap = 1.0 if rep.lp_value <= 0 else rep.opt / rep.lp_value
    return {
        "n": n, "index": idx, "ratio_lp": ratio, "ratio_opt": rep.ratio_opt,
        "gap": gap, "winner": rep.winner, "wall": wall,
    }


def _agg(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    return float(np.mean(vals)), float(max(vals))


def cmd_bench(args):
    lo, hi = parse_range(args.n_range)
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    scales = [float(s) for s in args.penalty_scales.split(",")]
    jobs = [
        (n, idx, args.seed, scales[idx % len(scales)], args.oracle_max)
        for n in range(lo, hi + 1) for idx in range(args.count)
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    results.sort(key=lambda r: (r["n"], r["index"]))
    rows = []
    for n in range(lo, hi + 1):
        rs = [r for r in results if r["n"] == n]
        mean_lp, max_lp = _agg(r["ratio_lp"] for r in rs)
        mean_opt, max_opt = _agg(r["ratio_opt"] for r in rs)
        mean_gap, max_gap = _agg(r["gap"] for r in rs)
        row = {
            "n": n, "count": len(rs),
            "mean_H_over_LP": mean_lp, "max_H_over_LP": max_lp,
            "mean_H_over_OPT": mean_opt, "max_H_over_OPT": max_opt,
            "mean_OPT_over_LP": mean_gap, "max_OPT_over_LP": max_gap,
            "sweep_wins": sum(r["winner"] in ("sweep", "exact") for r in rs),
            "pd_wins": sum(r["winner"] == "primal-dual" for r in rs),
        }
        if args.timings:
            row["wall_mean_s"] = float(np.mean([r["wall"] for r in rs]))
            row["wall_max_s"] = float(max(r["wall"] for r in rs))
        rows.append(row)
    worst = max(r["max_H_over_LP"] for r in rows)
    doc = {
        "report_version": 1, "seed": args.seed, "n_range": [lo, hi], "count": args.count,
        "penalty_scales": scales, "alpha": constants().alpha, "published_bound": PUBLISHED_BOUND,
        "max_H_over_LP": worst, "within_bound": worst <= PUBLISHED_BOUND, "rows": rows,
    }
    emit(render(doc, True) if args.json else render_table(doc), args.out)
    return EXIT_OK if worst <= PUBLISHED_BOUND else EXIT_CERT


# -- parser -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of aligned text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default 0)")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="pctsp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a random Euclidean instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--penalty-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--mode", choices=MODES, default="best")
    p.add_argument("--trials", type=int)
    p.add_argument("--eq1", action="store_true", help="also certify against the scaled-penalty LP")
    p.add_argument("--event-log", help="write moat-growing events as JSON lines")
    p.add_argument("--lp-dump", help="write the final LP rows in plain text")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", parents=[common], help="exact optimum by Held-Karp")
    p.add_argument("instance")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify", parents=[common], help="run every certificate on one instance")
    p.add_argument("instance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="aggregate ratios over random instances")
    p.add_argument("--n-range", default="4:8")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--penalty-scales", default="0.1,1,10")
    p.add_argument("--oracle-max", type=int, default=12)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="add wall-clock columns (not reproducible)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InstanceError, UsageError) as exc:
        print(f"pctsp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LPError, ValueError) as exc:
        print(f"pctsp: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CertificationError as exc:
        print(f"pctsp: certification failure: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
