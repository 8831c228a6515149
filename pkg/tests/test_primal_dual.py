import numpy as np
import pytest

from conftest import random_instances
from pctsp.instance import tour_cost, validate
from pctsp.lp import solve_relaxation
from pctsp.primal_dual import (
    Moat,
    MoatRecord,
    check_dual,
    eq1_certificate,
    moat_growing,
    primal_dual_tour,
    primal_dual_certificate,
    prune,
    run_primal_dual,
    scale_penalties,
    tree_vertices,
)


def two(pen, c=1.0):
    return validate(2, 0, [[0, c], [c, 0]], [0, pen])


def test_scale_examples():
    assert scale_penalties(two(3.0)).values[1] == 3.0
    inst = validate(3, 0, np.ones((3, 3)) - np.eye(3), [0, 3, 3])
    assert scale_penalties(inst).values[1] == pytest.approx(2.0)
    big = validate(1001, 0, np.zeros((1001, 1001)), np.ones(1001))
    assert scale_penalties(big).values[1] == pytest.approx(0.5, abs=1e-3)
    with pytest.raises(ValueError):
        scale_penalties(validate(1, 0, [[0]], [0]))


def test_scaled_ratio_is_uniform():
    inst = random_instances(1, 9, 9, seed=1)[0]
    sp = scale_penalties(inst)
    assert np.all(sp.values <= inst.penalties)
    mask = inst.penalties > 0
    np.testing.assert_allclose(inst.penalties[mask] / sp.values[mask], 2 - 1 / 8)


def test_two_vertices_merge():
    inst = two(10.0)
    tree, rec = moat_growing(inst, scale_penalties(inst))
    assert tree == [(0, 1)]
    assert [e["type"] for e in rec.events] == ["merge"]
    assert rec.events[0]["time"] == pytest.approx(1.0)


@pytest.mark.parametrize("pen, merged", [(0.4, False), (1.9, False), (2.1, True)])
def test_two_vertices_deactivation_threshold(pen, merged):
    # budget is pi'/2 and pi' = pi at n = 2, so the edge wins iff pi > 2c
    inst = two(pen)
    tree, rec = moat_growing(inst, scale_penalties(inst))
    assert (tree == [(0, 1)]) == merged
    assert rec.events[0]["type"] == ("merge" if merged else "deactivate")


def test_prune_examples():
    rec = MoatRecord(moats=[Moat(frozenset({1})), Moat(frozenset({2}))], budgets=np.zeros(3))
    assert prune([(0, 1), (1, 2)], rec, 0) == [(0, 1), (1, 2)]
    rec.moats[1].deactivated_at = 0.5
    assert prune([(0, 1), (1, 2)], rec, 0) == [(0, 1)]


def test_prune_keeps_connected_root_tree():
    for inst in random_instances(60, 4, 10, seed=6):
        res = run_primal_dual(inst)
        verts = tree_vertices(res.pruned, inst.root)
        assert inst.root in verts
        assert len(res.pruned) == len(verts) - 1  # a tree on its vertex set
        assert set(res.tour.vertices) == verts


def test_fixture_certificates(fix_unit3, fix_skip):
    sol = solve_relaxation(fix_unit3)
    tour = primal_dual_tour(fix_unit3, sol)
    assert sorted(tour.vertices) == [0, 1, 2] and tour.objective == 3.0
    assert primal_dual_certificate(fix_unit3, tour, sol).rhs == pytest.approx(6.0)
    sol = solve_relaxation(fix_skip)
    tour = primal_dual_tour(fix_skip, sol)
    assert tour.objective <= 2 * sol.cost_part + sol.penalty_part + 1e-6
    scaled = solve_relaxation(fix_unit3, scale_penalties(fix_unit3).values).value
    assert eq1_certificate(fix_unit3, primal_dual_tour(fix_unit3, solve_relaxation(fix_unit3)), scaled).passed


def test_eq1_boundary_empty_tour():
    n = 4
    inst = validate(n, 0, 1000 * (np.ones((n, n)) - np.eye(n)), [0, 1, 1, 1])
    res = run_primal_dual(inst)
    assert res.tour.vertices == (0,)
    sp = scale_penalties(inst)
    lp_scaled = solve_relaxation(inst, sp.values).value
    assert lp_scaled == pytest.approx(sp.values.sum())
    cert = eq1_certificate(inst, res.tour, lp_scaled)
    assert cert.passed and abs(cert.slack) < 1e-9


def test_dual_feasibility_and_doubling():
    for inst in random_instances(80, 4, 12, seed=13):
        res = run_primal_dual(inst, check=False)
        check_dual(inst, res.record)
        tc = sum(inst.dist[a][b] for a, b in res.pruned)
        assert tour_cost(inst.dist, res.tour.vertices) <= 2 * tc + 1e-9
        times = [e["time"] for e in res.record.events]
        assert times == sorted(times)


def test_bulk_certificates():
    for inst in random_instances(60, 4, 12, seed=14):
        sol = solve_relaxation(inst)
        res = run_primal_dual(inst)
        assert primal_dual_certificate(inst, res.tour, sol).passed
        scaled = solve_relaxation(inst, scale_penalties(inst).values).value
        assert eq1_certificate(inst, res.tour, scaled).passed


def test_deterministic():
    inst = random_instances(1, 11, 11, seed=15)[0]
    a, b = run_primal_dual(inst), run_primal_dual(inst)
    assert a.record.event_lines() == b.record.event_lines()
    assert a.tour == b.tour


def test_single_vertex():
    res = run_primal_dual(validate(1, 0, [[0]], [0]))
    assert res.tour.vertices == (0,)
