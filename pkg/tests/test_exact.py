import itertools

import numpy as np
import pytest

from pctsp.exact import (
    brute_matching,
    brute_min_cut,
    brute_pctsp,
    brute_tsp,
    exact_pctsp,
    exact_tsp,
)
from pctsp.instance import gen_euclidean, objective, validate


def test_fixtures(fix_skip, fix_path, fix_unit3):
    r = exact_pctsp(fix_skip)
    assert r.objective == pytest.approx(2.1)
    assert r.visited == {0, 1}
    r = exact_pctsp(fix_path)
    assert r.objective == pytest.approx(4.0)
    assert r.visited == {0, 1, 2}
    assert exact_pctsp(fix_unit3).objective == pytest.approx(3.0)


def test_single_vertex():
    r = exact_pctsp(validate(1, 0, [[0]], [0]))
    assert r.objective == 0.0 and r.visited == {0}


def test_result_is_recomputable():
    for seed in range(10):
        inst = gen_euclidean(7, seed, [0.1, 1, 10][seed % 3])
        r = exact_pctsp(inst)
        assert objective(inst, r.tour) == pytest.approx(r.objective, abs=1e-12)


def test_agrees_with_naive_enumeration():
    for seed in range(25):
        inst = gen_euclidean(2 + seed % 6, 100 + seed, [0.1, 1, 10][seed % 3])
        assert exact_pctsp(inst).objective == pytest.approx(brute_pctsp(inst), abs=1e-9)


def test_nonzero_root_index():
    inst = gen_euclidean(6, 4, 1.0)
    d = inst.dist[np.ix_([3, 1, 2, 0, 4, 5], [3, 1, 2, 0, 4, 5])]
    p = inst.penalties.copy()
    moved = validate(6, 3, d, p[[3, 1, 2, 0, 4, 5]])
    assert exact_pctsp(moved).objective == pytest.approx(brute_pctsp(moved))


def test_exact_tsp_small_cases(fix_unit3, fix_skip):
    assert exact_tsp(fix_skip, {0, 2}) == 10.0
    assert exact_tsp(fix_unit3, {0, 1, 2}) == 3.0
    assert exact_tsp(fix_unit3, {0}) == 0.0
    with pytest.raises(ValueError):
        exact_tsp(fix_unit3, {1, 2})


def test_exact_tsp_matches_permutations_n9():
    inst = gen_euclidean(9, 77)
    assert exact_tsp(inst, range(9)) == pytest.approx(brute_tsp(inst.dist, range(9), 0))


def test_cap():
    with pytest.raises(ValueError):
        exact_pctsp(gen_euclidean(19, 0))


def test_brute_matching_small():
    assert brute_matching([[0, 4], [4, 0]]) == 4
    w = np.full((4, 4), 3.0)
    assert brute_matching(w) == 6.0
    with pytest.raises(ValueError):
        brute_matching(np.zeros((3, 3)))


def test_brute_min_cut_small():
    assert brute_min_cut([[0, 3], [3, 0]], 0, 1)[0] == 3.0
    assert brute_min_cut(np.zeros((4, 4)), 0, 3)[0] == 0.0
    value, side = brute_min_cut([[0, 1, 5], [1, 0, 2], [5, 2, 0]], 0, 1)
    assert value == 3.0 and side == {0, 2}
