import numpy as np
import pytest

from pctsp import kernels
from pctsp.exact import brute_matching

BACKENDS = kernels.backends()


def test_compiled_backend_available():
    # the extension is part of the normal build; fallback must still exist
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_held_karp_backends_agree(name):
    rng = np.random.default_rng(5)
    for n in range(1, 9):
        d = rng.uniform(0, 1, (n, n))
        d = np.ascontiguousarray(d + d.T)
        dp, parent = BACKENDS[name].held_karp(d)
        ref_dp, ref_parent = BACKENDS["python"].held_karp(d)
        np.testing.assert_array_equal(dp, ref_dp)
        np.testing.assert_array_equal(parent, ref_parent)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_matching_backends_exact(name):
    rng = np.random.default_rng(9)
    for k in (2, 4, 6, 8, 10):
        w = rng.uniform(0, 1, (k, k))
        w = np.ascontiguousarray(w + w.T)
        value, _ = BACKENDS[name].matching_dp(w)
        assert value == pytest.approx(brute_matching(w), abs=1e-12)
