from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcalc import exactla as la
from pcalc.errors import Inconsistent


def small_matrix(p_choices=(2, 3, 5)):
    @st.composite
    def build(draw):
        p = draw(st.sampled_from(p_choices))
        r = draw(st.integers(0, 4))
        c = draw(st.integers(0, 4))
        vals = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
        return p, np.array(vals, dtype=np.int64).reshape(r, c)

    return build()


def brute_kernel_size(m, p):
    """Count vectors v with m v = 0 by enumeration; independent of elimination."""
    cols = m.shape[1]
    return sum(1 for v in itertools.product(range(p), repeat=cols) if not (m @ np.array(v, dtype=np.int64) % p).any())


def test_primes():
    assert la.is_prime(2) and la.is_prime(32749) and not la.is_prime(1) and not la.is_prime(32767)
    with pytest.raises(ValueError):
        la.check_prime(4)
    with pytest.raises(ValueError):
        la.check_prime(32771)  # prime but not below 2^15


def test_rref_examples():
    R, piv, _ = la.rref(la.mat([[1, 1], [1, 0]], 2), 2)
    assert R.tolist() == [[1, 0], [0, 1]] and piv == [0, 1]
    R, piv, _ = la.rref(la.zeros(2, 3), 2)
    assert not R.any() and piv == []
    R, piv, _ = la.rref(la.mat([[1, 1]], 2), 2)
    assert R.tolist() == [[1, 1]] and piv == [0]


def test_kernel_examples():
    assert la.kernel_basis(la.mat([[1, 1]], 2), 2).T.tolist() == [[1, 1]]
    assert la.kernel_basis(la.eye(3), 2).shape == (3, 0)
    assert la.kernel_basis(la.zeros(1, 2), 2).tolist() == [[1, 0], [0, 1]]


def test_cokernel_examples():
    Q, d = la.cokernel(la.mat([[1], [0]], 2), 2)
    assert Q.tolist() == [[0, 1]] and d == 1
    assert la.cokernel(la.mat([[1, 1], [0, 1]], 2), 2)[1] == 0
    Q, d = la.cokernel(la.zeros(2, 1), 2)
    assert Q.tolist() == [[1, 0], [0, 1]] and d == 2


def test_solve_examples():
    assert la.solve(la.mat([[1, 1]], 2), la.mat([[1]], 2), 2).T.tolist() == [[1, 0]]
    with pytest.raises(Inconsistent) as e:
        la.solve(la.mat([[0], [0]], 2), la.mat([[1], [0]], 2), 2)
    y = np.asarray(e.value.certificate)
    assert (y @ np.array([[1], [0]]) % 2).any()
    B = la.mat([[1, 0, 1], [1, 1, 0]], 2)
    assert np.array_equal(la.solve(la.eye(2), B, 2), B)


@given(small_matrix())
def test_rank_nullity_against_enumeration(pm):
    p, m = pm
    r = la.rank(m, p)
    K = la.kernel_basis(m, p)
    assert K.shape == (m.shape[1], m.shape[1] - r)
    assert not la.mul(m, K, p).any()
    assert la.rank(K, p) == K.shape[1]
    assert brute_kernel_size(m, p) == p ** (m.shape[1] - r)


@given(small_matrix())
def test_cokernel_is_exact(pm):
    p, m = pm
    Q, d = la.cokernel(m, p)
    assert d == m.shape[0] - la.rank(m, p)
    assert not la.mul(Q, m, p).any()
    assert la.rank(Q, p) == d


@given(small_matrix(), st.integers(0, 2**31 - 1))
def test_solve_roundtrip(pm, seed):
    p, a = pm
    rng = np.random.default_rng(seed)
    x = la.random_matrix(rng, a.shape[1], 2, p)
    b = la.mul(a, x, p)
    sol = la.solve(a, b, p)
    assert np.array_equal(la.mul(a, sol, p), b)


@given(st.sampled_from([2, 3, 5, 7]), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_random_invertible(p, n, seed):
    m = la.random_invertible(np.random.default_rng(seed), n, p)
    inv = la.inverse(m, p)
    assert np.array_equal(la.mul(m, inv, p), la.eye(n))


def test_rref_transform():
    m = la.mat([[1, 2, 3], [2, 4, 1], [0, 0, 4]], 5)
    R, piv, T = la.rref(m, 5)
    assert np.array_equal(la.mul(T, m, 5), R)
    assert piv == [0, 2]


def test_intersect_and_extend():
    u = la.mat([[1, 0], [0, 1], [0, 0]], 2)
    v = la.mat([[1, 0], [1, 0], [0, 1]], 2)
    w = la.intersect(u, v, 2)
    assert w.shape[1] == 1 and w.T.tolist() == [[1, 1, 0]]
    ext = la.extend_basis(u, la.eye(3), 2)
    assert ext.T.tolist() == [[0, 0, 1]]
