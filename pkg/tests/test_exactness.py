from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcalc import exactla as la
from pcalc.errors import InternalCheckFailed
from pcalc.exactness import ChainComplex, is_2_middle_exact, is_k_middle_exact, koszul, koszul_homology, middle_exact_square
from pcalc.fixtures import ex1, ex2, ex4, hook
from pcalc.lattice import FinitePoset, cube_from_cover, enumerate_cubes
from pcalc.persmod import direct_sum, interval_module, random_basis_change, random_module, zero_module


def test_chain_complex_basics():
    C = ChainComplex({0: 2, 1: 2}, {1: la.eye(2)}, 2)
    assert C.is_acyclic()
    Z = ChainComplex({0: 1, 1: 3, 2: 2}, {}, 5)
    assert koszul_homology(Z) == {0: 1, 1: 3, 2: 2}
    with pytest.raises(InternalCheckFailed):
        ChainComplex({0: 1, 1: 1, 2: 1}, {1: la.eye(1), 2: la.eye(1)}, 2)


def test_koszul_of_an_edge():
    F = ex1()
    cube = cube_from_cover(F.poset, (1, 1), [(1, 0)])
    K = koszul(F, cube)
    assert K.dims == {0: 2, 1: 2}
    assert np.array_equal(K.d(1), F.smap(F.poset.index((1, 0)), F.poset.index((1, 1))))


def test_ex2_koszul():
    F = ex2()
    cube = cube_from_cover(F.poset, (1, 1, 1), [(0, 1, 1), (1, 0, 1), (1, 1, 0)])
    K = koszul(F, cube)
    assert K.dims == {0: 0, 1: 0, 2: 3, 3: 2}
    # H_2 is the corank of the stacked covectors (0 1), (1 1), (1 0)
    stacked = la.mat([[0, 1], [1, 1], [1, 0]], 2)
    assert K.homology(2) == 3 - la.rank(stacked, 2) == 1
    v = is_k_middle_exact(F, 3)
    assert not v and v.witness["top"] == (1, 1, 1) and v.witness["homology"]["2"] == 1


def test_zero_module_cube():
    P = FinitePoset.grid([2, 2])
    K = koszul(zero_module(P), enumerate_cubes(P, 2)[0])
    assert all(d == 0 for d in K.dims.values())


def test_hook_square():
    F = hook()
    rep = middle_exact_square(F, (1, 0), (0, 1))
    assert not rep.is_middle_exact and rep.dims == (1, 0)
    v = is_2_middle_exact(F)
    assert not v and set(v.witness) == {(1, 0), (0, 1)}


def test_comparable_pairs_are_middle_exact():
    F = hook()
    assert middle_exact_square(F, (0, 1), (1, 1)).is_middle_exact


def test_ex1_and_ex4():
    F = ex1()
    P = F.poset
    for i, x in enumerate(P.elements):
        for j, y in enumerate(P.elements):
            if not (P.leq_matrix[i, j] or P.leq_matrix[j, i]):
                assert middle_exact_square(F, x, y).is_middle_exact
    assert is_k_middle_exact(ex4(), 2) and is_k_middle_exact(ex4(), 3)
    assert is_2_middle_exact(ex4())


def test_vacuous_when_k_exceeds_factors():
    assert is_k_middle_exact(hook(), 3)


def test_block_sums_are_middle_exact():
    P = FinitePoset.grid([3, 3])
    blocks = [
        [(a, b) for a in (1, 2) for b in range(3)],
        [(a, 2) for a in range(3)],
        [(a, b) for a in (0, 1) for b in (0, 1)],
        [(2, 2)],
    ]
    F = direct_sum(*[interval_module(P, b) for b in blocks]).module
    assert is_2_middle_exact(random_basis_change(F, np.random.default_rng(0)))


@given(st.integers(0, 10**6), st.sampled_from([2, 5]), st.sampled_from([(3, 3), (2, 2, 2), (3, 2, 2)]))
def test_middle_exactness_routes(seed, p, shape):
    """Rank count, pushout comparison, pullback comparison and Koszul H_1 agree on squares."""
    P = FinitePoset.grid(shape)
    F = random_module(P, seed, 3, p)
    for cube in enumerate_cubes(P, 2):
        x, y = cube.cover_elements
        rep = middle_exact_square(F, x, y)
        assert rep.is_middle_exact == (koszul(F, cube).homology(1) == 0)


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_two_middle_exact_matches_koszul_on_grids(seed, p):
    P = FinitePoset.grid([3, 3])
    F = random_module(P, seed, 3, p)
    assert bool(is_2_middle_exact(F)) == bool(is_k_middle_exact(F, 2))
