from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcalc.errors import CostCapExceeded, InvalidPoset, NotAPairwiseCover, NotDistributive
from pcalc.fixtures import n_lattice
from pcalc.lattice import FinitePoset, analyze_lattice, cube_from_cover, enumerate_cubes, stratum


def m3():
    return FinitePoset.explicit(["0", "a", "b", "c", "1"], [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])


def brute_cubes(P: FinitePoset, k: int) -> int:
    """Unordered nondegenerate pairwise covers of size k, by exhaustive search."""
    count = 0
    for v in range(P.n):
        below = [x for x in range(P.n) if P.leq_matrix[x, v] and x != v]
        for xs in itertools.combinations(below, k):
            if all(P.join(a, b) == v for a, b in itertools.combinations(xs, 2)):
                count += 1
    return count


def test_grid_jdims(grid33):
    prof = analyze_lattice(grid33)
    assert prof.is_distributive
    assert prof.jdim[(2, 2)] == 2 and prof.jdim[(0, 2)] == 1 and prof.jdim[(0, 0)] == 0


def test_n_lattice_irreducibles():
    prof = n_lattice().profile
    assert prof.is_distributive
    assert "t" in prof.join_irreducibles and "d" not in prof.join_irreducibles
    assert prof.join_irreducibles == frozenset({"b", "c", "t"})


def test_m3_not_distributive():
    prof = m3().profile
    assert prof.is_lattice and not prof.is_distributive
    assert prof.witness is not None
    with pytest.raises(NotDistributive):
        stratum(m3(), 1)


def test_strata(grid33):
    members, closed = stratum(grid33, 1)
    brute = {x for i, x in enumerate(grid33.elements) if len(grid33.parents[i]) <= 1}
    assert members == brute == {(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)}
    assert closed
    members, closed = stratum(n_lattice(), 1)
    assert members == {"a", "b", "c", "t"} and not closed
    assert stratum(grid33, 5)[0] == frozenset(grid33.elements)


def test_meet_stratum_is_up_closed(grid33):
    members, closed = stratum(grid33, 1, "meet")
    assert members == {(2, 2), (1, 2), (0, 2), (2, 1), (2, 0)} and closed


def test_cube_from_cover(grid22):
    c = cube_from_cover(grid22, (1, 1), [(1, 0), (0, 1)])
    assert set(c.assignment.values()) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert c.assignment[0] == (0, 0) and c.assignment[3] == (1, 1)
    P3 = FinitePoset.grid([2, 2, 2])
    c3 = cube_from_cover(P3, (1, 1, 1), [(0, 1, 1), (1, 0, 1), (1, 1, 0)])
    assert set(c3.assignment.values()) == set(P3.elements)
    with pytest.raises(NotAPairwiseCover):
        cube_from_cover(grid22, (1, 1), [(1, 0), (1, 0)])


@pytest.mark.parametrize(
    "shape,k,mode",
    [((2, 2), 2, "full"), ((3, 3), 2, "full"), ((3, 3), 3, "full"), ((2, 2, 2), 3, "full"), ((4, 3), 2, "full"), ((3, 2, 2), 2, "full")],
)
def test_cube_counts_match_brute_force(shape, k, mode):
    P = FinitePoset.grid(shape)
    assert len(enumerate_cubes(P, k, mode)) == brute_cubes(P, k)


def test_cube_count_examples(grid22, grid33):
    assert len(enumerate_cubes(grid22, 2)) == 1
    assert len(enumerate_cubes(grid33, 2, "parents_only")) == 4
    assert len(enumerate_cubes(grid33, 3)) == 0
    assert len(enumerate_cubes(FinitePoset.grid([2, 2]), 3)) == 0


def test_cost_cap():
    with pytest.raises(CostCapExceeded):
        enumerate_cubes(FinitePoset.grid([4, 4, 3]), 2, max_covers=10)


def test_degenerate_flag(grid22):
    assert len(enumerate_cubes(grid22, 2, include_degenerate=True)) > len(enumerate_cubes(grid22, 2))


def test_invalid_posets():
    with pytest.raises(InvalidPoset):
        FinitePoset.explicit(["a", "a"], [])
    with pytest.raises(InvalidPoset):
        FinitePoset.explicit(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(InvalidPoset):
        FinitePoset.explicit(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.raises(InvalidPoset):
        FinitePoset.explicit(["a"], [("a", "z")])


@given(st.lists(st.integers(1, 4), min_size=1, max_size=3))
def test_grid_lattice_laws(shape):
    P = FinitePoset.grid(shape)
    prof = P.profile
    assert prof.is_distributive
    J, M = P.join_table, P.meet_table
    for x in range(P.n):
        for y in range(P.n):
            ex, ey = P.elements[x], P.elements[y]
            assert P.elements[J[x, y]] == tuple(max(a, b) for a, b in zip(ex, ey))
            assert P.elements[M[x, y]] == tuple(min(a, b) for a, b in zip(ex, ey))
    # join-dimension in a grid is the number of nonzero coordinates
    assert all(prof.jdim[x] == sum(1 for c in x if c) for x in P.elements)
    # the opposite lattice swaps join- and meet-dimension
    assert P.opposite().profile.jdim == prof.mdim


@given(st.lists(st.integers(2, 3), min_size=2, max_size=3), st.integers(1, 3))
def test_cubes_rederive_covers(shape, k):
    P = FinitePoset.grid(shape)
    for c in enumerate_cubes(P, k):
        assert c.rederived_cover() == tuple(c.cover_elements)
        for s in range(c.full):
            missing = [i for i in range(k) if not s >> i & 1]
            el = [P.index(c.cover_elements[i]) for i in missing]
            m = el[0]
            for e in el[1:]:
                m = P.meet(m, e)
            assert c.assignment[s] == P.elements[m]
