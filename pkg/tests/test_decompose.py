from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcalc import exactla as la
from pcalc.calculus import codegree_approx, degree_approx, is_codegree, is_degree
from pcalc.checks import random_block_sum
from pcalc.decompose import (
    Block,
    an_interval_decompose,
    bidegree1_interval_decompose,
    bkc_decompose,
    block_decompose,
    block_multiset,
    cofree_structure,
    free_structure,
    middle_exact_blocks,
    middle_exact_split,
    natural_splitting,
)
from pcalc.errors import NoSplitting, NotCofree, NotFree, PosetUnsupported, PreconditionFailed
from pcalc.fixtures import ex1, ex3, ex4, hook
from pcalc.lattice import FinitePoset, stratum
from pcalc.persmod import (
    cokernel_nt,
    constant_module,
    direct_sum,
    down_module,
    interval_module,
    kernel_nt,
    module_from_ids,
    random_basis_change,
    restrict,
    up_module,
    verify_natural_iso,
    zero_module,
)

G33 = FinitePoset.grid([3, 3])
VERTICAL = [(a, b) for a in (1, 2) for b in range(3)]
HORIZONTAL = [(a, 2) for a in range(3)]


def blocks_of(rep):
    return [str(b) for b in block_multiset(rep)]


def test_ex1_intervals_on_the_axes():
    F = ex1()
    members, _ = stratum(F.poset, 1)
    sub = restrict(F, sorted(F.poset.index(x) for x in members))
    rep = an_interval_decompose(sub)
    got = sorted(sorted(d["elements"]) for d in rep.descriptions())
    assert got == sorted([[(1, 0), (2, 0)], [(0, 2)], [(0, 0), (0, 1), (1, 0)]])
    assert rep.verified


def test_chain_intervals():
    P = FinitePoset.explicit(["0", "1", "2"], [("0", "1"), ("1", "2")])
    F = module_from_ids(P, {"0": 1, "1": 1}, {("0", "1"): [[1]]})
    rep = an_interval_decompose(F)
    assert [d["elements"] for d in rep.descriptions()] == [["0", "1"]]
    assert an_interval_decompose(zero_module(P)).summands == []


def test_ex1_blocks():
    rep = block_decompose(ex1(), "codegree")
    assert blocks_of(rep) == ["death [0,1]x[0,1]", "vertical [1,2]x[0,2]", "horizontal [0,2]x[2,2]"]
    assert rep.verified and verify_natural_iso(rep.iso)


def test_block_examples():
    rep = block_decompose(constant_module(G33, 1), "codegree")
    assert blocks_of(rep) == ["death [0,2]x[0,2]"]
    with pytest.raises(PreconditionFailed):
        block_decompose(hook(), "codegree")


def test_block_classification():
    assert Block.classify((0, 1), (0, 1), (3, 3)).kind == "death"
    assert Block.classify((1, 2), (0, 2), (3, 3)).kind == "vertical"
    assert Block.classify((0, 2), (2, 2), (3, 3)).kind == "horizontal"
    assert Block.classify((1, 2), (1, 2), (3, 3)).kind == "birth"
    # a full-height strip starting at 0 is a death block under the precedence order
    assert Block.classify((0, 1), (0, 2), (3, 3)).kind == "death"
    with pytest.raises(ValueError):
        Block.classify((1, 1), (1, 1), (3, 3))


def test_split_sequences():
    P = FinitePoset.grid([3, 3])
    A = interval_module(P, VERTICAL)
    B = interval_module(P, HORIZONTAL)
    S = direct_sum(A, B)
    s = natural_splitting(S.inclusions[0], S.projections[1], "section")
    for x in range(P.n):
        assert np.array_equal(la.mul(S.projections[1].comps[x], s.comps[x], 2), la.eye(int(B.dims[x])))


def test_non_split_sequence():
    """0 -> F_{1} -> F_{[0,1]} -> F_{0} -> 0 on the chain 0 < 1 has no natural section."""
    P = FinitePoset.explicit(["0", "1"], [("0", "1")])
    whole = interval_module(P, ["0", "1"])
    top = interval_module(P, ["1"])
    from pcalc.persmod import NaturalTransformation

    inc = NaturalTransformation(top, whole, [la.zeros(1, 0), la.eye(1)])
    Q, q = cokernel_nt(inc)
    assert Q.dims.tolist() == [1, 0]
    with pytest.raises(NoSplitting):
        natural_splitting(inc, q, "section")
    with pytest.raises(NoSplitting):
        natural_splitting(inc, q, "retraction")


def test_free_and_cofree():
    P = FinitePoset.grid([3, 3])
    F = direct_sum(up_module(P, (1, 0)), up_module(P, (0, 0))).module
    ms, rep = free_structure(random_basis_change(F, np.random.default_rng(3)))
    assert ms == {(1, 0): 1, (0, 0): 1} and rep.verified
    with pytest.raises(NotFree):
        free_structure(down_module(P, (1, 1)))
    assert free_structure(zero_module(P))[0] == {}
    assert cofree_structure(down_module(P, (1, 1)))[0] == {(1, 1): 1}
    with pytest.raises(NotCofree):
        cofree_structure(up_module(P, (1, 0)))
    two = direct_sum(down_module(P, (1, 1)), down_module(P, (2, 0))).module
    assert cofree_structure(two)[0] == {(1, 1): 1, (2, 0): 1}


def test_middle_exact_split_examples():
    P = FinitePoset.grid([4, 4])
    death = interval_module(P, [(a, b) for a in range(2) for b in range(3)])
    birth = interval_module(P, [(a, b) for a in (2, 3) for b in (1, 2, 3)])
    F = random_basis_change(direct_sum(death, birth).module, np.random.default_rng(5))
    T, K, rep = middle_exact_split(F)
    assert np.array_equal(K.dims, death.dims) and np.array_equal(T.dims, birth.dims)
    assert rep.verified
    T, K, rep = middle_exact_split(ex1())
    assert np.array_equal(T.dims, degree_approx(ex1(), 1).approx.dims)
    assert np.array_equal(T.dims + K.dims, ex1().dims)
    with pytest.raises(PreconditionFailed):
        middle_exact_split(hook())


def test_bkc_literal_example():
    """F_{(1,0) up} has join-dimension 1, so it is bidegree 1 and lands in B, not C."""
    P = G33
    F = direct_sum(up_module(P, (1, 0)), down_module(P, (1, 1)), interval_module(P, VERTICAL)).module
    rep = bkc_decompose(F)
    B, K, C = rep.summands
    assert C.module.is_zero()
    assert rep.summands[1].description["cogenerators"] == [[(1, 1), 1]]
    assert B.module.total_dim() == 6 + 6


def test_bkc_with_a_genuine_generator():
    P = G33
    F = direct_sum(up_module(P, (1, 1)), down_module(P, (1, 1)), interval_module(P, VERTICAL)).module
    F = random_basis_change(F, np.random.default_rng(11))
    rep = bkc_decompose(F)
    B, K, C = rep.summands
    assert C.description["generators"] == [[(1, 1), 1]]
    assert K.description["cogenerators"] == [[(1, 1), 1]]
    assert np.array_equal(B.module.dims, interval_module(P, VERTICAL).dims)
    assert rep.verified


def test_bkc_errors_and_trivial_cases():
    rep = bkc_decompose(zero_module(G33))
    assert all(s.module.is_zero() for s in rep.summands)
    with pytest.raises(PosetUnsupported):
        bkc_decompose(ex4())


def test_bidegree1_intervals():
    F = direct_sum(interval_module(G33, VERTICAL), interval_module(G33, HORIZONTAL)).module
    rep = bidegree1_interval_decompose(random_basis_change(F, np.random.default_rng(2)))
    got = sorted(sorted(d["elements"]) for d in rep.descriptions())
    assert got == sorted([sorted(VERTICAL), sorted(HORIZONTAL)])
    rep = bidegree1_interval_decompose(constant_module(G33, 1))
    assert [sorted(d["elements"]) for d in rep.descriptions()] == [sorted(G33.elements)]
    with pytest.raises(PosetUnsupported):
        bidegree1_interval_decompose(ex3())


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_block_roundtrip(seed, p):
    rng = np.random.default_rng(seed)
    F, blocks = random_block_sum(rng, (4, 4), p)
    assert block_multiset(middle_exact_blocks(F)) == blocks


@given(st.integers(0, 10**6), st.sampled_from([2, 5]))
def test_summands_have_their_degrees(seed, p):
    rng = np.random.default_rng(seed)
    F, _ = random_block_sum(rng, (3, 4), p)
    T, K, rep = middle_exact_split(F)
    assert is_degree(T, 1) and is_codegree(K, 1)
    assert verify_natural_iso(rep.iso)
