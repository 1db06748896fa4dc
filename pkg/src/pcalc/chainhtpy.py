"""Chain-level homotopy colimits on 2-factor grids.

Homotopy pushouts are mapping cones.  The lift of a module ``F`` is the
complex-valued module

    F^(x) = cone(F(0,0) -> F(x1,0) (+) F(0,x2))

placed in degrees 1 and 0.  The span ``F(x1,0) <- F(0,0) -> F(0,x2)`` is
homotopy final in the axes below ``x``: every object of the comma category
has a maximum in the span, so the homotopy colimit over the stratum is the
homotopy pushout of the span.  The same formula is used on the axes too,
where one leg is an identity and the cone is quasi-isomorphic to ``F(x)``;
this keeps the lift strictly functorial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exactla as la
from .calculus import codegree_approx
from .decompose import _require_grid, middle_exact_split
from .errors import InternalCheckFailed
from .exactness import ChainComplex, is_2_middle_exact
from .lattice import enumerate_cubes
from .persmod import NaturalTransformation, PersistenceModule, direct_sum, verify_natural_iso


@dataclass
class ChainMap:
    source: ChainComplex
    target: ChainComplex
    comps: dict  # degree -> target.dim(i) x source.dim(i)

    def __post_init__(self):
        p = self.source.p
        degs = set(self.source.degrees) | set(self.target.degrees)
        for i in degs:
            c = self.comp(i)
            if c.shape != (self.target.dim(i), self.source.dim(i)):
                raise InternalCheckFailed(f"chain map component {i} has shape {c.shape}", witness=i)
        for i in degs:
            lhs = la.mul(self.target.d(i), self.comp(i), p)
            rhs = la.mul(self.comp(i - 1), self.source.d(i), p)
            if not np.array_equal(lhs, rhs):
                raise InternalCheckFailed("chain map does not commute with the differential", witness=i)

    def comp(self, i: int) -> np.ndarray:
        c = self.comps.get(i)
        return np.asarray(c, dtype=np.int64) if c is not None else la.zeros(self.target.dim(i), self.source.dim(i))

    def then(self, other: "ChainMap") -> "ChainMap":
        p = self.source.p
        degs = set(self.source.degrees) | set(other.target.degrees)
        return ChainMap(self.source, other.target, {i: la.mul(other.comp(i), self.comp(i), p) for i in degs})


def homology(C: ChainComplex, i: int) -> int:
    return C.homology(i)


def _degrees(*cs: ChainComplex) -> list[int]:
    out = set()
    for c in cs:
        out.update(c.degrees)
    return sorted(out)


def cone(f: ChainMap) -> ChainComplex:
    """Mapping cone: degree ``i`` is ``target(i) (+) source(i-1)`` with ``[[d, f], [0, -d]]``."""
    S, T, p = f.source, f.target, f.source.p
    degs = _degrees(T) + [i + 1 for i in _degrees(S)]
    if not degs:
        return ChainComplex({}, {}, p)
    lo, hi = min(degs), max(degs)
    dims = {i: T.dim(i) + S.dim(i - 1) for i in range(lo, hi + 1)}
    diffs = {}
    for i in range(lo + 1, hi + 1):
        top = np.hstack([T.d(i), f.comp(i - 1)])
        bottom = np.hstack([la.zeros(S.dim(i - 2), T.dim(i)), (-S.d(i - 1)) % p])
        diffs[i] = np.vstack([top, bottom])
    return ChainComplex(dims, diffs, p)


def degree0(dim: int, p: int = 2) -> ChainComplex:
    return ChainComplex({0: dim}, {}, p)


def homotopy_pushout(f: ChainMap, g: ChainMap) -> tuple[ChainComplex, ChainMap, ChainMap]:
    """Cone of ``(f, -g) : A -> B (+) C`` for the span ``B <-f- A -g-> C``, with the legs."""
    A, B, C, p = f.source, f.target, g.target, f.source.p
    degs = _degrees(A, B, C)
    BC = ChainComplex(
        {i: B.dim(i) + C.dim(i) for i in degs},
        {i: la.block_diag([B.d(i), C.d(i)]) for i in degs if i - 1 in degs},
        p,
    )
    h = ChainMap(A, BC, {i: np.vstack([f.comp(i), (-g.comp(i)) % p]) for i in degs})
    H = cone(h)
    legs = []
    for k, X in enumerate((B, C)):
        comps = {}
        for i in X.degrees:
            m = la.zeros(H.dim(i), X.dim(i))
            start = 0 if k == 0 else B.dim(i)
            m[start:start + X.dim(i)] = la.eye(X.dim(i))
            comps[i] = m
        legs.append(ChainMap(X, H, comps))
    return H, legs[0], legs[1]


def is_homotopy_cocartesian(f: ChainMap, g: ChainMap, beta: ChainMap, gamma: ChainMap) -> bool:
    """Square ``A -f-> B -beta-> D``, ``A -g-> C -gamma-> D``: is the comparison a quasi-isomorphism?

    The comparison sends ``(b, c, a)`` to ``beta(b) + gamma(c)``; it is a chain
    map because the square commutes strictly.
    """
    p = f.source.p
    H, _, _ = homotopy_pushout(f, g)
    A, B, C, D = f.source, f.target, g.target, beta.target
    comps = {}
    for i in H.degrees:
        m = la.zeros(D.dim(i), H.dim(i))
        m[:, :B.dim(i)] = beta.comp(i)
        m[:, B.dim(i):B.dim(i) + C.dim(i)] = gamma.comp(i)
        comps[i] = m
    for i in set(H.degrees) | set(D.degrees):
        if not np.array_equal(la.mul(beta.comp(i), f.comp(i), p), la.mul(gamma.comp(i), g.comp(i), p)):
            raise InternalCheckFailed("square of complexes does not commute", witness=i)
    phi = ChainMap(H, D, comps)
    return cone(phi).is_acyclic()


# ---------------------------------------------------------------------------
# complex-valued modules


class ComplexValuedModule:
    """A functor from a finite poset to chain complexes, stored on covers."""

    def __init__(self, poset, objects: list[ChainComplex], cover_maps: dict, p: int = 2):
        self.poset, self.objects, self.cover_maps, self.p = poset, objects, cover_maps, p
        degs = sorted({i for c in objects for i in c.degrees})
        self.degrees = degs
        # degreewise functoriality is the persistence-module commutativity check
        self.levels = {
            i: PersistenceModule(poset, [c.dim(i) for c in objects], {cv: m.comp(i) for cv, m in cover_maps.items()}, p)
            for i in degs
        }

    def object(self, x) -> ChainComplex:
        return self.objects[self.poset.index(x)]

    def smap(self, i: int, j: int) -> ChainMap:
        comps = {k: self.levels[k].smap(i, j) for k in self.degrees}
        return ChainMap(self.objects[i], self.objects[j], comps)


def homology_module(M: ComplexValuedModule, degree: int) -> tuple[PersistenceModule, list[np.ndarray], list[np.ndarray]]:
    """``H_degree`` as a module, with per-element cycle bases ``Z_x`` and quotient maps.

    Returns ``(H, cycles, quots)``: ``cycles[x]`` spans the cycles and
    ``quots[x]`` maps cycle coordinates onto homology.
    """
    P, p = M.poset, M.p
    cycles, quots, secs = [], [], []
    for c in M.objects:
        Z = la.kernel_basis(c.d(degree), p)
        Bd = la.solve(Z, c.d(degree + 1), p) if Z.shape[1] or c.d(degree + 1).size else la.zeros(0, c.dim(degree + 1))
        Q, _ = la.cokernel(Bd, p)
        cycles.append(Z)
        quots.append(Q)
        secs.append(la.right_inverse(Q, p))
    maps = {}
    for cv, m in M.cover_maps.items():
        a, b = cv
        image = la.mul(m.comp(degree), cycles[a], p)
        coords = la.solve(cycles[b], image, p)
        maps[cv] = la.mul(quots[b], la.mul(coords, secs[a], p), p)
    H = PersistenceModule(P, [q.shape[0] for q in quots], maps, p)
    return H, cycles, quots


def homotopy_lift_T1(F: PersistenceModule) -> ComplexValuedModule:
    """``x -> cone(F(0,0) -> F(x1,0) (+) F(0,x2))`` on a 2-factor grid."""
    P, p = F.poset, F.p
    _require_grid(P, 2)
    o = P.index((0, 0))
    objects, legs = [], []
    for x in P.elements:
        a, b = P.index((x[0], 0)), P.index((0, x[1]))
        d1 = np.vstack([F.smap(o, a), (-F.smap(o, b)) % p])
        objects.append(ChainComplex({0: int(F.dims[a] + F.dims[b]), 1: int(F.dims[o])}, {1: d1}, p))
        legs.append((a, b))
    maps = {}
    for i, j in P.covers:
        (a, b), (c, d) = legs[i], legs[j]
        maps[(i, j)] = ChainMap(objects[i], objects[j], {0: la.block_diag([F.smap(a, c), F.smap(b, d)]), 1: la.eye(int(F.dims[o]))})
    return ComplexValuedModule(P, objects, maps, p)


def homotopy_colift_T1(F: PersistenceModule) -> ComplexValuedModule:
    """Dual lift: ``x -> fib(F(x1,top) (+) F(top,x2) -> F(top,top))`` in degrees 0 and -1."""
    P, p = F.poset, F.p
    _require_grid(P, 2)
    m1, m2 = (m - 1 for m in P.shape)
    t = P.index((m1, m2))
    objects, legs = [], []
    for x in P.elements:
        a, b = P.index((x[0], m2)), P.index((m1, x[1]))
        d0 = np.hstack([F.smap(a, t), (-F.smap(b, t)) % p])
        objects.append(ChainComplex({-1: int(F.dims[t]), 0: int(F.dims[a] + F.dims[b])}, {0: d0}, p))
        legs.append((a, b))
    maps = {}
    for i, j in P.covers:
        (a, b), (c, d) = legs[i], legs[j]
        maps[(i, j)] = ChainMap(objects[i], objects[j], {0: la.block_diag([F.smap(a, c), F.smap(b, d)]), -1: la.eye(int(F.dims[t]))})
    return ComplexValuedModule(P, objects, maps, p)


def lift_squares_cocartesian(M: ComplexValuedModule):
    """First strongly bicartesian square whose image is not homotopy cocartesian, or None."""
    P = M.poset
    for cube in enumerate_cubes(P, 2):
        lo, x, y, hi = (P.index(cube.assignment[s]) for s in range(4))
        if not is_homotopy_cocartesian(M.smap(lo, x), M.smap(lo, y), M.smap(x, hi), M.smap(y, hi)):
            return cube.to_json()
    return None


def _lift_to_T1(F: PersistenceModule, lift: ComplexValuedModule):
    """Comparison ``H_0(lift) -> T_1 F`` and the composite ``H_0(lift) -> F``."""
    P, p = F.poset, F.p
    H, cycles, quots = homology_module(lift, 0)
    T1 = codegree_approx(F, 1)
    fr = T1.frame
    comps, to_F = [], []
    for x, el in enumerate(P.elements):
        nodes = [int(v) for v in fr.nodes[x]]
        off = np.concatenate([[0], np.cumsum(F.dims[fr.nodes[x]])]).astype(int)
        a, b = P.index((el[0], 0)), P.index((0, el[1]))
        blocks = []
        for v in (a, b):
            k = nodes.index(v)
            blocks.append(fr.proj[x][:, off[k]:off[k + 1]])
        cocone = np.hstack(blocks)  # degree-0 chains into T_1 F(x)
        m = la.mul(cocone, la.mul(cycles[x], la.right_inverse(quots[x], p), p), p)
        comps.append(m)
        direct = np.hstack([F.smap(a, x), F.smap(b, x)])
        to_F.append(la.mul(direct, la.mul(cycles[x], la.right_inverse(quots[x], p), p), p))
    return H, NaturalTransformation(H, T1.approx, comps), NaturalTransformation(H, F, to_F)


@dataclass
class RoundtripReport:
    t1_iso: bool  # H_0 of the lift is isomorphic to T_1 F
    lift_matches_input: bool  # H_0 of the lift maps isomorphically onto F
    middle_exact: bool
    main_lift_iso: bool | None  # H_0 of lift(K) (+) colift(T^1 F) is isomorphic to F
    h0_dims: dict
    h1_dims: dict

    def __bool__(self) -> bool:
        return self.t1_iso and (self.main_lift_iso is not False)

    def to_json(self) -> dict:
        return {
            "h0_iso_T1": self.t1_iso,
            "h0_iso_input": self.lift_matches_input,
            "middle_exact": self.middle_exact,
            "main_lift_iso": self.main_lift_iso,
        }


def main_theorem_lift(F: PersistenceModule):
    """``lift(K) (+) colift(T^1 F)`` for a 2-middle-exact ``F`` with its map ``H_0 -> F``."""
    p = F.p
    T, K, rep = middle_exact_split(F)
    s_T, iota_K = rep.summands[0].nt, rep.summands[1].nt
    LK = homotopy_lift_T1(K)
    HK, _, toK = _lift_to_T1(K, LK)
    CT = homotopy_colift_T1(T)
    HT, cyc, quots = homology_module(CT, 0)
    P = F.poset
    m1, m2 = (m - 1 for m in P.shape)
    comps = []
    for x, el in enumerate(P.elements):
        a, b = P.index((el[0], m2)), P.index((m1, el[1]))
        stacked = np.vstack([T.smap(x, a), T.smap(x, b)])
        into = la.mul(quots[x], la.solve(cyc[x], stacked, p), p)  # T(x) -> H_0
        if not la.is_invertible(into, p):
            return None
        back = la.mul(s_T.comps[x], la.inverse(into, p), p)
        comps.append(np.hstack([la.mul(iota_K.comps[x], toK.comps[x], p), back]))
    H = direct_sum(HK, HT).module
    return NaturalTransformation(H, F, comps)


def verify_h0_roundtrip(F: PersistenceModule) -> RoundtripReport:
    lift = homotopy_lift_T1(F)
    H, to_T1, to_F = _lift_to_T1(F, lift)
    t1 = verify_natural_iso(to_T1)
    matches = verify_natural_iso(to_F)
    me = bool(is_2_middle_exact(F))
    main = None
    if me:
        nt = main_theorem_lift(F)
        main = nt is not None and verify_natural_iso(nt)
    P = F.poset
    h1 = {x: lift.objects[i].homology(1) for i, x in enumerate(P.elements)}
    return RoundtripReport(t1, matches, me, main, H.dim_map(), h1)
