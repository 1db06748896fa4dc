"""Codegree-n and degree-n approximations, layers, latching/matching data.

``T_n F(x)`` is the colimit of ``F`` over the join-dimension stratum below
``x``; ``T^n F(x)`` is the limit over the meet-dimension stratum above ``x``.
Each approximation keeps, per element, the node list of its diagram together
with the quotient (resp. inclusion) matrix and a one-sided inverse, so the
construction is functorial in natural transformations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import exactla as la
from .errors import InternalCheckFailed, PosetUnsupported
from .lattice import DEFAULT_MAX_COVERS, CubeDiagram, FinitePoset, enumerate_cubes, stratum_indices
from .persmod import (
    NaturalTransformation,
    PersistenceModule,
    VecDiagram,
    check_equal,
    cokernel_nt,
    diagram_colimit,
    diagram_limit,
    kernel_nt,
    restricted_diagram,
)
from .verdict import Verdict


@dataclass
class _Frame:
    """Per-element colimit (or limit) data of an approximation."""

    nodes: list[np.ndarray]  # element indices of each diagram, sorted
    proj: list[np.ndarray]  # Q_x (colimit) or K_x (limit)
    inv: list[np.ndarray]  # right inverse of Q_x or left inverse of K_x
    path: str


@dataclass
class ApproximationResult:
    approx: PersistenceModule
    nt: NaturalTransformation  # counit T_n F -> F, or unit F -> T^n F
    n: int
    side: str  # "co" or "contra"
    frame: _Frame = field(repr=False, default=None)

    @property
    def counit_or_unit(self) -> NaturalTransformation:
        return self.nt


def _require_lattice(P: FinitePoset, needs: str):
    prof = P.profile
    if not prof.is_distributive:
        raise PosetUnsupported("index poset is not a finite distributive lattice", witness=prof.witness)
    return prof


def _resolve_path(P: FinitePoset, path: str) -> str:
    if path == "auto":
        return "fast" if P.kind == "grid" else "generic"
    if path == "fast" and P.kind != "grid":
        raise PosetUnsupported("the coordinate fast path needs a grid poset")
    if path not in ("fast", "generic"):
        raise ValueError(f"unknown path {path!r}")
    return path


def _grid_nodes(P: FinitePoset, x: int, n: int, side: str) -> np.ndarray:
    coords = P.elements[x]
    N = len(coords)
    out = set()
    for r in range(min(n, N) + 1):
        for S in itertools.combinations(range(N), r):
            if side == "join":
                pt = tuple(c if i in S else 0 for i, c in enumerate(coords))
            else:
                pt = tuple(c if i in S else P.shape[i] - 1 for i, c in enumerate(coords))
            out.add(P.index(pt))
    return np.array(sorted(out), dtype=np.int64)


def _stratum_nodes(P: FinitePoset, n: int, side: str, path: str) -> list[np.ndarray]:
    key = ("nodes", n, side, path)
    if key not in P._cache:
        if path == "fast":
            nodes = [_grid_nodes(P, x, n, side) for x in range(P.n)]
        else:
            strat = stratum_indices(P, n, side)
            rel = P.leq_matrix[strat] if side == "join" else P.leq_matrix[:, strat].T
            nodes = [strat[rel[:, x]] for x in range(P.n)]
        P._cache[key] = nodes
    return P._cache[key]


def _blocks(F: PersistenceModule, nodes: np.ndarray) -> np.ndarray:
    off = np.concatenate([[0], np.cumsum(F.dims[nodes])]).astype(np.int64)
    return off


def codegree_approx(F: PersistenceModule, n: int, path: str = "auto") -> ApproximationResult:
    """``T_n F`` with its counit ``T_n F -> F``."""
    P, p = F.poset, F.p
    _require_lattice(P, "bottom")
    path = _resolve_path(P, path)
    nodes = _stratum_nodes(P, n, "join", path)
    quots, secs, dims = [], [], []
    for x in range(P.n):
        d, cocone = diagram_colimit(restricted_diagram(F, nodes[x]))
        q = np.hstack(cocone) if cocone else la.zeros(0, 0)
        q = q.reshape(d, int(F.dims[nodes[x]].sum()))
        quots.append(q)
        secs.append(la.right_inverse(q, p))
        dims.append(d)
    maps = {}
    for a, b in P.covers:
        maps[(a, b)] = _induced_colim_map(F, nodes, quots, secs, a, b)
    T = PersistenceModule(P, dims, maps, p, validate=False)
    comps = []
    for x in range(P.n):
        tot = _cocone_to(F, nodes[x], x)
        eps = la.mul(tot, secs[x], p)
        check_equal(la.mul(eps, quots[x], p), tot, "counit does not factor through the colimit", P.elements[x])
        comps.append(eps)
    T.validate()
    return ApproximationResult(T, NaturalTransformation(T, F, comps), n, "co", _Frame(nodes, quots, secs, path))


def _cocone_to(F: PersistenceModule, nodes: np.ndarray, x: int) -> np.ndarray:
    """``[F(v <= x)]_{v in nodes}`` as one row block."""
    blocks = [F.smap(int(v), x) for v in nodes]
    return np.hstack(blocks) if blocks else la.zeros(int(F.dims[x]), 0)


def _induced_colim_map(F, nodes, quots, secs, a: int, b: int) -> np.ndarray:
    p = F.p
    leq = F.poset.leq_matrix
    off_b = _blocks(F, nodes[b])
    cols = []
    for v in nodes[a]:
        # any node of the larger diagram above v; the fast path moves nodes
        k = int(np.flatnonzero(leq[v, nodes[b]])[0])
        w = int(nodes[b][k])
        cols.append(la.mul(quots[b][:, off_b[k]:off_b[k + 1]], F.smap(int(v), w), p))
    c = np.hstack(cols) if cols else la.zeros(quots[b].shape[0], 0)
    c = c.reshape(quots[b].shape[0], quots[a].shape[1])
    m = la.mul(c, secs[a], p)
    check_equal(la.mul(m, quots[a], p), c, "colimit map is not well defined", [F.poset.elements[a], F.poset.elements[b]])
    return m


def degree_approx(F: PersistenceModule, n: int, path: str = "auto") -> ApproximationResult:
    """``T^n F`` with its unit ``F -> T^n F``."""
    P, p = F.poset, F.p
    _require_lattice(P, "top")
    path = _resolve_path(P, path)
    nodes = _stratum_nodes(P, n, "meet", path)
    incs, rets, dims = [], [], []
    for x in range(P.n):
        d, cone = diagram_limit(restricted_diagram(F, nodes[x]))
        k = np.vstack(cone) if cone else la.zeros(0, 0)
        k = k.reshape(int(F.dims[nodes[x]].sum()), d)
        incs.append(k)
        rets.append(la.left_inverse(k, p))
        dims.append(d)
    maps = {}
    for a, b in P.covers:
        maps[(a, b)] = _induced_lim_map(F, nodes, incs, rets, a, b)
    T = PersistenceModule(P, dims, maps, p, validate=False)
    comps = []
    for x in range(P.n):
        tot = _cone_from(F, nodes[x], x)
        eta = la.mul(rets[x], tot, p)
        check_equal(la.mul(incs[x], eta, p), tot, "unit does not factor through the limit", P.elements[x])
        comps.append(eta)
    T.validate()
    return ApproximationResult(T, NaturalTransformation(F, T, comps), n, "contra", _Frame(nodes, incs, rets, path))


def _cone_from(F: PersistenceModule, nodes: np.ndarray, x: int) -> np.ndarray:
    blocks = [F.smap(x, int(v)) for v in nodes]
    return np.vstack(blocks) if blocks else la.zeros(0, int(F.dims[x]))


def _induced_lim_map(F, nodes, incs, rets, a: int, b: int) -> np.ndarray:
    p = F.p
    leq = F.poset.leq_matrix
    off_a = _blocks(F, nodes[a])
    rows = []
    for v in nodes[b]:
        k = int(np.flatnonzero(leq[nodes[a], v])[0])
        w = int(nodes[a][k])
        rows.append(la.mul(F.smap(w, int(v)), incs[a][off_a[k]:off_a[k + 1]], p))
    r = np.vstack(rows) if rows else la.zeros(0, incs[a].shape[1])
    r = r.reshape(incs[b].shape[0], incs[a].shape[1])
    m = la.mul(rets[b], r, p)
    check_equal(la.mul(incs[b], m, p), r, "limit map is not well defined", [F.poset.elements[a], F.poset.elements[b]])
    return m


def approx_of_nt(eta: NaturalTransformation, src: ApproximationResult, tgt: ApproximationResult) -> NaturalTransformation:
    """Apply ``T_n`` (or ``T^n``) to ``eta : F -> G`` given both approximations.

    Both results must come from the same ``n``, side and path.
    """
    p = eta.p
    fs, ft = src.frame, tgt.frame
    if src.side != tgt.side or src.n != tgt.n or fs.path != ft.path:
        raise ValueError("approximations are not comparable")
    comps = []
    for x in range(eta.source.poset.n):
        diag = la.block_diag([eta.comps[int(v)] for v in fs.nodes[x]])
        if src.side == "co":
            comps.append(la.mul(ft.proj[x], la.mul(diag, fs.inv[x], p), p))
        else:
            comps.append(la.mul(ft.inv[x], la.mul(diag, fs.proj[x], p), p))
    return NaturalTransformation(src.approx, tgt.approx, comps)


def comparison_nt(lower: ApproximationResult, upper: ApproximationResult) -> NaturalTransformation:
    """``T_{n-1} F -> T_n F`` (co side) or ``T^n F -> T^{n-1} F`` (contra side).

    ``lower`` is the approximation of smaller ``n``.  The smaller diagram is a
    subdiagram of the larger one, so the map restricts the larger cocone (or
    cone) and factors it through the smaller (co)limit.
    """
    F = lower.nt.target if lower.side == "co" else lower.nt.source
    p = F.p
    fl, fu = lower.frame, upper.frame
    comps = []
    for x in range(F.poset.n):
        pos = {int(v): k for k, v in enumerate(fu.nodes[x])}
        off = _blocks(F, fu.nodes[x])
        if lower.side == "co":
            parts = [fu.proj[x][:, off[pos[int(v)]]:off[pos[int(v)] + 1]] for v in fl.nodes[x]]
            c = np.hstack(parts).reshape(fu.proj[x].shape[0], fl.proj[x].shape[1]) if parts else la.zeros(fu.proj[x].shape[0], 0)
            m = la.mul(c, fl.inv[x], p)
            check_equal(la.mul(m, fl.proj[x], p), c, "comparison map is not well defined", F.poset.elements[x])
        else:
            parts = [fu.proj[x][off[pos[int(v)]]:off[pos[int(v)] + 1]] for v in fl.nodes[x]]
            r = np.vstack(parts).reshape(fl.proj[x].shape[0], fu.proj[x].shape[1]) if parts else la.zeros(0, fu.proj[x].shape[1])
            m = la.mul(fl.inv[x], r, p)
            check_equal(la.mul(fl.proj[x], m, p), r, "comparison map is not well defined", F.poset.elements[x])
        comps.append(m)
    if lower.side == "co":
        return NaturalTransformation(lower.approx, upper.approx, comps)
    return NaturalTransformation(upper.approx, lower.approx, comps)


def cross_check_paths(F: PersistenceModule, n: int, side: str = "co") -> None:
    """Compare the grid fast path with the generic stratum (co)limit.

    The generic cocone restricted to the fast nodes must factor through the
    fast colimit by an invertible map (dually for limits).
    """
    P, p = F.poset, F.p
    if P.kind != "grid":
        return
    approx = codegree_approx if side == "co" else degree_approx
    fast, gen = approx(F, n, "fast"), approx(F, n, "generic")
    for x in range(P.n):
        nf, ng = fast.frame.nodes[x], gen.frame.nodes[x]
        pos = {int(v): k for k, v in enumerate(ng)}
        off = _blocks(F, ng)
        if side == "co":
            parts = [gen.frame.proj[x][:, off[pos[int(v)]]:off[pos[int(v)] + 1]] for v in nf]
            c = np.hstack(parts).reshape(gen.frame.proj[x].shape[0], fast.frame.proj[x].shape[1])
            m = la.mul(c, fast.frame.inv[x], p)
            ok = np.array_equal(la.mul(m, fast.frame.proj[x], p), c)
        else:
            parts = [gen.frame.proj[x][off[pos[int(v)]]:off[pos[int(v)] + 1]] for v in nf]
            r = np.vstack(parts).reshape(fast.frame.proj[x].shape[0], gen.frame.proj[x].shape[1])
            m = la.mul(fast.frame.inv[x], r, p)
            ok = np.array_equal(la.mul(fast.frame.proj[x], m, p), r)
        if not ok or not la.is_invertible(m, p):
            raise InternalCheckFailed("fast and generic approximations disagree", witness=P.elements[x])


# ---------------------------------------------------------------------------
# degree tests


def _subset_elements(P: FinitePoset, cube: CubeDiagram) -> list[int]:
    return [P.index(cube.assignment[s]) for s in range(cube.full + 1)]


def punctured_diagram(F: PersistenceModule, cube: CubeDiagram, drop: str = "top") -> tuple[VecDiagram, list[int]]:
    """The cube diagram without its top (``drop="top"``) or bottom vertex.

    Nodes are subsets in increasing bitmask order; arrows add one element.
    """
    P = F.poset
    el = _subset_elements(P, cube)
    skip = cube.full if drop == "top" else 0
    subsets = [s for s in range(cube.full + 1) if s != skip]
    pos = {s: k for k, s in enumerate(subsets)}
    arrows = []
    for s in subsets:
        for i in range(cube.k):
            t = s | (1 << i)
            if t != s and t in pos:
                arrows.append((pos[s], pos[t], F.smap(el[s], el[t])))
    return VecDiagram([int(F.dims[el[s]]) for s in subsets], arrows, F.p), [el[s] for s in subsets]


def is_cocartesian_cube(F: PersistenceModule, cube: CubeDiagram) -> bool:
    """Colimit of the punctured cube maps isomorphically onto the top."""
    P, p = F.poset, F.p
    diag, els = punctured_diagram(F, cube, "top")
    top = P.index(cube.top)
    d, _ = diagram_colimit(diag)
    dv = int(F.dims[top])
    if d != dv:
        return False
    total = np.hstack([F.smap(e, top) for e in els])
    return la.rank(total, p) == dv


def is_cartesian_cube(F: PersistenceModule, cube: CubeDiagram) -> bool:
    P, p = F.poset, F.p
    diag, els = punctured_diagram(F, cube, "bottom")
    bot = P.index(cube.assignment[0])
    d, _ = diagram_limit(diag)
    db = int(F.dims[bot])
    if d != db:
        return False
    total = np.vstack([F.smap(bot, e) for e in els])
    return la.rank(total, p) == db


def _cube_check(F, n, test, mode, max_covers, what) -> Verdict:
    _require_lattice(F.poset, "")
    for cube in enumerate_cubes(F.poset, n + 1, mode=mode, max_covers=max_covers):
        if not test(F, cube):
            return Verdict(False, cube.to_json(), f"{n + 1}-cube is not {what}")
    return Verdict(True)


def is_codegree(F: PersistenceModule, n: int, mode: str = "full", max_covers: int = DEFAULT_MAX_COVERS) -> Verdict:
    """Every strongly bicartesian ``(n+1)``-cube goes to a cocartesian cube.

    ``mode="parents_only"`` only tests the cubes on parent sets, a cheaper
    necessary condition.
    """
    return _cube_check(F, n, is_cocartesian_cube, mode, max_covers, "cocartesian")


def is_degree(F: PersistenceModule, n: int, mode: str = "full", max_covers: int = DEFAULT_MAX_COVERS) -> Verdict:
    return _cube_check(F, n, is_cartesian_cube, mode, max_covers, "cartesian")


def is_bidegree(F: PersistenceModule, n: int, mode: str = "full", max_covers: int = DEFAULT_MAX_COVERS) -> Verdict:
    v = is_codegree(F, n, mode, max_covers)
    if not v:
        return v
    return is_degree(F, n, mode, max_covers)


# ---------------------------------------------------------------------------
# layers


def colayer(F: PersistenceModule, n: int, path: str = "auto") -> PersistenceModule:
    """Cokernel of ``T_{n-1} F -> T_n F``."""
    if n < 1:
        raise ValueError("layers are defined for n >= 1")
    lo, hi = codegree_approx(F, n - 1, path), codegree_approx(F, n, path)
    return cokernel_nt(comparison_nt(lo, hi))[0]


def layer(F: PersistenceModule, n: int, path: str = "auto") -> PersistenceModule:
    """Kernel of ``T^n F -> T^{n-1} F``."""
    if n < 1:
        raise ValueError("layers are defined for n >= 1")
    lo, hi = degree_approx(F, n - 1, path), degree_approx(F, n, path)
    return kernel_nt(comparison_nt(lo, hi))[0]


# ---------------------------------------------------------------------------
# latching and matching


@dataclass(frozen=True)
class LatchingData:
    element: object
    object_dim: int
    map_to_Fx: np.ndarray  # F(x) x L (latching) or M x F(x) (matching)


def _strict_nodes(P: FinitePoset, x: int, below: bool) -> np.ndarray:
    rel = P.leq_matrix[:, x] if below else P.leq_matrix[x]
    idx = np.flatnonzero(rel)
    return idx[idx != x]


def latching(F: PersistenceModule, x, check: bool = True) -> LatchingData:
    """``L_x F = colim_{y < x} F(y)`` and its map to ``F(x)``.

    With ``check`` the result is compared against the parent (one parent) or
    punctured parent-cube colimit (several parents).
    """
    P, p = F.poset, F.p
    xi = P.index(x)
    nodes = _strict_nodes(P, xi, True)
    d, cocone = diagram_colimit(restricted_diagram(F, nodes))
    q = np.hstack(cocone) if len(nodes) else la.zeros(0, 0)
    tot = _cocone_to(F, nodes, xi)
    m = la.mul(tot, la.right_inverse(q, p), p) if len(nodes) else la.zeros(int(F.dims[xi]), 0)
    if check and P.profile.is_distributive:
        _check_latching_route(F, xi, d, la.rank(m, p), below=True)
    return LatchingData(P.elements[xi], d, m)


def matching(F: PersistenceModule, x, check: bool = True) -> LatchingData:
    P, p = F.poset, F.p
    xi = P.index(x)
    nodes = _strict_nodes(P, xi, False)
    d, cone = diagram_limit(restricted_diagram(F, nodes))
    k = np.vstack(cone) if len(nodes) else la.zeros(0, 0)
    tot = _cone_from(F, nodes, xi)
    m = la.mul(la.left_inverse(k, p), tot, p) if len(nodes) else la.zeros(0, int(F.dims[xi]))
    if check and P.profile.is_distributive:
        _check_latching_route(F, xi, d, la.rank(m, p), below=False)
    return LatchingData(P.elements[xi], d, m)


def _check_latching_route(F: PersistenceModule, x: int, dim: int, rk: int, below: bool) -> None:
    P, p = F.poset, F.p
    near = P.parents[x] if below else P.children[x]
    if not near:
        d2, r2 = 0, 0
    elif len(near) == 1:
        y = near[0]
        d2 = int(F.dims[y])
        r2 = la.rank(F.smap(y, x) if below else F.smap(x, y), p)
    else:
        xs = sorted(near)
        k = len(xs)
        full = (1 << k) - 1
        assign = {}
        if below:
            # parent cube: meets of the parents outside S, x itself at the top
            for s in range(full):
                assign[s] = P.elements[_fold(P.meet_table, [xs[i] for i in range(k) if not s >> i & 1])]
            assign[full] = P.elements[x]
            cube = CubeDiagram(k, P.elements[x], tuple(P.elements[i] for i in xs), assign)
            diag, els = punctured_diagram(F, cube, "top")
            d2, _ = diagram_colimit(diag)
            tot = np.hstack([F.smap(e, x) for e in els])
        else:
            # child cube: joins of the children in S, x itself at the bottom
            for s in range(1, full + 1):
                assign[s] = P.elements[_fold(P.join_table, [xs[i] for i in range(k) if s >> i & 1])]
            assign[0] = P.elements[x]
            cube = CubeDiagram(k, assign[full], tuple(P.elements[i] for i in xs), assign)
            diag, els = punctured_diagram(F, cube, "bottom")
            d2, _ = diagram_limit(diag)
            tot = np.vstack([F.smap(x, e) for e in els])
        r2 = la.rank(tot, p)
    if (d2, r2) != (dim, rk):
        raise InternalCheckFailed(
            "latching data disagrees with the parent-cube computation", witness=P.elements[x]
        )


def _fold(table: np.ndarray, idx: list[int]) -> int:
    out = idx[0]
    for i in idx[1:]:
        out = int(table[out, i])
    return out


def is_projective(F: PersistenceModule) -> Verdict:
    """Every latching map ``L_x F -> F(x)`` is injective."""
    _require_lattice(F.poset, "")
    for x in F.poset.elements:
        L = latching(F, x)
        if la.rank(L.map_to_Fx, F.p) < L.object_dim:
            return Verdict(False, x, "latching map is not injective")
    return Verdict(True)


def is_injective(F: PersistenceModule) -> Verdict:
    """Every matching map ``F(x) -> M_x F`` is surjective."""
    _require_lattice(F.poset, "")
    for x in F.poset.elements:
        M = matching(F, x)
        if la.rank(M.map_to_Fx, F.p) < M.object_dim:
            return Verdict(False, x, "matching map is not surjective")
    return Verdict(True)
