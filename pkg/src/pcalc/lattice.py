"""Finite posets, distributive lattices and strongly bicartesian cubes.

Elements are addressed externally by id (coordinate tuples for grids, strings
for explicit posets) and internally by their index in the canonical order.
For grids the canonical (lexicographic) order is a linear extension; for
explicit posets a separate topological order is kept in ``FinitePoset.topo``.
"""

from __future__ import annotations

import functools
import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CostCapExceeded, InternalCheckFailed, InvalidPoset, NotAPairwiseCover, NotDistributive

DEFAULT_MAX_COVERS = 10**6


def _canonical_key(x):
    return x if isinstance(x, tuple) else (str(x),)


class FinitePoset:
    """A finite poset given by its Hasse diagram.

    Use :meth:`grid` or :meth:`explicit` rather than the constructor.
    """

    def __init__(self, elements, covers, kind="explicit", shape=None):
        self.elements: tuple = tuple(elements)
        self.n = len(self.elements)
        self.kind = kind
        self.shape = tuple(shape) if shape is not None else None
        self._index = {x: i for i, x in enumerate(self.elements)}
        self.covers: tuple[tuple[int, int], ...] = tuple(sorted(covers))
        self.parents: list[list[int]] = [[] for _ in range(self.n)]
        self.children: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.covers:
            self.parents[b].append(a)
            self.children[a].append(b)
        self.topo = self._toposort()
        self.leq_matrix = self._closure()
        self._cache: dict = {}

    # construction ----------------------------------------------------------

    @classmethod
    def grid(cls, shape) -> "FinitePoset":
        """Product of chains ``[0, m_1) x ... x [0, m_N)`` with the product order."""
        return _grid(tuple(int(m) for m in shape))

    @classmethod
    def explicit(cls, elements, hasse) -> "FinitePoset":
        elements = list(elements)
        if len(set(elements)) != len(elements):
            dup = sorted({x for x in elements if elements.count(x) > 1}, key=_canonical_key)
            raise InvalidPoset("duplicate elements", witness=dup)
        if not elements:
            raise InvalidPoset("poset must be nonempty")
        ordered = sorted(elements, key=_canonical_key)
        index = {x: i for i, x in enumerate(ordered)}
        covers = set()
        for pair in hasse:
            a, b = pair
            if a not in index or b not in index:
                raise InvalidPoset("cover refers to an unknown element", witness=[a, b])
            if a == b:
                raise InvalidPoset("cover relation must be irreflexive", witness=[a, b])
            covers.add((index[a], index[b]))
        poset = cls(ordered, covers)
        for a, b in poset.covers:
            between = poset.leq_matrix[a] & poset.leq_matrix[:, b]
            between[a] = between[b] = False
            if between.any():
                z = poset.elements[int(np.flatnonzero(between)[0])]
                raise InvalidPoset(
                    "hasse list is not transitively reduced",
                    witness=[poset.elements[a], z, poset.elements[b]],
                )
        return poset

    def _toposort(self) -> list[int]:
        indeg = [len(ps) for ps in self.parents]
        heap = [i for i in range(self.n) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            i = heapq.heappop(heap)
            order.append(i)
            for j in self.children[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, j)
        if len(order) != self.n:
            raise InvalidPoset("hasse diagram contains a cycle")
        return order

    def _closure(self) -> np.ndarray:
        leq = np.eye(self.n, dtype=bool)
        for j in self.topo:
            for a in self.parents[j]:
                leq[:, j] |= leq[:, a]
        return leq

    # queries ---------------------------------------------------------------

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise KeyError(f"{x!r} is not an element of the poset") from None

    def __contains__(self, x) -> bool:
        return x in self._index

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        if self.kind == "grid":
            return f"FinitePoset.grid({list(self.shape)})"
        return f"FinitePoset(explicit, {self.n} elements)"

    def leq(self, x, y) -> bool:
        return bool(self.leq_matrix[self.index(x), self.index(y)])

    def down(self, i: int) -> np.ndarray:
        """Indices ``j <= i``."""
        return np.flatnonzero(self.leq_matrix[:, i])

    def up(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.leq_matrix[i])

    def is_cover(self, i: int, j: int) -> bool:
        return j in self.children[i]

    @property
    def join_table(self) -> np.ndarray:
        """``join_table[i, j]`` is the index of ``i v j`` or -1."""
        if "join" not in self._cache:
            self._cache["join"] = self._bound_table(self.leq_matrix)
        return self._cache["join"]

    @property
    def meet_table(self) -> np.ndarray:
        if "meet" not in self._cache:
            self._cache["meet"] = self._bound_table(self.leq_matrix.T)
        return self._cache["meet"]

    def _bound_table(self, leq: np.ndarray) -> np.ndarray:
        if self.kind == "grid":
            coords = np.array(self.elements, dtype=np.int64)
            op = np.maximum if leq is self.leq_matrix else np.minimum
            both = op(coords[:, None, :], coords[None, :, :])
            return np.ravel_multi_index(tuple(np.moveaxis(both, -1, 0)), self.shape).astype(np.int64)
        n = self.n
        table = np.full((n, n), -1, dtype=np.int64)
        for i in range(n):
            for j in range(i, n):
                ub = np.flatnonzero(leq[i] & leq[j])
                if ub.size == 0:
                    continue
                sub = leq[np.ix_(ub, ub)]
                least = ub[sub.all(axis=1)]
                if least.size == 1:
                    table[i, j] = table[j, i] = least[0]
        return table

    def join(self, i: int, j: int) -> int:
        return int(self.join_table[i, j])

    def meet(self, i: int, j: int) -> int:
        return int(self.meet_table[i, j])

    def bottom(self) -> int | None:
        mins = [i for i in range(self.n) if not self.parents[i]]
        return mins[0] if len(mins) == 1 else None

    def top(self) -> int | None:
        maxs = [i for i in range(self.n) if not self.children[i]]
        return maxs[0] if len(maxs) == 1 else None

    @property
    def profile(self) -> "LatticeProfile":
        if "profile" not in self._cache:
            self._cache["profile"] = analyze_lattice(self)
        return self._cache["profile"]

    # derived posets --------------------------------------------------------

    def subposet(self, indices) -> "FinitePoset":
        """Induced subposet on ``indices`` (explicit kind, same element ids)."""
        idx = sorted(int(i) for i in indices)
        covers = induced_covers(self, idx)
        ids = [self.elements[i] for i in idx]
        pos = {i: k for k, i in enumerate(idx)}
        return FinitePoset(ids, [(pos[a], pos[b]) for a, b in covers])

    def opposite(self) -> "FinitePoset":
        return FinitePoset(self.elements, [(b, a) for a, b in self.covers])


@functools.lru_cache(maxsize=64)
def _grid(shape: tuple[int, ...]) -> FinitePoset:
    if not shape or any(m < 1 for m in shape):
        raise InvalidPoset("grid shape must be a nonempty list of positive chain lengths", witness=list(shape))
    elements = list(itertools.product(*(range(m) for m in shape)))
    index = {x: i for i, x in enumerate(elements)}
    covers = []
    for x in elements:
        for d in range(len(shape)):
            if x[d] + 1 < shape[d]:
                y = x[:d] + (x[d] + 1,) + x[d + 1:]
                covers.append((index[x], index[y]))
    return FinitePoset(elements, covers, kind="grid", shape=shape)


def induced_covers(poset: FinitePoset, idx) -> list[tuple[int, int]]:
    """Hasse diagram of the subposet on ``idx`` as pairs of original indices."""
    idx = np.asarray(sorted(int(i) for i in idx), dtype=np.int64)
    if idx.size == 0:
        return []
    sub = poset.leq_matrix[np.ix_(idx, idx)].copy()
    np.fill_diagonal(sub, False)
    # a < c is a cover iff there is no b with a < b < c
    through = (sub.astype(np.int64) @ sub.astype(np.int64)) > 0
    cov = sub & ~through
    return [(int(idx[a]), int(idx[b])) for a, b in zip(*np.nonzero(cov))]


# ---------------------------------------------------------------------------
# lattice profile


@dataclass(frozen=True)
class LatticeProfile:
    is_lattice: bool
    is_distributive: bool
    bottom: object = None
    top: object = None
    jdim: dict = field(default_factory=dict)
    mdim: dict = field(default_factory=dict)
    join_irreducibles: frozenset = frozenset()
    meet_irreducibles: frozenset = frozenset()
    witness: object = None

    def require_distributive(self):
        if not self.is_distributive:
            raise NotDistributive("poset is not a distributive lattice", witness=self.witness)


def _irreducibles(leq: np.ndarray, join: np.ndarray, minimal: int) -> list[int]:
    n = leq.shape[0]
    out = []
    for v in range(n):
        if v == minimal:
            continue
        below = np.flatnonzero(leq[:, v])
        below = below[below != v]
        if not (join[np.ix_(below, below)] == v).any():
            out.append(v)
    return out


def _decomposition_dims(leq: np.ndarray, join: np.ndarray, minimal: int, irreducible: list[int]) -> list[int]:
    """Size of the reduced indecomposable join-decomposition of each element."""
    n = leq.shape[0]
    irr = np.zeros(n, dtype=bool)
    irr[irreducible] = True
    dims = []
    for v in range(n):
        if v == minimal:
            dims.append(0)
            continue
        cand = np.flatnonzero(irr & leq[:, v])
        sub = leq[np.ix_(cand, cand)]
        maximal = [int(c) for k, c in enumerate(cand) if not (sub[k].sum() > 1)]
        total = functools.reduce(lambda a, b: int(join[a, b]), maximal)
        if total != v:
            raise InternalCheckFailed("join-irreducibles below an element do not join to it", witness=v)
        for drop in range(len(maximal)):
            rest = maximal[:drop] + maximal[drop + 1:]
            if rest and functools.reduce(lambda a, b: int(join[a, b]), rest) == v:
                raise InternalCheckFailed("join-decomposition is not reduced", witness=v)
        dims.append(len(maximal))
    return dims


def analyze_lattice(poset: FinitePoset) -> LatticeProfile:
    """Lattice and distributivity tests plus join/meet-dimensions.

    Join-dimension is computed twice, by counting parents and from the explicit
    reduced decomposition into join-irreducibles; the two must agree.
    """
    P = poset
    join, meet = P.join_table, P.meet_table
    missing = np.argwhere((join < 0) | (meet < 0))
    if missing.size:
        a, b = (int(t) for t in missing[0])
        return LatticeProfile(False, False, witness=[P.elements[a], P.elements[b]])
    n = P.n
    witness = None
    for x in range(n):
        lhs = meet[x][join]  # x ^ (y v z)
        rhs = join[meet[x][:, None], meet[x][None, :]]  # (x ^ y) v (x ^ z)
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            y, z = (int(t) for t in bad[0])
            witness = [P.elements[x], P.elements[y], P.elements[z]]
            break
    bottom, top = P.bottom(), P.top()
    if witness is not None:
        return LatticeProfile(True, False, P.elements[bottom], P.elements[top], witness=witness)

    leq = P.leq_matrix
    j_irr = _irreducibles(leq, join, bottom)
    m_irr = _irreducibles(leq.T, meet, top)
    jd = _decomposition_dims(leq, join, bottom, j_irr)
    md = _decomposition_dims(leq.T, meet, top, m_irr)
    for v in range(n):
        if jd[v] != len(P.parents[v]) or md[v] != len(P.children[v]):
            raise InternalCheckFailed("join-dimension disagrees with parent count", witness=P.elements[v])
    el = P.elements
    return LatticeProfile(
        is_lattice=True,
        is_distributive=True,
        bottom=el[bottom],
        top=el[top],
        jdim={el[v]: jd[v] for v in range(n)},
        mdim={el[v]: md[v] for v in range(n)},
        join_irreducibles=frozenset(el[v] for v in j_irr),
        meet_irreducibles=frozenset(el[v] for v in m_irr),
    )


def stratum(poset: FinitePoset, n: int, side: str = "join") -> tuple[frozenset, bool]:
    """``P_{<=n}`` (join side) or ``P^{<=n}`` (meet side) and its closure flag.

    The flag reports down-closedness for the join side and up-closedness for
    the meet side.
    """
    prof = poset.profile
    prof.require_distributive()
    dims = prof.jdim if side == "join" else prof.mdim
    members = frozenset(x for x, d in dims.items() if d <= n)
    idx = [poset.index(x) for x in members]
    mask = np.zeros(poset.n, dtype=bool)
    mask[idx] = True
    leq = poset.leq_matrix
    if side == "join":
        closed = all(mask[leq[:, i]].all() for i in idx)
    else:
        closed = all(mask[leq[i]].all() for i in idx)
    return members, bool(closed)


def stratum_indices(poset: FinitePoset, n: int, side: str = "join") -> np.ndarray:
    key = ("stratum", n, side)
    if key not in poset._cache:
        members, _ = stratum(poset, n, side)
        poset._cache[key] = np.array(sorted(poset.index(x) for x in members), dtype=np.int64)
    return poset._cache[key]


# ---------------------------------------------------------------------------
# cubes


@dataclass(frozen=True)
class CubeDiagram:
    """The cube of a pairwise cover ``x^0..x^{k-1}`` of ``top``.

    ``assignment[S]`` is the element at the subset encoded by bitmask ``S``:
    the meet of the ``x^i`` with ``i`` not in ``S``, and ``top`` for the full set.
    """

    k: int
    top: object
    cover_elements: tuple
    assignment: dict

    @property
    def full(self) -> int:
        return (1 << self.k) - 1

    def at(self, subset) -> object:
        if not isinstance(subset, int):
            subset = sum(1 << i for i in subset)
        return self.assignment[subset]

    def rederived_cover(self) -> tuple:
        return tuple(self.assignment[self.full & ~(1 << i)] for i in range(self.k))

    def to_json(self) -> dict:
        return {"k": self.k, "top": self.top, "cover": list(self.cover_elements)}


def _cube(poset: FinitePoset, v: int, xs: tuple[int, ...]) -> CubeDiagram:
    k = len(xs)
    meet = poset.meet_table
    full = (1 << k) - 1
    assign = {}
    for s in range(full + 1):
        if s == full:
            assign[s] = poset.elements[v]
            continue
        m = -1
        for i in range(k):
            if not s >> i & 1:
                m = xs[i] if m < 0 else int(meet[m, xs[i]])
        assign[s] = poset.elements[m]
    return CubeDiagram(k, poset.elements[v], tuple(poset.elements[i] for i in xs), assign)


def cube_from_cover(poset: FinitePoset, v, xs) -> CubeDiagram:
    vi = poset.index(v)
    idx = tuple(poset.index(x) for x in xs)
    for i in idx:
        if not poset.leq_matrix[i, vi]:
            raise NotAPairwiseCover("cover element is not below the top", witness=[poset.elements[i], v])
    for a, b in itertools.combinations(range(len(idx)), 2):
        if poset.join(idx[a], idx[b]) != vi:
            raise NotAPairwiseCover(
                "pair does not join to the top", witness=[poset.elements[idx[a]], poset.elements[idx[b]]]
            )
    return _cube(poset, vi, idx)


def enumerate_cubes(
    poset: FinitePoset,
    k: int,
    mode: str = "full",
    max_covers: int = DEFAULT_MAX_COVERS,
    include_degenerate: bool = False,
) -> list[CubeDiagram]:
    """All pairwise covers of size ``k`` as cubes, in canonical order.

    ``mode="full"`` enumerates every unordered pairwise cover with all members
    strictly below the top.  A degenerate cover (some member equal to the top)
    yields a cube that is a product with an identity edge, whose Koszul complex
    is the cone of an identity and therefore acyclic; such covers are skipped
    unless ``include_degenerate`` is set.

    ``mode="parents_only"`` yields, for every ``v`` with exactly ``k`` parents,
    the cube on its parents.
    """
    key = ("cubes", k, mode, include_degenerate)
    if key in poset._cache:
        cubes, examined = poset._cache[key]
        # the cap is part of the contract, so a cached result must respect it too
        if examined > max_covers:
            raise CostCapExceeded(f"more than {max_covers} candidate covers", witness={"k": k})
        return cubes
    poset.profile.require_distributive()
    if mode == "parents_only":
        cubes = [_cube(poset, v, tuple(sorted(poset.parents[v]))) for v in range(poset.n) if len(poset.parents[v]) == k]
        examined = 0
    elif mode == "full":
        cubes, examined = _full_cubes(poset, k, max_covers, include_degenerate)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    poset._cache[key] = (cubes, examined)
    return cubes


def _full_cubes(poset: FinitePoset, k: int, cap: int, degenerate: bool) -> tuple[list[CubeDiagram], int]:
    join = poset.join_table
    leq = poset.leq_matrix
    examined = 0
    out = []
    for v in range(poset.n):
        below = np.flatnonzero(leq[:, v])
        below = below[below != v]
        adj = join[np.ix_(below, below)] == v
        nbrs = {int(below[a]): {int(below[b]) for b in np.flatnonzero(adj[a]) if below[b] > below[a]} for a in range(len(below))}
        found: list[tuple[int, ...]] = []

        def extend(clique, cands, need):
            nonlocal examined
            if need == 0:
                found.append(tuple(clique))
                return
            for c in sorted(cands):
                examined += 1
                if examined > cap:
                    raise CostCapExceeded(
                        f"more than {cap} candidate covers; use mode='parents_only' or raise the cap",
                        witness={"k": k, "top": poset.elements[v]},
                    )
                extend(clique + [c], cands & nbrs[c], need - 1)

        copies = range(0, k + 1) if degenerate else (0,)
        for m in copies:
            need = k - m
            if need == 0:
                found.append(())
            elif need == 1:
                for c in below:
                    examined += 1
                    found.append((int(c),))
            else:
                for a in sorted(nbrs):
                    examined += 1
                    extend([a], nbrs[a], need - 1)
            for xs in found:
                out.append(_cube(poset, v, (v,) * m + xs))
            found.clear()
        if examined > cap:
            raise CostCapExceeded(f"more than {cap} candidate covers", witness={"k": k})
    return out, examined
