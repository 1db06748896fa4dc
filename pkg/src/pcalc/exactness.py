"""Middle-exactness of squares, Koszul complexes of cubes, k-middle-exactness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exactla as la
from .errors import InternalCheckFailed
from .lattice import DEFAULT_MAX_COVERS, CubeDiagram, enumerate_cubes
from .persmod import PersistenceModule
from .verdict import Verdict


@dataclass
class ChainComplex:
    """Finite chain complex; ``diffs[i]`` maps degree ``i`` to degree ``i - 1``.

    Missing degrees are zero spaces and missing differentials zero maps.
    """

    dims: dict[int, int]
    diffs: dict[int, np.ndarray] = field(default_factory=dict)
    p: int = 2

    def __post_init__(self):
        self.dims = {int(i): int(d) for i, d in self.dims.items()}
        for i in list(self.diffs):
            self.diffs[i] = np.asarray(self.diffs[i], dtype=np.int64) % self.p
        self.validate()

    @property
    def degrees(self) -> range:
        if not self.dims:
            return range(0)
        return range(min(self.dims), max(self.dims) + 1)

    def dim(self, i: int) -> int:
        return self.dims.get(i, 0)

    def d(self, i: int) -> np.ndarray:
        m = self.diffs.get(i)
        return m if m is not None else la.zeros(self.dim(i - 1), self.dim(i))

    def validate(self):
        for i, m in self.diffs.items():
            if m.shape != (self.dim(i - 1), self.dim(i)):
                raise InternalCheckFailed(f"differential {i} has shape {m.shape}", witness=i)
        for i in self.diffs:
            if (i - 1) in self.diffs and la.mul(self.d(i - 1), self.d(i), self.p).any():
                raise InternalCheckFailed("differential does not square to zero", witness=i)

    def homology(self, i: int) -> int:
        return self.dim(i) - la.rank(self.d(i), self.p) - la.rank(self.d(i + 1), self.p)

    def homology_table(self) -> dict[int, int]:
        return {i: self.homology(i) for i in self.degrees}

    def is_acyclic(self) -> bool:
        return not any(self.homology_table().values())


def koszul_homology(C: ChainComplex) -> dict[int, int]:
    return C.homology_table()


# ---------------------------------------------------------------------------
# squares


@dataclass(frozen=True)
class SquareReport:
    corners: tuple  # (x ^ y, x, y, x v y)
    is_middle_exact: bool
    dims: tuple[int, int]  # (dim ker of the right map, rank of the left map)
    is_pushout: bool
    is_pullback: bool

    def to_json(self) -> dict:
        return {
            "corners": list(self.corners),
            "middle_exact": self.is_middle_exact,
            "ker_right": self.dims[0],
            "rank_left": self.dims[1],
            "pushout": self.is_pushout,
            "pullback": self.is_pullback,
        }


def square_maps(F: PersistenceModule, x: int, y: int):
    """``(alpha, f, beta, g)`` for ``A = F(x^y) -> B = F(x), C = F(y) -> D = F(xvy)``."""
    P = F.poset
    lo, hi = P.meet(x, y), P.join(x, y)
    return lo, hi, F.smap(lo, x), F.smap(lo, y), F.smap(x, hi), F.smap(y, hi)


def middle_exact_square(F: PersistenceModule, x, y) -> SquareReport:
    """Exactness of ``A -> B + C -> D`` at the middle term.

    Three routes: the rank count, injectivity of the pushout comparison
    ``B u_A C -> D`` and surjectivity of ``A -> B x_D C``.  They must agree.
    """
    P, p = F.poset, F.p
    xi, yi = P.index(x), P.index(y)
    lo, hi, alpha, f, beta, g = square_maps(F, xi, yi)
    left = np.vstack([alpha, f])
    right = np.hstack([beta, (-g) % p])
    if la.mul(right, left, p).any():
        raise InternalCheckFailed("square does not commute", witness=[x, y])
    rank_left = la.rank(left, p)
    ker_right = right.shape[1] - la.rank(right, p)
    exact = ker_right == rank_left

    # pushout comparison: coker of (alpha; -f) mapped into D by (beta g)
    q, d = la.cokernel(np.vstack([alpha, (-f) % p]), p)
    po = la.mul(np.hstack([beta, g]), la.right_inverse(q, p), p)
    po_rank = la.rank(po, p)
    po_mono = po_rank == d
    # pullback comparison: A into ker(beta -g)
    k = la.kernel_basis(right, p)
    pb = la.solve(k, left, p)
    pb_rank = la.rank(pb, p)
    pb_epi = pb_rank == k.shape[1]
    if not (exact == po_mono == pb_epi):
        raise InternalCheckFailed("middle-exactness criteria disagree", witness=[x, y])
    dD, dA = int(F.dims[hi]), int(F.dims[lo])
    is_pushout = po_mono and po_rank == dD
    is_pullback = pb_epi and pb_rank == dA
    el = P.elements
    return SquareReport((el[lo], el[xi], el[yi], el[hi]), exact, (ker_right, rank_left), is_pushout, is_pullback)


def is_2_middle_exact(F: PersistenceModule) -> Verdict:
    """All squares on incomparable pairs are middle-exact.

    Comparable pairs ``x <= y`` need no test: the square degenerates and both
    the kernel and the image are the graph of ``F(x <= y)``.
    """
    P = F.poset
    leq = P.leq_matrix
    for i in range(P.n):
        for j in range(i + 1, P.n):
            if leq[i, j] or leq[j, i]:
                continue
            rep = middle_exact_square(F, P.elements[i], P.elements[j])
            if not rep.is_middle_exact:
                return Verdict(False, [P.elements[i], P.elements[j]], "square is not middle-exact")
    return Verdict(True)


# ---------------------------------------------------------------------------
# Koszul complexes


def _popcount(s: int) -> int:
    return bin(s).count("1")


def koszul(F: PersistenceModule, cube: CubeDiagram) -> ChainComplex:
    """Koszul complex of the cube: degree ``i`` is the sum over ``|S| = k - i``.

    The component from ``S`` to ``S u {t_j}`` carries the sign ``(-1)^j``
    where ``t_0 < t_1 < ...`` lists the complement of ``S``.
    """
    P, p = F.poset, F.p
    k = cube.k
    el = {s: P.index(cube.assignment[s]) for s in range(cube.full + 1)}
    layers = {i: [s for s in range(cube.full + 1) if _popcount(s) == k - i] for i in range(k + 1)}
    dims = {i: sum(int(F.dims[el[s]]) for s in layers[i]) for i in range(k + 1)}
    diffs = {}
    for i in range(1, k + 1):
        rows, cols = layers[i - 1], layers[i]
        roff = np.concatenate([[0], np.cumsum([F.dims[el[s]] for s in rows])]).astype(int)
        coff = np.concatenate([[0], np.cumsum([F.dims[el[s]] for s in cols])]).astype(int)
        rpos = {s: r for r, s in enumerate(rows)}
        m = la.zeros(dims[i - 1], dims[i])
        for c, s in enumerate(cols):
            comp = [t for t in range(k) if not s >> t & 1]
            for j, t in enumerate(comp):
                r = rpos[s | 1 << t]
                block = F.smap(el[s], el[s | 1 << t])
                if j % 2:
                    block = (-block) % p
                m[roff[r]:roff[r + 1], coff[c]:coff[c + 1]] = block
        diffs[i] = m
    return ChainComplex(dims, diffs, p)


def is_k_middle_exact(
    F: PersistenceModule,
    k: int,
    mode: str = "full",
    max_covers: int = DEFAULT_MAX_COVERS,
    include_degenerate: bool = False,
) -> Verdict:
    """Koszul homology of every pairwise-cover ``k``-cube vanishes in degrees ``0 < i < k``."""
    cubes = enumerate_cubes(F.poset, k, mode=mode, max_covers=max_covers, include_degenerate=include_degenerate)
    for cube in cubes:
        H = koszul(F, cube).homology_table()
        bad = {i: h for i, h in H.items() if 0 < i < k and h}
        if bad:
            w = cube.to_json()
            w["homology"] = {str(i): h for i, h in sorted(H.items())}
            return Verdict(False, w, "Koszul complex has internal homology")
    return Verdict(True)
