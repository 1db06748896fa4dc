"""Dense exact linear algebra over a prime field GF(p).

Matrices are ``numpy`` int64 arrays with entries in ``[0, p)``.  A matrix with
``rows x cols`` shape represents a linear map from a ``cols``-dimensional space
to a ``rows``-dimensional one (it acts on column vectors).  Every routine
returns canonical output (reduced row echelon form conventions), so results
are reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import Inconsistent

MAX_PRIME = 1 << 15


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p) or p >= MAX_PRIME:
        raise ValueError(f"field characteristic must be a prime below 2^15, got {p}")
    return p


def mat(data, p: int, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Build a canonical matrix from nested lists, reducing mod ``p``."""
    if shape is not None and (shape[0] == 0 or shape[1] == 0):
        return np.zeros(shape, dtype=np.int64)
    a = np.array(data, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    if shape is not None:
        a = a.reshape(shape)
    return a % p


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if a.shape[1] == 0 or b.shape[0] == 0:
        return zeros(a.shape[0], b.shape[1])
    return (a @ b) % p


def _reduce(aug: np.ndarray, ncols: int, p: int) -> list[int]:
    """In-place Gauss-Jordan on the first ``ncols`` columns of ``aug``."""
    rows = aug.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(aug[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            aug[[r, k]] = aug[[k, r]]
        lead = int(aug[r, c])
        if lead != 1:
            aug[r] = (aug[r] * pow(lead, -1, p)) % p
        col = aug[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            aug[hit] = (aug[hit] - np.outer(col[hit], aug[r])) % p
        pivots.append(c)
        r += 1
    return pivots


def rref(m: np.ndarray, p: int) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Return ``(R, pivots, T)`` with ``R = T @ m`` in reduced row echelon form.

    ``T`` is invertible and records the row operations.
    """
    m = np.asarray(m, dtype=np.int64) % p
    rows, cols = m.shape
    aug = np.hstack([m, eye(rows)])
    pivots = _reduce(aug, cols, p)
    return aug[:, :cols].copy(), pivots, aug[:, cols:].copy()


def rank(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    work = np.asarray(m, dtype=np.int64) % p
    return len(_reduce(work.copy(), work.shape[1], p))


def kernel_basis(m: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning ``{v : m v = 0}``, one per free variable of the RREF."""
    m = np.asarray(m, dtype=np.int64)
    rows, cols = m.shape
    work = m % p
    pivots = _reduce(work, cols, p) if rows else []
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = zeros(cols, len(free))
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, c in enumerate(pivots):
            basis[c, k] = (-work[i, f]) % p
    return basis


def cokernel(m: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """``(Q, d)`` where the rows of ``Q`` span the annihilator of ``im m``.

    ``Q`` is ``d x rows(m)``, has full row rank and ``Q @ m == 0``; it is the
    quotient map onto ``coker m`` in canonical coordinates.
    """
    q = kernel_basis(np.asarray(m).T, p).T.copy()
    return q, q.shape[0]


def solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Canonical ``X`` with ``a @ X == b`` (free variables set to zero).

    Raises :class:`Inconsistent` with a certificate row when no solution exists.
    """
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: {a.shape} vs {b.shape}")
    rows, n = a.shape
    k = b.shape[1]
    aug = np.hstack([a, b, eye(rows)])
    pivots = _reduce(aug, n, p)
    r = len(pivots)
    tail = aug[r:, n:n + k]
    if tail.size and tail.any():
        bad = r + int(np.flatnonzero(tail.any(axis=1))[0])
        raise Inconsistent(aug[bad, n + k:].copy())
    x = zeros(n, k)
    for i, c in enumerate(pivots):
        x[c] = aug[i, n:n + k]
    return x


def inverse(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("only square matrices are invertible")
    try:
        inv = solve(m, eye(n), p)
    except Inconsistent:
        raise ValueError("matrix is singular") from None
    if rank(m, p) != n:
        raise ValueError("matrix is singular")
    return inv


def is_invertible(m: np.ndarray, p: int) -> bool:
    return m.shape[0] == m.shape[1] and rank(m, p) == m.shape[0]


def right_inverse(m: np.ndarray, p: int) -> np.ndarray:
    """``R`` with ``m @ R = I``; requires full row rank."""
    return solve(m, eye(m.shape[0]), p)


def left_inverse(m: np.ndarray, p: int) -> np.ndarray:
    """``L`` with ``L @ m = I``; requires full column rank."""
    return solve(m.T, eye(m.shape[1]), p).T.copy()


def column_basis(m: np.ndarray, p: int) -> np.ndarray:
    """The pivot columns of ``m``: a canonical basis of its column space."""
    if m.shape[1] == 0:
        return zeros(m.shape[0], 0)
    work = np.asarray(m, dtype=np.int64) % p
    pivots = _reduce(work.copy(), work.shape[1], p)
    return (np.asarray(m, dtype=np.int64) % p)[:, pivots]


def extend_basis(base: np.ndarray, candidates: np.ndarray, p: int) -> np.ndarray:
    """Columns of ``candidates`` that extend the independent columns of ``base``.

    Greedy left to right, so the choice is deterministic.
    """
    k = base.shape[1]
    both = np.hstack([base, candidates]) % p
    if both.shape[1] == 0:
        return zeros(base.shape[0], 0)
    pivots = _reduce(both.copy(), both.shape[1], p)
    picked = [c - k for c in pivots if c >= k]
    return candidates[:, picked] % p


def intersect(u: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    """Basis of ``span(u) & span(v)`` for column bases ``u`` and ``v``."""
    if u.shape[1] == 0 or v.shape[1] == 0:
        return zeros(u.shape[0], 0)
    ker = kernel_basis(np.hstack([u, (-v) % p]), p)
    return column_basis(mul(u, ker[: u.shape[1]], p), p)


def block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def random_matrix(rng: np.random.Generator, rows: int, cols: int, p: int) -> np.ndarray:
    return rng.integers(0, p, size=(rows, cols), dtype=np.int64)


def random_invertible(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    while True:
        m = random_matrix(rng, n, n, p)
        if rank(m, p) == n:
            return m
