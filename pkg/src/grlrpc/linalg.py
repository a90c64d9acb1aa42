"""Matrix algebra over Galois rings: Smith normal form, kernels, solving.

Matrices are ``(rows, cols, degree)`` integer arrays over a :class:`GaloisRing`.
The functions prefixed with an underscore work on raw arrays and are what the
decoder calls in its inner loops; the public API wraps them in
:class:`RingMatrix` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NoSolution, ParameterError
from .rings import GaloisRing

__all__ = [
    "RingMatrix",
    "SnfResult",
    "snf",
    "rank_frk",
    "right_kernel",
    "solve",
    "intersect_row_modules",
    "row_module_contains",
    "identity",
]


@dataclass(frozen=True, eq=False)
class RingMatrix:
    ring: GaloisRing
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        if e.ndim == 2 and self.ring.degree == 1:
            e = e[:, :, None]
        if e.ndim != 3 or e.shape[2] != self.ring.degree:
            raise ParameterError(f"entries of shape {e.shape} do not fit {self.ring!r}")
        object.__setattr__(self, "entries", e % self.ring.q)

    @classmethod
    def from_rows(cls, ring: GaloisRing, rows: Sequence[Sequence]) -> "RingMatrix":
        data = [[ring.elem(x) for x in row] for row in rows]
        if not data or not data[0]:
            n = len(data)
            return cls(ring, np.zeros((n, 0, ring.degree), dtype=np.int64))
        return cls(ring, np.array(data, dtype=np.int64))

    @classmethod
    def zeros(cls, ring: GaloisRing, rows: int, cols: int) -> "RingMatrix":
        return cls(ring, np.zeros((rows, cols, ring.degree), dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape[:2]

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if other.ring != self.ring:
            raise ParameterError("matrices over different rings")
        return RingMatrix(self.ring, self.ring.matmul(self.entries, other.entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return self.ring == other.ring and np.array_equal(self.entries, other.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __str__(self) -> str:
        f = self.ring.format_elem
        return "[" + ",\n ".join("[" + ", ".join(f(x) for x in row) + "]" for row in self.entries) + "]"

    def tolist(self):
        if self.ring.degree == 1:
            return self.entries[:, :, 0].tolist()
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class SnfResult:
    S: RingMatrix
    D: RingMatrix
    T: RingMatrix
    valuations: tuple[int, ...]  # i_j of the nonzero diagonal entries, non-decreasing

    @property
    def rank(self) -> int:
        return len(self.valuations)

    @property
    def frk(self) -> int:
        return sum(1 for v in self.valuations if v == 0)

    @property
    def profile(self):
        from .submodules import RankProfile

        r = self.D.ring.r
        counts = [0] * r
        for v in self.valuations:
            counts[v] += 1
        return RankProfile(tuple(counts))


def identity(ring: GaloisRing, n: int) -> np.ndarray:
    out = np.zeros((n, n, ring.degree), dtype=np.int64)
    out[np.arange(n), np.arange(n), 0] = 1
    return out


# --------------------------------------------------------------------------
# array level routines
def _snf(ring: GaloisRing, A: np.ndarray, want_s: bool = True, want_t: bool = True):
    """Smith normal form of a raw matrix.

    Returns (S, D, T, vals) with S A T = D; S or T is None when not requested.
    """
    p, q, r = ring.p, ring.q, ring.r
    X = np.array(A, dtype=np.int64) % q
    n, c = X.shape[:2]
    S = identity(ring, n) if want_s else None
    T = identity(ring, c) if want_t else None
    vals: list[int] = []
    for k in range(min(n, c)):
        V = ring.valuation(X[k:, k:])
        idx = int(np.argmin(V))
        i, j = divmod(idx, c - k)
        v = int(V[i, j])
        if v >= r:
            break
        i += k
        j += k
        if i != k:
            X[[k, i]] = X[[i, k]]
            if S is not None:
                S[[k, i]] = S[[i, k]]
        if j != k:
            X[:, [k, j]] = X[:, [j, k]]
            if T is not None:
                T[:, [k, j]] = T[:, [j, k]]
        pv = p**v
        u = X[k, k] // pv
        if not np.array_equal(u, ring.one):
            uinv = ring.inverse(u)
            X[k, k:] = ring.mul(X[k, k:], uinv)
            if S is not None:
                S[k] = ring.mul(S[k], uinv)
        # clear below
        below = X[k + 1 :, k]
        rows = np.flatnonzero(below.any(axis=1)) + k + 1
        if rows.size:
            w = X[rows, k] // pv
            X[rows, k:] = (X[rows, k:] - ring.mul(w[:, None, :], X[k, None, k:])) % q
            if S is not None:
                S[rows] = (S[rows] - ring.mul(w[:, None, :], S[k, None, :])) % q
        # clear to the right
        right = X[k, k + 1 :]
        cols = np.flatnonzero(right.any(axis=1)) + k + 1
        if cols.size:
            w = X[k, cols] // pv
            X[k, cols] = 0
            if T is not None:
                T[:, cols] = (T[:, cols] - ring.mul(T[:, k, None, :], w[None, :, :])) % q
        vals.append(v)
    return S, X, T, vals


def _kernel_from_snf(ring: GaloisRing, T: np.ndarray, vals: Sequence[int]) -> np.ndarray:
    """Right-kernel basis rows (ascending valuation) from the column transform."""
    p, r, q = ring.p, ring.r, ring.q
    c = T.shape[0]
    rank = len(vals)
    parts = []
    if rank < c:
        parts.append(T[:, rank:].transpose(1, 0, 2))
    for j in range(rank - 1, -1, -1):
        i = vals[j]
        if i == 0:
            break
        parts.append(((p ** (r - i)) * T[:, j])[None] % q)
    if not parts:
        return np.zeros((0, c, ring.degree), dtype=np.int64)
    return np.concatenate(parts, axis=0)


def _right_kernel(ring: GaloisRing, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.shape[0] == 0:
        return identity(ring, A.shape[1])
    _, _, T, vals = _snf(ring, A, want_s=False, want_t=True)
    return _kernel_from_snf(ring, T, vals)


def _solve_with(ring: GaloisRing, S, T, vals, b: np.ndarray, modulus_exp: int | None = None):
    """Solve with a precomputed SNF.  ``b`` is (rows, nrhs, d).

    Returns (X, ok) with X of shape (cols, nrhs, d) and ok a bool per right
    hand side.  With ``modulus_exp = k`` the congruence A x = b mod p^k is
    solved instead (k may vary per right-hand side when given as an array).
    """
    p, r, q = ring.p, ring.r, ring.q
    n = S.shape[0]
    c = T.shape[0]
    nrhs = b.shape[1]
    bp = ring.matmul(S, b)  # (rows, nrhs, d)
    if modulus_exp is None:
        kexp = np.full(nrhs, r, dtype=np.int64)
    else:
        kexp = np.broadcast_to(np.asarray(modulus_exp, dtype=np.int64), (nrhs,))
    pk = p**kexp  # (nrhs,)
    bp = bp % pk[None, :, None]
    rank = len(vals)
    ok = np.ones(nrhs, dtype=bool)
    y = np.zeros((c, nrhs, ring.degree), dtype=np.int64)
    for j in range(rank):
        pij = p ** vals[j]
        col = bp[j]
        divisible = (col % pij == 0).all(axis=-1)
        # with i_j >= k the entry must vanish mod p^k, which the line above
        # already enforces since p^k | p^{i_j}
        ok &= divisible
        y[j] = np.where(divisible[:, None], col // pij, 0)
    if rank < n:
        ok &= ~bp[rank:].any(axis=(0, 2))
    X = ring.matmul(T, y)
    return X, ok


def _solve(ring: GaloisRing, A: np.ndarray, b: np.ndarray, modulus_exp=None):
    S, _, T, vals = _snf(ring, A)
    return _solve_with(ring, S, T, vals, b, modulus_exp)


def _intersect(ring: GaloisRing, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape[1] != B.shape[1]:
        raise ParameterError("row modules live in different ambient spaces")
    K = np.concatenate([_right_kernel(ring, A), _right_kernel(ring, B)], axis=0)
    return _right_kernel(ring, K)


# --------------------------------------------------------------------------
# public wrappers
def _as_matrix(A) -> RingMatrix:
    if not isinstance(A, RingMatrix):
        raise ParameterError("expected a RingMatrix")
    return A


def snf(A: RingMatrix) -> SnfResult:
    """Smith normal form S A T = D with pivots normalized to powers of p."""
    A = _as_matrix(A)
    ring = A.ring
    S, D, T, vals = _snf(ring, A.entries)
    return SnfResult(RingMatrix(ring, S), RingMatrix(ring, D), RingMatrix(ring, T), tuple(vals))


def rank_frk(A: RingMatrix) -> tuple[int, int]:
    A = _as_matrix(A)
    _, _, _, vals = _snf(A.ring, A.entries, want_s=False, want_t=False)
    return len(vals), sum(1 for v in vals if v == 0)


def right_kernel(A: RingMatrix) -> RingMatrix:
    """Rows spanning {x : A x^T = 0}, as a p-shaped basis sorted by valuation."""
    A = _as_matrix(A)
    return RingMatrix(A.ring, _right_kernel(A.ring, A.entries))


def solve(A: RingMatrix, b) -> np.ndarray:
    """One solution x of A x = b; raises NoSolution when inconsistent.

    ``b`` is a length-``rows`` vector of ring elements (shape (rows, d)) or a
    RingMatrix with one column per right-hand side.
    """
    A = _as_matrix(A)
    ring = A.ring
    multi = isinstance(b, RingMatrix)
    bb = b.entries if multi else np.asarray(b, dtype=np.int64)
    if bb.ndim == 1 and ring.degree == 1:
        bb = bb[:, None]
    if not multi:
        bb = bb[:, None, :]
    if bb.shape[0] != A.rows:
        raise ParameterError("right-hand side has the wrong length")
    X, ok = _solve(ring, A.entries, bb % ring.q)
    if not ok.all():
        raise NoSolution("system is inconsistent")
    return RingMatrix(ring, X) if multi else X[:, 0, :]


def intersect_row_modules(A: RingMatrix, B: RingMatrix) -> RingMatrix:
    """Generators of rowspace(A) ∩ rowspace(B) via the double annihilator."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.ring != B.ring:
        raise ParameterError("matrices over different rings")
    return RingMatrix(A.ring, _intersect(A.ring, A.entries, B.entries))


def row_module_contains(A: RingMatrix, x) -> bool:
    """Whether the vector ``x`` lies in the row module of ``A``."""
    ring = A.ring
    x = np.asarray(x, dtype=np.int64)
    if x.ndim == 1 and ring.degree == 1:
        x = x[:, None]
    At = A.entries.transpose(1, 0, 2)
    _, ok = _solve(ring, At, x[:, None, :] % ring.q)
    return bool(ok[0])
