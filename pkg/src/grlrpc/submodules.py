"""R-submodules of S: rank profiles, canonical p-shaped bases and sampling.

A submodule M of S is stored through its coordinate rows in R^m.  The
canonical basis consists of generators ``p^i a`` where each ``a`` has a 1 at
its pivot coordinate; ``levels`` holds the exponents ``i`` and ``pivots`` the
pivot columns.  Two generating sets of the same module produce identical
canonical bases, so equality can be decided by comparing arrays (membership
is still used as a cross-check).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import ParameterError, ProfileTooLarge, SamplingError
from .rings import GaloisRing

__all__ = [
    "RankProfile",
    "SubModule",
    "canonicalize",
    "support",
    "product_module",
    "membership",
    "module_eq",
    "intersect",
    "free_closure",
    "sample_module",
    "sample_error",
    "profile_ops",
    "zero_module",
]

MAX_ATTEMPTS = 1000


# --------------------------------------------------------------------------
@dataclass(frozen=True)
class RankProfile:
    """phi(x) = sum_i phi_i x^i in Z[x]/(x^r); phi_i counts generators of valuation i."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        if not c or any(x < 0 for x in c):
            raise ParameterError("profile coefficients must be non-negative and r >= 1")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: int, r: int) -> "RankProfile":
        return cls((value,) + (0,) * (r - 1))

    @classmethod
    def parse(cls, text: str, r: int) -> "RankProfile":
        """Parse strings such as ``"3+2x"`` or ``"x^2"``."""
        coeffs = [0] * r
        s = text.replace(" ", "")
        if not s:
            raise ParameterError("empty profile")
        for term in re.split(r"\+", s):
            m = re.fullmatch(r"(\d*)(?:\*?x(?:\^(\d+))?)?", term)
            if not m or term == "":
                raise ParameterError(f"cannot parse profile term {term!r}")
            coef = int(m.group(1)) if m.group(1) else 1
            if "x" in term:
                deg = int(m.group(2)) if m.group(2) else 1
            else:
                deg = 0
            if deg < r:
                coeffs[deg] += coef
        return cls(tuple(coeffs))

    @property
    def r(self) -> int:
        return len(self.coeffs)

    @property
    def rank(self) -> int:
        return sum(self.coeffs)

    @property
    def frk(self) -> int:
        return self.coeffs[0]

    def __mul__(self, other: "RankProfile | int") -> "RankProfile":
        if isinstance(other, int):
            return RankProfile(tuple(other * c for c in self.coeffs))
        self._same_r(other)
        r = self.r
        out = [0] * r
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(r - i):
                    out[i + j] += a * other.coeffs[j]
        return RankProfile(tuple(out))

    __rmul__ = __mul__

    def shift(self, j: int) -> "RankProfile":
        """Multiply by x^j, dropping terms of degree >= r."""
        r = self.r
        return RankProfile(tuple([0] * min(j, r) + list(self.coeffs[: max(r - j, 0)])))

    def leq(self, other: "RankProfile") -> bool:
        """a(x) ≼ b(x): every prefix sum of a is at most that of b."""
        self._same_r(other)
        return bool(np.all(np.cumsum(self.coeffs) <= np.cumsum(other.coeffs)))

    def _same_r(self, other: "RankProfile") -> None:
        if other.r != self.r:
            raise ParameterError("profiles over different r")

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            parts.append(str(c) if i == 0 else (mon if c == 1 else f"{c}{mon}"))
        return "+".join(parts) if parts else "0"


def profile_ops(kind: str, a: RankProfile, b):
    if kind == "product":
        return a * b
    if kind == "shift":
        return a.shift(int(b))
    if kind == "leq":
        return a.leq(b)
    raise ParameterError(f"unknown profile operation {kind!r}")


# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SubModule:
    tower: GaloisRing
    units: np.ndarray  # (N, m, s): normalized a with a[pivot] = 1, reduced mod p^(r-level)
    levels: np.ndarray  # (N,) non-decreasing
    pivots: np.ndarray  # (N,)

    @cached_property
    def gens(self) -> np.ndarray:
        """Coordinate rows of the basis elements p^level * a, shape (N, m, s)."""
        p, q = self.tower.p, self.tower.q
        return (self.units * (p ** self.levels)[:, None, None]) % q

    @cached_property
    def elements(self) -> np.ndarray:
        """Basis elements as elements of S, shape (N, sm)."""
        return self.gens.reshape(len(self.levels), self.tower.degree)

    @cached_property
    def unit_elements(self) -> np.ndarray:
        return self.units.reshape(len(self.levels), self.tower.degree)

    @cached_property
    def profile(self) -> RankProfile:
        counts = np.bincount(self.levels, minlength=self.tower.r)[: self.tower.r]
        return RankProfile(tuple(int(c) for c in counts))

    @property
    def rank(self) -> int:
        return len(self.levels)

    @property
    def frk(self) -> int:
        return int(np.count_nonzero(self.levels == 0))

    @property
    def msp_basis(self) -> list[tuple[int, np.ndarray]]:
        return [(int(l), a.copy()) for l, a in zip(self.levels, self.unit_elements)]

    def contains(self, x) -> bool:
        return membership(self, x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubModule):
            return NotImplemented
        return module_eq(self, other)

    def __len__(self) -> int:
        return self.rank

    def __repr__(self) -> str:
        return f"SubModule(profile={self.profile}, tower={self.tower!r})"

    def describe(self) -> str:
        f = self.tower.format_elem
        return ", ".join(f"p^{l}*({f(a)})" for l, a in self.msp_basis)


def zero_module(tower: GaloisRing) -> SubModule:
    m, s = tower.deg, tower.e
    return SubModule(
        tower,
        np.zeros((0, m, s), dtype=np.int64),
        np.zeros(0, dtype=np.int64),
        np.zeros(0, dtype=np.int64),
    )


# --------------------------------------------------------------------------
def _echelon(R: GaloisRing, X: np.ndarray):
    """Level-by-level row reduction of an (n, c, d) matrix over R.

    Returns unit rows (with a 1 at the pivot), their levels and pivot columns,
    in output order.
    """
    p, q, r = R.p, R.q, R.r
    X = np.array(X, dtype=np.int64) % q
    n, c = X.shape[:2]
    V = R.valuation(X).reshape(n, c)
    active = np.ones(n, dtype=bool)
    units, levels, pivots = [], [], []
    for level in range(r):
        pv = p**level
        while True:
            mask = (V == level) & active[:, None]
            colmask = mask.any(axis=0)
            if not colmask.any():
                break
            col = int(np.argmax(colmask))
            row = int(np.argmax(mask[:, col]))
            prow = X[row]
            u = prow[col] // pv
            if not np.array_equal(u, R.one):
                prow = R.mul(prow, R.inverse(u))
            active[row] = False
            others = np.flatnonzero(active & (V[:, col] < r))
            if others.size:
                w = X[others, col] // pv
                X[others] = (X[others] - R.mul(w[:, None, :], prow[None])) % q
                V[others] = R.valuation(X[others])
            units.append(prow // pv)
            levels.append(level)
            pivots.append(col)
    d = R.degree
    if not units:
        return np.zeros((0, c, d), dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.stack(units), np.array(levels, dtype=np.int64), np.array(pivots, dtype=np.int64)


def _normalize(R: GaloisRing, A: np.ndarray, levels: np.ndarray, pivots: np.ndarray) -> np.ndarray:
    """Reduce each unit row at later pivot columns, then modulo p^(r - level)."""
    p, q, r = R.p, R.q, R.r
    A = A.copy()
    for rho in range(1, len(levels)):
        col, L = pivots[rho], levels[rho]
        mod = p ** (L - levels[:rho])  # (rho,)
        e = A[:rho, col]
        qv = e // mod[:, None]
        hit = np.flatnonzero(qv.any(axis=1))
        if hit.size:
            corr = R.mul(qv[hit][:, None, :], A[rho][None])
            A[hit] = (A[hit] - mod[hit, None, None] * corr) % q
    if len(levels):
        A %= (p ** (r - levels))[:, None, None]
    return A


def _canon_rows(tower: GaloisRing, X: np.ndarray) -> SubModule:
    R = tower.base
    U, lev, piv = _echelon(R, X)
    U = _normalize(R, U, lev, piv)
    return SubModule(tower, U, lev, piv)


def _as_rows(tower: GaloisRing, gens) -> np.ndarray:
    g = np.asarray(gens, dtype=np.int64)
    if g.size == 0:
        return np.zeros((0, tower.deg, tower.e), dtype=np.int64)
    g = tower.check(g).reshape(-1, tower.degree) % tower.q
    return g.reshape(-1, tower.deg, tower.e)


def canonicalize(tower: GaloisRing, gens) -> SubModule:
    """Canonical p-shaped basis of the R-span of ``gens`` (elements of S)."""
    if not tower.is_tower:
        raise ParameterError("canonicalize needs a tower ring")
    return _canon_rows(tower, _as_rows(tower, gens))


def support(tower: GaloisRing, vec) -> SubModule:
    """The R-module spanned by the entries of a vector over S."""
    return canonicalize(tower, vec)


def product_module(A: SubModule, B: SubModule) -> SubModule:
    if A.tower != B.tower:
        raise ParameterError("modules in different towers")
    S = A.tower
    if A.rank == 0 or B.rank == 0:
        return zero_module(S)
    prods = S.mul(A.elements[:, None, :], B.elements[None, :, :]).reshape(-1, S.degree)
    return canonicalize(S, prods)


def _reduce(M: SubModule, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce coordinate rows X (k, m, s) along M's basis.

    Returns (remainder, ok) where ok marks rows that stayed divisible at every
    pivot; x lies in M iff ok and the remainder vanishes.
    """
    R = M.tower.base
    p, q = R.p, R.q
    X = X.copy()
    ok = np.ones(X.shape[0], dtype=bool)
    gens = M.gens
    for rho in range(M.rank):
        col, L = M.pivots[rho], M.levels[rho]
        pv = p**L
        ent = X[:, col]
        ok &= ~(ent % pv).any(axis=1)
        qv = ent // pv
        hit = np.flatnonzero(qv.any(axis=1))
        if hit.size:
            X[hit] = (X[hit] - R.mul(qv[hit][:, None, :], gens[rho][None])) % q
    return X, ok


def membership(M: SubModule, x) -> bool | np.ndarray:
    """Whether x (one element of S, or a stack of them) lies in M."""
    S = M.tower
    x = S.check(np.asarray(x, dtype=np.int64)) % S.q
    single = x.ndim == 1
    rows = x.reshape(-1, S.deg, S.e)
    rem, ok = _reduce(M, rows)
    res = ok & ~rem.any(axis=(1, 2))
    return bool(res[0]) if single else res.reshape(x.shape[:-1])


def contains_module(M: SubModule, N: SubModule) -> bool:
    """N ⊆ M."""
    if N.rank == 0:
        return True
    return bool(np.all(membership(M, N.elements)))


def module_eq(M: SubModule, N: SubModule) -> bool:
    if M.tower != N.tower:
        raise ParameterError("modules in different towers")
    if M.profile != N.profile:
        return False
    if (
        np.array_equal(M.levels, N.levels)
        and np.array_equal(M.pivots, N.pivots)
        and np.array_equal(M.units, N.units)
    ):
        return True
    return contains_module(M, N) and contains_module(N, M)


def intersect(modules: Sequence[SubModule]) -> SubModule:
    """Intersection of several submodules via a single double annihilator."""
    if not modules:
        raise ParameterError("need at least one module")
    S = modules[0].tower
    R = S.base
    if len(modules) == 1:
        return modules[0]
    kers = []
    for M in modules:
        if M.tower != S:
            raise ParameterError("modules in different towers")
        if M.rank == 0:
            return zero_module(S)
        kers.append(linalg._right_kernel(R, M.gens))
    K = np.concatenate(kers, axis=0)
    return _canon_rows(S, linalg._right_kernel(R, K))


def scale_module(M: SubModule, f) -> SubModule:
    """f * M for an element f of S."""
    S = M.tower
    if M.rank == 0:
        return M
    return canonicalize(S, S.mul(M.elements, np.asarray(f)[None, :]))


def free_closure(M: SubModule) -> SubModule:
    """The free module spanned by the truncated unit parts of M's canonical basis.

    Each unit part a of a level-i generator keeps its Teichmüller digits at
    positions below r - i.
    """
    S = M.tower
    if M.rank == 0:
        return M
    digits = S.teichmueller(M.unit_elements)  # (r, N, d)
    p, q, r = S.p, S.q, S.r
    out = np.zeros_like(M.unit_elements)
    for i in range(r):
        keep = (r - M.levels) > i
        out[keep] = (out[keep] + (p**i) * digits[i][keep]) % q
    F = canonicalize(S, out)
    if F.frk != M.rank:
        raise ArithmeticError("free closure lost rank")
    return F


# --------------------------------------------------------------------------
def _residue_rank(R: GaloisRing, X: np.ndarray) -> int:
    """Rank of X modulo p, i.e. its free rank over R."""
    _, lev, _ = _echelon(R, X)
    return int(np.count_nonzero(lev == 0))


def sample_module(tower: GaloisRing, profile: RankProfile, rng: np.random.Generator) -> SubModule:
    """Uniformly random submodule of S with the given rank profile."""
    R = tower.base
    if profile.r != tower.r:
        raise ParameterError("profile has the wrong length")
    N = profile.rank
    if N > tower.deg:
        raise ProfileTooLarge(f"rank {N} exceeds m = {tower.deg}")
    if N == 0:
        return zero_module(tower)
    scale = np.repeat(tower.p ** np.arange(tower.r), profile.coeffs)
    for _ in range(MAX_ATTEMPTS):
        T = R.random(rng, (N, tower.deg))
        if _residue_rank(R, T) == N:
            M = _canon_rows(tower, (T * scale[:, None, None]) % tower.q)
            assert M.profile == profile
            return M
    raise SamplingError("could not draw a full-free-rank coefficient matrix")


def sample_error(E: SubModule, n: int, rng: np.random.Generator, check: bool = False) -> np.ndarray:
    """Uniform vector in E^n whose support is exactly E, shape (n, sm).

    Coefficients against the canonical basis are drawn uniformly; the support
    equals E exactly when that coefficient matrix has full free rank.
    """
    S = E.tower
    R = S.base
    N = E.rank
    if N > n:
        raise ProfileTooLarge(f"support rank {N} exceeds length {n}")
    if N == 0:
        return np.zeros((n, S.degree), dtype=np.int64)
    for _ in range(MAX_ATTEMPTS):
        C = R.random(rng, (n, N))
        if _residue_rank(R, C.transpose(1, 0, 2)) == N:
            e = _combine(S, C, E.gens)
            if check and not module_eq(support(S, e), E):
                raise AssertionError("sampled error does not have the requested support")
            return e
    raise SamplingError("could not draw an error with exact support")


def _combine(S: GaloisRing, C: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Rows sum_k C[j,k] G[k] for C (n, N, s) over R and G (N, m, s)."""
    R = S.base
    prod = R.mul(C[:, :, None, :], G[None, :, :, :])  # (n, N, m, s)
    out = prod.sum(axis=1) % S.q
    return out.reshape(C.shape[0], S.degree)
