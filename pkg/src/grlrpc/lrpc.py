"""LRPC codes over Galois rings: construction, expansion, encoding, syndromes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .errors import ConstructionFailure, DecompositionFailure, ParameterError
from .rings import GaloisRing, _prime_factors, ring_from_dict
from .submodules import SubModule, canonicalize, membership

__all__ = [
    "LrpcCode",
    "gen_code",
    "build_h_ext",
    "generator",
    "encode",
    "syndrome",
    "extract_message",
    "check_properties",
    "code_from_json",
    "load_code",
    "save_code",
]

RETRY_CAP = 100


@dataclass(frozen=True, eq=False)
class LrpcCode:
    tower: GaloisRing
    n: int
    k: int
    lam: int
    f: np.ndarray  # (lam, sm), f[0] = 1
    H: np.ndarray  # (n-k, n, sm)
    coeffs: np.ndarray  # (n-k, n, lam, s): H[i, j] = sum_l coeffs[i, j, l] * f[l]
    G: np.ndarray  # (k, n, sm)

    @cached_property
    def f_inv(self) -> np.ndarray:
        return np.stack([self.tower.inverse(x) for x in self.f])

    @cached_property
    def H_ext(self) -> np.ndarray:
        """(n-k)*lam x n matrix over R; row i*lam + l holds coeffs[i, :, l]."""
        nk = self.n - self.k
        return self.coeffs.transpose(0, 2, 1, 3).reshape(nk * self.lam, self.n, self.tower.e).copy()

    @cached_property
    def h_ext_snf(self):
        S, _, T, vals = linalg._snf(self.tower.base, self.H_ext)
        return S, T, tuple(vals)

    @cached_property
    def info_set(self) -> tuple[int, ...]:
        """Columns where G is the identity; a codeword restricted to them is its message."""
        S = self.tower
        cols = []
        for a in range(self.k):
            unit = np.zeros((self.k, S.degree), dtype=np.int64)
            unit[a] = S.one
            cols.append(next(j for j in range(self.n) if np.array_equal(self.G[:, j], unit)))
        return tuple(cols)

    @cached_property
    def F(self) -> SubModule:
        return canonicalize(self.tower, self.f)

    @property
    def params(self) -> dict:
        S = self.tower
        return {"p": S.p, "r": S.r, "s": S.e, "m": S.deg, "n": self.n, "k": self.k, "lambda": self.lam}

    def to_dict(self) -> dict:
        return {
            "tower": self.tower.to_dict(),
            "n": self.n,
            "k": self.k,
            "lambda": self.lam,
            "f": self.f.tolist(),
            "H": self.H.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --------------------------------------------------------------------------
def _check_params(tower: GaloisRing, n: int, k: int, lam: int) -> None:
    if not tower.is_tower:
        raise ParameterError("codes live over a tower ring")
    if not 0 < k < n:
        raise ParameterError("need 0 < k < n")
    if lam < 1 or lam > tower.deg:
        raise ParameterError("need 1 <= lambda <= m")
    if lam * (n - k) < n:
        raise ParameterError(f"lambda = {lam} is below n/(n-k) = {n / (n - k):.3f}")


def _unit_or_zero(R: GaloisRing, rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform on R* ∪ {0}."""
    units = R.q**R.degree - (R.q // R.p) ** R.degree
    x = R.random_units(rng, shape)
    zero = rng.integers(0, units + 1, size=shape) == 0
    x[zero] = 0
    return x


def subring_generator(tower: GaloisRing, ell: int) -> np.ndarray:
    """Element generating the intermediate Galois ring of degree ``ell`` over R."""
    S = tower
    Q = S.p**S.degree - 1
    factors = _prime_factors(Q)
    # primitive element of the residue field of S, lifted to the Teichmüller set
    for cand in _candidates(S):
        if not S.is_unit(cand):
            continue
        t = S.teichmuller_lift(cand)
        if all(not np.array_equal(S.power(t, Q // l), S.one) for l in factors):
            Qs = S.p ** (S.e * ell) - 1
            return S.power(t, Q // Qs)
    raise ArithmeticError("no primitive element found")


def _candidates(S: GaloisRing):
    # residue-field elements with digits in [0, p), in increasing integer encoding
    for code in range(2, S.p**S.degree):
        x = np.zeros(S.degree, dtype=np.int64)
        c = code
        for i in range(S.degree):
            x[i] = c % S.p
            c //= S.p
        yield x


def _contains_subring(F: SubModule, tower: GaloisRing, lam: int) -> bool:
    m = tower.deg
    for ell in range(2, min(lam, m - 1) + 1):
        if m % ell:
            continue
        zeta = subring_generator(tower, ell)
        acc = tower.one
        basis = []
        for _ in range(ell):
            basis.append(acc)
            acc = tower.mul(acc, zeta)
        if np.all(membership(F, np.stack(basis))):
            return True
    return False


def _draw_f(tower: GaloisRing, lam: int, rng: np.random.Generator) -> np.ndarray:
    for _ in range(RETRY_CAP):
        f = np.concatenate([tower.one[None], tower.random_units(rng, (lam - 1,))])
        F = canonicalize(tower, f)
        if F.frk != lam:
            continue
        if _contains_subring(F, tower, lam):
            continue
        return f
    raise ConstructionFailure("could not draw an admissible F-basis")


def _draw_coeff_rows(R: GaloisRing, n: int, nk: int, lam: int, rng) -> np.ndarray:
    out = np.zeros((nk, n, lam, R.degree), dtype=np.int64)
    for i in range(nk):
        for _ in range(RETRY_CAP):
            a = _unit_or_zero(R, rng, (n, lam))
            _, _, _, vals = linalg._snf(R, a, want_s=False, want_t=False)
            if sum(1 for v in vals if v == 0) == lam:
                out[i] = a
                break
        else:
            raise ConstructionFailure("could not draw a row spanning F")
    return out


def _assemble_h(tower: GaloisRing, coeffs: np.ndarray, f: np.ndarray) -> np.ndarray:
    # H[i, j] = sum_l coeffs[i, j, l] * f[l]
    return tower.scale(f[None, None, :, :], coeffs).sum(axis=2) % tower.q


def _unit_echelon(ring: GaloisRing, A: np.ndarray):
    """Gauss-Jordan with unit pivots; returns (reduced, pivot cols) or None if
    the rows do not have full free rank."""
    X = np.array(A, dtype=np.int64) % ring.q
    n, c = X.shape[:2]
    pivots = []
    for row in range(n):
        V = ring.valuation(X[row:])
        hit = np.argwhere(V == 0)
        if hit.size == 0:
            return None
        # leftmost column, then lowest row
        order = np.lexsort((hit[:, 0], hit[:, 1]))
        i, j = hit[order[0]]
        i += row
        if i != row:
            X[[row, i]] = X[[i, row]]
        X[row] = ring.mul(X[row], ring.inverse(X[row, j]))
        others = np.flatnonzero((np.arange(n) != row) & X[:, j].any(axis=1))
        if others.size:
            w = X[others, j].copy()
            X[others] = (X[others] - ring.mul(w[:, None, :], X[row][None])) % ring.q
        pivots.append(int(j))
    return X, pivots


def _generator_from_h(tower: GaloisRing, H: np.ndarray) -> np.ndarray | None:
    n = H.shape[1]
    red = _unit_echelon(tower, H)
    if red is None:
        return None
    X, piv = red
    free = [j for j in range(n) if j not in set(piv)]
    G = np.zeros((len(free), n, tower.degree), dtype=np.int64)
    for a, j in enumerate(free):
        G[a, j] = tower.one
        for i, pc in enumerate(piv):
            G[a, pc] = (-X[i, j]) % tower.q
    return G


def gen_code(tower: GaloisRing, n: int, k: int, lam: int, rng: np.random.Generator) -> LrpcCode:
    """Random LRPC code with the unity, maximal-row-span, base-ring and
    unique-decoding properties and rk(H) = frk(H) = n - k."""
    _check_params(tower, n, k, lam)
    R = tower.base
    nk = n - k
    for _ in range(RETRY_CAP):
        f = _draw_f(tower, lam, rng)
        coeffs = _draw_coeff_rows(R, n, nk, lam, rng)
        code_h_ext = coeffs.transpose(0, 2, 1, 3).reshape(nk * lam, n, R.degree)
        _, _, _, vals = linalg._snf(R, code_h_ext, want_s=False, want_t=False)
        if len(vals) != n or any(vals):
            continue
        H = _assemble_h(tower, coeffs, f)
        G = _generator_from_h(tower, H)
        if G is None:
            continue
        return LrpcCode(tower, n, k, lam, f, H, coeffs, G)
    raise ConstructionFailure(f"no valid code after {RETRY_CAP} attempts")


def decompose(tower: GaloisRing, f: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Coefficients of every H entry over the basis f; raises DecompositionFailure."""
    R = tower.base
    lam = f.shape[0]
    basis = f.reshape(lam, tower.deg, tower.e).transpose(1, 0, 2)  # (m, lam, s)
    nk, n = H.shape[:2]
    rhs = H.reshape(nk * n, tower.deg, tower.e).transpose(1, 0, 2)  # (m, nk*n, s)
    X, ok = linalg._solve(R, basis, rhs)
    if not ok.all():
        raise DecompositionFailure("a parity-check entry is not in the span of f")
    return X.transpose(1, 0, 2).reshape(nk, n, lam, tower.e)


def build_h_ext(code: LrpcCode) -> np.ndarray:
    coeffs = decompose(code.tower, code.f, code.H)
    nk = code.n - code.k
    return coeffs.transpose(0, 2, 1, 3).reshape(nk * code.lam, code.n, code.tower.e)


def generator(code: LrpcCode) -> np.ndarray:
    return code.G


def encode(code: LrpcCode, msg) -> np.ndarray:
    S = code.tower
    msg = S.check(np.asarray(msg, dtype=np.int64))
    if msg.shape[0] != code.k:
        raise ParameterError(f"message must have length k = {code.k}")
    return S.mul(msg[:, None, :], code.G).sum(axis=0) % S.q


def extract_message(code: LrpcCode, codeword) -> np.ndarray:
    """Inverse of encode on codewords."""
    return np.asarray(codeword, dtype=np.int64)[list(code.info_set)].copy()


def syndrome(code: LrpcCode, word) -> np.ndarray:
    S = code.tower
    word = S.check(np.asarray(word, dtype=np.int64))
    if word.shape[0] != code.n:
        raise ParameterError(f"word must have length n = {code.n}")
    return S.mul(code.H, word[None, :, :]).sum(axis=1) % S.q


def check_properties(code: LrpcCode) -> dict[str, bool]:
    """Re-check every structural property of a code instance."""
    S, R = code.tower, code.tower.base
    nk = code.n - code.k
    out: dict[str, bool] = {}
    out["base_ring"] = bool(np.array_equal(code.f[0], S.one))
    out["free_F"] = code.F.frk == code.lam
    try:
        coeffs = decompose(S, code.f, code.H)
        out["decomposes"] = True
    except DecompositionFailure:
        out["decomposes"] = False
        return out
    vals = R.valuation(coeffs)
    nonzero = coeffs.any(axis=-1)
    out["unity"] = bool(np.all((vals == 0) | ~nonzero))
    row_span = []
    for i in range(nk):
        _, _, _, v = linalg._snf(R, coeffs[i], want_s=False, want_t=False)
        row_span.append(sum(1 for x in v if x == 0) == code.lam)
    out["max_row_span"] = all(row_span)
    Hx = coeffs.transpose(0, 2, 1, 3).reshape(nk * code.lam, code.n, S.e)
    _, _, _, v = linalg._snf(R, Hx, want_s=False, want_t=False)
    out["unique_decoding"] = code.lam * nk >= code.n and len(v) == code.n and not any(v)
    _, _, _, v = linalg._snf(S, code.H, want_s=False, want_t=False)
    out["full_rank_H"] = len(v) == nk and not any(v)
    HG = S.mul(code.H[:, None, :, :], code.G[None, :, :, :]).sum(axis=2) % S.q
    out["HG_zero"] = not HG.any()
    _, _, _, v = linalg._snf(S, code.G, want_s=False, want_t=False)
    out["full_rank_G"] = len(v) == code.k and not any(v)
    return out


def code_from_dict(obj: dict) -> LrpcCode:
    tower = ring_from_dict(obj["tower"])
    n, k, lam = int(obj["n"]), int(obj["k"]), int(obj["lambda"])
    _check_params(tower, n, k, lam)
    f = np.asarray(obj["f"], dtype=np.int64).reshape(lam, tower.degree) % tower.q
    H = np.asarray(obj["H"], dtype=np.int64).reshape(n - k, n, tower.degree) % tower.q
    coeffs = decompose(tower, f, H)
    G = _generator_from_h(tower, H)
    if G is None:
        raise ParameterError("H does not have full free rank n - k")
    return LrpcCode(tower, n, k, lam, f, H, coeffs, G)


def code_from_json(text: str) -> LrpcCode:
    return code_from_dict(json.loads(text))


def load_code(path) -> LrpcCode:
    with open(path) as fh:
        return code_from_json(fh.read())


def save_code(code: LrpcCode, path) -> None:
    with open(path, "w") as fh:
        json.dump(code.to_dict(), fh)
        fh.write("\n")
