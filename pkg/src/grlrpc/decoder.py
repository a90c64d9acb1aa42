"""Syndrome-space decoder for LRPC codes and its per-condition diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .lrpc import LrpcCode, syndrome
from .rings import GaloisRing
from .submodules import (
    SubModule,
    _as_rows,
    _combine,
    canonicalize,
    intersect,
    module_eq,
    product_module,
    support,
    zero_module,
)

__all__ = [
    "DecodeOutcome",
    "ErasureInconsistent",
    "ErasureAmbiguous",
    "decode",
    "erasure_decode",
    "diagnose",
    "syndrome_space",
    "candidate_support",
]

SUCCESS = "Success"
FAILURE = "Failure"
ERASURE_INCONSISTENT = "ErasureInconsistent"
ERASURE_AMBIGUOUS = "ErasureAmbiguous"
VERIFICATION_FAILED = "VerificationFailed"


class ErasureInconsistent(Exception):
    """No error vector with the given support explains the syndrome."""


class ErasureAmbiguous(Exception):
    """More than one error vector with the given support explains the syndrome."""


@dataclass
class DecodeOutcome:
    status: str
    codeword: np.ndarray | None = None
    error: np.ndarray | None = None
    reason: str | None = None
    diagnostics: dict[str, bool] | None = None
    support: SubModule | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.status == SUCCESS


def syndrome_space(code: LrpcCode, s: np.ndarray) -> SubModule:
    return canonicalize(code.tower, s)


def candidate_support(code: LrpcCode, Ssp: SubModule) -> SubModule:
    """Intersection of the spaces f_i^{-1} * Ssp."""
    S = code.tower
    if Ssp.rank == 0:
        return zero_module(S)
    shifted = []
    for finv in code.f_inv:
        if np.array_equal(finv, S.one):
            shifted.append(Ssp)
        else:
            elems = S.mul(Ssp.elements, finv[None, :])
            shifted.append(_raw_module(S, elems, Ssp))
    return intersect(shifted)


def _raw_module(S: GaloisRing, elems: np.ndarray, like: SubModule) -> SubModule:
    # f^{-1} maps a p-shaped basis to a p-shaped basis; only its generator
    # rows are consumed by the intersection, so no canonical form is needed.
    rows = _as_rows(S, elems)
    return SubModule(S, rows // (S.p ** like.levels)[:, None, None], like.levels.copy(), like.pivots.copy())


def erasure_decode(code: LrpcCode, E: SubModule, s: np.ndarray,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """The error vector with support inside E and syndrome s.

    Raises ErasureInconsistent or ErasureAmbiguous.  With ``rng`` the
    syndrome is expanded through a random representation instead of the
    default one; the result must not change.
    """
    S = code.tower
    R = S.base
    lam, nk, n = code.lam, code.n - code.k, code.n
    s = np.asarray(s, dtype=np.int64) % S.q
    t = E.rank
    if t == 0:
        if s.any():
            raise ErasureInconsistent("zero support but nonzero syndrome")
        return np.zeros((n, S.degree), dtype=np.int64)
    Sx, Tx, vals = code.h_ext_snf
    if len(vals) < n or any(vals):
        raise ErasureAmbiguous("H_ext does not have full free rank")
    # product basis f_l * eps_k, column index k*lam + l
    prods = S.mul(E.elements[:, None, :], code.f[None, :, :]).reshape(t * lam, S.degree)
    P = prods.reshape(t * lam, S.deg, S.e).transpose(1, 0, 2)  # (m, t*lam, s)
    rhs = s.reshape(nk, S.deg, S.e).transpose(1, 0, 2)  # (m, nk, s)
    X, ok = linalg._solve(R, P, rhs)
    if not ok.all():
        raise ErasureInconsistent("syndrome is not in the product space")
    if rng is not None:
        K = linalg._right_kernel(R, P)  # (k, t*lam, s)
        if len(K):
            C = R.random(rng, (len(K), nk))
            X = (X + R.mul(K[:, :, None, :], C[:, None, :, :]).sum(axis=0)) % S.q
    # s^(k) has entries X[k*lam + l, i] at position i*lam + l
    Xk = X.reshape(t, lam, nk, S.e).transpose(0, 2, 1, 3).reshape(t, nk * lam, S.e)
    rhs_k = Xk.transpose(1, 0, 2)  # (nk*lam, t, s)
    # the coefficient of eps_k only matters modulo p^(r - v(eps_k))
    kexp = S.r - E.levels
    Y, ok = linalg._solve_with(R, Sx, Tx, vals, rhs_k, modulus_exp=kexp)
    if not ok.all():
        raise ErasureInconsistent("an erasure system has no solution")
    return _combine(S, Y, E.gens)


def decode(code: LrpcCode, received, planted_error=None) -> DecodeOutcome:
    """Decode a received word.  With ``planted_error`` the outcome also carries
    the three success-condition diagnostics."""
    S = code.tower
    received = S.check(np.asarray(received, dtype=np.int64)) % S.q
    s = syndrome(code, received)
    Ssp = syndrome_space(code, s)
    Ep = candidate_support(code, Ssp)
    diag = None
    if planted_error is not None:
        diag = _diagnose(code, np.asarray(planted_error, dtype=np.int64) % S.q, Ssp, Ep)
    try:
        e = erasure_decode(code, Ep, s)
    except ErasureInconsistent:
        return DecodeOutcome(FAILURE, reason=ERASURE_INCONSISTENT, diagnostics=diag, support=Ep)
    except ErasureAmbiguous:
        return DecodeOutcome(FAILURE, reason=ERASURE_AMBIGUOUS, diagnostics=diag, support=Ep)
    c = (received - e) % S.q
    if syndrome(code, c).any():
        return DecodeOutcome(FAILURE, reason=VERIFICATION_FAILED, diagnostics=diag, support=Ep)
    return DecodeOutcome(SUCCESS, codeword=c, error=e, diagnostics=diag, support=Ep)


def _diagnose(code: LrpcCode, error: np.ndarray, Ssp: SubModule, Ep: SubModule) -> dict[str, bool]:
    S = code.tower
    E = support(S, error)
    EF = product_module(E, code.F)
    return {
        "product_ok": EF.profile == E.profile * code.F.profile,
        "syndrome_ok": module_eq(Ssp, EF),
        "intersection_ok": module_eq(Ep, E),
    }


def diagnose(code: LrpcCode, error) -> dict[str, bool]:
    """Which of the product, syndrome and intersection conditions hold for an error."""
    S = code.tower
    error = S.check(np.asarray(error, dtype=np.int64)) % S.q
    s = syndrome(code, error)
    Ssp = syndrome_space(code, s)
    return _diagnose(code, error, Ssp, candidate_support(code, Ssp))
