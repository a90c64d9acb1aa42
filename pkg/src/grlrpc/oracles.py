"""Exhaustive reference computations for tiny rings.

Nothing here uses elimination: solution sets and row modules are found by
enumerating every candidate vector, which keeps them independent of the
routines they are used to check.
"""

from __future__ import annotations

import itertools

import numpy as np

from .rings import GaloisRing, make_ring


def all_vectors(ring: GaloisRing, length: int) -> np.ndarray:
    """Every vector of R^length, shape (|R|^length, length, d)."""
    els = ring.elements()
    idx = np.array(list(itertools.product(range(len(els)), repeat=length)), dtype=np.int64)
    if length == 0:
        return np.zeros((1, 0, ring.degree), dtype=np.int64)
    return els[idx]


def _apply(ring: GaloisRing, A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """A x for every row x of X: (N, c, d) -> (N, rows, d)."""
    prod = ring.mul(A[None, :, :, :], X[:, None, :, :])
    return prod.sum(axis=2) % ring.q


def kernel_set(ring: GaloisRing, A: np.ndarray) -> set[bytes]:
    X = all_vectors(ring, A.shape[1])
    keep = ~_apply(ring, A, X).any(axis=(1, 2))
    return {x.tobytes() for x in X[keep]}


def solution_set(ring: GaloisRing, A: np.ndarray, b: np.ndarray) -> set[bytes]:
    X = all_vectors(ring, A.shape[1])
    keep = (_apply(ring, A, X) == b[None] % ring.q).all(axis=(1, 2))
    return {x.tobytes() for x in X[keep]}


def row_module_set(ring: GaloisRing, A: np.ndarray) -> set[bytes]:
    """All R-combinations of the rows of A."""
    C = all_vectors(ring, A.shape[0])
    comb = ring.mul(C[:, :, None, :], A[None, :, :, :]).sum(axis=1) % ring.q
    return {x.tobytes() for x in comb}


def span_set(ring: GaloisRing, rows: np.ndarray) -> set[bytes]:
    return row_module_set(ring, rows)


def residue_independent(F: GaloisRing, M: np.ndarray) -> np.ndarray:
    """For a stack of matrices over the field F, whether their rows are linearly
    independent: no nonzero combination vanishes."""
    a = M.shape[1]
    combos = all_vectors(F, a)[1:]  # skip the zero combination
    out = np.ones(M.shape[0], dtype=bool)
    for c in combos:
        v = F.mul(c[None, :, None, :], M).sum(axis=1) % F.q
        out &= v.any(axis=(1, 2))
    return out


def count_full_free_rank(p: int, r: int, s: int, a: int, b: int) -> int:
    """Number of a x b matrices over GR(p^r, s) whose rows are independent mod p."""
    R = make_ring(p, r, s)
    F = make_ring(p, 1, s)
    mats = all_vectors(R, a * b).reshape(-1, a, b, R.degree)
    res = mats % p
    return int(np.count_nonzero(residue_independent(F, res)))


def brute_rank_frk(ring: GaloisRing, A: np.ndarray) -> tuple[int, int]:
    """(rank, free rank) by enumeration.

    The rank is the number of generators of the row module M, which equals
    log_{p^s} |M / pM|.  The free rank is the largest set of rows that stays
    independent modulo p.
    """
    mod = row_module_set(ring, A)
    pM = {((np.frombuffer(x, dtype=np.int64) * ring.p) % ring.q).tobytes() for x in mod}
    rank = round(np.log(len(mod) / len(pM)) / np.log(ring.p**ring.degree))
    F = make_ring(ring.p, 1, ring.degree)
    res = A % ring.p
    frk = 0
    for k in range(A.shape[0], 0, -1):
        if any(residue_independent(F, res[list(sub)][None])[0]
               for sub in itertools.combinations(range(A.shape[0]), k)):
            frk = k
            break
    return rank, frk
