"""Quick brute-force cross-checks over tiny rings, used by ``grlrpc selftest``."""

from __future__ import annotations

import sys
import time

import numpy as np

from . import linalg, oracles
from .bounds import nm_count
from .rings import make_ring, make_rng, make_tower
from .submodules import canonicalize, membership, sample_module, RankProfile


def _check_ring_axioms(rng) -> bool:
    for R in (make_ring(2, 2, 1), make_ring(2, 2, 2), make_ring(3, 2, 1)):
        a, b, c = (R.random(rng, (200,)) for _ in range(3))
        if not np.array_equal(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c))):
            return False
        if not np.array_equal(R.mul(a, R.add(b, c)), R.add(R.mul(a, b), R.mul(a, c))):
            return False
    return True


def _check_kernels(rng) -> bool:
    Z4 = make_ring(2, 2, 1)
    for _ in range(30):
        rows, cols = rng.integers(1, 4), rng.integers(1, 4)
        A = Z4.random(rng, (rows, cols))
        K = linalg._right_kernel(Z4, A)
        if oracles.row_module_set(Z4, K) != oracles.kernel_set(Z4, A):
            return False
    return True


def _check_snf(rng) -> bool:
    for R in (make_ring(2, 2, 1), make_ring(2, 3, 1), make_ring(2, 2, 2)):
        for _ in range(50):
            A = R.random(rng, (4, 5))
            S, D, T, vals = linalg._snf(R, A)
            if not np.array_equal(R.matmul(R.matmul(S, A), T), D):
                return False
            if list(vals) != sorted(vals):
                return False
    return True


def _check_counts() -> bool:
    return (
        nm_count(2, 2, 1, 1, 2) == oracles.count_full_free_rank(2, 2, 1, 1, 2)
        and nm_count(2, 2, 2, 1, 2) == oracles.count_full_free_rank(2, 2, 2, 1, 2)
    )


def _check_modules(rng) -> bool:
    S = make_tower(make_ring(2, 2, 1), 3)
    R = S.base
    for _ in range(30):
        g = S.random(rng, (rng.integers(1, 4),))
        M = canonicalize(S, g)
        span = oracles.span_set(R, g.reshape(len(g), S.deg, 1))
        X = oracles.all_vectors(R, S.deg).reshape(-1, S.degree)
        inside = membership(M, X)
        if {x.tobytes() for x in X[inside]} != span:
            return False
    return True


CHECKS = [
    ("ring axioms on Z_4, GR(4,2), Z_9", _check_ring_axioms),
    ("SNF recomposition over Z_4, Z_8, GR(4,2)", _check_snf),
    ("right kernel vs enumeration over Z_4", _check_kernels),
    ("full-free-rank counts vs enumeration", lambda rng: _check_counts()),
    ("submodule membership vs enumerated spans", _check_modules),
]


def run_all(seed: int = 0, stream=sys.stdout) -> bool:
    rng = make_rng(seed)
    ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        good = bool(fn(rng))
        ok &= good
        print(f"{'PASS' if good else 'FAIL'}  {name}  ({time.perf_counter() - t0:.2f}s)", file=stream)
    return ok
