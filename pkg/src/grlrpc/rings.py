"""Arithmetic in Galois rings GR(p^r, s) and in towers S = R[z]/(H).

Elements are numpy ``int64`` arrays whose trailing axis holds the canonical
coefficients, each reduced into ``[0, p^r)``.  A ring built directly over
``Z_{p^r}`` with a modulus of degree ``s`` has ``degree == s``.  A tower of
degree ``m`` over such a ring stores its elements flat: coefficient ``k*s + x``
belongs to ``z^k w^x`` where ``w`` generates the base ring.  Everything in this
package (vectors, matrices, batches) is just a stack of such arrays.
"""

from __future__ import annotations

import itertools
import json
import math
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import NonUnitError, ParameterError

__all__ = [
    "GaloisRing",
    "make_ring",
    "make_tower",
    "prime_ring",
    "ext_to_matrix",
    "matrix_to_ext",
    "ring_from_json",
    "make_rng",
]

# Dense multiplication tensors are used up to this flat degree; above it the
# product goes through an FFT convolution plus a reduction matrix.
_DENSE_LIMIT = 96
_MAX_FIELD = 1 << 20


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Counter-based generator used for every stochastic routine."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class GaloisRing:
    """A Galois ring, either ``Z_{p^r}[w]/(h)`` or an extension ``R[z]/(H)``.

    Use :func:`make_ring` and :func:`make_tower` rather than calling this
    directly; they pick deterministic moduli.
    """

    def __init__(self, p: int, r: int, modulus=None, base: "GaloisRing | None" = None):
        self.p = int(p)
        self.r = int(r)
        self.q = self.p**self.r
        self.base = base
        if base is None:
            # Z_{p^r} itself
            self.modulus = None
            self.deg = 1
            self.e = 1
        else:
            if base.base is not None and base.base.base is not None:
                raise ParameterError("towers deeper than two levels are not supported")
            mod = np.asarray(modulus, dtype=np.int64) % self.q
            if mod.ndim == 1:
                mod = mod[:, None]
            if mod.shape[1] != base.degree:
                raise ParameterError("modulus coefficients must be base-ring elements")
            if not (mod[-1][0] == 1 and not mod[-1][1:].any()):
                raise ParameterError("modulus must be monic")
            self.modulus = mod
            self.deg = mod.shape[0] - 1
            self.e = base.degree
        self.degree = self.deg * self.e
        self._vtab = self._valuation_table()
        self._inv_cache: dict[bytes, np.ndarray] = {}
        if base is not None:
            self._build_tables()

    # ------------------------------------------------------------------ setup
    def _valuation_table(self) -> np.ndarray:
        vals = np.arange(self.q)
        vt = np.full(self.q, self.r, dtype=np.int64)
        nz = vals > 0
        v = np.zeros(self.q, dtype=np.int64)
        x = vals.copy()
        for _ in range(self.r):
            div = nz & (x % self.p == 0)
            v[div] += 1
            x[div] //= self.p
        vt[nz] = v[nz]
        return vt

    def _build_tables(self) -> None:
        B, deg, e, q = self.base, self.deg, self.e, self.q
        # z^a mod H for a < 2*deg - 1, as (deg, e) arrays over the base
        zp = np.zeros((max(2 * deg - 1, 1), deg, e), dtype=np.int64)
        cur = np.zeros((deg + 1, e), dtype=np.int64)
        cur[0] = B.one
        for a in range(2 * deg - 1):
            zp[a] = cur[:deg]
            nxt = np.zeros_like(cur)
            nxt[1:] = cur[:-1]
            top = nxt[deg].copy()
            nxt[deg] = 0
            nxt[:deg] = (nxt[:deg] - B.mul(top[None, :], self.modulus[:deg])) % q
            cur = nxt
        self._zpow = zp
        if B.base is None:
            wp = np.ones((1, 1), dtype=np.int64)
        else:
            wp = B._zpow.reshape(B._zpow.shape[0], -1)
        self._wpow = wp  # (2e-1, e)
        ne = wp.shape[0]
        L = np.zeros((2 * deg - 1, ne, deg, e), dtype=np.int64)
        for b in range(ne):
            L[:, b] = B.mul(zp, wp[b][None, None, :])
        self._red = L.reshape(2 * deg - 1, ne, self.degree)
        self._separable = not self.modulus[:, 1:].any()
        if self.degree <= _DENSE_LIMIT:
            d = self.degree
            idx = np.arange(d)
            zi, xi = idx // e, idx % e
            T = self._red[zi[:, None] + zi[None, :], xi[:, None] + xi[None, :]]
            self._tensor = T.reshape(d * d, d)
            self._tensor_f = self._tensor.astype(np.float64)
            self._float_ok = d * d * (q - 1) ** 3 < 2**52
        else:
            self._tensor = None

    # ------------------------------------------------------------- properties
    @property
    def s(self) -> int:
        """Degree over Z_{p^r} (the ``s`` of GR(p^r, s))."""
        return self.degree

    @property
    def m(self) -> int:
        """Degree over the base ring."""
        return self.deg

    @property
    def is_tower(self) -> bool:
        return self.base is not None and self.base.base is not None

    @property
    def size(self) -> int:
        return self.q**self.degree

    @cached_property
    def zero(self) -> np.ndarray:
        return np.zeros(self.degree, dtype=np.int64)

    @cached_property
    def one(self) -> np.ndarray:
        o = np.zeros(self.degree, dtype=np.int64)
        o[0] = 1
        return o

    @cached_property
    def gen(self) -> np.ndarray:
        """Class of the adjoined variable (``z`` for towers, ``w`` otherwise)."""
        g = np.zeros(self.degree, dtype=np.int64)
        if self.base is None:
            g[0] = 1
        elif self.deg == 1:
            g[:] = (-self.modulus[0]) % self.q
        else:
            g[self.e] = 1
        return g

    def __repr__(self) -> str:
        if self.base is None:
            return f"Z_{self.q}"
        if self.is_tower:
            return f"GR({self.q},{self.degree}) = {self.base!r}[z]/({self.format_poly(self.modulus)})"
        return f"GR({self.q},{self.degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaloisRing):
            return NotImplemented
        if (self.p, self.r, self.deg, self.e) != (other.p, other.r, other.deg, other.e):
            return False
        if self.base is None:
            return True
        return self.base == other.base and np.array_equal(self.modulus, other.modulus)

    def __hash__(self) -> int:
        mod = None if self.modulus is None else self.modulus.tobytes()
        return hash((self.p, self.r, self.deg, self.e, mod, self.base))

    # ------------------------------------------------------------ conversion
    def elem(self, x) -> np.ndarray:
        """Build an element from an int, a flat coefficient list or nested lists.

        Nested input lists the coefficients over the base ring, lowest degree
        first; shorter input is zero padded.
        """
        if isinstance(x, (int, np.integer)):
            out = self.zero.copy()
            out[0] = int(x) % self.q
            return out
        arr = x
        if isinstance(x, (list, tuple)) and any(isinstance(c, (list, tuple, np.ndarray)) for c in x):
            if self.base is None:
                raise ParameterError("nested coefficients need a ring with a base")
            arr = np.zeros((self.deg, self.e), dtype=np.int64)
            for k, c in enumerate(x):
                arr[k] = self.base.elem(list(c) if not isinstance(c, (int, np.integer)) else int(c))
            return arr.reshape(-1) % self.q
        arr = np.asarray(arr, dtype=np.int64).reshape(-1)
        if arr.size > self.degree:
            raise ParameterError(f"too many coefficients for {self!r}")
        if self.e > 1 and arr.size <= self.deg and arr.size != self.degree:
            # list of base-ring constants, one per power of z
            out = np.zeros((self.deg, self.e), dtype=np.int64)
            out[: arr.size, 0] = arr
            return out.reshape(-1) % self.q
        out = self.zero.copy()
        out[: arr.size] = arr
        return out % self.q

    def check(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if a.shape[-1:] != (self.degree,):
            raise ParameterError(f"element shape {a.shape} does not belong to {self!r}")
        return a

    def format_elem(self, a) -> str:
        a = np.asarray(a).reshape(-1)
        if self.base is None:
            return str(int(a[0]))
        coeffs = a.reshape(self.deg, self.e)
        var = "z" if self.is_tower else "w"
        terms = []
        for k in range(self.deg - 1, -1, -1):
            c = coeffs[k]
            if not c.any():
                continue
            cs = self.base.format_elem(c)
            if self.e > 1 and np.count_nonzero(c) > 1:
                cs = f"({cs})"
            mon = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            if k == 0:
                terms.append(cs)
            elif cs == "1":
                terms.append(mon)
            else:
                terms.append(f"{cs}{mon}")
        return "+".join(terms) if terms else "0"

    def format_poly(self, coeffs) -> str:
        coeffs = np.asarray(coeffs).reshape(-1, self.base.degree if self.base else 1)
        parts = []
        for k in range(coeffs.shape[0] - 1, -1, -1):
            c = coeffs[k]
            if not c.any():
                continue
            cs = self.base.format_elem(c) if self.base is not None else str(int(c[0]))
            if np.count_nonzero(c) > 1:
                cs = f"({cs})"
            mon = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            parts.append(cs if k == 0 else (mon if cs == "1" else f"{cs}{mon}"))
        return "+".join(parts) if parts else "0"

    # ------------------------------------------------------------ arithmetic
    def add(self, a, b) -> np.ndarray:
        return (np.asarray(a) + np.asarray(b)) % self.q

    def sub(self, a, b) -> np.ndarray:
        return (np.asarray(a) - np.asarray(b)) % self.q

    def neg(self, a) -> np.ndarray:
        return (-np.asarray(a)) % self.q

    def mul(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting over leading axes."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        d = self.degree
        if a.shape[-1] != d or b.shape[-1] != d:
            raise ParameterError(f"operands do not belong to {self!r}")
        if d == 1:
            return (a * b) % self.q
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        A = np.broadcast_to(a, shape + (d,)).reshape(-1, d)
        B = np.broadcast_to(b, shape + (d,)).reshape(-1, d)
        if A.shape[0] == 0:
            return np.zeros(shape + (d,), dtype=np.int64)
        if self._tensor is not None:
            out = self._mul_dense(A, B)
        else:
            out = self._mul_fft(A, B)
        return out.reshape(shape + (d,))

    def _mul_dense(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        d, q = self.degree, self.q
        n = A.shape[0]
        step = max(1, (1 << 21) // (d * d))
        out = np.empty((n, d), dtype=np.int64)
        for lo in range(0, n, step):
            a, b = A[lo : lo + step], B[lo : lo + step]
            if self._float_ok:
                outer = (a[:, :, None].astype(np.float64) * b[:, None, :]).reshape(-1, d * d)
                out[lo : lo + step] = (outer @ self._tensor_f).astype(np.int64) % q
            else:
                outer = ((a[:, :, None] * b[:, None, :]) % q).reshape(-1, d * d)
                out[lo : lo + step] = (outer @ self._tensor) % q
        return out

    def _mul_fft(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        deg, e, q = self.deg, self.e, self.q
        n = A.shape[0]
        f1 = 1 << (2 * deg - 2).bit_length()
        f2 = 2 * e - 1
        out = np.empty((n, self.degree), dtype=np.int64)
        step = max(1, (1 << 22) // (f1 * max(f2, 1) * 2))
        red = self._red
        ne = red.shape[1]
        for lo in range(0, n, step):
            a = A[lo : lo + step].reshape(-1, deg, e).astype(np.float64)
            b = B[lo : lo + step].reshape(-1, deg, e).astype(np.float64)
            if e == 1:
                fa = np.fft.rfft(a[:, :, 0], n=f1)
                fb = np.fft.rfft(b[:, :, 0], n=f1)
                c = np.fft.irfft(fa * fb, n=f1)[:, : 2 * deg - 1, None]
            else:
                fa = np.fft.fft2(a, s=(f1, f2))
                fb = np.fft.fft2(b, s=(f1, f2))
                c = np.fft.ifft2(fa * fb).real[:, : 2 * deg - 1, :f2]
            c = np.rint(c).astype(np.int64) % q
            k = c.shape[0]
            if self._separable:
                # reduce powers of w first, then powers of z with integer matrices
                cw = (c.astype(np.float64) @ self._wred_f).astype(np.int64) % q  # (k, 2deg-1, e)
                cz = np.swapaxes(cw, 1, 2).astype(np.float64) @ self._zred_f  # (k, e, deg)
                out[lo : lo + k] = (np.swapaxes(cz, 1, 2).astype(np.int64) % q).reshape(k, -1)
            else:
                flat = c.reshape(k, -1).astype(np.float64)
                out[lo : lo + k] = (flat @ red.reshape(-1, self.degree).astype(np.float64)).astype(np.int64) % q
        return out

    @cached_property
    def _wred_f(self) -> np.ndarray:
        # (2e-1, e): w^b reduced in the base ring
        return self._wpow.astype(np.float64)

    @cached_property
    def _zred_f(self) -> np.ndarray:
        # (2deg-1, deg): z^a mod H for an H with constant coefficients
        return self._zpow[:, :, 0].astype(np.float64)

    def scale(self, a, c) -> np.ndarray:
        """Multiply tower elements ``a`` by base-ring scalars ``c`` (broadcasting)."""
        if self.base is None:
            return self.mul(a, c)
        a = np.asarray(a, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        sh = a.shape[:-1] + (self.deg, self.e)
        prod = self.base.mul(a.reshape(sh), c[..., None, :])
        return prod.reshape(prod.shape[:-2] + (self.degree,))

    def embed(self, c) -> np.ndarray:
        """Embed base-ring elements as constants."""
        c = np.asarray(c, dtype=np.int64)
        out = np.zeros(c.shape[:-1] + (self.degree,), dtype=np.int64)
        out[..., : self.e] = c
        return out

    def power(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e < 0:
            if a.ndim != 1:
                raise ParameterError("negative powers only for single elements")
            return self.power(self.inverse(a), -e)
        result = np.broadcast_to(self.one, a.shape).copy()
        base = a.copy()
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product of (i, j, d) and (j, k, d) arrays."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.shape[1] != B.shape[0]:
            raise ParameterError(f"shape mismatch {A.shape[:2]} @ {B.shape[:2]}")
        if self.degree == 1 and A.shape[1] * (self.q - 1) ** 2 < 2**62:
            return ((A[..., 0] @ B[..., 0]) % self.q)[..., None]
        out = np.zeros((A.shape[0], B.shape[1], self.degree), dtype=np.int64)
        for j in range(A.shape[1]):
            out = (out + self.mul(A[:, j, None, :], B[None, j, :, :])) % self.q
        return out

    # -------------------------------------------------------------- structure
    def valuation(self, a) -> np.ndarray | int:
        """Largest j with a in p^j R; zero maps to r.  Vectorized over leading axes."""
        a = np.asarray(a, dtype=np.int64)
        v = self._vtab[a].min(axis=-1) if self.degree > 1 else self._vtab[a[..., 0]]
        return int(v) if v.ndim == 0 else v

    def is_unit(self, a) -> bool:
        return self.valuation(a) == 0

    def div_p(self, a, v) -> np.ndarray:
        """Exact division by p^v (caller guarantees divisibility)."""
        return np.asarray(a) // (self.p ** np.asarray(v))

    def inverse(self, a) -> np.ndarray:
        a = self.check(a).reshape(-1) % self.q
        if self.valuation(a) > 0:
            raise NonUnitError(f"{self.format_elem(a)} is not a unit in {self!r}")
        if self.degree == 1:
            return np.array([pow(int(a[0]), -1, self.q)], dtype=np.int64)
        key = a.tobytes()
        hit = self._inv_cache.get(key)
        if hit is not None:
            return hit.copy()
        try:
            inv = self._euclid_inverse(a)
        except _Stall:
            inv = self._lifted_inverse(a) if self.r > 1 else None
        if inv is None or not np.array_equal(self.mul(a, inv), self.one):
            inv = self._linear_inverse(a)
        if len(self._inv_cache) < 1 << 16:
            self._inv_cache[key] = inv
        return inv.copy()

    def inverses(self, a) -> np.ndarray:
        """Inverse of every element of a stack of units."""
        a = np.asarray(a, dtype=np.int64)
        if self.degree == 1:
            return self._unit_inv_table[a]
        flat = a.reshape(-1, self.degree)
        return np.stack([self.inverse(x) for x in flat]).reshape(a.shape) if len(flat) else a.copy()

    @cached_property
    def _unit_inv_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        for c in range(self.q):
            if c % self.p:
                t[c] = pow(c, -1, self.q)
        return t

    def _euclid_inverse(self, a: np.ndarray) -> np.ndarray:
        B = self.base
        r0 = self.modulus.copy()
        r1 = a.reshape(self.deg, self.e).copy()
        s0 = np.zeros((1, self.e), dtype=np.int64)
        s1 = B.one[None, :].copy()
        while True:
            d1 = _pdeg(r1)
            if d1 < 0:
                raise _Stall
            lc = r1[d1]
            if B.valuation(lc) > 0:
                raise _Stall
            if d1 == 0:
                inv = B.mul(s1, B.inverse(lc)[None, :])
                out = np.zeros((self.deg, self.e), dtype=np.int64)
                n = min(inv.shape[0], self.deg)
                if _pdeg(inv) >= self.deg:
                    raise _Stall
                out[:n] = inv[:n]
                return out.reshape(-1) % self.q
            quo, rem = _pdivmod(B, r0, r1[: d1 + 1])
            r0, r1 = r1, rem
            s0, s1 = s1, _psub(B, s0, _pmul(B, quo, s1))

    @cached_property
    def _residue(self) -> "GaloisRing":
        """The same ring reduced modulo p, where Euclid never stalls."""
        if self.base is None:
            return GaloisRing(self.p, 1)
        return GaloisRing(self.p, 1, self.modulus % self.p, self.base._residue)

    def _lifted_inverse(self, a: np.ndarray) -> np.ndarray | None:
        # invert mod p, then Newton steps x <- x (2 - a x) double the precision
        try:
            x = self._residue._euclid_inverse(a % self.p)
        except _Stall:
            return None
        two = 2 * self.one
        prec = 1
        while prec < self.r:
            x = self.mul(x, (two - self.mul(a, x)) % self.q)
            prec *= 2
        return x

    def _linear_inverse(self, a: np.ndarray) -> np.ndarray:
        # column j of M is a * basis_j, so M x = 1 gives x = a^{-1}
        M = self.mul(a[None, :], np.eye(self.degree, dtype=np.int64)).T
        return _solve_unimodular(M, self.one, self.p, self.q)

    def teichmuller_lift(self, a) -> np.ndarray:
        """The Teichmüller representative congruent to ``a`` modulo p."""
        x = np.asarray(a, dtype=np.int64) % self.q
        for _ in range(self.degree * (self.r - 1)):
            x = self.power(x, self.p)
        return x

    def teichmueller(self, a) -> np.ndarray:
        """Digits t_0..t_{r-1} in the Teichmüller set with a = sum p^i t_i.

        Returns an array of shape ``(r,) + a.shape``.
        """
        x = np.asarray(a, dtype=np.int64) % self.q
        digits = []
        for _ in range(self.r):
            t = self.teichmuller_lift(x)
            digits.append(t)
            x = ((x - t) % self.q) // self.p
        return np.stack(digits)

    # --------------------------------------------------------------- sampling
    def random(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        return rng.integers(0, self.q, size=tuple(shape) + (self.degree,), dtype=np.int64)

    def random_units(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        x = self.random(rng, shape)
        bad = self.valuation(x) > 0
        while np.any(bad):
            x[bad] = self.random(rng, (int(np.count_nonzero(bad)),))
            bad = self.valuation(x) > 0
        return x

    def elements(self) -> np.ndarray:
        """All ring elements (only sensible for tiny rings)."""
        if self.size > 1 << 20:
            raise ParameterError("ring too large to enumerate")
        grid = np.array(list(itertools.product(range(self.q), repeat=self.degree)), dtype=np.int64)
        return grid[:, ::-1].copy()

    # ---------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        if self.base is None:
            return {"p": self.p, "r": self.r, "s": 1, "h": [(-1) % self.q, 1]}
        if self.is_tower:
            out = self.base.to_dict()
            out["m"] = self.deg
            out["H"] = [[int(c) for c in row] for row in self.modulus]
            return out
        return {"p": self.p, "r": self.r, "s": self.deg, "h": [int(c) for c in self.modulus[:, 0]]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class _Stall(Exception):
    """Euclid hit a non-unit leading coefficient."""


# polynomials over a base ring B are (len, B.degree) arrays, lowest degree first
def _pdeg(f: np.ndarray) -> int:
    nz = np.flatnonzero(f.any(axis=1))
    return int(nz[-1]) if nz.size else -1


def _pmul(B: GaloisRing, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = np.zeros((f.shape[0] + g.shape[0] - 1, f.shape[1]), dtype=np.int64)
    prod = B.mul(f[:, None, :], g[None, :, :])
    for i in range(f.shape[0]):
        out[i : i + g.shape[0]] += prod[i]
    return out % B.q


def _psub(B: GaloisRing, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = max(f.shape[0], g.shape[0])
    out = np.zeros((n, f.shape[1]), dtype=np.int64)
    out[: f.shape[0]] += f
    out[: g.shape[0]] -= g
    out %= B.q
    k = _pdeg(out)
    return out[: max(k + 1, 1)]


def _pdivmod(B: GaloisRing, num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Long division by a polynomial with unit leading coefficient."""
    num = num.copy() % B.q
    dd = den.shape[0] - 1
    inv = B.inverse(den[-1])
    dn = _pdeg(num)
    if dn < dd:
        return np.zeros((1, num.shape[1]), dtype=np.int64), num
    quo = np.zeros((dn - dd + 1, num.shape[1]), dtype=np.int64)
    for k in range(dn - dd, -1, -1):
        c = B.mul(num[k + dd], inv)
        if not c.any():
            continue
        quo[k] = c
        num[k : k + dd + 1] = (num[k : k + dd + 1] - B.mul(c[None, :], den)) % B.q
    return quo, num[: max(dd, 1)] if dd > 0 else np.zeros((1, num.shape[1]), dtype=np.int64)


def _solve_unimodular(M: np.ndarray, b: np.ndarray, p: int, q: int) -> np.ndarray:
    """Solve M x = b over Z_q for a matrix invertible modulo p."""
    n = M.shape[0]
    A = np.concatenate([M % q, (b % q)[:, None]], axis=1).astype(np.int64)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i, c] % p), None)
        if piv is None:
            raise NonUnitError("multiplication matrix is singular")
        A[[c, piv]] = A[[piv, c]]
        A[c] = (A[c] * pow(int(A[c, c]), -1, q)) % q
        others = np.arange(n) != c
        A[others] = (A[others] - A[others, c, None] * A[c]) % q
    return A[:, n].copy()


# --------------------------------------------------------------------------
# polynomials over finite fields, used only to pick moduli
def _fp_polymod(f: np.ndarray, g: np.ndarray, p: int) -> np.ndarray:
    f = f.copy() % p
    dg = len(g) - 1
    inv = pow(int(g[-1]), -1, p)
    for k in range(len(f) - 1, dg - 1, -1):
        c = (f[k] * inv) % p
        if c:
            f[k - dg : k + 1] = (f[k - dg : k + 1] - c * g) % p
    return f[:dg] if dg > 0 else np.zeros(1, dtype=np.int64)


def _fp_powmod_x(e: int, g: np.ndarray, p: int) -> np.ndarray:
    """x^e mod g over F_p."""
    dg = len(g) - 1
    result = np.zeros(dg, dtype=np.int64)
    result[0] = 1
    base = np.zeros(dg, dtype=np.int64)
    if dg == 1:
        base[0] = (-g[0] * pow(int(g[1]), -1, p)) % p
    else:
        base[1] = 1
    while e:
        if e & 1:
            result = _fp_polymod(np.convolve(result, base), g, p)
        e >>= 1
        if e:
            base = _fp_polymod(np.convolve(base, base), g, p)
    return result


def _is_primitive_fp(g: np.ndarray, p: int) -> bool:
    s = len(g) - 1
    if g[0] % p == 0:
        return False
    N = p**s - 1
    one = np.zeros(s, dtype=np.int64)
    one[0] = 1
    if not np.array_equal(_fp_powmod_x(N, g, p), one):
        return False
    return all(not np.array_equal(_fp_powmod_x(N // l, g, p), one) for l in _prime_factors(N))


def _codes(p: int, degree: int) -> Iterable[np.ndarray]:
    """Monic polynomials of a given degree in increasing integer encoding."""
    for code in range(p**degree):
        c = np.zeros(degree + 1, dtype=np.int64)
        x = code
        for i in range(degree):
            c[i] = x % p
            x //= p
        c[degree] = 1
        yield c


def primitive_poly(p: int, s: int) -> np.ndarray:
    """Smallest primitive polynomial of degree s over F_p (integer encoding)."""
    for c in _codes(p, s):
        if _is_primitive_fp(c, p):
            return c
    raise ParameterError(f"no primitive polynomial of degree {s} over F_{p}")


class _FieldPolys:
    """Polynomial arithmetic over the residue field F_{p^s}, using the
    arithmetic of a ring with r = 1."""

    def __init__(self, F: GaloisRing):
        self.F = F

    def trim(self, f: np.ndarray) -> np.ndarray:
        k = _pdeg(f)
        return f[: max(k + 1, 1)]

    def mul(self, f, g):
        return _pmul(self.F, f, g)

    def mod(self, f, g):
        if _pdeg(f) < _pdeg(g):
            return self.trim(f)
        _, rem = _pdivmod(self.F, f, self.trim(g))
        return self.trim(rem)

    def gcd(self, f, g):
        f, g = self.trim(f), self.trim(g)
        while _pdeg(g) >= 0:
            f, g = g, self.mod(f, g)
        return f

    def frob_matrix(self, g: np.ndarray) -> np.ndarray:
        """Matrix of h -> h^Q mod g (Q = field size), an F-linear map."""
        F = self.F
        Q = F.size
        dg = g.shape[0] - 1
        x = np.zeros((2, F.degree), dtype=np.int64)
        x[1] = F.one
        xq = self._powmod(x, Q, g)
        cols = [np.zeros((dg, F.degree), dtype=np.int64)]
        cols[0][0] = F.one
        for _ in range(1, dg):
            cur = self.mod(self.mul(cols[-1], xq), g)
            pad = np.zeros((dg, F.degree), dtype=np.int64)
            pad[: cur.shape[0]] = cur
            cols.append(pad)
        return np.stack(cols, axis=1)  # (dg rows, dg cols, F.degree)

    def _powmod(self, f, e, g):
        F = self.F
        res = F.one[None, :].copy()
        base = self.mod(f, g)
        while e:
            if e & 1:
                res = self.mod(self.mul(res, base), g)
            e >>= 1
            if e:
                base = self.mod(self.mul(base, base), g)
        return res

    def apply(self, M, v):
        return (self.F.mul(M, v[None, :, :]).sum(axis=1)) % self.F.q

    def is_irreducible(self, g: np.ndarray) -> bool:
        """Rabin's test for a monic polynomial over the field."""
        F = self.F
        dg = g.shape[0] - 1
        if dg == 1:
            return True
        if not g[0].any():
            return False
        M = self.frob_matrix(g)
        x = np.zeros((dg, F.degree), dtype=np.int64)
        x[1] = F.one
        iterates = [x]
        for _ in range(dg):
            iterates.append(self.apply(M, iterates[-1]))
        if not np.array_equal(iterates[dg], x):
            return False
        for l in _prime_factors(dg):
            diff = (iterates[dg // l] - x) % F.q
            if _pdeg(self.gcd(g, diff)) > 0:
                return False
        return True


def _irreducible_fp_fast(p: int, m: int) -> np.ndarray:
    """Smallest monic irreducible of degree m over F_p via Rabin's test with
    Frobenius matrices and integer arithmetic."""
    for c in _codes(p, m):
        if m > 1 and c[0] == 0:
            continue
        if p == 2 and m > 1 and int(c.sum()) % 2 == 0:
            continue  # divisible by z + 1
        if _rabin_fp(c, p):
            return c
    raise ParameterError(f"no irreducible polynomial of degree {m} over F_{p}")


def _rabin_fp(g: np.ndarray, p: int) -> bool:
    m = len(g) - 1
    if m == 1:
        return True
    # reduction matrix: rows are z^(m+i) mod g for i < m-1
    red = np.zeros((max(m - 1, 1), m), dtype=np.int64)
    cur = (-g[:m]) % p
    for i in range(m - 1):
        red[i] = cur
        top = cur[-1]
        cur = np.concatenate([[0], cur[:-1]])
        cur = (cur - top * g[:m]) % p

    def mulmod(a, b):
        c = np.convolve(a, b)
        low = c[:m].copy()
        if len(c) > m:
            low = low + c[m:] @ red[: len(c) - m]
        return low % p

    # columns: z^(p*j) mod g
    xp = np.zeros(m, dtype=np.int64)
    xp[0] = 1
    zvec = np.zeros(m, dtype=np.int64)
    zvec[1] = 1
    e, base = p, zvec.copy()
    acc = xp.copy()
    while e:
        if e & 1:
            acc = mulmod(acc, base)
        e >>= 1
        if e:
            base = mulmod(base, base)
    cols = [xp]
    for _ in range(1, m):
        cols.append(mulmod(cols[-1], acc))
    M = np.stack(cols, axis=1)
    it = [zvec]
    for _ in range(m):
        it.append((M @ it[-1]) % p)
    if not np.array_equal(it[m], zvec):
        return False
    Fp = _FieldPolys(prime_ring(p, 1))
    for l in _prime_factors(m):
        diff = ((it[m // l] - zvec) % p)[:, None]
        if _pdeg(Fp.gcd(g[:, None].copy(), diff)) > 0:
            return False
    return True


# --------------------------------------------------------------------------
_PRIME_RINGS: dict[tuple[int, int], GaloisRing] = {}


def prime_ring(p: int, r: int) -> GaloisRing:
    """Z_{p^r} as a degree-one ring without a modulus."""
    key = (p, r)
    if key not in _PRIME_RINGS:
        _PRIME_RINGS[key] = GaloisRing(p, r)
    return _PRIME_RINGS[key]


_RING_CACHE: dict[tuple[int, int, int], GaloisRing] = {}


def make_ring(p: int, r: int, s: int) -> GaloisRing:
    """GR(p^r, s) with the Hensel lift of the smallest primitive polynomial.

    For s = 1 the modulus is z - 1 and elements are residues mod p^r.
    """
    p, r, s = int(p), int(r), int(s)
    if not _is_prime(p):
        raise ParameterError(f"p = {p} is not prime")
    if r < 1 or s < 1:
        raise ParameterError("need r >= 1 and s >= 1")
    if p**s > _MAX_FIELD:
        raise ParameterError(f"residue field of size {p}^{s} is too large")
    key = (p, r, s)
    if key in _RING_CACHE:
        return _RING_CACHE[key]
    Z = prime_ring(p, r)
    if s == 1:
        ring = GaloisRing(p, r, [(-1) % p**r, 1], Z)
    else:
        g = primitive_poly(p, s)
        naive = GaloisRing(p, r, g, Z)
        h = hensel_lift(naive)
        ring = GaloisRing(p, r, h, Z)
        N = p**s - 1
        if not np.array_equal(ring.power(ring.gen, N), ring.one):
            raise ArithmeticError("Hensel lift does not divide z^(p^s-1) - 1")
    _RING_CACHE[key] = ring
    return ring


def hensel_lift(ring: GaloisRing) -> np.ndarray:
    """Monic h over Z_{p^r} congruent to ring's modulus mod p and dividing
    z^(p^s-1) - 1.  Built from the Teichmüller root and its conjugates."""
    p, r, s, q = ring.p, ring.r, ring.deg, ring.q
    zeta = ring.teichmuller_lift(ring.gen)
    poly = ring.one[None, :].copy()  # running product, coefficients in ring
    root = zeta
    for _ in range(s):
        lin = np.stack([ring.neg(root), ring.one])
        poly = _pmul(ring, poly, lin)
        root = ring.power(root, p)
    if poly[:, 1:].any():
        raise ArithmeticError("unreachable Hensel lift: coefficients are not constants")
    h = poly[:, 0] % q
    if not np.array_equal(h % p, ring.modulus[:, 0] % p):
        raise ArithmeticError("unreachable Hensel lift: wrong residue")
    return h


def make_tower(base: GaloisRing, m: int, H=None) -> GaloisRing:
    """The degree-m extension S = base[z]/(H).

    Without ``H``: if gcd(m, s) = 1, the smallest irreducible polynomial of
    degree m over F_p is used; otherwise the smallest irreducible over F_{p^s}
    (coefficients ordered by integer encoding).  ``H`` may be given as a list
    of integers (constant coefficients) or as nested base-ring elements.
    """
    if base.base is None or base.is_tower:
        raise ParameterError("base must come from make_ring")
    m = int(m)
    if m < 1:
        raise ParameterError("m must be positive")
    p, s = base.p, base.deg
    if H is None:
        if math.gcd(m, s) == 1:
            c = _irreducible_fp_fast(p, m)
            Hc = np.zeros((m + 1, s), dtype=np.int64)
            Hc[:, 0] = c
        else:
            Hc = _irreducible_over_residue_field(base, m)
    else:
        Hc = _coerce_modulus(base, H, m)
        F = make_ring(p, 1, s)
        red = Hc.reshape(m + 1, -1) % p
        if not _FieldPolys(F).is_irreducible(red):
            raise ParameterError("H is not irreducible modulo p")
    return GaloisRing(p, base.r, Hc, base)


def _coerce_modulus(base: GaloisRing, H, m: int) -> np.ndarray:
    rows = []
    for c in H:
        if isinstance(c, (int, np.integer)):
            rows.append(base.elem(int(c)))
        else:
            rows.append(base.elem(list(c)))
    Hc = np.stack(rows)
    if Hc.shape[0] != m + 1:
        raise ParameterError(f"H must have degree {m}")
    return Hc % base.q


def _irreducible_over_residue_field(base: GaloisRing, m: int) -> np.ndarray:
    p, s = base.p, base.deg
    F = make_ring(p, 1, s)
    # field coefficients must use the residue of base's modulus
    if not np.array_equal(F.modulus % p, base.modulus % p):
        F = GaloisRing(p, 1, base.modulus[:, 0] % p, prime_ring(p, 1))
    polys = _FieldPolys(F)
    Q = p**s
    elems = F.elements()  # index i has integer encoding i
    for code in range(Q**m):
        g = np.zeros((m + 1, s), dtype=np.int64)
        x = code
        for i in range(m):
            g[i] = elems[x % Q]
            x //= Q
        g[m] = F.one
        if polys.is_irreducible(g):
            return g % base.q
    raise ParameterError("no irreducible modulus found")


def ring_from_dict(obj: dict) -> GaloisRing:
    p, r, s = int(obj["p"]), int(obj["r"]), int(obj["s"])
    h = [int(c) for c in obj["h"]]
    if not _is_prime(p):
        raise ParameterError(f"p = {p} is not prime")
    Z = prime_ring(p, r)
    ring = GaloisRing(p, r, h, Z)
    if ring.deg != s:
        raise ParameterError("h has the wrong degree")
    if s > 1 and not np.array_equal(ring.power(ring.gen, p**s - 1), ring.one):
        raise ParameterError("h does not divide z^(p^s-1) - 1")
    if "m" in obj:
        return make_tower(ring, int(obj["m"]), obj["H"])
    return ring


def ring_from_json(text: str) -> GaloisRing:
    return ring_from_dict(json.loads(text))


def ext_to_matrix(tower: GaloisRing, vec) -> np.ndarray:
    """(n, sm) vector over S -> (m, n, s) matrix over R; column j holds vec_j."""
    vec = tower.check(vec)
    if vec.ndim != 2:
        raise ParameterError("expected a vector of tower elements")
    n = vec.shape[0]
    return vec.reshape(n, tower.deg, tower.e).transpose(1, 0, 2).copy()


def matrix_to_ext(tower: GaloisRing, mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.int64)
    if mat.ndim != 3 or mat.shape[0] != tower.deg or mat.shape[2] != tower.e:
        raise ParameterError(f"expected an ({tower.deg}, n, {tower.e}) matrix")
    return mat.transpose(1, 0, 2).reshape(mat.shape[1], tower.degree).copy()
