"""Finite field arithmetic over GF(p) and GF(2^m).

Elements are plain integers in ``[0, q)``.  For GF(2^m) the integer holds the
polynomial coefficients bit-packed (bit k is the coefficient of x^k).  All
element-wise operations accept scalars or numpy integer arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np


class ZeroInverse(ZeroDivisionError):
    """Raised when inverting the zero element."""


class OrderUnavailable(ValueError):
    """Raised when the requested root of unity does not exist in the field."""


class FieldError(ValueError):
    """Invalid field parameters."""


# Conventional primitive polynomials, bit-packed with the leading term.
PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,                # x^4 + x + 1
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,            # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,
    10: 0b10000001001,         # x^10 + x^3 + 1
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _pmul_mod(a: int, b: int, mod: int, m: int) -> int:
    """Carry-less multiply of two GF(2^m) elements reduced by ``mod``."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= mod
    return r


@dataclass(frozen=True)
class FieldSpec:
    """GF(q) with q = p^m.  Use :func:`GF` to construct one."""

    q: int
    p: int
    m: int
    modulus: tuple = ()
    alpha: int = 0
    _exp: np.ndarray = field(repr=False, compare=False, default=None)
    _log: np.ndarray = field(repr=False, compare=False, default=None)

    # -- construction -------------------------------------------------
    @staticmethod
    def create(q: int, modulus=None) -> "FieldSpec":
        if q < 2:
            raise FieldError(f"field size {q} < 2")
        if is_prime(q):
            p, m = q, 1
        else:
            m = q.bit_length() - 1
            if q != 1 << m:
                raise FieldError(f"unsupported field size {q}: need a prime or a power of 2")
            p = 2
        if m == 1:
            modulus_bits = None
            mod_tuple = ()
        else:
            if modulus is None:
                if m not in PRIMITIVE_POLYS:
                    raise FieldError(f"no default modulus for GF(2^{m})")
                modulus_bits = PRIMITIVE_POLYS[m]
            elif isinstance(modulus, int):
                modulus_bits = modulus
            else:
                # coefficient list, lowest degree first
                modulus_bits = sum(int(c) << k for k, c in enumerate(modulus))
            if modulus_bits.bit_length() - 1 != m:
                raise FieldError("modulus degree does not match extension degree")
            mod_tuple = tuple((modulus_bits >> k) & 1 for k in range(m + 1))

        def mul_int(a, b):
            if m == 1:
                return a * b % p
            return _pmul_mod(a, b, modulus_bits, m)

        n = q - 1
        factors = prime_factors(n) if n > 1 else []

        def has_full_order(g):
            for f in factors:
                if _pow_int(g, n // f, mul_int) == 1:
                    return False
            return _pow_int(g, n, mul_int) == 1

        alpha = None
        for g in range(1, q):
            if has_full_order(g):
                alpha = g
                break
        if alpha is None:
            raise FieldError("modulus is not irreducible: no element of order q-1")

        exp = np.zeros(2 * n + 1 if n else 2, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for k in range(n):
            exp[k] = x
            log[x] = k
            x = mul_int(x, alpha)
        if n:
            exp[n:2 * n] = exp[:n]
            exp[2 * n] = exp[0]
        else:
            exp[:] = 1
            log[1] = 0
        exp.setflags(write=False)
        log.setflags(write=False)
        return FieldSpec(q, p, m, mod_tuple, alpha, exp, log)

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        return {"q": self.q, "p": self.p, "m": self.m,
                "modulus": list(self.modulus), "alpha": self.alpha}

    @staticmethod
    def from_dict(d: dict) -> "FieldSpec":
        mod = d.get("modulus") or None
        f = GF(int(d["q"]), tuple(mod) if mod else None)
        if "alpha" in d and int(d["alpha"]) != f.alpha:
            raise FieldError("serialized primitive element disagrees with construction")
        return f

    # -- element-wise arithmetic ---------------------------------------
    @property
    def is_binary_ext(self) -> bool:
        return self.p == 2 and self.m > 1

    def add(self, a, b):
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return (np.asarray(a, dtype=np.int64) + b) % self.p if not _scalars(a, b) else (a + b) % self.p

    def neg(self, a):
        if self.p == 2:
            return a
        return (-np.asarray(a, dtype=np.int64)) % self.p if not _scalars(a) else (-a) % self.p

    def sub(self, a, b):
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return (np.asarray(a, dtype=np.int64) - b) % self.p if not _scalars(a, b) else (a - b) % self.p

    def mul(self, a, b):
        if self.m == 1:
            if _scalars(a, b):
                return a * b % self.p
            return np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64) % self.p
        if _scalars(a, b):
            if a == 0 or b == 0:
                return 0
            return int(self._exp[self._log[a] + self._log[b]])
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, r)

    def inv(self, a):
        if _scalars(a):
            if a == 0:
                raise ZeroInverse("inverse of zero")
            return int(self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)])
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroInverse("inverse of zero")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, k: int):
        """a**k for a scalar element; negative k allowed for a != 0."""
        if a == 0:
            if k < 0:
                raise ZeroInverse("negative power of zero")
            return 1 if k == 0 else 0
        return int(self._exp[(int(self._log[a]) * k) % (self.q - 1)])

    def exp(self, k):
        """alpha**k, vectorized over integer exponents."""
        return self._exp[np.asarray(k) % (self.q - 1)] if not _scalars(k) else int(self._exp[k % (self.q - 1)])

    def log(self, a):
        if _scalars(a):
            if a == 0:
                raise ZeroInverse("log of zero")
            return int(self._log[a])
        return self._log[np.asarray(a)]

    def order(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative order")
        n = self.q - 1
        k = n
        for f in prime_factors(n) if n > 1 else []:
            while k % f == 0 and self.pow(a, k // f) == 1:
                k //= f
        return k

    def root_of_unity(self, ell: int) -> int:
        if ell < 1:
            raise OrderUnavailable(f"root order {ell} < 1")
        if (self.q - 1) % ell:
            raise OrderUnavailable(f"{ell} does not divide q-1 = {self.q - 1}")
        return self.exp((self.q - 1) // ell)

    def element(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.q:
            raise FieldError(f"{v} is not an element of GF({self.q})")
        return v

    # -- linear algebra helpers -----------------------------------------
    def matvec(self, A, x):
        """A @ x over the field; x may carry trailing batch axes."""
        A = np.asarray(A, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        if self.m == 1:
            return np.tensordot(A, x, axes=(1, 0)) % self.p
        out = np.zeros((A.shape[0],) + x.shape[1:], dtype=np.int64)
        for j in range(A.shape[1]):
            out ^= self.mul(A[:, j].reshape((-1,) + (1,) * (x.ndim - 1)), x[j][None, ...])
        return out

    def sum(self, a, axis=0):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        return a.sum(axis=axis) % self.p

    @cached_property
    def py(self) -> "ScalarOps":
        """Plain-int arithmetic for tight scalar loops."""
        return ScalarOps(self)

    def __str__(self):
        return f"GF({self.q})"


class ScalarOps:
    """Scalar field arithmetic on python ints, avoiding numpy dispatch."""

    def __init__(self, f: FieldSpec):
        self.q = f.q
        self.p = f.p
        self.n = f.q - 1
        self.exp = [int(v) for v in f._exp]
        self.log = [int(v) for v in f._log]
        self.char2 = f.p == 2

    def add(self, a, b):
        return a ^ b if self.char2 else (a + b) % self.p

    def sub(self, a, b):
        return a ^ b if self.char2 else (a - b) % self.p

    def neg(self, a):
        return a if self.char2 else (-a) % self.p

    def mul(self, a, b):
        if not a or not b:
            return 0
        if not self.char2 and self.q == self.p:
            return a * b % self.p
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a):
        if not a:
            raise ZeroInverse("inverse of zero")
        return self.exp[(self.n - self.log[a]) % self.n]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, k):
        if not a:
            return 0 if k else 1
        return self.exp[(self.log[a] * k) % self.n]


def _pow_int(g, k, mul_int):
    r = 1
    while k:
        if k & 1:
            r = mul_int(r, g)
        g = mul_int(g, g)
        k >>= 1
    return r


def _scalars(*xs) -> bool:
    return all(isinstance(x, (int, np.integer)) for x in xs)


@lru_cache(maxsize=None)
def GF(q: int, modulus=None) -> FieldSpec:
    """Cached field constructor; ``modulus`` may be an int bit mask or coefficient tuple."""
    return FieldSpec.create(q, modulus)


def mul(a, b, f: FieldSpec):
    return f.mul(a, b)


def inv(a, f: FieldSpec):
    return f.inv(a)


def root_of_unity(ell: int, f: FieldSpec) -> int:
    return f.root_of_unity(ell)


def smallest_prime_field(n: int) -> FieldSpec:
    """Smallest prime field containing an n-th root of unity."""
    p = n + 1
    while not is_prime(p):
        p += n
    return GF(p)
