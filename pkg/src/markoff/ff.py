"""Exact arithmetic in F_p and F_{p^2}.

Legendre symbols, deterministic square roots, 64-bit factorization and
multiplicative orders.  Everything here is pure and immutable; the rest of
the package sits on top of it.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np

from . import DEFAULT_SEED

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all 64-bit integers."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n, as an int64 array (simple sieve)."""
    if n < 2:
        return np.empty(0, np.int64)
    sieve = np.ones(n + 1, bool)
    sieve[:2] = False
    for q in range(2, int(n ** 0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def _require_odd_prime(p: int) -> None:
    if p % 2 == 0:
        raise ValueError(f"modulus must be odd, got {p}")
    if not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")


def legendre(x: int, p: int) -> int:
    """Legendre symbol (x/p) in {-1, 0, 1}; p must be an odd prime."""
    _require_odd_prime(p)
    x %= p
    if x == 0:
        return 0
    r = pow(x, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@lru_cache(maxsize=256)
def smallest_nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    _require_odd_prime(p)
    for t in range(2, p):
        if pow(t, (p - 1) // 2, p) == p - 1:
            return t
    raise ValueError(f"no non-residue found mod {p}")  # unreachable for p > 2


def sqrt_mod(x: int, p: int) -> int | None:
    """Canonical square root of x mod p, or None for a non-residue.

    The returned root is the one in [0, p/2] so results are reproducible.
    Uses Tonelli-Shanks for p = 1 (mod 4) and the exponent shortcut otherwise.
    """
    _require_odd_prime(p)
    x %= p
    if x == 0:
        return 0
    if legendre(x, p) == -1:
        return None
    if p % 4 == 3:
        r = pow(x, (p + 1) // 4, p)
    else:
        # Tonelli-Shanks
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = smallest_nonresidue(p)
        m, c, t, r = s, pow(z, q, p), pow(x, q, p), pow(x, (q + 1) // 2, p)
        while t != 1:
            t2, i = t * t % p, 1
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


def sqrt_table(p: int) -> np.ndarray:
    """sqrt_table[v] = canonical root of v mod p, or -1 when v is a non-residue."""
    tab = np.full(p, -1, np.int64)
    r = np.arange(p // 2 + 1, dtype=np.int64)
    tab[(r * r) % p] = r
    return tab


def legendre_table(p: int) -> np.ndarray:
    """Vector of Legendre symbols for 0..p-1 (int8)."""
    tab = np.full(p, -1, np.int8)
    r = np.arange(1, p // 2 + 1, dtype=np.int64)
    tab[(r * r) % p] = 1
    tab[0] = 0
    return tab


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

_SMALL_PRIMES = [int(q) for q in primes_up_to(10_000)]


def _brent_rho(n: int, rng: random.Random) -> int:
    """One non-trivial factor of composite odd n (Brent's cycle variant)."""
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@lru_cache(maxsize=4096)
def factorize(n: int, seed: int = DEFAULT_SEED) -> dict[int, int]:
    """Complete prime factorization of a 64-bit integer n >= 2.

    Trial division by small primes first, then Brent-Pollard rho on what
    remains, with Miller-Rabin certifying every reported prime.  The rho
    walk is seeded deterministically from (seed, n).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if n >> 64:
        raise ValueError(f"n exceeds 64 bits: {n}")
    out: dict[int, int] = {}
    for q in _SMALL_PRIMES:
        if q * q > n:
            break
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
    if n == 1:
        return out
    rng = random.Random(f"{seed}:{n}")
    stack = [n]
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _brent_rho(m, rng)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


def totient(n: int) -> int:
    phi = n
    for q in factorize(n):
        phi -= phi // q
    return phi


def crt(residues: list[int], moduli: list[int]) -> int:
    """Combine residues over pairwise-coprime moduli."""
    n = math.prod(moduli)
    x = 0
    for r, m in zip(residues, moduli):
        other = n // m
        x += r * other * pow(other, -1, m)
    return x % n


# ---------------------------------------------------------------------------
# F_{p^2} as F_p(sqrt(t)) for the smallest non-residue t
# ---------------------------------------------------------------------------

class Fp2:
    """Immutable element a0 + a1*sqrt(t) of F_{p^2}.

    t is the smallest positive non-residue mod p, so the model is canonical
    and reproducible.  Frobenius (x -> x^p) is conjugation a0 - a1*sqrt(t).
    """

    __slots__ = ("a0", "a1", "p", "t")

    def __init__(self, a0: int, a1: int, p: int, t: int | None = None):
        if t is None:
            t = smallest_nonresidue(p)
        object.__setattr__(self, "a0", a0 % p)
        object.__setattr__(self, "a1", a1 % p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", t)

    def __setattr__(self, *_):
        raise AttributeError("Fp2 elements are immutable")

    @classmethod
    def embed(cls, a: int, p: int) -> "Fp2":
        return cls(a, 0, p)

    @classmethod
    def sqrt_minus_one(cls, p: int) -> "Fp2":
        """The canonical i with i^2 = -1 (in F_{p^2} when p = 3 mod 4)."""
        _require_odd_prime(p)
        if p % 4 == 1:
            return cls(sqrt_mod(p - 1, p), 0, p)
        t = smallest_nonresidue(p)
        w = sqrt_mod((-pow(t, -1, p)) % p, p)
        return cls(0, w, p, t)

    def _coerce(self, other) -> "Fp2":
        if isinstance(other, Fp2):
            if other.p != self.p:
                raise ValueError("mixed moduli")
            return other
        return Fp2(other, 0, self.p, self.t)

    def __add__(self, other):
        o = self._coerce(other)
        return Fp2(self.a0 + o.a0, self.a1 + o.a1, self.p, self.t)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Fp2(self.a0 - o.a0, self.a1 - o.a1, self.p, self.t)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        p = self.p
        return Fp2(
            self.a0 * o.a0 + self.t * self.a1 * o.a1,
            self.a0 * o.a1 + self.a1 * o.a0,
            p,
            self.t,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return Fp2(-self.a0, -self.a1, self.p, self.t)

    def inverse(self) -> "Fp2":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("inverting 0 in F_p^2")
        ninv = pow(nrm, -1, self.p)
        return Fp2(self.a0 * ninv, -self.a1 * ninv, self.p, self.t)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, e: int) -> "Fp2":
        if e < 0:
            return self.inverse() ** (-e)
        r = Fp2(1, 0, self.p, self.t)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def frobenius(self) -> "Fp2":
        """x -> x^p, i.e. conjugation over F_p."""
        return Fp2(self.a0, -self.a1, self.p, self.t)

    def norm(self) -> int:
        """x * x^p as an element of F_p."""
        return (self.a0 * self.a0 - self.t * self.a1 * self.a1) % self.p

    def trace(self) -> int:
        return 2 * self.a0 % self.p

    def in_base_field(self) -> bool:
        return self.a1 == 0

    def as_gaussian(self) -> tuple[int, int]:
        """Coordinates (re, im) w.r.t. the basis {1, i}; needs p = 3 mod 4."""
        if self.p % 4 != 3:
            raise ValueError("gaussian coordinates need p = 3 (mod 4)")
        i = Fp2.sqrt_minus_one(self.p)
        # a1*sqrt(t) = (a1 / w) * i  where i = w*sqrt(t)
        return self.a0, self.a1 * pow(i.a1, -1, self.p) % self.p

    def is_one(self) -> bool:
        return self.a0 == 1 and self.a1 == 0

    def is_zero(self) -> bool:
        return self.a0 == 0 and self.a1 == 0

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a0 == other % self.p and self.a1 == 0
        return (
            isinstance(other, Fp2)
            and self.p == other.p
            and self.a0 == other.a0
            and self.a1 == other.a1
        )

    def __hash__(self):
        return hash((self.a0, self.a1, self.p))

    def __repr__(self):
        return f"Fp2({self.a0} + {self.a1}*sqrt({self.t}) mod {self.p})"


def mult_order(e, p: int | None = None, seed: int = DEFAULT_SEED) -> int:
    """Multiplicative order of e, an int mod p or an Fp2 element.

    Factors the ambient group order (p-1, or p+1 for norm-one elements of
    F_{p^2}, else p^2-1) and strips prime factors.
    """
    if isinstance(e, Fp2):
        p = e.p
        if e.is_zero():
            raise ValueError("order of 0 is undefined")
        if e.in_base_field():
            return mult_order(e.a0, p, seed)
        group = p + 1 if e.norm() == 1 else p * p - 1
        order = group
        for q in factorize(group, seed):
            while order % q == 0 and (e ** (order // q)).is_one():
                order //= q
        if not (e ** order).is_one():
            raise ArithmeticError("order computation failed")  # defensive
        return order
    if p is None:
        raise ValueError("mult_order of an int needs the modulus p")
    e %= p
    if e == 0:
        raise ValueError("order of 0 is undefined")
    order = p - 1
    for q in factorize(p - 1, seed):
        while order % q == 0 and pow(e, order // q, p) == 1:
            order //= q
    return order
