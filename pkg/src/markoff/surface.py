"""Solution sets of x^2 + y^2 + z^2 = x*y*z over Z/nZ.

Tables index every non-zero solution mod a square-free n by a packed code
x*n^2 + y*n + z, quotient them into sign-change blocks, slice conic
sections, and classify coordinate values as hyperbolic/elliptic/parabolic.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ff, kernels

DEFAULT_CELL_LIMIT = 10_000_000
MAX_PRIME = 2_000_000  # packed codes must stay inside int64

PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"
ELLIPTIC = "elliptic"


def classify(x: int, p: int) -> str:
    """Type of x in F_p per the discriminant x^2 - 4."""
    if p % 2 == 0 or not ff.is_prime(p):
        raise ValueError(f"classification needs an odd prime, got {p}")
    x %= p
    d = (x * x - 4) % p
    if d == 0:
        return PARABOLIC
    return HYPERBOLIC if ff.legendre(d, p) == 1 else ELLIPTIC


def omega_of(x: int, p: int) -> ff.Fp2:
    """A root omega of t^2 - x t + 1, so x = omega + omega^-1.

    Lands in F_p (embedded) for hyperbolic x and in the norm-one subgroup of
    F_{p^2} for elliptic x.  The choice between the two roots is canonical:
    the lexicographically smaller one in (a0, a1) coordinates.
    """
    kind = classify(x, p)
    if kind == PARABOLIC:
        raise ValueError(f"x = {x} is parabolic mod {p} (double root)")
    x %= p
    d = (x * x - 4) % p
    inv2 = pow(2, -1, p)
    if kind == HYPERBOLIC:
        r = ff.sqrt_mod(d, p)
        roots = sorted(((x + r) * inv2 % p, (x - r) * inv2 % p))
        return ff.Fp2.embed(roots[0], p)
    t = ff.smallest_nonresidue(p)
    u = ff.sqrt_mod(d * pow(t, -1, p) % p, p)  # d = t*u^2
    a1 = min(u * inv2 % p, (p - u) * inv2 % p)
    w = ff.Fp2(x * inv2 % p, a1, p, t)
    if w.norm() != 1:
        raise ArithmeticError("omega must have norm one")  # defensive
    return w


def _pack(x, y, z, n):
    return x * (n * n) + y * n + z


def _canonical_block_codes(x, y, z, p):
    """Lexicographic minimum over the four double-sign variants (vectorized)."""
    nx, ny, nz = (-x) % p, (-y) % p, (-z) % p
    c = _pack(x, y, z, p)
    c = np.minimum(c, _pack(x, ny, nz, p))
    c = np.minimum(c, _pack(nx, y, nz, p))
    c = np.minimum(c, _pack(nx, ny, z, p))
    return c


@dataclass(frozen=True)
class Block:
    """A sign-change equivalence class of solutions."""

    canonical: tuple[int, int, int]
    members: tuple[tuple[int, int, int], ...]
    n: int


@dataclass(frozen=True)
class ConicSection:
    """Solutions (or blocks) with a fixed value in one coordinate."""

    coordinate: int  # 1, 2 or 3
    value: int
    level: str  # "solutions" (x_j == value) or "blocks" (x_j == +-value)
    ordinals: np.ndarray


class PrimeTable:
    """All of X*(p) for one prime, plus its block quotient Y*(p)."""

    def __init__(self, p: int, cell_limit: int = DEFAULT_CELL_LIMIT):
        if not ff.is_prime(p):
            raise ValueError(f"{p} is not prime")
        if p > MAX_PRIME:
            raise ValueError(f"prime {p} exceeds the supported bound {MAX_PRIME}")
        predicted = count_formula_solutions(p)
        if predicted > cell_limit:
            raise ValueError(
                f"X*({p}) has {predicted} solutions, above the limit {cell_limit}; "
                f"pass cell_limit >= {predicted} to override"
            )
        self.p = p
        if p == 2:
            # brute force over the 8 candidates
            codes = []
            for x in range(2):
                for y in range(2):
                    for z in range(2):
                        if (x * x + y * y + z * z - x * y * z) % 2 == 0 and (x, y, z) != (0, 0, 0):
                            codes.append(_pack(x, y, z, 2))
            self.codes = np.array(sorted(codes), np.int64)
        else:
            tab = ff.sqrt_table(p)
            self.codes = kernels.enumerate_codes(p, tab, (p + 1) // 2)
        x, y, z = self.decode(self.codes)
        self._bcanon = _canonical_block_codes(x, y, z, p)
        self.block_reps = np.unique(self._bcanon)
        self.block_ids = np.searchsorted(self.block_reps, self._bcanon)
        for arr in (self.codes, self._bcanon, self.block_reps, self.block_ids):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.codes.shape[0])

    @property
    def block_count(self) -> int:
        return int(self.block_reps.shape[0])

    def decode(self, codes):
        n = self.p
        x, rem = np.divmod(codes, n * n)
        y, z = np.divmod(rem, n)
        return x, y, z

    def index_of_codes(self, codes) -> np.ndarray:
        """Ordinals of packed codes; raises if any code is not a solution."""
        pos = np.searchsorted(self.codes, codes)
        if np.any(pos >= self.size) or np.any(self.codes[pos] != codes):
            raise KeyError("code is not in the table")
        return pos

    def block_ids_of_codes(self, codes) -> np.ndarray:
        x, y, z = self.decode(np.asarray(codes, np.int64))
        canon = _canonical_block_codes(x, y, z, self.p)
        pos = np.searchsorted(self.block_reps, canon)
        if np.any(pos >= self.block_count) or np.any(self.block_reps[pos] != canon):
            raise KeyError("block representative is not in the table")
        return pos

    def conic(self, coordinate: int, value: int, level: str = "blocks") -> ConicSection:
        if coordinate not in (1, 2, 3):
            raise ValueError("coordinate must be 1, 2 or 3")
        p = self.p
        value %= p
        if level == "blocks":
            # the lex-min representative only sign-normalizes the first
            # coordinate, so fold signs here
            vx = min(value, (p - value) % p)
            x, y, z = self.decode(self.block_reps)
            coord = (x, y, z)[coordinate - 1]
            folded = np.minimum(coord, (p - coord) % p)
            ordinals = np.nonzero(folded == vx)[0]
        elif level == "solutions":
            x, y, z = self.decode(self.codes)
            coord = (x, y, z)[coordinate - 1]
            ordinals = np.nonzero(coord == value)[0]
        else:
            raise ValueError("level must be 'solutions' or 'blocks'")
        return ConicSection(coordinate, value, level, ordinals)


@lru_cache(maxsize=6)
def prime_table(p: int) -> PrimeTable:
    return PrimeTable(p)


def _factor_square_free(n: int) -> list[int]:
    fac = ff.factorize(n)
    for q, e in fac.items():
        if e > 1:
            raise ValueError(f"modulus {n} is not square-free: {q}^{e} divides it")
    return sorted(fac)


class SolutionTable:
    """X*(n) for square-free n: the CRT product of the prime tables.

    Solutions are indexed by packed code x*n^2 + y*n + z in ascending order.
    Blocks are per-prime sign classes (size 4^k for k odd prime factors).
    """

    def __init__(self, n: int, cell_limit: int = DEFAULT_CELL_LIMIT):
        if n < 2:
            raise ValueError(f"modulus must be >= 2, got {n}")
        self.n = n
        self.primes = _factor_square_free(n)
        # refuse from the closed-form counts before materializing anything
        total = 1
        for p in self.primes:
            total *= count_formula_solutions(p)
        if total > cell_limit:
            raise ValueError(
                f"X*({n}) has {total} solutions, above the limit {cell_limit}; "
                f"pass cell_limit >= {total} to override"
            )
        self.factors = [
            prime_table(p) if count_formula_solutions(p) <= DEFAULT_CELL_LIMIT
            else PrimeTable(p, cell_limit)
            for p in self.primes
        ]
        sizes = [t.size for t in self.factors]
        total = 1
        for s in sizes:
            total *= s
        self.size = total
        self._codes = None

    @property
    def block_count(self) -> int:
        out = 1
        for t in self.factors:
            out *= t.block_count
        return out

    def codes(self) -> np.ndarray:
        """Packed codes of all solutions, ascending (materialized lazily)."""
        if self._codes is None:
            if self.size == 0:
                self._codes = np.empty(0, np.int64)
            else:
                per_axis = []
                for t in self.factors:
                    x, y, z = t.decode(t.codes)
                    per_axis.append((x, y, z))
                n = self.n
                xs = np.zeros(1, np.int64)
                ys = np.zeros(1, np.int64)
                zs = np.zeros(1, np.int64)
                for p, (x, y, z) in zip(self.primes, per_axis):
                    m = n // p
                    lift = m * pow(m, -1, p) % n  # CRT basis element for p
                    xs = (xs[:, None] + x[None, :] * lift).ravel() % n
                    ys = (ys[:, None] + y[None, :] * lift).ravel() % n
                    zs = (zs[:, None] + z[None, :] * lift).ravel() % n
                codes = _pack(xs, ys, zs, n)
                codes.sort()
                self._codes = codes
            self._codes.setflags(write=False)
        return self._codes

    def triples(self) -> np.ndarray:
        n = self.n
        codes = self.codes()
        x, rem = np.divmod(codes, n * n)
        y, z = np.divmod(rem, n)
        return np.stack([x, y, z], axis=1)

    def contains(self, x: int, y: int, z: int) -> bool:
        n = self.n
        x, y, z = x % n, y % n, z % n
        if (x * x + y * y + z * z - x * y * z) % n != 0:
            return False
        return all((x % p, y % p, z % p) != (0, 0, 0) for p in self.primes)

    def index_of(self, x: int, y: int, z: int) -> int:
        codes = self.codes()
        c = _pack(x % self.n, y % self.n, z % self.n, self.n)
        pos = int(np.searchsorted(codes, c))
        if pos >= codes.shape[0] or codes[pos] != c:
            raise KeyError(f"({x},{y},{z}) is not in X*({self.n})")
        return pos

    def block_of(self, x: int, y: int, z: int) -> Block:
        """Sign-change class: per-prime double sign changes, canonical = lex min."""
        n = self.n
        if not self.contains(x, y, z):
            raise KeyError(f"({x},{y},{z}) is not in X*({n})")
        members = {(x % n, y % n, z % n)}
        for p in self.primes:
            m = n // p
            lift = m * pow(m, -1, p) % n
            new = set()
            for (a, b, c) in members:
                ap, bp, cp = a % p, b % p, c % p
                for sa, sb, sc in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                    na = (a + ((sa * ap) % p - ap) * lift) % n
                    nb = (b + ((sb * bp) % p - bp) * lift) % n
                    nc = (c + ((sc * cp) % p - cp) * lift) % n
                    new.add((na, nb, nc))
            members = new
        canonical = min(members)
        return Block(canonical, tuple(sorted(members)), n)

    # -- export ------------------------------------------------------------

    def to_csv(self, path) -> None:
        t = self.triples()
        with open(path, "w") as fh:
            fh.write("x,y,z\n")
            for x, y, z in t:
                fh.write(f"{x},{y},{z}\n")

    def to_binary(self, path) -> None:
        """Little-endian u32 stream: [n][count][packed codes...]."""
        if self.n ** 3 >= 1 << 32:
            raise ValueError(f"binary export needs n^3 < 2^32, n={self.n} too large")
        codes = self.codes().astype("<u4")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", self.n, codes.shape[0]))
            fh.write(codes.tobytes())

    @staticmethod
    def read_binary(path) -> tuple[int, np.ndarray]:
        with open(path, "rb") as fh:
            n, count = struct.unpack("<II", fh.read(8))
            codes = np.frombuffer(fh.read(4 * count), "<u4").astype(np.int64)
        if codes.shape[0] != count:
            raise ValueError("truncated binary table")
        return n, codes


def solution_table(n: int, cell_limit: int = DEFAULT_CELL_LIMIT) -> SolutionTable:
    return SolutionTable(n, cell_limit)


def count_formula_blocks(p: int) -> int:
    """Closed form for |Y*(p)|: p(p+3)/4, p(p-3)/4 or 4 at p=2."""
    if p == 2:
        return 4
    if p == 3:
        return 0
    return p * (p + 3) // 4 if p % 4 == 1 else p * (p - 3) // 4


def count_formula_solutions(p: int) -> int:
    """Closed form for |X*(p)| (blocks are singletons mod 2, else size 4)."""
    return 4 if p == 2 else 4 * count_formula_blocks(p)


def parametrize_conic(p: int, x: int) -> list[tuple[int, int, int]]:
    """The solution-level conic C_1(x) generated from its rotation eigenbasis.

    Hyperbolic x != 0: (x, a+b, a*w + b/w) over a in F_p* with ab = x^2/(x^2-4).
    Elliptic x:        (x, A + A^p, A*w + A^p/w) over norm(A) = x^2/(x^2-4).
    x = 0 (p = 1 mod 4): the two families (0, a, +-i*a).
    Must reproduce the enumerated conic exactly; parabolic x is rejected.
    """
    kind = classify(x, p)
    if kind == PARABOLIC:
        raise ValueError("parabolic coordinate has no rotation eigenbasis")
    x %= p
    if x == 0 and p % 4 == 1:
        i = ff.sqrt_mod(p - 1, p)
        out = []
        for a in range(1, p):
            out.append((0, a, a * i % p))
            out.append((0, a, a * (p - i) % p))
        return sorted(set(out))
    if x == 0:
        return []  # no solutions contain 0 when p = 3 (mod 4)
    w = omega_of(x, p)
    kappa = x * x % p * pow((x * x - 4) % p, -1, p) % p
    out = []
    if kind == HYPERBOLIC:
        wv = w.a0
        winv = pow(wv, -1, p)
        for a in range(1, p):
            b = kappa * pow(a, -1, p) % p
            out.append((x, (a + b) % p, (a * wv + b * winv) % p))
    else:
        # find one A of norm kappa, then sweep A * (norm-one subgroup)
        t = w.t
        A = None
        for a1 in range(p):
            rhs = (kappa + t * a1 * a1) % p
            a0 = ff.sqrt_mod(rhs, p)
            if a0 is not None:
                A = ff.Fp2(a0, a1, p, t)
                break
        h = _norm_one_generator(p)
        cur = A
        for _ in range(p + 1):
            y = cur.trace()
            # cur*w + cur^p*w^-1 is self-conjugate, so its a0 is the value
            z = (cur * w + cur.frobenius() * w.inverse()).a0
            out.append((x, y, z))
            cur = cur * h
    return sorted(set(out))


@lru_cache(maxsize=64)
def _norm_one_generator(p: int) -> ff.Fp2:
    """A generator of the order-(p+1) norm-one subgroup of F_{p^2}*.

    Hilbert-90 sweep: (a - sqrt(t)) / (a + sqrt(t)) has norm 1 for every
    a in F_p; the first one of full order p+1 wins.
    """
    t = ff.smallest_nonresidue(p)
    for a in range(p):
        u = ff.Fp2(a, 1, p, t)
        e = u.frobenius() / u
        if ff.mult_order(e) == p + 1:
            return e
    raise ArithmeticError(f"no norm-one generator found mod {p}")  # unreachable
