"""Brute-force oracles for quadratic-character sums over F_p.

Weil-bound checks for polynomial character sums, the joint-sign counters
behind the no-correlation argument for long rotation cycles, the rational
parametrization of the norm-one subgroup, and the search for solutions with
two elliptic coordinates of order divisible by four.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import action, ff, surface
from .errors import FalsificationError


# ---------------------------------------------------------------------------
# dense polynomials over F_p (coefficients low-to-high, int64)
# ---------------------------------------------------------------------------

def poly_trim(f):
    f = np.asarray(f, np.int64)
    nz = np.nonzero(f)[0]
    return f[: nz[-1] + 1] if nz.size else f[:1] * 0


def poly_mul(f, g, p):
    return poly_trim(np.convolve(f, g) % p)


def poly_pow(f, e, p):
    out = np.array([1], np.int64)
    b = poly_trim(f)
    while e:
        if e & 1:
            out = poly_mul(out, b, p)
        b = poly_mul(b, b, p)
        e >>= 1
    return out


def poly_deriv(f, p):
    f = np.asarray(f, np.int64)
    if f.shape[0] <= 1:
        return np.zeros(1, np.int64)
    return poly_trim(f[1:] * np.arange(1, f.shape[0]) % p)


def poly_mod(f, g, p):
    f = poly_trim(f).copy()
    g = poly_trim(g)
    dg = g.shape[0] - 1
    inv_lead = pow(int(g[-1]), -1, p)
    while f.shape[0] - 1 >= dg and f.any():
        shift = f.shape[0] - 1 - dg
        q = f[-1] * inv_lead % p
        f[shift : shift + dg + 1] = (f[shift : shift + dg + 1] - q * g) % p
        f = poly_trim(f)
    return f


def poly_gcd(f, g, p):
    f, g = poly_trim(f), poly_trim(g)
    while g.any():
        f, g = g, poly_mod(f, g, p)
    if f.any():
        f = f * pow(int(f[-1]), -1, p) % p  # monic
    return f


def poly_eval_all(f, p):
    """f(s) for every s in F_p, by Horner (vectorized over s)."""
    s = np.arange(p, dtype=np.int64)
    acc = np.full(p, int(f[-1]) % p, np.int64)
    for c in f[-2::-1]:
        acc = (acc * s + int(c)) % p
    return acc


def distinct_root_count(f, p) -> int:
    """Number of distinct roots in the algebraic closure, via gcd(f, f').

    Valid when every root multiplicity is < p (true for all constructions
    in this module, whose multiplicities are 1 or 2).
    """
    f = poly_trim(f)
    d = poly_deriv(f, p)
    if not d.any():
        raise ValueError("derivative vanishes; multiplicity bookkeeping invalid")
    return f.shape[0] - poly_gcd(f, d, p).shape[0]


# ---------------------------------------------------------------------------
# Weil sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeilReport:
    p: int
    degree: int
    distinct_roots: int
    char_sum: int
    bound: float
    within_bound: bool
    separable: bool


def weil_sum(coeffs, p: int) -> WeilReport:
    """Exact sum of Legendre symbols of f(s) over F_p, with its square-root bound.

    The bound (m-1)*sqrt(p) with m = #distinct roots applies when f is not a
    square in the closure; callers assert that (a separable f of positive
    degree certainly is not).  The sum itself is always exact.
    """
    f = poly_trim(coeffs) % p
    if not f.any():
        raise ValueError("zero polynomial rejected")
    leg = ff.legendre_table(p)
    vals = poly_eval_all(f, p)
    total = int(leg[vals].astype(np.int64).sum())
    deg = f.shape[0] - 1
    if deg == 0:
        return WeilReport(p, 0, 0, total, 0.0, total == 0, False)
    m = distinct_root_count(f, p)
    g = poly_gcd(f, poly_deriv(f, p), p)
    separable = g.shape[0] == 1
    bound = (m - 1) * math.sqrt(p)
    return WeilReport(p, deg, m, total, bound, abs(total) <= bound, separable)


# ---------------------------------------------------------------------------
# the norm-one subgroup H and its rational parametrization
# ---------------------------------------------------------------------------

def h_param(s: int, p: int) -> ff.Fp2:
    """h(s) = (2s + i(1-s^2)) / (1+s^2), a norm-one element; needs p = 3 mod 4."""
    if p % 4 != 3:
        raise ValueError("the rational parametrization needs p = 3 (mod 4)")
    i = ff.Fp2.sqrt_minus_one(p)
    s %= p
    num = 2 * s + i * ((1 - s * s) % p)
    den_inv = pow((1 + s * s) % p, -1, p)  # 1+s^2 != 0 since -1 is a non-residue
    return num * den_inv


def verify_H(p: int) -> dict:
    """Check {h(s) : s in F_p} plus {-i} is exactly the subgroup of order p+1."""
    if p % 4 != 3:
        raise ValueError("needs p = 3 (mod 4)")
    i = ff.Fp2.sqrt_minus_one(p)
    elems = {h_param(s, p) for s in range(p)}
    elems.add(-i)
    ok_size = len(elems) == p + 1
    ok_norm = all(e.norm() == 1 for e in elems)
    ok_theta = all(
        (e.as_gaussian()[0] ** 2 + e.as_gaussian()[1] ** 2) % p == 1 for e in elems
    )
    if not (ok_size and ok_norm and ok_theta):
        raise FalsificationError(f"H parametrization fails mod {p}")
    return {"p": p, "order": len(elems), "all_norm_one": ok_norm, "theta_eta_identity": ok_theta}


# ---------------------------------------------------------------------------
# joint sign counts
# ---------------------------------------------------------------------------

SIGN_KEYS = ("--", "-+", "+-", "++")


@dataclass(frozen=True)
class JointSignCount:
    p: int
    x: int
    construction: str  # hyperbolic | elliptic | prop56
    d: int
    m: int
    counts: dict[str, int]
    bound: float | None
    bound_applies: bool
    satisfied: bool | None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "x": self.x,
            "construction": self.construction,
            "d": self.d,
            "m": self.m,
            "counts": dict(self.counts),
            "bound": self.bound,
            "bound_applies": self.bound_applies,
            "satisfied": self.satisfied,
        }


def _measure_d(p: int, x: int, y0: int, y1: int) -> int:
    """Cycle length of rot_1 through [x, y0, y1] at block level, by walking."""
    start = surface._canonical_block_codes(
        np.array([x]), np.array([y0]), np.array([y1]), p
    )[0]
    cx, cy, cz = x, y0, y1
    for step in range(1, 4 * p + 5):
        cx, cy, cz = action.apply_gen("rot1", cx, cy, cz, p)
        code = surface._canonical_block_codes(
            np.array([cx]), np.array([cy]), np.array([cz]), p
        )[0]
        if code == start:
            return step
    raise ArithmeticError("rotation cycle did not close")  # unreachable


def _joint_counts(k1, k2, p):
    """Tally the four (chi(k1), chi(k2)) sign patterns over s in F_p."""
    leg = ff.legendre_table(p)
    v1 = leg[poly_eval_all(k1, p)].astype(np.int64)
    v2 = leg[poly_eval_all(k2, p)].astype(np.int64)
    if np.any(v1 == 0) or np.any(v2 == 0):
        raise FalsificationError(f"construction polynomial vanishes on F_{p}")
    return {
        "--": int(((v1 == -1) & (v2 == -1)).sum()),
        "-+": int(((v1 == -1) & (v2 == 1)).sum()),
        "+-": int(((v1 == 1) & (v2 == -1)).sum()),
        "++": int(((v1 == 1) & (v2 == 1)).sum()),
    }


def _binomials(n: int, p: int) -> np.ndarray:
    """Row n of Pascal's triangle mod p (n < p)."""
    out = np.empty(n + 1, np.int64)
    out[0] = 1
    c = 1
    for k in range(1, n + 1):
        c = c * (n - k + 1) % p * pow(k, -1, p) % p
        out[k] = c
    return out


def _g_poly_elliptic(A: ff.Fp2, m: int, p: int):
    """Coefficients of g_A(s) = (1+s^2)^{2m} (f_A(h(s))^2 - 4) over F_p.

    Expands T = A (-i)^m (s+i)^{2m}; the conjugate-symmetric sum T + conj(T)
    has coefficients in F_p, and g_A = (T + conj T)^2 - 4 (1+s^2)^{2m}.
    The coefficient array is validated pointwise against the F_{p^2} form.
    """
    i = ff.Fp2.sqrt_minus_one(p)
    scale = A * (-i) ** m
    binom = _binomials(2 * m, p)
    # (s+i)^{2m}: coefficient of s^k is C(2m,k) i^{2m-k}
    re = np.zeros(2 * m + 1, np.int64)
    sre, sim = scale.as_gaussian()
    ipow = [1, 0, -1, 0]  # real parts of i^j
    for k in range(2 * m + 1):
        j = (2 * m - k) % 4
        cre = ipow[j] * binom[k] % p
        cim = ipow[(j + 3) % 4] * binom[k] % p  # imag of i^j is real of i^(j-1)
        # real part of (cre + cim i) * (sre + sim i); imaginary parts of
        # T + conj(T) cancel identically
        re[k] = (cre * sre - cim * sim) % p
    w = 2 * re % p
    u2 = poly_pow(np.array([1, 0, 1], np.int64), 2 * m, p)
    width = 4 * m + 1
    g = poly_trim((_pad(poly_mul(w, w, p), width) - 4 * _pad(u2, width)) % p)
    # pointwise sanity: compare with the F_{p^2} definition at a few s
    for s in range(min(p, 4)):
        h = h_param(s, p)
        f = A * h ** m + A.frobenius() * h ** (-m)
        want = pow(1 + s * s, 2 * m, p) * ((f * f - 4).a0) % p
        got = 0
        for c in g[::-1]:
            got = (got * s + int(c)) % p
        if (f * f - 4).a1 != 0 or got != want:
            raise FalsificationError(f"g_A coefficient expansion disagrees at s={s} mod {p}")
    return g


def _pad(f, n):
    f = np.asarray(f, np.int64)
    if f.shape[0] >= n:
        return f
    return np.concatenate([f, np.zeros(n - f.shape[0], np.int64)])


def _solve_pair_hyperbolic(p, x, y0, y1, w):
    """(alpha, beta) with y0 = a+b, y1 = a*w + b/w; w is the unit in F_p."""
    wv = w.a0
    winv = pow(wv, -1, p)
    denom = (wv - winv) % p
    a = (y1 - y0 * winv) % p * pow(denom, -1, p) % p
    b = (y0 - a) % p
    return a, b


def _solve_pair_elliptic(p, x, y0, y1, w):
    """A with y0 = A + A^p, y1 = A w + A^p w^-1."""
    denom = w - w.inverse()
    A = (ff.Fp2.embed(y1, p) - ff.Fp2.embed(y0, p) * w.inverse()) / denom
    if A.frobenius() != ff.Fp2.embed(y0, p) - A:
        raise ArithmeticError("conjugate solve failed")  # defensive
    return A


def no_correlation_count(p: int, x: int, sol1: tuple[int, int],
                         sol2: tuple[int, int]) -> JointSignCount:
    """Exact joint-sign counts for two rotation cycles sharing coordinate +-x.

    sol1 = (y0, y1) and sol2 = (z0, z1) name solutions (x, y0, y1) and
    (x, z0, z1).  Builds the two product polynomials k1, k2 whose joint
    Legendre signs control whether consecutive cycle entries can have equal
    types, counts all four patterns exactly, and reports the square-root
    lower bound for the (-1,-1) cell when the cycle is long enough.
    """
    if p % 4 != 3:
        raise ValueError("the joint-sign construction needs p = 3 (mod 4)")
    kind = surface.classify(x, p)
    if kind == surface.PARABOLIC:
        raise ValueError("x must not be parabolic")
    x %= p
    y0, y1 = sol1[0] % p, sol1[1] % p
    z0, z1 = sol2[0] % p, sol2[1] % p
    tab = surface.solution_table(p)
    for (a, b) in ((y0, y1), (z0, z1)):
        if not tab.contains(x, a, b):
            raise ValueError(f"({x},{a},{b}) is not a solution mod {p}")

    d = _measure_d(p, x, y0, y1)
    w = surface.omega_of(x, p)
    if ff.mult_order(w) < ff.mult_order(-w):
        # flip to the sign with |omega| = 2d; adjusts the odd cycle entries
        x, w, y1, z1 = (p - x) % p, -w, (p - y1) % p, (p - z1) % p
    if ff.mult_order(w) != 2 * d:
        raise FalsificationError(f"|omega| = {ff.mult_order(w)} != 2 d = {2*d} at x={x} mod {p}")

    group = p - 1 if kind == surface.HYPERBOLIC else p + 1
    m = group // (2 * d)

    if kind == surface.HYPERBOLIC:
        a, b = _solve_pair_hyperbolic(p, x, y0, y1, w)
        c, e = _solve_pair_hyperbolic(p, x, z0, z1, w)
        if a == c or (a + c) % p == 0:
            raise ValueError("degenerate pair: the two cycles coincide up to sign")
        wv, winv = w.a0, pow(w.a0, -1, p)

        def g_of(al, be):
            g = np.zeros(4 * m + 1, np.int64)
            g[0] = be * be % p
            g[2 * m] = (2 * al * be - 4) % p
            g[4 * m] = al * al % p
            return g

        g1a, g1b = g_of(a, b), g_of(c, e)
        g2a, g2b = g_of(a * wv % p, b * winv % p), g_of(c * wv % p, e * winv % p)
        coincidence = a in (c * wv % p, (-c * wv) % p) or a * wv % p in (c, (-c) % p)
    else:
        A = _solve_pair_elliptic(p, x, y0, y1, w)
        C = _solve_pair_elliptic(p, x, z0, z1, w)
        if A == C or A == -C:
            raise ValueError("degenerate pair: the two cycles coincide up to sign")
        g1a, g1b = _g_poly_elliptic(A, m, p), _g_poly_elliptic(C, m, p)
        g2a, g2b = _g_poly_elliptic(A * w, m, p), _g_poly_elliptic(C * w, m, p)
        Cw = C * w
        coincidence = A in (Cw, -Cw) or A * w in (C, -C)

    k1 = poly_mul(g1a, g1b, p)
    k2 = poly_mul(g2a, g2b, p)
    # distinct-root bookkeeping: 4m per g factor, 8m per product; the overall
    # product drops to 12m when the two cycles meet up to one omega-offset
    # (they cannot meet in both directions at once), and is never a square
    for g in (g1a, g1b, g2a, g2b):
        if distinct_root_count(g, p) != 4 * m:
            raise FalsificationError(f"g factor is not separable of degree 4m mod {p}")
    if distinct_root_count(k1, p) != 8 * m or distinct_root_count(k2, p) != 8 * m:
        raise FalsificationError(f"k1/k2 do not have 8m distinct roots mod {p}")
    r12 = distinct_root_count(poly_mul(k1, k2, p), p)
    if r12 != (12 * m if coincidence else 16 * m):
        raise FalsificationError(
            f"k1*k2 has {r12} distinct roots mod {p}, expected "
            f"{'12m (offset coincidence)' if coincidence else '16m'}"
        )

    counts = _joint_counts(k1, k2, p)
    if sum(counts.values()) != p:
        raise FalsificationError("joint sign counts do not sum to p")
    bound = (p - 32 * m * math.sqrt(p) + 3 * math.sqrt(p)) / 4
    applies = d >= 16 * math.sqrt(p + 1)
    satisfied = counts["--"] >= bound if applies else None
    return JointSignCount(p, x, kind, d, m, counts, bound, applies, satisfied)


# ---------------------------------------------------------------------------
# solutions with two elliptic coordinates of order divisible by 4
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticOrder4Witness:
    p: int
    triple: tuple[int, int, int]
    omega_orders: tuple[int, int]
    legendre_y_plus_2: tuple[int, int]
    legendre_y_minus_2: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "triple": list(self.triple),
            "omega_orders": list(self.omega_orders),
            "legendre_y_plus_2": list(self.legendre_y_plus_2),
            "legendre_y_minus_2": list(self.legendre_y_minus_2),
        }


def is_valid_order4_witness(p: int, triple) -> bool:
    """x, y elliptic with 4 dividing both omega orders, and a solution."""
    x, y, z = (v % p for v in triple)
    if (x * x + y * y + z * z - x * y * z) % p != 0 or (x, y, z) == (0, 0, 0):
        return False
    for v in (x, y):
        if surface.classify(v, p) != surface.ELLIPTIC:
            return False
        if ff.mult_order(surface.omega_of(v, p)) % 4 != 0:
            return False
    return True


def find_elliptic_order4(p: int) -> EllipticOrder4Witness:
    """First solution (x, y, z) with x, y elliptic of order divisible by 4.

    Scans x ascending, then y ascending, then the smaller z root, using the
    square-criterion: y+2 a non-residue forces omega_y outside the squares of
    the norm-one subgroup, hence of order divisible by 4.  p = 3 and p = 11
    admit no such solution and are refused.
    """
    if p % 4 != 3 or not ff.is_prime(p):
        raise ValueError(f"needs a prime p = 3 (mod 4), got {p}")
    if p in (3, 11):
        raise ValueError(f"p = {p} has no solution with two elliptic order-4 coordinates")
    leg = ff.legendre_table(p)

    def crit(v):
        return leg[(v * v - 4) % p] == -1 and leg[(v + 2) % p] == -1

    inv2 = pow(2, -1, p)
    tab = ff.sqrt_table(p)
    for x in range(p):
        if not crit(x):
            continue
        for y in range(p):
            if not crit(y):
                continue
            disc = (x * y * x * y - 4 * (x * x + y * y)) % p
            r = int(tab[disc])
            if r < 0:
                continue
            roots = sorted({(x * y - r) * inv2 % p, (x * y + r) * inv2 % p})
            for z in roots:
                if (x, y, z) == (0, 0, 0):
                    continue  # solves the equation but is excluded from X*(p)
                wit = EllipticOrder4Witness(
                    p, (x, y, z),
                    (ff.mult_order(surface.omega_of(x, p)), ff.mult_order(surface.omega_of(y, p))),
                    (int(leg[(x + 2) % p]), int(leg[(y + 2) % p])),
                    (int(leg[(x - 2) % p]), int(leg[(y - 2) % p])),
                )
                if not is_valid_order4_witness(p, wit.triple):
                    raise FalsificationError(f"criterion produced an invalid witness mod {p}")
                return wit
    raise FalsificationError(f"no order-4 elliptic pair found mod {p}")  # contradicts the theory


def prop56_count(p: int, x: int | None = None) -> JointSignCount:
    """Exact N_(-1,+1) count for a maximal-order elliptic coordinate.

    g1 ~ (y+2), g2 ~ (y-2) along the parametrized conic of x; the count of
    s with chi(g1) = -1 and chi(g2) = +1 is bounded below by (p - 11 sqrt p)/4,
    asserted for p > 121.
    """
    if p % 4 != 3 or not ff.is_prime(p):
        raise ValueError(f"needs a prime p = 3 (mod 4), got {p}")
    if x is None:
        x = maximal_elliptic(p)
    x %= p
    if surface.classify(x, p) != surface.ELLIPTIC:
        raise ValueError(f"x = {x} is not elliptic mod {p}")
    w = surface.omega_of(x, p)
    if ff.mult_order(w) != p + 1:
        raise ValueError(f"x = {x} is not of maximal order p+1 mod {p}")
    kappa = x * x % p * pow((x * x - 4) % p, -1, p) % p
    t = w.t
    A = None
    for a1 in range(p):
        rhs = (kappa + t * a1 * a1) % p
        a0 = ff.sqrt_mod(rhs, p)
        if a0 is not None:
            A = ff.Fp2(a0, a1, p, t)
            break
    u = A.trace()  # A + A^p
    i = ff.Fp2.sqrt_minus_one(p)
    v = (i * (A - A.frobenius())).a0  # i (A - A^p) lies in F_p
    quad1 = np.array([(v + 2) % p, 2 * u % p, (2 - v) % p], np.int64)
    quad2 = np.array([(v - 2) % p, 2 * u % p, (-2 - v) % p], np.int64)
    one_plus_s2 = np.array([1, 0, 1], np.int64)
    g1 = poly_mul(one_plus_s2, quad1, p)
    g2 = poly_mul(one_plus_s2, quad2, p)
    counts = _joint_counts(g1, g2, p)
    if sum(counts.values()) != p:
        raise FalsificationError("joint sign counts do not sum to p")
    bound = (p - 11 * math.sqrt(p)) / 4
    applies = p > 121
    satisfied = counts["-+"] >= math.ceil(bound) if applies else None
    if applies and not satisfied:
        raise FalsificationError(
            f"N(-1,+1) = {counts['-+']} below the bound {bound:.3f} at p = {p}"
        )
    return JointSignCount(p, x, "prop56", (p + 1) // 2, 1, counts, bound, applies, satisfied)


def maximal_elliptic(p: int) -> int:
    """Smallest elliptic x whose unit omega has full order p+1."""
    for x in range(p):
        if surface.classify(x, p) == surface.ELLIPTIC:
            if ff.mult_order(surface.omega_of(x, p)) == p + 1:
                return x
    raise ArithmeticError(f"no maximal elliptic coordinate mod {p}")  # unreachable
