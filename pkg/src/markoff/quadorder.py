"""Orders of a norm-one quadratic integer modulo primes, at desk scale.

The distinguished unit is a = (3 + sqrt(5))/2 (trace 3, norm 1); any trace-t
norm-one unit works via the recurrence A_{k+1} = t A_k - A_{k-1}.  o_p(a)
divides p - (D/p) for p coprime to 2D, and p | A_k iff o_p(a) | k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ff, kernels

DEFAULT_TRACE = 3  # a = (3 + sqrt(5)) / 2, discriminant D = t^2 - 4 = 5


def a_seq(k: int, trace: int = DEFAULT_TRACE) -> int:
    """A_k = (a^k - a^-k)/sqrt(D) as an exact integer, A_0 = 0, A_1 = 1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    prev, cur = 0, 1
    if k == 0:
        return 0
    for _ in range(k - 1):
        prev, cur = cur, trace * cur - prev
    return cur


def a_seq_mod(kmax: int, p: int, trace: int = DEFAULT_TRACE) -> np.ndarray:
    """A_0..A_kmax mod p via the recurrence."""
    out = np.empty(kmax + 1, np.int64)
    out[0] = 0
    if kmax >= 1:
        out[1] = 1 % p
    for k in range(2, kmax + 1):
        out[k] = (trace * out[k - 1] - out[k - 2]) % p
    return out


@dataclass(frozen=True)
class OrderRecord:
    p: int
    legendre_disc: int | None  # (D/p); None for the special primes p | 2D
    order: int
    divides: str | None  # "p-1" | "p+1" | None
    meets_32sqrt: bool  # order >= 32*sqrt(p+1)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "legendre_disc": self.legendre_disc,
            "order": self.order,
            "divides": self.divides,
            "meets_32sqrt": self.meets_32sqrt,
        }


def op_order(p: int, trace: int = DEFAULT_TRACE) -> OrderRecord:
    """Multiplicative order of (t + sqrt(t^2-4))/2 modulo p.

    The unit reduces into F_p when t^2-4 is a residue (order divides p-1)
    and into the norm-one subgroup of F_{p^2} otherwise (order divides p+1).
    p = 2 and p | t^2-4 are handled as documented special cases.
    """
    if not ff.is_prime(p):
        raise ValueError(f"{p} is not prime")
    disc = trace * trace - 4
    if p == 2:
        if trace % 2 == 1:
            # F_4: a = 1 + phi = phi^2 for trace 3; order 3
            return OrderRecord(2, None, 3, None, False)
        raise ValueError("p = 2 with even trace is not supported")
    if disc % p == 0:
        # a = t/2 with a^2 = 1: order 1 or 2
        a = trace * pow(2, -1, p) % p
        order = 1 if a == 1 else 2
        return OrderRecord(p, None, order, None, order >= 32 * math.sqrt(p + 1))
    leg = ff.legendre(disc, p)
    inv2 = pow(2, -1, p)
    if leg == 1:
        r = ff.sqrt_mod(disc % p, p)
        a = (trace + r) * inv2 % p
        order = ff.mult_order(a, p)
        divides = "p-1"
        if (p - 1) % order:
            raise ArithmeticError("order must divide p-1")  # defensive
    else:
        t = ff.smallest_nonresidue(p)
        u = ff.sqrt_mod(disc * pow(t, -1, p) % p, p)
        a_elt = ff.Fp2(trace * inv2 % p, u * inv2 % p, p, t)
        if a_elt.norm() != 1:
            raise ArithmeticError("unit must have norm 1")  # defensive
        order = ff.mult_order(a_elt)
        divides = "p+1"
        if (p + 1) % order:
            raise ArithmeticError("order must divide p+1")  # defensive
    return OrderRecord(p, leg, order, divides, order >= 32 * math.sqrt(p + 1))


def orders_up_to(x_max: int, trace: int = DEFAULT_TRACE) -> tuple[np.ndarray, np.ndarray]:
    """(primes, orders) for every prime <= x_max, batch path.

    The generic primes go through the backend kernel; p = 2 and p | t^2-4 are
    filled in from op_order.
    """
    ps = ff.primes_up_to(x_max)
    disc = trace * trace - 4
    special = (ps == 2) | (np.vectorize(lambda q: disc % q == 0)(ps) if ps.size else ps.astype(bool))
    generic = ps[~special]
    smalls = ff.primes_up_to(max(3, math.isqrt(x_max + 1) + 1))
    orders = np.zeros(ps.shape[0], np.int64)
    if generic.size:
        orders[~special] = kernels.quad_orders(generic, trace, smalls)
    for i in np.nonzero(special)[0]:
        orders[i] = op_order(int(ps[i]), trace).order
    return ps, orders


@dataclass(frozen=True)
class ScanSummary:
    x_max: int
    c: float
    trace: int
    primes_examined: int
    count_le_c_sqrt_x: int
    count_flag_fail: int  # order < 32*sqrt(p+1)
    checkpoints: list[dict]
    etf_delta: float

    def to_dict(self) -> dict:
        return {
            "x_max": self.x_max,
            "C": self.c,
            "trace": self.trace,
            "primes_examined": self.primes_examined,
            "count_le_C_sqrt_x": self.count_le_c_sqrt_x,
            "count_flag_fail": self.count_flag_fail,
            "checkpoints": self.checkpoints,
            "etf_delta": self.etf_delta,
        }


ETF_DELTA = 1 - (1 + math.log(math.log(2))) / math.log(2)  # 0.086071...


def scan(x_max: int, c: float = 1.0, trace: int = DEFAULT_TRACE,
         checkpoint_base: int = 10) -> ScanSummary:
    """Exact count of primes p <= x with small order, at power checkpoints.

    Two counters per checkpoint x: o_p <= C*sqrt(x) (the scaled form) and
    o_p < 32*sqrt(p+1) (the per-prime threshold).  Ratios are relative to
    pi(x).  Checkpoints sit at powers of checkpoint_base plus x_max itself.
    """
    if x_max < 2:
        raise ValueError("x_max must be >= 2")
    if checkpoint_base < 2:
        raise ValueError("checkpoint_base must be >= 2")
    ps, orders = orders_up_to(x_max, trace)
    checkpoints = []
    marks = [checkpoint_base ** k for k in range(1, 64)
             if checkpoint_base ** k < x_max]
    marks.append(x_max)
    flag_fail = orders < 32 * np.sqrt(ps + 1.0)
    for mark in marks:
        sel = ps <= mark
        n_primes = int(sel.sum())
        if n_primes == 0:
            continue
        cnt_scaled = int((orders[sel] <= c * math.sqrt(mark)).sum())
        cnt_flag = int(flag_fail[sel].sum())
        checkpoints.append({
            "x": mark,
            "pi": n_primes,
            "count_le_C_sqrt_x": cnt_scaled,
            "ratio_le_C_sqrt_x": cnt_scaled / n_primes,
            "count_flag_fail": cnt_flag,
            "ratio_flag_fail": cnt_flag / n_primes,
        })
    last = checkpoints[-1]
    return ScanSummary(
        x_max, c, trace, last["pi"], last["count_le_C_sqrt_x"],
        last["count_flag_fail"], checkpoints, ETF_DELTA,
    )
