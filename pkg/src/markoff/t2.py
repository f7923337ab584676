"""Generating pairs of PSL(2,p), their trace triples, and the block bijection.

Elements are sign-classes {M, -M} of determinant-one matrices, stored via a
canonical representative whose first nonzero entry lies in [1, (p-1)/2].
The trace map (A, B) -> (tr A, tr B, tr AB) descends to double-sign classes,
and on the commutator-trace -2 stratum it matches the block set Y*(p) with
one conjugacy class of generating pairs above each block.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import action, ff, kernels, surface
from .errors import FalsificationError

SMALL_P_BOUND = 13  # full-group closure enumeration stays cheap up to here


def q_invariant(x: int, y: int, z: int, p: int) -> int:
    """x^2 + y^2 + z^2 - xyz - 2, the commutator trace of a pair over (x,y,z)."""
    return (x * x + y * y + z * z - x * y * z - 2) % p


class ProjMatrix:
    """A PSL(2,p) element: a 2x2 determinant-one matrix up to global sign."""

    __slots__ = ("a", "b", "c", "d", "p")

    def __init__(self, a, b, c, d, p):
        a, b, c, d = a % p, b % p, c % p, d % p
        if (a * d - b * c) % p != 1:
            raise ValueError("determinant must be 1")
        for v in (a, b, c, d):
            if v != 0:
                if v > (p - 1) // 2:
                    a, b, c, d = (-a) % p, (-b) % p, (-c) % p, (-d) % p
                break
        self.a, self.b, self.c, self.d, self.p = a, b, c, d, p

    @classmethod
    def identity(cls, p):
        return cls(1, 0, 0, 1, p)

    def __mul__(self, o: "ProjMatrix") -> "ProjMatrix":
        p = self.p
        return ProjMatrix(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
            p,
        )

    def inverse(self) -> "ProjMatrix":
        return ProjMatrix(self.d, -self.b, -self.c, self.a, self.p)

    def trace(self) -> int:
        """Trace of the canonical representative (defined up to sign)."""
        return (self.a + self.d) % self.p

    def key(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, o):
        return isinstance(o, ProjMatrix) and self.p == o.p and self.key() == o.key()

    def __hash__(self):
        return hash((self.key(), self.p))

    def __repr__(self):
        return f"ProjMatrix([[{self.a},{self.b}],[{self.c},{self.d}]] mod {self.p})"


def _canon_sign_arrays(a, b, c, d, p):
    """Vectorized sign canonicalization of matrix entry arrays."""
    half = (p - 1) // 2
    first = np.where(a != 0, a, np.where(b != 0, b, np.where(c != 0, c, d)))
    flip = first > half
    s = np.where(flip, -1, 1)
    return (s * a) % p, (s * b) % p, (s * c) % p, (s * d) % p


@dataclass(frozen=True)
class GroupData:
    p: int
    entries: np.ndarray  # (N, 4) canonical representatives
    keys: np.ndarray  # packed, sorted ascending == enumeration order
    identity: int
    table: np.ndarray  # (N, N) multiplication table, int32


def _pack_keys(a, b, c, d, p):
    return ((a * p + b) * p + c) * p + d


@lru_cache(maxsize=3)
def group_data(p: int) -> GroupData:
    """PSL(2,p) with its full multiplication table (p <= SMALL_P_BOUND)."""
    if not ff.is_prime(p) or p < 3:
        raise ValueError(f"need an odd prime, got {p}")
    if p > SMALL_P_BOUND:
        raise ValueError(f"group table enumeration is bounded at p = {SMALL_P_BOUND}")
    # SL(2,p): a != 0 -> d = (1+bc)/a; a = 0 -> bc = -1, d free
    rows = []
    for a in range(1, p):
        ainv = pow(a, -1, p)
        for b in range(p):
            for c in range(p):
                rows.append((a, b, c, (1 + b * c) * ainv % p))
    for b in range(1, p):
        cinv = (-pow(b, -1, p)) % p
        for d in range(p):
            rows.append((0, b, cinv, d))
    m = np.array(rows, np.int64).T
    a, b, c, d = _canon_sign_arrays(*m, p)
    keys = _pack_keys(a, b, c, d, p)
    keys, idx = np.unique(keys, return_index=True)
    entries = np.stack([a[idx], b[idx], c[idx], d[idx]], axis=1)
    n = entries.shape[0]
    if n != p * (p * p - 1) // 2:
        raise ArithmeticError(f"|PSL(2,{p})| enumeration came out wrong: {n}")

    ea, eb, ec, ed = entries.T
    table = np.empty((n, n), np.int32)
    for i in range(n):
        ra = ea[i] * ea + eb[i] * ec
        rb = ea[i] * eb + eb[i] * ed
        rc = ec[i] * ea + ed[i] * ec
        rd = ec[i] * eb + ed[i] * ed
        ca, cb, cc, cd = _canon_sign_arrays(ra % p, rb % p, rc % p, rd % p, p)
        table[i] = np.searchsorted(keys, _pack_keys(ca, cb, cc, cd, p))
    ident = int(np.searchsorted(keys, _pack_keys(1, 0, 0, 1, p)))
    for arr in (entries, keys, table):
        arr.setflags(write=False)
    return GroupData(p, entries, keys, ident, table)


def matrix_index(g: GroupData, m: ProjMatrix) -> int:
    key = _pack_keys(m.a, m.b, m.c, m.d, g.p)
    pos = int(np.searchsorted(g.keys, key))
    if pos >= g.keys.shape[0] or g.keys[pos] != key:
        raise KeyError("matrix not in group table")
    return pos


def is_generating(A: ProjMatrix, B: ProjMatrix) -> bool:
    """Whether <A, B> is the whole of PSL(2,p), by closure inside the table."""
    if A.p != B.p:
        raise ValueError("mixed moduli")
    g = group_data(A.p)
    i, j = matrix_index(g, A), matrix_index(g, B)
    sizes = kernels.closure_sizes(
        g.table, np.array([i], np.int64), np.array([j], np.int64), g.identity
    )
    return int(sizes[0]) == g.keys.shape[0]


def trace_triple(A: ProjMatrix, B: ProjMatrix) -> tuple[int, int, int]:
    """(tr A, tr B, tr AB) as the canonical double-sign class representative."""
    p = A.p
    x, y = A.trace(), B.trace()
    z = (A.a * B.a + A.b * B.c + A.c * B.b + A.d * B.d) % p
    return _canon_triple(x, y, z, p)


def _canon_triple(x, y, z, p):
    return min(
        (x, y, z),
        (x, (-y) % p, (-z) % p),
        ((-x) % p, y, (-z) % p),
        ((-x) % p, (-y) % p, z),
    )


def _pair_traces(g: GroupData):
    """Canonical trace-triple codes and Q values for all N^2 ordered pairs."""
    p = g.p
    ea, eb, ec, ed = g.entries.T.astype(np.int64)
    tr = (ea + ed) % p
    n = ea.shape[0]
    codes = np.empty((n, n), np.int64)
    qvals = np.empty((n, n), np.int64)
    for i in range(n):
        x = np.full(n, tr[i], np.int64)
        y = tr
        z = (ea[i] * ea + eb[i] * ec + ec[i] * eb + ed[i] * ed) % p
        c = surface._canonical_block_codes(x, y, z, p)
        codes[i] = c
        qvals[i] = (x * x + y * y + z * z - x * y * z - 2) % p
    return codes, qvals


def verify_bijection(p: int) -> dict:
    """Trace triples of generating pairs with Q = -2 versus the block set Y*(p).

    Checks (i) the two sets coincide, (ii) every fiber has exactly
    p(p^2-1) = |PGL(2,p)| generating pairs, (iii) the zero triple is hit by
    non-generating pairs only.  Any mismatch raises FalsificationError.
    """
    g = group_data(p)
    n = g.keys.shape[0]
    codes, qvals = _pair_traces(g)
    minus2 = (qvals == (p - 2) % p)
    pi, pj = np.nonzero(minus2)
    sizes = kernels.closure_sizes(g.table, pi.astype(np.int64), pj.astype(np.int64), g.identity)
    generating = sizes == n

    gen_codes = codes[pi[generating], pj[generating]]
    uniq, fiber = np.unique(gen_codes, return_counts=True)
    table = surface.prime_table(p)
    if not np.array_equal(uniq, table.block_reps):
        raise FalsificationError(f"trace triples with Q=-2 do not match Y*({p})")
    pgl = p * (p * p - 1)
    if not np.all(fiber == pgl):
        raise FalsificationError(f"some fiber over Y*({p}) is not |PGL(2,{p})| = {pgl}")
    if np.any(gen_codes == 0):
        raise FalsificationError(f"the zero triple admits a generating pair mod {p}")
    return {
        "p": p,
        "group_order": int(n),
        "pairs_q_minus2": int(minus2.sum()),
        "generating_pairs": int(generating.sum()),
        "triples": int(uniq.shape[0]),
        "fiber_size": int(pgl),
        "zero_triple_generating_pairs": 0,
    }


def nielsen_check(p: int) -> dict:
    """The three free-group moves act on trace triples as R3, t12 and t23.

    r: (A,B) -> (A^-1, B), s: (A,B) -> (B, A), t: (A,B) -> (A^-1, AB);
    checked on every ordered pair of group elements, at block level.
    """
    g = group_data(p)
    ea, eb, ec, ed = g.entries.T.astype(np.int64)
    tr = (ea + ed) % p
    n = ea.shape[0]
    for i in range(n):
        x = np.full(n, tr[i], np.int64)
        y = tr
        z = (ea[i] * ea + eb[i] * ec + ec[i] * eb + ed[i] * ed) % p
        # r: new pair (A^-1, B): triple (x, y, tr(A^-1 B))
        zr = (ed[i] * ea - eb[i] * ec - ec[i] * eb + ea[i] * ed) % p
        want = surface._canonical_block_codes(*action.apply_gen("R3", x, y, z, p), p)
        got = surface._canonical_block_codes(x, y, zr, p)
        if not np.array_equal(want, got):
            raise FalsificationError(f"move r is not R3 on trace triples mod {p}")
        # s: (B, A): triple (y, x, tr(BA) = z)
        want = surface._canonical_block_codes(*action.apply_gen("t12", x, y, z, p), p)
        got = surface._canonical_block_codes(y, x, z, p)
        if not np.array_equal(want, got):
            raise FalsificationError(f"move s is not t12 on trace triples mod {p}")
        # t: (A^-1, AB): triple (x, tr(AB) = z, tr(B) = y)
        want = surface._canonical_block_codes(*action.apply_gen("t23", x, y, z, p), p)
        got = surface._canonical_block_codes(x, z, y, p)
        if not np.array_equal(want, got):
            raise FalsificationError(f"move t is not t23 on trace triples mod {p}")
    return {"p": p, "pairs_checked": int(n) * int(n), "r_is_R3": True, "s_is_t12": True, "t_is_t23": True}
