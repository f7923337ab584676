"""The Markoff transformation group acting on X*(n) and Y*(n).

Generators are realized as explicit permutation arrays over a table;
on top of that sit orbit partitions, cycle censuses of the rotations,
primitivity tests and the Alt/Sym certificate chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ff, kernels, surface
from .errors import FalsificationError

# tags: Vieta involutions, coordinate permutations, rotations
GENERATOR_TAGS = (
    "R1", "R2", "R3",
    "t12", "t13", "t23", "t123", "t132",
    "rot1", "rot2", "rot3",
)

# minimal generating set of the full group (with t12 supplying the odd part)
MINIMAL_GENERATORS = ("rot1", "rot2", "rot3", "t12")


def apply_gen(tag: str, x, y, z, n):
    """One generator applied to a triple mod n; works on ints and arrays."""
    if tag == "R1":
        return (y * z - x) % n, y, z
    if tag == "R2":
        return x, (x * z - y) % n, z
    if tag == "R3":
        return x, y, (x * y - z) % n
    if tag == "t12":
        return y, x, z
    if tag == "t13":
        return z, y, x
    if tag == "t23":
        return x, z, y
    if tag == "t123":
        return z, x, y  # contents move 1->2->3->1
    if tag == "t132":
        return y, z, x
    if tag == "rot1":
        return x, z, (x * z - y) % n
    if tag == "rot2":
        return (x * y - z) % n, y, x
    if tag == "rot3":
        return y, (y * z - x) % n, z
    raise ValueError(f"unknown generator {tag!r}")


def compose(*tags):
    """Function composition of generators; the rightmost tag acts first."""
    def run(x, y, z, n):
        for tag in reversed(tags):
            x, y, z = apply_gen(tag, x, y, z, n)
        return x, y, z
    return run


def solution_perm(table: surface.PrimeTable, tag: str) -> np.ndarray:
    """Permutation array of one generator on X*(p)."""
    p = table.p
    x, y, z = table.decode(table.codes)
    nx, ny, nz = apply_gen(tag, x, y, z, p)
    perm = table.index_of_codes(nx * (p * p) + ny * p + nz)
    perm.setflags(write=False)
    return perm


def block_perm(table: surface.PrimeTable, tag: str) -> np.ndarray:
    """Permutation array of one generator on Y*(p)."""
    p = table.p
    x, y, z = table.decode(table.block_reps)
    nx, ny, nz = apply_gen(tag, x, y, z, p)
    perm = table.block_ids_of_codes(nx * (p * p) + ny * p + nz)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=6)
def perm_set(p: int, level: str = "blocks", tags: tuple = MINIMAL_GENERATORS) -> np.ndarray:
    """Stacked (g, n) permutation array for a generator set."""
    table = surface.prime_table(p)
    make = block_perm if level == "blocks" else solution_perm
    return np.stack([make(table, t) for t in tags])


@dataclass(frozen=True)
class OrbitPartition:
    labels: np.ndarray
    sizes: list[int]

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def transitive(self) -> bool:
        return len(self.sizes) <= 1


def orbit_partition(perms: np.ndarray) -> OrbitPartition:
    if perms.shape[1] == 0:
        return OrbitPartition(np.empty(0, np.int64), [])
    labels, count = kernels.orbit_labels(np.ascontiguousarray(perms))
    sizes = np.bincount(labels, minlength=count)
    return OrbitPartition(labels, [int(s) for s in sizes])


def orbits(p: int, level: str = "blocks", tags: tuple = MINIMAL_GENERATORS) -> OrbitPartition:
    """Orbit partition of X*(p) or Y*(p) under the generated group."""
    table = surface.prime_table(p)
    if (table.size if level == "solutions" else table.block_count) == 0:
        return OrbitPartition(np.empty(0, np.int64), [])
    return orbit_partition(perm_set(p, level, tags))


# ---------------------------------------------------------------------------
# permutation utilities
# ---------------------------------------------------------------------------

def parity(perm: np.ndarray) -> str:
    """'even' or 'odd' via the cycle count."""
    _, lens = kernels.cycle_info(np.ascontiguousarray(perm))
    return "even" if (perm.shape[0] - lens.shape[0]) % 2 == 0 else "odd"


def perm_order(perm: np.ndarray) -> int:
    _, lens = kernels.cycle_info(np.ascontiguousarray(perm))
    return math.lcm(*{int(v) for v in lens})


def perm_power(perm: np.ndarray, e: int) -> np.ndarray:
    """perm^e via cycle rotation, O(n)."""
    n = perm.shape[0]
    out = np.empty(n, np.int64)
    seen = np.zeros(n, bool)
    for s in range(n):
        if seen[s]:
            continue
        cyc = [s]
        seen[s] = True
        v = perm[s]
        while v != s:
            cyc.append(v)
            seen[v] = True
            v = perm[v]
        L = len(cyc)
        k = e % L
        for i in range(L):
            out[cyc[i]] = cyc[(i + k) % L]
    return out


def fixed_point_count(perm: np.ndarray, e: int) -> int:
    """Number of fixed points of perm^e, from the cycle lengths."""
    _, lens = kernels.cycle_info(np.ascontiguousarray(perm))
    lens = np.asarray(lens)
    return int(lens[e % lens == 0].sum())


# ---------------------------------------------------------------------------
# cycle census of rot_j on conic sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleCensus:
    p: int
    x: int  # class representative in [0, p/2]
    kind: str
    omega_order: int | None
    d: int  # common cycle length on C_1(+-x)
    cycle_count: int
    conic_size: int


def cycle_census(p: int, x: int, coordinate: int = 1) -> CycleCensus:
    """Measured cycle structure of rot_j on the block conic C_j(+-x).

    Checks the measurement against the eigenvalue prediction
    d = max(|omega|, |-omega|) / 2 (d = p for the parabolic section) and
    raises FalsificationError on mismatch.
    """
    table = surface.prime_table(p)
    rot = block_perm(table, f"rot{coordinate}")
    sec = table.conic(coordinate, x, "blocks")
    if sec.ordinals.size == 0:
        raise ValueError(f"conic C_{coordinate}(+-{x}) is empty mod {p}")
    kind = surface.classify(x, p)

    cid, lens = kernels.cycle_info(rot)
    sec_cycles = np.unique(cid[sec.ordinals])
    # rotations preserve their conic section: the cycles through the section
    # must tile it exactly
    if int(np.asarray(lens)[sec_cycles].sum()) != sec.ordinals.size:
        raise FalsificationError(f"rot{coordinate} does not preserve C({x}) mod {p}")
    sec_lens = {int(lens[c]) for c in sec_cycles}
    if len(sec_lens) != 1:
        raise FalsificationError(
            f"mixed cycle lengths {sorted(sec_lens)} on C_{coordinate}(+-{x}) mod {p}"
        )
    d_measured = sec_lens.pop()

    if kind == surface.PARABOLIC:
        omega_order = None
        d_expected = p
    else:
        w = surface.omega_of(x, p)
        omega_order = ff.mult_order(w)
        d_expected = max(omega_order, ff.mult_order(-w)) // 2
    if d_measured != d_expected:
        raise FalsificationError(
            f"cycle length {d_measured} != predicted {d_expected} "
            f"for x={x} mod {p} ({kind})"
        )
    count = len(sec_cycles)
    if count * d_measured != sec.ordinals.size:
        raise FalsificationError(f"census does not tile C_{coordinate}(+-{x}) mod {p}")
    return CycleCensus(
        p, min(x % p, (p - x) % p), kind, omega_order, d_measured, count, int(sec.ordinals.size)
    )


def census_verify(p: int) -> dict:
    """Full census over every coordinate value; asserts the multiplicity table.

    For each cycle length d the number of +-x classes must be ceil(phi(d)/2)
    (hyperbolic, p = 1 mod 4) or phi(d)/2 (all other rows), the parabolic
    section must be a single p-cycle when present, and lcm of all cycle
    lengths must equal the closed-form order of rot_1.
    """
    table = surface.prime_table(p)
    rows = []
    by_kind_d: dict[tuple[str, int], int] = {}
    for x in range(p // 2 + 1):
        sec = table.conic(1, x, "blocks")
        if sec.ordinals.size == 0:
            continue
        c = cycle_census(p, x)
        rows.append(c)
        key = (c.kind, c.d)
        by_kind_d[key] = by_kind_d.get(key, 0) + 1

    if p % 4 == 1:
        if by_kind_d.get((surface.PARABOLIC, p), 0) != 1:
            raise FalsificationError(f"parabolic section of Y*({p}) is not a single {p}-cycle")
        hyp_mult = lambda d: (ff.totient(d) + 1) // 2
        hyp_divisor, ell_divisor = (p - 1) // 2, (p + 1) // 2
    else:
        hyp_mult = lambda d: ff.totient(d) // 2
        hyp_divisor, ell_divisor = (p - 1) // 2, (p + 1) // 2

    for (kind, d), got in sorted(by_kind_d.items()):
        if kind == surface.PARABOLIC:
            continue
        if kind == surface.HYPERBOLIC:
            if d == 1 or hyp_divisor % d != 0:
                raise FalsificationError(f"hyperbolic d={d} does not divide (p-1)/2 mod {p}")
            want = hyp_mult(d)
        else:
            if d == 1 or ell_divisor % d != 0:
                raise FalsificationError(f"elliptic d={d} does not divide (p+1)/2 mod {p}")
            if p % 4 == 3 and d < 3:
                raise FalsificationError(f"elliptic d={d} < 3 mod {p}")
            want = ff.totient(d) // 2
        if got != want:
            raise FalsificationError(
                f"multiplicity of ({kind}, d={d}) mod {p}: measured {got}, predicted {want}"
            )

    order = math.lcm(*{c.d for c in rows})
    order_formula = rotation_order_formula(p)
    if order != order_formula:
        raise FalsificationError(
            f"|rot1| on Y*({p}) is {order}, formula says {order_formula}"
        )
    return {
        "p": p,
        "classes": len(rows),
        "rot1_order": order,
        "rows": rows,
    }


def rotation_order_formula(p: int) -> int:
    """Closed form for the order of a rotation on Y*(p)."""
    if p == 2:
        return 3
    if p % 4 == 1:
        return p * (p * p - 1) // 4
    return (p * p - 1) // 4


# ---------------------------------------------------------------------------
# primitivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimitivityReport:
    primitive: bool
    degree: int
    base_point: int
    witness_block: list[int] | None  # a nontrivial block if imprimitive


def minimal_block(perms: np.ndarray, a: int, b: int) -> np.ndarray:
    """Members of the smallest block containing {a, b} for a transitive action."""
    labels = kernels.min_block_labels(np.ascontiguousarray(perms), a, b)
    return np.nonzero(labels == labels[a])[0]


def primitivity(perms: np.ndarray, base: int = 0) -> PrimitivityReport:
    """Minimal-block refinement over every pair {base, other}.

    The action must be transitive (primitivity is undefined otherwise).
    """
    part = orbit_partition(perms)
    if not part.transitive:
        raise ValueError("primitivity is undefined for an intransitive action")
    n = perms.shape[1]
    for other in range(n):
        if other == base:
            continue
        blk = minimal_block(perms, base, other)
        if blk.shape[0] != n:
            return PrimitivityReport(False, n, base, [int(v) for v in blk])
    return PrimitivityReport(True, n, base, None)


def primitivity_for_prime(p: int) -> PrimitivityReport:
    table = surface.prime_table(p)
    base = int(table.block_ids_of_codes(np.array([surface._pack(3 % p, 3 % p, 3 % p, p)]))[0])
    return primitivity(perm_set(p, "blocks"), base)


# ---------------------------------------------------------------------------
# the certificate chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateChain:
    p: int
    degree: int
    transitive: bool
    orbit_sizes: list[int]
    primitive: bool | None
    witness: dict
    parities: dict
    conclusion: str  # Sym | Alt | AltOrSym-conditional | Inconclusive
    conditional_verdict: str | None
    failed_stage: str | None = None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "degree": self.degree,
            "transitive": self.transitive,
            "orbit_sizes": self.orbit_sizes,
            "primitive": self.primitive,
            "witness": self.witness,
            "parities": self.parities,
            "conclusion": self.conclusion,
            "conditional_verdict": self.conditional_verdict,
            "failed_stage": self.failed_stage,
            "mod16": self.p % 16,
            "expected_verdict": "Alt" if self.p % 16 == 3 else "Sym",
        }


def certify(p: int) -> CertificateChain:
    """Transitive -> primitive -> cycle/fixed-point witness -> parity -> verdict.

    For p = 1 (mod 4) the chain closes unconditionally via a p-cycle of prime
    length <= degree - 3; for p = 3 (mod 4) the terminal Alt/Sym step is
    reported as conditional on the classification of finite simple groups.
    """
    if p < 5 or not ff.is_prime(p):
        raise ValueError(f"certify needs a prime p >= 5, got {p}")
    perms = perm_set(p, "blocks")
    n = perms.shape[1]
    part = orbit_partition(perms)
    parities = {tag: parity(perms[i]) for i, tag in enumerate(MINIMAL_GENERATORS)}
    if not part.transitive:
        return CertificateChain(
            p, n, False, part.sizes, None, {}, parities,
            "Inconclusive", None, failed_stage="transitive",
        )
    prim = primitivity_for_prime(p)
    if not prim.primitive:
        return CertificateChain(
            p, n, True, part.sizes, False,
            {"type": "imprimitive_block", "block": prim.witness_block}, parities,
            "Inconclusive", None, failed_stage="primitive",
        )
    rot1 = perms[list(MINIMAL_GENERATORS).index("rot1")]
    any_odd = any(v == "odd" for v in parities.values())
    if p % 4 == 1:
        order = perm_order(rot1)
        exponent = order // p
        sigma = perm_power(rot1, exponent)
        _, lens = kernels.cycle_info(sigma)
        lens = np.asarray(lens)
        is_p_cycle = int((lens == p).sum()) == 1 and int((lens == 1).sum()) == lens.shape[0] - 1
        jordan = is_p_cycle and p <= n - 3
        witness = {
            "type": "p_cycle",
            "rot1_order": order,
            "exponent": exponent,
            "is_p_cycle": bool(is_p_cycle),
            "jordan_applies": bool(jordan),
        }
        if not jordan:
            return CertificateChain(
                p, n, True, part.sizes, True, witness, parities,
                "Inconclusive", None, failed_stage="p_cycle",
            )
        conclusion = "Sym" if any_odd else "Alt"
        return CertificateChain(p, n, True, part.sizes, True, witness, parities, conclusion, None)
    fixed = fixed_point_count(rot1, (p + 1) // 2)
    expected = (p + 1) * (p - 3) // 8
    witness = {
        "type": "fixed_points",
        "power": (p + 1) // 2,
        "count": fixed,
        "expected": expected,
        "match": fixed == expected,
    }
    if fixed != expected:
        raise FalsificationError(
            f"rot1^((p+1)/2) fixes {fixed} points of Y*({p}), expected {expected}"
        )
    verdict = "Sym" if any_odd else "Alt"
    return CertificateChain(
        p, n, True, part.sizes, True, witness, parities,
        "AltOrSym-conditional", verdict,
    )


# ---------------------------------------------------------------------------
# relation checks
# ---------------------------------------------------------------------------

def verify_relations(p: int) -> dict:
    """Pointwise composition identities on all of X*(p).

    R3 equals rot1 followed-after tau23 (tau23 acts first), and the 3-cycle
    (x,y,z) -> (y,z,x) equals rot3 then rot1.  A mismatch is build-stopping.
    """
    table = surface.prime_table(p)
    x, y, z = table.decode(table.codes)
    lhs1 = apply_gen("R3", x, y, z, p)
    rhs1 = apply_gen("rot1", *apply_gen("t23", x, y, z, p), p)
    lhs2 = apply_gen("t132", x, y, z, p)
    rhs2 = apply_gen("rot1", *apply_gen("rot3", x, y, z, p), p)
    ok1 = all(np.array_equal(a, b) for a, b in zip(lhs1, rhs1))
    ok2 = all(np.array_equal(a, b) for a, b in zip(lhs2, rhs2))
    if not (ok1 and ok2):
        raise FalsificationError(f"generator relations fail on X*({p})")
    return {"p": p, "points": table.size, "R3_eq_rot1_tau23": ok1, "t132_eq_rot3_then_rot1": ok2}
