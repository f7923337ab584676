"""Diagonal action on products X*(p1) x ... x X*(pk) for square-free moduli.

States are tuples of per-prime ordinals flattened into a mixed-radix index,
so projecting onto one factor is a constant-time field read and the product
permutations compose directly from the per-prime ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import action, ff, surface


def rotation_order(p: int) -> int:
    """Order of a rotation on Y*(p): 3 at p=2, p(p^2-1)/4 or (p^2-1)/4."""
    return action.rotation_order_formula(p)


def rank_key(p: int):
    """Sort key: ascending rotation order, ties broken by the larger prime."""
    return (rotation_order(p), -p)


@dataclass(frozen=True)
class CompositeSpec:
    n: int
    primes: tuple[int, ...]  # in rank order

    @classmethod
    def for_modulus(cls, n: int) -> "CompositeSpec":
        primes = surface._factor_square_free(n)
        return cls(n, tuple(sorted(primes, key=rank_key)))


@dataclass(frozen=True)
class ProductOrbitReport:
    n: int
    primes: tuple[int, ...]
    level: str
    size: int
    orbit_count: int
    largest_orbit: int
    transitive: bool
    orbit_size_histogram: dict[int, int]
    start: tuple[int, int, int]
    wall_time_s: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "primes": list(self.primes),
            "level": self.level,
            "size": self.size,
            "orbit_count": self.orbit_count,
            "largest_orbit": self.largest_orbit,
            "transitive": self.transitive,
            "orbit_size_histogram": {str(k): v for k, v in sorted(self.orbit_size_histogram.items())},
            "start": list(self.start),
        }


class ProductAction:
    """Per-prime permutations assembled into product permutations."""

    def __init__(self, n: int, level: str = "solutions",
                 cell_limit: int = surface.DEFAULT_CELL_LIMIT,
                 tags: tuple = action.MINIMAL_GENERATORS):
        self.spec = CompositeSpec.for_modulus(n)
        self.level = level
        self.tags = tags
        self.tables = [surface.prime_table(p) for p in self.spec.primes]
        if level == "solutions":
            self.sizes = [t.size for t in self.tables]
        elif level == "blocks":
            self.sizes = [t.block_count for t in self.tables]
        else:
            raise ValueError("level must be 'solutions' or 'blocks'")
        total = 1
        for s in self.sizes:
            total *= s
        if total > cell_limit:
            raise ValueError(
                f"product for n={n} at level={level} has {total} cells, above the "
                f"limit {cell_limit}; pass cell_limit >= {total} to override"
            )
        self.size = total
        # strides, first (rank-ordered) prime most significant
        self.strides = []
        acc = 1
        for s in reversed(self.sizes):
            self.strides.append(acc)
            acc *= s
        self.strides.reverse()

    def product_perms(self) -> np.ndarray:
        """(g, size) permutation array for the diagonal action."""
        out = np.empty((len(self.tags), self.size), np.int64)
        idx = np.arange(self.size, dtype=np.int64)
        for gi, tag in enumerate(self.tags):
            img = np.zeros(self.size, np.int64)
            for table, s, stride in zip(self.tables, self.sizes, self.strides):
                make = action.solution_perm if self.level == "solutions" else action.block_perm
                perm = make(table, tag)
                ords = (idx // stride) % s
                img += perm[ords] * stride
            out[gi] = img
        return out

    def start_index(self, triple=(3, 3, 3)) -> int:
        """Flat index of a triple given by its residues mod n."""
        x, y, z = triple
        flat = 0
        for table, stride in zip(self.tables, self.strides):
            p = table.p
            code = np.array([surface._pack(x % p, y % p, z % p, p)])
            if self.level == "solutions":
                ordinal = int(table.index_of_codes(code)[0])
            else:
                ordinal = int(table.block_ids_of_codes(code)[0])
            flat += ordinal * stride
        return flat

    def project(self, flat_indices: np.ndarray, factor: int) -> np.ndarray:
        """Per-prime ordinals of flat states (CRT projection onto one factor)."""
        return (np.asarray(flat_indices) // self.strides[factor]) % self.sizes[factor]


def composite_transitivity(n: int, level: str = "solutions",
                           cell_limit: int = surface.DEFAULT_CELL_LIMIT,
                           start=(3, 3, 3)) -> ProductOrbitReport:
    """Orbit partition of the diagonal action on X*(n) (or Y*(n)).

    Transitive iff the orbit of the start triple is everything; the full
    partition is reported either way.
    """
    import time

    t0 = time.perf_counter()
    pa = ProductAction(n, level, cell_limit)
    if pa.size == 0:
        return ProductOrbitReport(n, pa.spec.primes, level, 0, 0, 0, True, {}, tuple(start), 0.0)
    perms = pa.product_perms()
    part = action.orbit_partition(perms)
    # label ids are discovery-ordered; make sure the start's orbit is reported
    start_idx = pa.start_index(start)
    largest = max(part.sizes)
    hist: dict[int, int] = {}
    for s in part.sizes:
        hist[s] = hist.get(s, 0) + 1
    return ProductOrbitReport(
        n, pa.spec.primes, level, pa.size, part.count, largest,
        part.count == 1, hist, tuple(start),
        wall_time_s=time.perf_counter() - t0,
    )


def block_transitivity(n: int, cell_limit: int = surface.DEFAULT_CELL_LIMIT) -> ProductOrbitReport:
    return composite_transitivity(n, "blocks", cell_limit)


def square_free_moduli(bound: int, min_factor: int = 5) -> list[int]:
    """Square-free n <= bound with every prime factor >= min_factor."""
    out = []
    for n in range(max(min_factor, 2), bound + 1):
        fac = ff.factorize(n)
        if all(e == 1 for e in fac.values()) and min(fac) >= min_factor:
            out.append(n)
    return out
