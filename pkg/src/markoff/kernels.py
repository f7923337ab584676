"""Hot inner loops behind a switchable backend.

Every kernel exists in two flavors: a numba ``@njit`` build and a pure
NumPy/Python build.  The env var ``MARKOFF_BACKEND`` selects which one the
package binds at import time:

    MARKOFF_BACKEND=numba   require numba, fail if it cannot compile
    MARKOFF_BACKEND=numpy   force the pure fallback (no JIT anywhere)
    MARKOFF_BACKEND=auto    numba when importable, fallback otherwise (default)

``implementations(name)`` exposes both flavors regardless of the active
binding so the benchmark in benchmarks/ can compare them head to head.
"""

import os

import numpy as np

_CHOICE = os.environ.get("MARKOFF_BACKEND", "auto").lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"MARKOFF_BACKEND must be auto|numba|numpy, got {_CHOICE!r}")

_njit = None
if _CHOICE in ("auto", "numba"):
    try:
        from numba import njit as _numba_njit

        def _njit(fn):
            return _numba_njit(cache=True, nogil=True)(fn)
    except ImportError:
        if _CHOICE == "numba":
            raise
        _njit = None

BACKEND = "numba" if _njit is not None else "numpy"


# ---------------------------------------------------------------------------
# solution-table enumeration
#
# For an odd prime p, walk all (x, y) and solve z^2 - (xy) z + (x^2+y^2) = 0
# via the discriminant.  sqrt_tab[v] holds the canonical square root of v
# (the one in [0, p/2]) or -1 when v is a non-residue.  Emits packed codes
# x*p^2 + y*p + z in ascending order; (0,0,0) is skipped.
# ---------------------------------------------------------------------------

def _enumerate_codes_loop(p, sqrt_tab, inv2):
    out = np.empty(p * (p + 3) + 8, np.int64)
    k = 0
    pp = p * p
    for x in range(p):
        xx = x * x % p
        base_x = x * pp
        for y in range(p):
            b = x * y % p
            c = (xx + y * y) % p
            disc = (b * b - 4 * c) % p
            r = sqrt_tab[disc]
            if r < 0:
                continue
            if x == 0 and y == 0:
                continue  # would be (0,0,0)
            base = base_x + y * p
            z1 = (b - r) * inv2 % p
            if r == 0:
                out[k] = base + z1
                k += 1
            else:
                z2 = (b + r) * inv2 % p
                if z1 > z2:
                    z1, z2 = z2, z1
                out[k] = base + z1
                out[k + 1] = base + z2
                k += 2
    return out[:k]


def _enumerate_codes_numpy(p, sqrt_tab, inv2):
    x = np.arange(p, dtype=np.int64)
    xx = (x * x) % p
    b = (x[:, None] * x[None, :]) % p
    c = (xx[:, None] + xx[None, :]) % p
    disc = (b * b - 4 * c) % p
    r = sqrt_tab[disc]
    ok = r >= 0
    base = x[:, None] * (p * p) + x[None, :] * p
    z1 = ((b - r) * inv2) % p
    z2 = ((b + r) * inv2) % p
    lo = base[ok] + z1[ok]
    both = ok & (r > 0)
    hi = base[both] + z2[both]
    codes = np.concatenate([lo, hi])
    codes = codes[codes != 0]  # drop (0,0,0); no other triple packs to 0
    codes.sort()
    return codes


# ---------------------------------------------------------------------------
# orbit partition under a set of permutations (breadth-first)
# ---------------------------------------------------------------------------

def _orbit_labels_loop(perms):
    g, n = perms.shape
    labels = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    lab = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = lab
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for gi in range(g):
                w = perms[gi, v]
                if labels[w] < 0:
                    labels[w] = lab
                    queue[tail] = w
                    tail += 1
        lab += 1
    return labels, lab


def _orbit_labels_numpy(perms):
    g, n = perms.shape
    labels = np.full(n, -1, np.int64)
    lab = 0
    pos = 0
    while True:
        while pos < n and labels[pos] >= 0:
            pos += 1
        if pos == n:
            break
        labels[pos] = lab
        frontier = np.array([pos], np.int64)
        while frontier.size:
            nxt = perms[:, frontier].ravel()
            nxt = nxt[labels[nxt] < 0]
            if nxt.size == 0:
                break
            nxt = np.unique(nxt)
            labels[nxt] = lab
            frontier = nxt
        lab += 1
    return labels, lab


# ---------------------------------------------------------------------------
# minimal block system containing a given pair (union-find refinement)
#
# Classic refinement: merge the pair, then propagate "u ~ v implies
# g(u) ~ g(v)" through a queue of merged class representatives.  At most
# n-1 unions happen in total.
# ---------------------------------------------------------------------------

def _min_block_labels_loop(perms, a, b):
    g, n = perms.shape
    parent = np.arange(n)
    qu = np.empty(n, np.int64)
    qv = np.empty(n, np.int64)

    ra = a
    rb = b
    parent[rb] = ra
    qu[0] = rb
    qv[0] = ra
    head, tail = 0, 1
    classes = n - 1
    while head < tail and classes > 1:
        u = qu[head]
        v = qv[head]
        head += 1
        for gi in range(g):
            x = perms[gi, u]
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            y = perms[gi, v]
            while parent[y] != y:
                parent[y] = parent[parent[y]]
                y = parent[y]
            if x != y:
                parent[x] = y
                qu[tail] = x
                qv[tail] = y
                tail += 1
                classes -= 1
    for i in range(n):
        x = i
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        parent[i] = x
    return parent


# ---------------------------------------------------------------------------
# cycle decomposition of a single permutation
# ---------------------------------------------------------------------------

def _cycle_info_loop(perm):
    n = perm.shape[0]
    cid = np.full(n, -1, np.int64)
    lens = np.empty(n, np.int64)
    k = 0
    for s in range(n):
        if cid[s] >= 0:
            continue
        length = 0
        v = s
        while cid[v] < 0:
            cid[v] = k
            v = perm[v]
            length += 1
        lens[k] = length
        k += 1
    return cid, lens[:k]


# ---------------------------------------------------------------------------
# subgroup closure sizes inside a finite group given by its mult table
#
# pairs (ai, bi) index group elements; orbit of the identity under right
# multiplication by the two elements is the subgroup they generate.
# ---------------------------------------------------------------------------

def _closure_sizes_loop(table, pa, pb, identity):
    n = table.shape[0]
    m = pa.shape[0]
    sizes = np.empty(m, np.int64)
    visited = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    for k in range(m):
        i = pa[k]
        j = pb[k]
        visited[:] = 0
        visited[identity] = 1
        queue[0] = identity
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            w = table[v, i]
            if visited[w] == 0:
                visited[w] = 1
                queue[tail] = w
                tail += 1
            w = table[v, j]
            if visited[w] == 0:
                visited[w] = 1
                queue[tail] = w
                tail += 1
        sizes[k] = tail
    return sizes


# ---------------------------------------------------------------------------
# multiplicative orders of (t + sqrt(t^2-4)) / 2 in F_p[u]/(u^2 - D), D=t^2-4
#
# Works uniformly: when D is a QR the ring splits as F_p x F_p and the order
# of the image pair equals the order in F_p; otherwise the ring is F_{p^2}.
# group_exps[k] must hold p_k^2 - 1; smalls is a list of primes covering the
# full factorization of every p^2 - 1 by trial division.
# ---------------------------------------------------------------------------

def _quad_orders_loop(ps, t, smalls):
    m = ps.shape[0]
    orders = np.empty(m, np.int64)
    leg = np.empty(m, np.int64)
    fac_p = np.empty(64, np.int64)
    for k in range(m):
        p = ps[k]
        d = (t * t - 4) % p
        # legendre(D, p) by Euler's criterion
        e = (p - 1) // 2
        base = d % p
        acc = 1
        bb = base
        ee = e
        while ee > 0:
            if ee & 1:
                acc = acc * bb % p
            bb = bb * bb % p
            ee >>= 1
        leg[k] = -1 if acc == p - 1 else acc

        inv2 = (p + 1) // 2
        a0 = t % p * inv2 % p
        a1 = inv2
        # factor p^2 - 1 = (p-1)(p+1) by trial division over smalls
        nf = 0
        rem = p - 1
        for si in range(smalls.shape[0]):
            q = smalls[si]
            if q * q > rem:
                break
            if rem % q == 0:
                fac_p[nf] = q
                nf += 1
                while rem % q == 0:
                    rem //= q
        if rem > 1:
            fac_p[nf] = rem
            nf += 1
        rem = p + 1
        for si in range(smalls.shape[0]):
            q = smalls[si]
            if q * q > rem:
                break
            if rem % q == 0:
                new = True
                for fi in range(nf):
                    if fac_p[fi] == q:
                        new = False
                        break
                if new:
                    fac_p[nf] = q
                    nf += 1
                while rem % q == 0:
                    rem //= q
        if rem > 1:
            new = True
            for fi in range(nf):
                if fac_p[fi] == rem:
                    new = False
                    break
            if new:
                fac_p[nf] = rem
                nf += 1

        order = p * p - 1
        for fi in range(nf):
            q = fac_p[fi]
            while order % q == 0:
                cand = order // q
                # (a0 + a1 u)^cand in F_p[u]/(u^2 - d)
                r0, r1 = 1, 0
                b0, b1 = a0, a1
                ee = cand
                while ee > 0:
                    if ee & 1:
                        r0, r1 = (r0 * b0 + d * r1 * b1) % p, (r0 * b1 + r1 * b0) % p
                    b0, b1 = (b0 * b0 + d * b1 * b1) % p, (2 * b0 * b1) % p
                    ee >>= 1
                if r0 == 1 and r1 == 0:
                    order = cand
                else:
                    break
        orders[k] = order
    return orders


# ---------------------------------------------------------------------------
# backend binding
# ---------------------------------------------------------------------------

_PY_IMPLS = {
    "enumerate_codes": _enumerate_codes_numpy,
    "orbit_labels": _orbit_labels_numpy,
    "min_block_labels": _min_block_labels_loop,
    "cycle_info": _cycle_info_loop,
    "closure_sizes": _closure_sizes_loop,
    "quad_orders": _quad_orders_loop,
}

_NUMBA_IMPLS = {}
if _njit is not None:
    _NUMBA_IMPLS = {
        "enumerate_codes": _njit(_enumerate_codes_loop),
        "orbit_labels": _njit(_orbit_labels_loop),
        "min_block_labels": _njit(_min_block_labels_loop),
        "cycle_info": _njit(_cycle_info_loop),
        "closure_sizes": _njit(_closure_sizes_loop),
        "quad_orders": _njit(_quad_orders_loop),
    }

_ACTIVE = _NUMBA_IMPLS if BACKEND == "numba" else _PY_IMPLS


def implementations(name):
    """Both flavors of a kernel, keyed by backend name (for benchmarks)."""
    out = {"numpy": _PY_IMPLS[name]}
    if _NUMBA_IMPLS:
        out["numba"] = _NUMBA_IMPLS[name]
    return out


enumerate_codes = _ACTIVE["enumerate_codes"]
orbit_labels = _ACTIVE["orbit_labels"]
min_block_labels = _ACTIVE["min_block_labels"]
cycle_info = _ACTIVE["cycle_info"]
closure_sizes = _ACTIVE["closure_sizes"]
quad_orders = _ACTIVE["quad_orders"]
