import random

import numpy as np
import pytest

from markoff import action, surface, t2


def test_q_invariant_examples():
    assert t2.q_invariant(3, 3, 3, 101) == (27 - 27 - 2) % 101  # the Markoff value -2
    assert t2.q_invariant(2, 2, 2, 101) == 2
    assert t2.q_invariant(0, 0, 0, 7) == (7 - 2) % 7


def test_q_equals_minus2_iff_markoff():
    for p in (5, 7, 11, 13):
        for x in range(p):
            for y in range(p):
                for z in range(p):
                    lhs = t2.q_invariant(x, y, z, p) == (p - 2) % p
                    rhs = (x * x + y * y + z * z - x * y * z) % p == 0
                    assert lhs == rhs


def test_projmatrix_sign_canonicalization():
    p = 7
    m = t2.ProjMatrix(6, 1, 2, 4, p)  # det = 24-2 = 22 = 1 (mod 7)
    n = t2.ProjMatrix(1, 6, 5, 3, p)  # the negated quadruple
    assert m == n
    assert 1 <= (m.a if m.a else m.b) <= (p - 1) // 2


def test_projmatrix_algebra():
    p = 11
    rng = random.Random(5)
    g = t2.group_data(p)
    for _ in range(50):
        i, j = rng.randrange(g.keys.shape[0]), rng.randrange(g.keys.shape[0])
        A = t2.ProjMatrix(*g.entries[i], p)
        B = t2.ProjMatrix(*g.entries[j], p)
        assert t2.matrix_index(g, A * B) == g.table[i, j]
        assert (A * A.inverse()) == t2.ProjMatrix.identity(p)


def test_trace_triple_commutator_identity():
    # Q(trace triple) equals the direct commutator trace, up to the shared sign
    for p in (5, 7):
        g = t2.group_data(p)
        rng = random.Random(p)
        for _ in range(200):
            A = t2.ProjMatrix(*g.entries[rng.randrange(len(g.keys))], p)
            B = t2.ProjMatrix(*g.entries[rng.randrange(len(g.keys))], p)
            x, y, z = t2.trace_triple(A, B)
            comm = A * B * A.inverse() * B.inverse()
            tr = comm.trace()
            q = t2.q_invariant(x, y, z, p)
            assert q in (tr, (-tr) % p)  # commutator trace is sign-canonical


def test_group_data_orders():
    for p in (3, 5, 7, 11):
        g = t2.group_data(p)
        assert g.keys.shape[0] == p * (p * p - 1) // 2
        assert g.table.shape == (g.keys.shape[0],) * 2


def test_is_generating():
    p = 5
    A = t2.ProjMatrix(1, 1, 0, 1, p)
    assert not t2.is_generating(A, A)  # cyclic
    # two involutions generate a dihedral group
    g = t2.group_data(7)
    invs = [t2.ProjMatrix(*g.entries[i], 7) for i in range(len(g.keys))
            if (g.entries[i][0] + g.entries[i][3]) % 7 == 0]
    assert not t2.is_generating(invs[0], invs[1])
    # a pair over the triple (3,3,3) generates PSL(2,5); trace triples are
    # reported by their canonical sign-class member
    target = t2._canon_triple(3, 3, 3, 5)
    found = None
    gd = t2.group_data(5)
    for i in range(len(gd.keys)):
        for j in range(len(gd.keys)):
            A = t2.ProjMatrix(*gd.entries[i], 5)
            B = t2.ProjMatrix(*gd.entries[j], 5)
            if t2.trace_triple(A, B) == target:
                found = (A, B)
                break
        if found:
            break
    assert found and t2.is_generating(*found)


def test_is_generating_bound():
    with pytest.raises(ValueError, match="bounded"):
        t2.group_data(17)


def test_verify_bijection_p5():
    rep = t2.verify_bijection(5)
    assert rep["triples"] == 10
    assert rep["generating_pairs"] == 1200
    assert rep["fiber_size"] == 120
    assert rep["zero_triple_generating_pairs"] == 0


def test_verify_bijection_p7():
    rep = t2.verify_bijection(7)
    assert rep["triples"] == 7
    assert rep["fiber_size"] == 336
    assert rep["generating_pairs"] == 7 * 336


def test_nielsen_check():
    for p in (5, 7):
        rep = t2.nielsen_check(p)
        assert rep["r_is_R3"] and rep["s_is_t12"] and rep["t_is_t23"]


def test_nielsen_action_factors_through_blocks():
    # the permutation of Y*(p) induced by each move equals the action-module one
    p = 7
    g = t2.group_data(p)
    tab = surface.prime_table(p)
    codes, qvals = t2._pair_traces(g)
    minus2 = qvals == (p - 2) % p
    pi, pj = np.nonzero(minus2)
    from markoff import kernels
    sizes = kernels.closure_sizes(g.table, pi.astype(np.int64), pj.astype(np.int64), g.identity)
    gen_mask = sizes == g.keys.shape[0]
    # one generating pair per block
    reps = {}
    for i, j in zip(pi[gen_mask], pj[gen_mask]):
        code = int(codes[i, j])
        reps.setdefault(code, (int(i), int(j)))
    assert len(reps) == tab.block_count
    perm_R3 = action.block_perm(tab, "R3")
    for code, (i, j) in reps.items():
        A = t2.ProjMatrix(*g.entries[i], p)
        B = t2.ProjMatrix(*g.entries[j], p)
        src = int(tab.block_ids_of_codes(np.array([code]))[0])
        moved = t2.trace_triple(A.inverse(), B)
        dst_code = surface._pack(*moved, p)
        dst = int(tab.block_ids_of_codes(np.array([dst_code]))[0])
        assert dst == perm_R3[src]
