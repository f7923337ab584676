import math

import numpy as np
import pytest

from markoff import action, ff, surface
from markoff.errors import FalsificationError


def test_apply_examples():
    assert action.apply_gen("rot1", 3, 3, 3, 7) == (3, 3, 6)  # xz - y = 9 - 3
    once = action.apply_gen("R3", 3, 3, 3, 7)
    assert once == (3, 3, 6)
    assert action.apply_gen("R3", *once, 7) == (3, 3, 3)  # involution
    assert action.apply_gen("t12", 1, 2, 4, 35) == (2, 1, 4)


def test_rot_definitions_match_composition():
    # rot_j = R_{j+2} after the transposition of the other two coordinates
    for p in (5, 7):
        for t in zip(*surface.prime_table(p).decode(surface.prime_table(p).codes)):
            x, y, z = (int(v) for v in t)
            assert action.apply_gen("rot1", x, y, z, p) == action.compose("R3", "t23")(x, y, z, p)
            assert action.apply_gen("rot2", x, y, z, p) == action.compose("R1", "t13")(x, y, z, p)
            assert action.apply_gen("rot3", x, y, z, p) == action.compose("R2", "t12")(x, y, z, p)


@pytest.mark.parametrize("p", [2, 5, 7, 11])
@pytest.mark.parametrize("tag", action.GENERATOR_TAGS)
def test_generator_images_are_solution_preserving_bijections(p, tag):
    tab = surface.prime_table(p)
    perm = action.solution_perm(tab, tag)
    assert np.array_equal(np.sort(perm), np.arange(tab.size))
    # images solve the equation: by construction they index into the table,
    # so re-check the equation on the decoded images
    x, y, z = tab.decode(tab.codes[perm])
    assert ((x * x + y * y + z * z - x * y * z) % p == 0).all()


@pytest.mark.parametrize("p", [5, 7, 11])
def test_generators_preserve_blocks(p):
    tab = surface.prime_table(p)
    for tag in action.GENERATOR_TAGS:
        perm = action.solution_perm(tab, tag)
        # the induced map on block ids must be well defined
        img_blocks = tab.block_ids[perm]
        for b in range(tab.block_count):
            members = img_blocks[tab.block_ids == b]
            assert (members == members[0]).all()


def test_involutions_and_inverses():
    p = 11
    tab = surface.prime_table(p)
    for tag in ("R1", "R2", "R3", "t12", "t13", "t23"):
        perm = action.solution_perm(tab, tag)
        assert np.array_equal(perm[perm], np.arange(tab.size))


def test_orbit_examples():
    assert action.orbits(7, "blocks").sizes == [7]
    assert action.orbits(5, "solutions").sizes == [40]
    assert action.orbits(3, "blocks").sizes == []
    assert action.orbits(5, "blocks").transitive


def test_orbits_full_generator_set_agree():
    for p in (5, 7, 11):
        a = action.orbits(p, "solutions", action.MINIMAL_GENERATORS)
        b = action.orbits(p, "solutions", action.GENERATOR_TAGS)
        assert a.sizes == b.sizes


def test_cycle_census_examples():
    c = action.cycle_census(7, 3)
    assert (c.d, c.cycle_count, c.conic_size) == (4, 1, 4)
    c = action.cycle_census(5, 2)
    assert (c.kind, c.d, c.cycle_count) == (surface.PARABOLIC, 5, 1)
    rep = action.census_verify(7)
    assert rep["rot1_order"] == 12  # lcm(3, 4) = (p^2-1)/4


def test_cycle_census_all_coordinates_agree():
    for p, x in ((7, 3), (13, 2), (13, 0)):
        rows = [action.cycle_census(p, x, coordinate=j) for j in (1, 2, 3)]
        assert len({(c.d, c.cycle_count, c.conic_size) for c in rows}) == 1


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17, 19, 29, 31, 37, 41, 43, 47])
def test_census_verify_small(p):
    rep = action.census_verify(p)
    assert rep["rot1_order"] == action.rotation_order_formula(p)


def test_parabolic_p_cycle_and_coprimality():
    for p in (5, 13, 17, 29):
        c = action.cycle_census(p, 2)
        assert (c.d, c.cycle_count) == (p, 1)
        rep = action.census_verify(p)
        for row in rep["rows"]:
            if row.kind != surface.PARABOLIC:
                assert math.gcd(row.d, p) == 1


def test_parity():
    ident = np.arange(6)
    assert action.parity(ident) == "even"
    swap = ident.copy()
    swap[[0, 1]] = [1, 0]
    assert action.parity(swap) == "odd"
    # 19 = 3 (mod 16): the action is expected alternating, so rot1 is even
    tab = surface.prime_table(19)
    assert action.parity(action.block_perm(tab, "rot1")) == "even"


def test_perm_power_and_fixed_points():
    rng = np.random.default_rng(7)
    perm = rng.permutation(50)
    e = 7
    direct = perm.copy()
    for _ in range(e - 1):
        direct = perm[direct]
    assert np.array_equal(action.perm_power(perm, e), direct)
    assert action.fixed_point_count(perm, e) == int((direct == np.arange(50)).sum())


def test_minimal_block_synthetic():
    shift = np.array([[1, 2, 3, 0]])  # 4-cycle
    blk = action.minimal_block(shift, 0, 2)
    assert blk.tolist() == [0, 2]
    rep = action.primitivity(shift, 0)
    assert not rep.primitive
    assert rep.witness_block == [0, 2]


def test_primitivity_small_primes():
    assert action.primitivity_for_prime(5).primitive
    assert action.primitivity_for_prime(7).primitive  # prime degree, transitive


def test_primitivity_rejects_intransitive():
    two_orbits = np.array([[1, 0, 3, 2]])  # (01)(23)
    with pytest.raises(ValueError, match="intransitive"):
        action.primitivity(two_orbits, 0)


def test_certify_13():
    chain = action.certify(13)
    assert chain.transitive and chain.primitive
    assert chain.witness["rot1_order"] == 546  # 13 * 168 / 4
    assert chain.witness["exponent"] == 42
    assert chain.witness["is_p_cycle"]
    assert chain.conclusion == "Sym"


def test_certify_7():
    chain = action.certify(7)
    assert chain.witness == {
        "type": "fixed_points", "power": 4, "count": 4, "expected": 4, "match": True,
    }
    assert chain.conclusion == "AltOrSym-conditional"
    assert chain.conditional_verdict == "Sym"


def test_certify_5():
    assert action.certify(5).conclusion == "Sym"


def test_certify_19_alternating():
    chain = action.certify(19)  # 19 = 3 (mod 16)
    assert chain.conditional_verdict == "Alt"
    assert all(v == "even" for v in chain.parities.values())


def test_certify_rejects_bad_input():
    with pytest.raises(ValueError):
        action.certify(4)
    with pytest.raises(ValueError):
        action.certify(3)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_verify_relations(p):
    rep = action.verify_relations(p)
    assert rep["points"] == {5: 40, 7: 28, 11: 88}[p]
    assert rep["R3_eq_rot1_tau23"] and rep["t132_eq_rot3_then_rot1"]


def test_census_mismatch_is_falsification(monkeypatch):
    # corrupt the predicted order to exercise the falsification path
    monkeypatch.setattr(action, "rotation_order_formula", lambda p: 999)
    with pytest.raises(FalsificationError):
        action.census_verify(5)
