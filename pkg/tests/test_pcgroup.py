"""Tests for the pc presentation engine and the subgroup machinery.

The toy group (2**8 elements) is small enough that everything has a brute
force oracle: exhaustive element sets, exhaustive subgroup products,
oracle coset partitions.  The big groups get consistency sweeps plus spot
checks that must agree with structure known from the construction.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixdih import calculus as ca
from mixdih import pcgroup as pc


def test_validation_rejects_bad_words():
    with pytest.raises(ValueError):
        pc.PcPresentation(2, [1, 0], {})  # power word not above index 0
    with pytest.raises(ValueError):
        pc.PcPresentation(2, [0, 0], {(0, 1): 2})  # key not j > i
    with pytest.raises(ValueError):
        pc.PcPresentation(2, [0, 0], {(1, 0): 1})  # conj word touches index 0


def test_trivial_conjugates_are_dropped():
    g = pc.PcPresentation(3, [0, 0, 0], {(1, 0): 2, (2, 0): 6})
    assert (1, 0) not in g.conj and (2, 0) in g.conj
    assert g.noncomm[0] == 4


def test_collector_on_elementary_abelian():
    g = pc.PcPresentation(4, [0] * 4, {})
    for u in range(16):
        for v in range(16):
            assert g.collect_multiply(u, v) == u ^ v


def test_collector_on_dihedral8():
    # <s, t | s^2, t^2 = c, c^2, t^s = t*c> is dihedral of order 8
    g = pc.PcPresentation(3, [0, 4, 0], {(1, 0): 6})
    assert pc.consistency_check(g) == []
    s, t = 1, 2
    assert g.element_order(t) == 4
    assert g.element_order(s) == 2
    assert g.element_order(g.multiply(s, t)) == 2
    # all eight elements distinct
    seen = set()
    for e in range(8):
        seen.add(e)
    assert len({g.collect_multiply(u, v) for u in seen for v in seen}) == 8


def test_collector_width_guard(toy):
    with pytest.raises(ValueError):
        toy.collect_multiply(1 << 8, 0)


def test_consistency_clean(toy, h56, p59):
    assert pc.consistency_check(toy) == []
    assert pc.consistency_check(h56) == []
    assert pc.consistency_check(p59) == []


def test_consistency_catches_mutation(h56):
    # flip one bit in one conjugation word; an overlap test must fail
    conj = dict(h56.conj)
    key = (8, 1)  # c11 ** x2
    assert key in conj
    mutated = dict(conj)
    mutated[key] = conj[key] ^ (1 << 30)
    g = pc.PcPresentation(56, h56.power_tails, mutated)
    assert pc.consistency_check(g) != []


def test_inverse_and_power(toy, p59):
    rng = random.Random(21)
    for g in (toy, p59):
        for _ in range(60):
            u = rng.getrandbits(g.n)
            iu = g.inverse(u)
            assert g.multiply(u, iu) == 0
            assert g.multiply(iu, u) == 0
            assert g.power(u, g.element_order(u)) == 0
            assert g.power(u, -1) == iu
            assert g.power(u, 3) == g.multiply(g.multiply(u, u), u)


def test_element_wrapper(toy):
    a = toy.element(1)
    b = toy.element(2)
    assert (a * b).exp == toy.multiply(1, 2)
    assert (a * a).is_identity()
    assert str(toy.element(0)) == "1"
    assert str(a) == "x1"
    other = ca.build_toy()
    with pytest.raises(pc.OwnerMismatch):
        a * other.element(1)
    with pytest.raises(ValueError):
        toy.element(1 << 9)


def test_commutator_definition(p59):
    rng = random.Random(22)
    mul = p59.multiply
    for _ in range(40):
        u, v = rng.getrandbits(59), rng.getrandbits(59)
        direct = mul(mul(mul(p59.inverse(u), p59.inverse(v)), u), v)
        assert p59.commutator(u, v) == direct


# ── subgroups: toy oracles ──────────────────────────────────────────────────


def brute_closure(group, gens):
    """Oracle subgroup closure by plain orbit of multiplication."""
    elems = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                w = group.multiply(e, g)
                if w not in elems:
                    elems.add(w)
                    nxt.append(w)
        frontier = nxt
    return elems


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 255), max_size=5))
def test_subgroup_igs_matches_brute_closure(toy, gens):
    s = pc.subgroup_igs(toy, gens)
    brute = brute_closure(toy, gens)
    assert s.order == len(brute)
    assert all(s.contains(e) for e in brute)
    assert set(s.elements()) == brute


def test_igs_generator_order_insensitive(toy):
    rng = random.Random(23)
    gens = [rng.getrandbits(8) for _ in range(4)]
    digests = set()
    for _ in range(10):
        rng.shuffle(gens)
        digests.add(pc.subgroup_igs(toy, gens).digest())
    assert len(digests) == 1


def test_canonical_members_reduced(h56):
    rng = random.Random(24)
    gens = [rng.getrandbits(56) for _ in range(5)]
    s = pc.subgroup_igs(h56, gens)
    # every member has zero exponent at the other members' leading indices
    for lead, m in zip(s.leads, s.members):
        for d in s.leads:
            if d != lead:
                assert not (m >> d) & 1


def test_sift_residue_is_coset_canonical(toy):
    rng = random.Random(25)
    gens = [rng.getrandbits(8) for _ in range(3)]
    s = pc.subgroup_igs(toy, gens)
    elems = s.elements()
    # same coset iff same residue; residue lies in the coset
    for _ in range(40):
        u = rng.getrandbits(8)
        r = s.sift(u)
        assert any(toy.multiply(e, u) == r for e in elems)
        v = toy.multiply(elems[rng.randrange(len(elems))], u)
        assert s.sift(v) == r


def test_coset_partition(toy):
    s = pc.subgroup_igs(toy, [1 << 2, 1 << 3])
    reps = {pc.coset_rep(toy, u, s) for u in range(256)}
    assert len(reps) == 256 // s.order


def test_subgroup_of_p59_stabilizer_shape(p59):
    # <x1..x4, r^2>: the twist square normalizes the x side
    gens = [1 << 1] + [1 << (3 + i) for i in range(4)]
    s = pc.subgroup_igs(p59, gens)
    assert s.order_log == 6
    assert s.leads == (1, 2, 3, 4, 5, 6)


def test_derived_subgroup_toy_oracle(toy):
    full = pc.subgroup_igs(toy, [1 << t for t in range(8)])
    der = pc.derived_subgroup(toy, full)
    # oracle: closure of all pairwise commutators of all elements
    comms = set()
    for u in range(256):
        for v in range(0, 256, 5):
            comms.add(toy.commutator(u, v))
    brute = brute_closure(toy, sorted(comms))
    assert der.order == len(brute)
    assert all(der.contains(e) for e in brute)


def test_derived_and_frattini_h56(h56):
    full = pc.subgroup_igs(h56, [1 << t for t in range(56)])
    assert full.order_log == 56
    der = pc.derived_subgroup(h56, full)
    assert der.order_log == 48
    assert der.leads == tuple(range(8, 56))
    # quotient is elementary abelian, so the Frattini subgroup coincides
    fra = pc.frattini(h56, full)
    assert fra.digest() == der.digest()


def test_frattini_p59(p59):
    full = pc.subgroup_igs(p59, [1 << t for t in range(59)])
    fra = pc.frattini(p59, full)
    # P / Phi(P) has rank 2: the twist and one mixed letter class
    assert full.order_log - fra.order_log == 2


def test_maximal_subgroups_toy(toy):
    full = pc.subgroup_igs(toy, [1 << t for t in range(8)])
    maxes = pc.maximal_subgroups(toy, full)
    # toy/Phi has rank 4, so 15 maximal subgroups
    assert len(maxes) == 15
    assert len({m.digest() for m in maxes}) == 15
    for m in maxes:
        assert m.order_log == 7


def test_maximal_subgroups_match_exhaustive_oracle(toy):
    import itertools

    # index-2 subgroups of <x1, y1, c11>, a dihedral subgroup of order 8
    s = pc.subgroup_igs(toy, [1, 4])
    assert s.order_log == 3
    selems = set(s.elements())
    oracle = set()
    for trio in itertools.combinations(sorted(selems - {0}), 3):
        cand = set(trio) | {0}
        closed = all(toy.multiply(u, v) in cand for u in cand for v in cand)
        if closed:
            oracle.add(pc.subgroup_igs(toy, trio).digest())
    maxes = pc.maximal_subgroups(toy, s)
    for m in maxes:
        assert m.order_log == 2
        assert set(m.elements()) <= selems
    assert {m.digest() for m in maxes} == oracle


def test_quotient_coords_h_mod_derived(h56):
    full = pc.subgroup_igs(h56, [1 << t for t in range(56)])
    der = pc.derived_subgroup(h56, full)
    rng = random.Random(26)
    for _ in range(30):
        u, v = rng.getrandbits(56), rng.getrandbits(56)
        cu = pc.quotient_coords(h56, u, full, der)
        cv = pc.quotient_coords(h56, v, full, der)
        cuv = pc.quotient_coords(h56, h56.multiply(u, v), full, der)
        assert cu.width == 8
        assert (cu ^ cv) == cuv
    # letters map to unit vectors
    for t in range(8):
        assert pc.quotient_coords(h56, 1 << t, full, der).bits == 1 << t


def test_quotient_coords_rejects_outsiders(p59):
    xonly = pc.subgroup_igs(p59, [1 << (3 + i) for i in range(4)])
    der = pc.subgroup_igs(p59, [])
    with pytest.raises(pc.NotInSubgroup):
        pc.quotient_coords(p59, 1 << 7, xonly, der)


def test_small_intersection_order(p59):
    stab = pc.subgroup_igs(p59, [1 << 1] + [1 << (3 + i) for i in range(4)])
    assert pc.small_intersection_order(p59, stab, stab) == 64
    xonly = pc.subgroup_igs(p59, [1 << (3 + i) for i in range(4)])
    assert pc.small_intersection_order(p59, xonly, stab) == 16
    big = pc.subgroup_igs(p59, [1 << t for t in range(12)])
    with pytest.raises(pc.SmallTooLarge):
        pc.small_intersection_order(p59, stab, big)


def test_subgroup_elements_guard(h56):
    big = pc.subgroup_igs(h56, [1 << t for t in range(20)])
    with pytest.raises(pc.SmallTooLarge):
        big.elements()


# ── save / load round trip ──────────────────────────────────────────────────


def test_save_load_roundtrip(tmp_path, toy):
    path = tmp_path / "toy.pc2"
    pc.save_presentation(toy, path)
    loaded = pc.load_presentation(path)
    assert loaded.n == toy.n
    assert loaded.power_tails == toy.power_tails
    assert loaded.conj == toy.conj
    for u in range(0, 256, 11):
        for v in range(0, 256, 7):
            assert loaded.multiply(u, v) == toy.multiply(u, v)


def test_save_load_p59(tmp_path, p59):
    path = tmp_path / "p.pc2"
    pc.save_presentation(p59, path)
    loaded = pc.load_presentation(path)
    assert loaded.conj == p59.conj
    rng = random.Random(27)
    for _ in range(25):
        u, v = rng.getrandbits(59), rng.getrandbits(59)
        assert loaded.multiply(u, v) == p59.multiply(u, v)


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.pc2"
    path.write_text("nope\n")
    with pytest.raises(ValueError):
        pc.load_presentation(path)
