"""Automorphism-side tests for the 4+4 layered quotient.

Ground truth used here: orders of the named maps, the closure order 1800,
the single orbit on the thirty nonidentity letter-block elements, the
pointwise stabilizer, and the two deliberate non-examples.
"""

import random

import pytest

from mixdih import calculus as ca
from mixdih import morphisms as mo
from mixdih import pcgroup as pc


@pytest.fixture(scope="module")
def named(h56):
    return mo.catalog(h56)


@pytest.fixture(scope="module")
def verified(h56, named):
    out = {}
    for name in ("x_singer_generator", "y_singer_generator",
                 "x_companion_cycle", "y_companion_cycle", "twist_conjugation"):
        out[name] = mo.extend(named[name])
    return out


def test_extend_is_homomorphism_on_random_products(h56, verified):
    rng = random.Random(31)
    for f in verified.values():
        for _ in range(40):
            u, v = rng.getrandbits(56), rng.getrandbits(56)
            assert f.apply(h56.multiply(u, v)) == h56.multiply(f.apply(u), f.apply(v))


def test_identity_and_apply(h56):
    ident = mo.identity_automorphism(h56)
    rng = random.Random(32)
    for _ in range(20):
        u = rng.getrandbits(56)
        assert ident.apply(u) == u
    assert ident.is_identity()


def test_named_map_orders(verified):
    assert mo.automorphism_order(verified["x_singer_generator"]) == 15
    assert mo.automorphism_order(verified["y_singer_generator"]) == 15
    assert mo.automorphism_order(verified["x_companion_cycle"]) == 5
    assert mo.automorphism_order(verified["y_companion_cycle"]) == 5
    assert mo.automorphism_order(verified["twist_conjugation"]) == 8


def test_twist_conjugation_matches_rho(h56, verified):
    rho = ca.make_rho(h56)
    f = verified["twist_conjugation"]
    rng = random.Random(33)
    for _ in range(60):
        u = rng.getrandbits(56)
        assert f.apply(u) == rho(u)


def test_singer_powers_relate_to_companions(verified):
    # the cube of each singer generator is the inverse companion cycle
    a1 = verified["x_singer_generator"]
    b1 = verified["x_companion_cycle"]
    assert mo.aut_power(a1, 3) == mo.aut_power(b1, 4)
    a2 = verified["y_singer_generator"]
    b2 = verified["y_companion_cycle"]
    assert mo.aut_power(a2, 3) == mo.aut_power(b2, 4)


def test_compose_against_pointwise(h56, verified):
    f = verified["x_singer_generator"]
    g = verified["twist_conjugation"]
    fg = mo.compose(f, g)
    rng = random.Random(34)
    for _ in range(30):
        u = rng.getrandbits(56)
        assert fg.apply(u) == g.apply(f.apply(u))


def test_twist_conjugation_check(h56):
    assert mo.twist_conjugation_check(h56)


def test_negative_maps_rejected(named):
    with pytest.raises(mo.NotHomomorphism):
        mo.extend(named["x_centralizer_candidate"])
    with pytest.raises(mo.NotHomomorphism):
        mo.extend(named["x_half_turn"])


def test_letter_swap_rejected(h56):
    # swapping x1 and y1 breaks commutation inside the x block
    gmap = mo._gmap(h56, {"x1": "y1", "y1": "x1"})
    with pytest.raises(mo.NotHomomorphism):
        mo.extend(gmap)


def test_collapse_rejected(h56):
    # killing the y block is a genuine endomorphism (every commutator image
    # collapses) but the image only has order 2**4
    gmap = mo._gmap(h56, {"y1": "1", "y2": "1", "y3": "1", "y4": "1"})
    with pytest.raises(mo.NotBijective):
        mo.extend(gmap)


def test_closure_order_1800(h56, verified):
    k = mo.closure([verified["x_singer_generator"],
                    verified["y_singer_generator"],
                    verified["twist_conjugation"]], cap=4000)
    assert k.order == 1800


def test_closure_budget(verified):
    with pytest.raises(mo.ClosureBudgetExceeded):
        mo.closure([verified["x_singer_generator"],
                    verified["y_singer_generator"]], cap=10)


def test_normality_report(h56):
    rep = mo.normality_criterion_report(h56)
    assert rep.aut_order == 1800
    assert rep.orbit_size == 30
    assert rep.orbit_is_letter_set
    assert rep.stabilizer_order == 15
    assert rep.stabilizer_is_y_singer_cycle
    assert rep.twist_relations_ok
    assert set(rep.negatives_rejected) == {"x_centralizer_candidate", "x_half_turn"}
    assert rep.ok
    # closure order is not divisible by |GL(4,2)|**2, so the closure cannot
    # contain the direct product of both letter-block linear groups
    assert rep.full_product_excluded
    assert rep.aut_order % (20160 ** 2) != 0


def test_parse_and_format_roundtrip(h56, named):
    text = mo.format_generator_map(named["x_singer_generator"])
    parsed = mo.parse_generator_map(h56, text)
    assert parsed.letter_images == named["x_singer_generator"].letter_images


def test_parse_rejects_bad_lines(h56):
    with pytest.raises(ValueError):
        mo.parse_generator_map(h56, "x1 -> z9")
    with pytest.raises(ValueError):
        mo.parse_generator_map(h56, "c11 -> c11")
    with pytest.raises(ValueError):
        mo.parse_generator_map(h56, "x1 + x2")
    with pytest.raises(ValueError):
        mo.parse_generator_map(h56, "x1 -> x2\nx1 -> x3")


def test_generator_map_validation(h56, toy):
    with pytest.raises(ValueError):
        mo.GeneratorMap(h56, (1,) * 7)
    with pytest.raises(ValueError):
        mo.GeneratorMap(h56, (1 << 60,) + (1,) * 7)
    # toy group works through the same machinery
    swap = mo._gmap(toy, {"x1": "x2", "x2": "x1", "y1": "y2", "y2": "y1"})
    f = mo.extend(swap)
    assert mo.automorphism_order(f) == 2
