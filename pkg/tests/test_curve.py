"""Covers y^N = x^a(x-1)^b: fibers, expansions, valuations, divisors."""

import random

import pytest

from beldi.curve import Curve, Divisor, curve_build
from beldi.errors import InputError
from beldi.exactfield import emit, tower_build


@pytest.fixture(scope="module")
def tq():
    return tower_build("x", [])


@pytest.fixture(scope="module")
def t3():
    return tower_build("x^2+x+1", [])


@pytest.fixture(scope="module")
def c2(tq):
    return curve_build(2, 1, 0, tq)


@pytest.fixture(scope="module")
def c3(t3):
    return curve_build(3, 1, 1, t3)


@pytest.fixture(scope="module")
def c4():
    return curve_build(4, 2, 1, tower_build("x^2+1", []))


@pytest.fixture(scope="module")
def ct():
    # same (3,1,1) cover but over the tower of a transcendental point
    tower = tower_build("x^2+x+1", ["t"], "u^3 - t^2 + t")
    return curve_build(3, 1, 1, tower)


# --- construction and genus -------------------------------------------------


def test_genus_table(c2, c3, c4):
    assert c2.genus == 0
    assert c3.genus == 1
    assert c4.genus == 1
    c5 = curve_build(5, 1, 1, tower_build("x^4+x^3+x^2+x+1", []))
    assert c5.genus == 2


def test_ramification_profile(c2, c3, c4):
    assert (c2.r0, c2.e0) == (1, 2)
    assert c2.r1 == 0
    assert (c3.r0, c3.e0, c3.r1, c3.e1) == (1, 3, 1, 3)
    assert (c4.r0, c4.e0, c4.r1, c4.e1) == (2, 2, 1, 4)


def test_rejects_bad_exponents(tq, t3):
    with pytest.raises(InputError):
        curve_build(2, 1, 1, tq)      # two places at infinity
    with pytest.raises(InputError):
        curve_build(4, 2, 2, tower_build("x^2+1", []))  # reducible model
    with pytest.raises(InputError):
        curve_build(2, 2, 0, tq)
    with pytest.raises(InputError):
        curve_build(3, 1, 1, tq)      # no cube root of unity over Q
    with pytest.raises(InputError):
        curve_build(1, 1, 0, tq)


def test_zeta_override_validated(t3):
    with pytest.raises(InputError):
        curve_build(3, 1, 1, t3, zeta=t3.one)


# --- fibers -----------------------------------------------------------------


def test_fibers_over_branch_points(c3, c4):
    f0 = c3.places_over(0)
    assert len(f0) == 1 and f0[0].e == 3
    f1 = c3.places_over(1)
    assert len(f1) == 1 and f1[0].e == 3
    finf = c3.places_over("inf")
    assert len(finf) == 1 and finf[0].e == 3
    g0 = c4.places_over(0)
    assert len(g0) == 2 and all(p.e == 2 for p in g0)


def test_fiber_multiplicities_sum_to_n(c2, c3, c4, ct):
    for c, pts in ((c2, [0, 1, "inf", 4, 9]),
                   (c3, [0, 1, "inf"]),
                   (c4, [0, 1, "inf"])):
        for pt in pts:
            assert sum(p.e for p in c.places_over(pt)) == c.N
    tgen = ct.tower.gen("t")
    assert sum(p.e for p in ct.places_over(tgen)) == 3


def test_generic_fiber_coordinates(c2):
    places = c2.places_over(4)
    ys = sorted(emit(p.y0) for p in places)
    assert ys == ["-2", "2"]
    assert all(p.e == 1 for p in places)


def test_generic_fiber_rejected_without_root(c2):
    with pytest.raises(InputError):
        c2.places_over(3)   # sqrt(3) is not rational
    tower = tower_build("x", ["t"])
    cov = curve_build(2, 1, 0, tower)
    with pytest.raises(InputError):
        cov.places_over(tower.gen("t"))


def test_transcendental_fiber_uses_u(ct):
    tgen = ct.tower.gen("t")
    fib = ct.places_over(tgen)
    assert len(fib) == 3
    uu = ct.tower.u()
    for p in fib:
        assert p.y0 ** 3 == tgen ** 2 - tgen
    assert any(p.y0 == uu for p in fib)


def test_unbranched_fiber_over_one_when_b_zero(c2):
    fib = c2.places_over(1)
    assert len(fib) == 2 and all(p.e == 1 for p in fib)
    assert sorted(emit(p.y0) for p in fib) == ["-1", "1"]


def test_expansion_at_unbranched_point_over_one(c2):
    # x0 = 1 must not zero out the scaled uniformizer when b = 0
    lo, hi = sorted(c2.places_over(1), key=lambda p: emit(p.y0))
    y = c2.fn_y()
    for p in (lo, hi):
        c2.check_local_model(p)
    assert c2.valuation(y + 1, lo) == 1
    assert c2.valuation(y - 1, hi) == 1
    assert c2.valuation(y + 1, hi) == 0


# --- local expansions and valuations ---------------------------------------


def test_spec_valuations_at_full_ramification(c3):
    p0 = c3.places0[0]
    assert c3.valuation(c3.fn_x(), p0) == 3
    assert c3.valuation(c3.fn_y(), p0) == 1
    p1 = c3.places1[0]
    assert c3.valuation(c3.fn_x() - 1, p1) == 3
    assert c3.valuation(c3.fn_y(), p1) == 1


def test_valuations_at_infinity(c2, c3):
    assert c2.valuation(c2.fn_x(), c2.p_inf) == -2
    assert c2.valuation(c2.fn_y(), c2.p_inf) == -1
    assert c3.valuation(c3.fn_x(), c3.p_inf) == -3
    assert c3.valuation(c3.fn_y(), c3.p_inf) == -2


def test_expansion_window_and_leading_coeff(c2):
    ex = c2.local_expansion(c2.fn_x(), c2.places0[0], order=6)
    assert ex.valuation() == 2
    assert ex.coeff(2) == 1
    assert ex.coeff(3) == 0
    assert ex.order >= 6


def test_expansion_of_zero_function(c2):
    ex = c2.local_expansion(c2.fn_const(0), c2.p_inf, order=4)
    assert ex.valuation() is None
    with pytest.raises(InputError):
        c2.valuation(c2.fn_const(0), c2.p_inf)


def test_parametrizations_satisfy_curve_equation(c2, c3, c4, ct):
    for c in (c2, c3, c4):
        for p in (c.places0 + c.places1 + (c.p_inf,)):
            assert c.check_local_model(p)
    assert c2.check_local_model(c2.places_over(4)[0])
    tgen = ct.tower.gen("t")
    assert ct.check_local_model(ct.places_over(tgen)[2])


def test_high_valuation_forces_order_raise(c3):
    # x^5 vanishes to order 15 at the place over 0; the default window of
    # 2N coefficients has to be raised internally before a term shows
    p0 = c3.places0[0]
    assert c3.valuation(c3.fn_x() ** 5, p0) == 15


def test_valuation_additive_on_products(c2, c3):
    rng = random.Random(11)
    pool2 = [c2.fn_x(), c2.fn_y(), c2.fn_x() - 1, c2.fn_y() + 2, c2.fn_x() + 3]
    pool3 = [c3.fn_x(), c3.fn_y(), c3.fn_x() - 1, c3.fn_y() - 1]
    for c, pool in ((c2, pool2), (c3, pool3)):
        places = [c.places0[0], c.p_inf]
        for _ in range(8):
            f = pool[rng.randrange(len(pool))]
            g = pool[rng.randrange(len(pool))]
            p = places[rng.randrange(len(places))]
            assert c.valuation(f * g, p) == c.valuation(f, p) + c.valuation(g, p)


def test_valuation_of_quotient(c3):
    p0 = c3.places0[0]
    f = c3.fn_y() ** 2 / c3.fn_x()
    assert c3.valuation(f, p0) == 2 - 3


# --- function field arithmetic ---------------------------------------------


def test_defining_relation(c3, c4):
    assert c3.fn_y() ** 3 == c3.parse_function("x*(x-1)")
    assert c4.fn_y() ** 4 == c4.parse_function("x^2*(x-1)")


def test_parse_function_round_trip(c3):
    f = c3.parse_function("(y^2 - alpha*x)/(x - 1)")
    g = f * (c3.fn_x() - 1)
    assert g == c3.fn_y() ** 2 - c3.fn_x() * c3.tower.alpha()


def test_function_inverse(c3):
    f = c3.fn_y() + c3.fn_x() - 1
    assert f * f.inverse() == c3.fn_const(1)
    with pytest.raises(ZeroDivisionError):
        c3.fn_const(0).inverse()


def test_parse_rejects_unknown_symbol(c3):
    with pytest.raises(InputError):
        c3.parse_function("y + w")


# --- canonical divisor ------------------------------------------------------


def test_canonical_degrees(c2, c3):
    assert c2.canonical_divisor().degree() == -2
    assert c3.canonical_divisor().degree() == 0
    c5 = curve_build(5, 1, 1, tower_build("x^4+x^3+x^2+x+1", []))
    assert c5.canonical_divisor().degree() == 2


def test_canonical_coefficients(c3):
    k = c3.canonical_divisor()
    assert k.coeff(c3.p_inf) == -4
    assert k.coeff(c3.places0[0]) == 2
    assert k.coeff(c3.places1[0]) == 2


# --- divisor algebra --------------------------------------------------------


def test_divisor_arithmetic(c3):
    p0 = c3.places0[0]
    d = Divisor.of_place(p0, 2) + Divisor.of_place(c3.p_inf, -1)
    assert d.degree() == 1
    assert (d - d) == Divisor.zero(c3)
    assert (3 * d).coeff(p0) == 6
    assert d.coeff(c3.places1[0]) == 0


def test_divisor_drops_zero_coefficients(c3):
    p0 = c3.places0[0]
    d = Divisor.of_place(p0, 1) - Divisor.of_place(p0, 1)
    assert d == Divisor.zero(c3)
    assert d.support() == []


# --- Galois action ----------------------------------------------------------


def test_galois_identity_and_fixed_points(c3):
    p0 = c3.places0[0]
    d = Divisor.of_place(p0, 5)
    assert c3.galois_translate(d, 0) == d
    for i in range(3):
        assert c3.galois_translate(d, i) == d   # fully ramified: fixed


def test_galois_sign_flip(c2):
    pa, pb = c2.places_over(4)
    q = c2.galois_translate(pa, 1)
    assert q == pb
    assert c2.galois_translate(q, 1) == pa


def test_galois_is_an_action(ct):
    tgen = ct.tower.gen("t")
    fib = ct.places_over(tgen)
    d = (Divisor.of_place(fib[0], 2) + Divisor.of_place(ct.places0[0], 1)
         + Divisor.of_place(ct.p_inf, -3))
    for i in range(3):
        for j in range(3):
            lhs = ct.galois_translate(ct.galois_translate(d, i), j)
            assert lhs == ct.galois_translate(d, (i + j) % 3)
            assert lhs.degree() == d.degree()


def test_galois_orbit_of_transcendental_fiber(ct):
    tgen = ct.tower.gen("t")
    fib = ct.places_over(tgen)
    orbit = {fib[0]}
    p = fib[0]
    for _ in range(2):
        p = ct.galois_translate(p, 1)
        orbit.add(p)
    assert orbit == set(fib)


def test_galois_branch_index_action(c4):
    pa, pb = c4.places0
    assert c4.galois_translate(pa, 1) == pb
    assert c4.galois_translate(pb, 1) == pa
    assert c4.galois_translate(pa, 2) == pa


def test_pullback_matches_translate(ct):
    # v_P(sigma_i^* f) = v_{sigma_i P}(f)
    tgen = ct.tower.gen("t")
    P = ct.places_over(tgen)[2]
    f = ct.fn_y() - ct.tower.u()
    for i in range(3):
        lhs = ct.valuation(f.galois_pullback(i), P)
        rhs = ct.valuation(f, ct.galois_translate(P, i))
        assert lhs == rhs
