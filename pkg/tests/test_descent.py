"""Parabolic pullback, class matching, towers, and descent verdicts."""

import random
from fractions import Fraction

import pytest

from beldi.curve import Divisor, curve_build
from beldi.errors import InputError, InternalError
from beldi.exactfield import Matrix, tower_build
from beldi.pushpar import ParabolicP1Bundle, SplitBundle, assemble_parabolic
from beldi.descent import (ConstrainedBundle, TowerSpec, class_decompose,
                           descent_verdict, end_algebra, hom_from, hom_into,
                           indecomposable_test, invariants_transversal,
                           parabolic_pullback, pushdown_extract, verify_e18,
                           verify_invariant_subbundle)


@pytest.fixture(scope="module")
def c2():
    return curve_build(2, 1, 0, tower_build("x", []))


@pytest.fixture(scope="module")
def c3():
    return curve_build(3, 1, 1, tower_build("x^2+x+1", []))


@pytest.fixture(scope="module")
def c412():
    return curve_build(4, 1, 2, tower_build("x^2+1", []))


@pytest.fixture(scope="module")
def c4():
    return curve_build(4, 2, 1, tower_build("x^2+1", []))


@pytest.fixture(scope="module")
def ct():
    tower = tower_build("x^2+x+1", ["t"], "u^3 - t^2 + t")
    return curve_build(3, 1, 1, tower)


def pullback_of_trivial(c):
    return parabolic_pullback(
        assemble_parabolic(SplitBundle(c, [Divisor.zero(c)])), c)


# --- parabolic pullback ---

def test_pullback_double_cover_shape(c2):
    U = pullback_of_trivial(c2)
    Q0 = Divisor.of_place(c2.places0[0])
    P = Divisor.of_place(c2.p_inf)
    assert U.rank == 2
    assert U.frame_twists == (0, -1)
    assert list(U.ambient.divisors) == [Q0 + P, Q0 - P]
    assert [(p.kind, d, f.nrows) for p, d, f in U.conditions] \
        == [("branch0", 1, 1), ("inf", 1, 1)]
    assert U.degree == 0


def test_pullback_degree_law(c2, c3, c412):
    # deg of the pullback of the direct image recovers N * deg E
    for c in (c2, c3, c412):
        D = Divisor.of_place(c.p_inf)
        for divs in ([Divisor.zero(c)], [-1 * D], [Divisor.zero(c), -2 * D]):
            E = SplitBundle(c, divs)
            U = parabolic_pullback(assemble_parabolic(E), c)
            assert U.degree == c.N * E.degree


def test_trivially_flagged_pullback_is_plain(c2):
    pb = assemble_parabolic(SplitBundle(c2, [Divisor.zero(c2)]))
    tower = c2.tower
    width = len(pb.splitting)
    full = Matrix(tower, [[tower.one if i == j else tower.zero
                           for j in range(width)] for i in range(width)],
                  ncols=width)
    empty = Matrix(tower, [], ncols=width)
    flags = {}
    weights = {}
    for label in ("0", "1", "infinity"):
        n = len(pb.models[label].places)
        flags[label] = [[full, empty] for _ in range(n)]
        weights[label] = [[Fraction(0)] for _ in range(n)]
    triv = ParabolicP1Bundle(pb.bundle, pb.splitting, pb.maps, flags,
                             weights, pb.models)
    U = parabolic_pullback(triv, c2)
    assert U.conditions == ()
    F = c2.fiber_divisor("inf")
    assert list(U.ambient.divisors) == [m * F for m in pb.splitting]


def test_pullback_rejects_incompatible_multiplicity(c2, c3):
    # weights with denominator 2 cannot sit under places of multiplicity 3
    W = assemble_parabolic(SplitBundle(c2, [Divisor.zero(c2)]))
    with pytest.raises(InputError, match="incompatible with multiplicities"):
        parabolic_pullback(W, c3)


# --- hom spaces and class matching ---

def test_hom_dimensions_double_cover(c2):
    U = pullback_of_trivial(c2)
    O = Divisor.zero(c2)
    assert len(hom_into(U, O)) == 2
    assert len(hom_from(U, O)) == 2


def test_class_decompose_trivial_pair(c2):
    U = pullback_of_trivial(c2)
    m = class_decompose(U, [Divisor.zero(c2), Divisor.zero(c2)])
    assert m.ok
    assert len(m.entries) == 2
    assert m.composite.rank() == 2


def test_class_decompose_plain_pullback_split(c2):
    # f^*(O (+) O(-1)) matches {0, -Q0 - Qinf}: the second class is the
    # pullback of O(-1) up to the principal divisor of y
    F = c2.fiber_divisor("inf")
    amb = SplitBundle(c2, [Divisor.zero(c2), -1 * F])
    U = ConstrainedBundle(c2, amb, [], (0, -1))
    D = -1 * Divisor.of_place(c2.places0[0]) - Divisor.of_place(c2.p_inf)
    m = class_decompose(U, [Divisor.zero(c2), D])
    assert m.ok
    assert m.multiset() == sorted([(), tuple((p.sort_key(), n)
                                             for p, n in D.items())])


def test_class_decompose_degree_mismatch_is_failure(c2):
    U = pullback_of_trivial(c2)
    bad = class_decompose(U, [Divisor.zero(c2),
                              Divisor.of_place(c2.p_inf)])
    assert not bad.ok
    assert "degree" in bad.detail
    assert bad.entries == ()


def test_class_decompose_count_mismatch_is_failure(c2):
    U = pullback_of_trivial(c2)
    bad = class_decompose(U, [Divisor.zero(c2)])
    assert not bad.ok
    assert "count" in bad.detail


def test_class_decompose_order_independence(c3):
    U = pullback_of_trivial(c3)
    base = [c3.galois_translate(Divisor.zero(c3), g) for g in range(3)]
    reference = class_decompose(U, base)
    assert reference.ok
    rng = random.Random(5)
    for _trial in range(5):
        perm = list(base)
        rng.shuffle(perm)
        m = class_decompose(U, perm)
        assert m.ok
        assert m.multiset() == reference.multiset()


# --- the pullback decomposition statement ---

def test_e18_trivial_bundles(c2, c3):
    assert verify_e18(c2, SplitBundle(c2, [Divisor.zero(c2)]))
    assert verify_e18(c3, SplitBundle(c3, [Divisor.zero(c3)]))


def test_e18_branch_supported_bundle(c3):
    # branch places are fixed by the deck group, so every translate is E
    D = Divisor.of_place(c3.places0[0]) - Divisor.of_place(c3.p_inf)
    assert c3.galois_translate(D, 1) == D
    assert verify_e18(c3, SplitBundle(c3, [D]))


def test_e18_generic_place_distinct_translates(c3):
    # x0 = -zeta gives x0(x0-1) = -1, a cube, so the fiber is rational;
    # the three translates are pairwise distinct divisors
    x0 = -c3.tower.parse("alpha")
    ps = c3.places_over(x0)
    assert len(ps) == 3
    D = Divisor.of_place(ps[0]) - Divisor.of_place(c3.p_inf)
    translates = [c3.galois_translate(D, g) for g in range(3)]
    assert len({tuple(sorted((p.key(), n) for p, n in t.items()))
                for t in translates}) == 3
    assert verify_e18(c3, SplitBundle(c3, [D]))


def test_e18_multiple_places_per_branch_point(c412):
    # two places of multiplicity two over x = 1: the filtration step is
    # the sum of the per-place pieces, not either one alone
    assert verify_e18(c412, SplitBundle(c412, [Divisor.zero(c412)]))


# --- towers ---

def test_tower_quotient_curve(c4):
    T = TowerSpec(c4, 2)
    assert (T.X.N, T.X.a, T.X.b) == (2, 0, 1)
    # the quotient coordinate satisfies its own curve equation
    w = T.w_fn
    x = c4.fn_x()
    assert w * w == x - 1


def test_tower_fibers_cover_with_degree(c4):
    T = TowerSpec(c4, 2)
    for y in (0, 1, "inf"):
        for q in T.X.places_over(y):
            fib = T.gamma_fiber(q)
            assert sum(rel for _p, rel in fib) == 2
            for p, rel in fib:
                assert p.e == rel * q.e


def test_tower_pullback_of_quotient_divisor(c4):
    T = TowerSpec(c4, 2)
    DX = -1 * Divisor.of_place(T.X.p_inf)
    assert T.gamma_pullback(DX) == -2 * Divisor.of_place(c4.p_inf)


def test_tower_rejects_bad_m(c4):
    with pytest.raises(InputError):
        TowerSpec(c4, 1)
    with pytest.raises(InputError):
        TowerSpec(c4, 3)


def test_tower_validation_rejects_bad_cover():
    # gcd(6, 1 + 1) = 2 breaks total ramification over infinity
    with pytest.raises(InputError):
        curve_build(6, 1, 1, tower_build("x^2-x+1", []))


def test_transversal_residues(c4):
    T = TowerSpec(c4, 2)
    assert invariants_transversal(T) == ([0, 1], 0)


def test_transversal_residues_degree_six():
    c6 = curve_build(6, 1, 4, tower_build("x^2-x+1", []))
    T = TowerSpec(c6, 3)
    assert (T.X.N, T.X.a, T.X.b) == (3, 1, 1)
    assert invariants_transversal(T) == ([0, 1, 2], 0)


def test_invariant_subbundle_rank_one(c4):
    T = TowerSpec(c4, 2)
    assert verify_invariant_subbundle(
        T, SplitBundle(T.X, [Divisor.zero(T.X)]))


def test_invariant_subbundle_wrong_curve(c4):
    T = TowerSpec(c4, 2)
    with pytest.raises(InputError):
        verify_invariant_subbundle(T, SplitBundle(c4, [Divisor.zero(c4)]))


def test_galois_tower_reduces_to_pullback_statement(c412):
    # M = N: the subgroup is trivial and the transversal is all of the
    # deck group
    T = TowerSpec(c412, 4)
    assert invariants_transversal(T) == ([0, 1, 2, 3], 0)
    assert verify_invariant_subbundle(
        T, SplitBundle(T.X, [Divisor.zero(T.X)]))


def test_pushdown_extract_recovers_classes(c2):
    U = pullback_of_trivial(c2)
    E = SplitBundle(c2, [Divisor.zero(c2)])
    records = [(g, 0, E.divisors[0], c2.galois_translate(E.divisors[0], g))
               for g in range(2)]
    match = class_decompose(U, [rec[3] for rec in records])
    assert match.ok
    out = pushdown_extract(c2, match, records)
    assert list(out.divisors) == [E.divisors[0]]


def test_pushdown_extract_rejects_doctored_records(c2):
    U = pullback_of_trivial(c2)
    D = Divisor.zero(c2)
    records = [(0, 0, D, D), (0, 0, D, D)]
    match = class_decompose(U, [rec[3] for rec in records])
    assert match.ok
    with pytest.raises(InternalError, match="bookkeeping"):
        pushdown_extract(c2, match, records)


# --- endomorphism algebras ---

def test_end_algebra_line_bundle(c3):
    A = end_algebra(SplitBundle(c3, [Divisor.of_place(c3.places0[0])]))
    assert A.dim == 1
    assert indecomposable_test(A)


def test_end_algebra_split_pair(c2):
    P = Divisor.of_place(c2.p_inf)
    A = end_algebra(SplitBundle(c2, [Divisor.zero(c2), -1 * P]))
    assert A.dim == 4
    assert A.rank == 2
    assert not indecomposable_test(A)


def test_end_algebra_constrained_pullback(c2):
    A = end_algebra(pullback_of_trivial(c2))
    assert A.dim == 4
    assert not indecomposable_test(A)


def test_diagonal_involution_detects_splitting(c2):
    P = Divisor.of_place(c2.p_inf)
    B = SplitBundle(c2, [Divisor.zero(c2), -1 * P])
    A = end_algebra(B)
    zero = c2.fn_const(0)
    m = ((c2.fn_const(1), zero), (zero, c2.fn_const(-1)))
    coords = A.coordinates(m)
    assert coords is not None
    assert sum((t * v for t, v in zip(A.traces, coords)),
               c2.tower.zero) == c2.tower.zero
    assert A.multiply(m, m) == tuple(
        tuple(c2.fn_const(1 if i == j else 0) for j in range(2))
        for i in range(2))


def test_coordinates_rejects_outside_element(c2):
    A = end_algebra(SplitBundle(c2, [Divisor.zero(c2), Divisor.zero(c2)]))
    zero = c2.fn_const(0)
    m = ((c2.fn_x(), zero), (zero, zero))
    assert A.coordinates(m) is None


def test_indecomposable_same_class_pair(c2):
    A = end_algebra(SplitBundle(c2, [Divisor.zero(c2), Divisor.zero(c2)]))
    assert A.dim == 4
    assert not indecomposable_test(A)


def test_indecomposable_disjoint_points_stabilizes(c3):
    # End is K x K here; the trace-zero line squares onto the identity
    # line and never shrinks, which must read as decomposable
    P = Divisor.of_place(c3.places0[0])
    Q = Divisor.of_place(c3.places1[0])
    A = end_algebra(SplitBundle(c3, [P, Q]))
    assert A.dim == 2
    assert not indecomposable_test(A)


def test_indecomposable_line_bundles_various(c2, c3, c412):
    for c in (c2, c3, c412):
        for D in (Divisor.zero(c), -1 * Divisor.of_place(c.p_inf)):
            A = end_algebra(SplitBundle(c, [D]))
            assert indecomposable_test(A)


# --- verdicts ---

def test_verdict_no_transcendentals(c3):
    E = SplitBundle(c3, [Divisor.zero(c3)])
    v = descent_verdict(c3, E)
    assert v.status == "DefinedOverF"
    assert v.certificate == [E.divisors[0]]


def test_verdict_wrong_curve(c2, c3):
    with pytest.raises(InputError):
        descent_verdict(c2, SplitBundle(c3, [Divisor.zero(c3)]))


def test_verdict_t_free_on_transcendental_tower(ct):
    # the pipeline runs in full; every summand is immediately t-free
    D = Divisor.of_place(ct.places0[0]) - Divisor.of_place(ct.p_inf)
    v = descent_verdict(ct, SplitBundle(ct, [D]))
    assert v.status == "DefinedOverF"
    assert v.certificate == [D]
    assert all(s.descends for s in v.summands)
