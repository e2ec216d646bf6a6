from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from hvloop.algebra import Element, H, L, Window, enumerate_basis
from hvloop.cohomology import (
    CanonicalCocycle,
    FormCombination,
    LinearFunctional,
    SparseForm,
    anchor_checks,
    canonical_cocycle,
    coboundary_of,
    coboundary_space_dimension,
    cocycle_residual,
    guarded_triples,
    is_coboundary,
    normalize,
    normalizing_functional,
    resolve_normalization_sign,
    sample_cocycle,
    sample_functional,
    truncated_h2,
    verify_cocycle,
    verify_normal_form,
    window_pairs,
)
from hvloop.exact import ONE, GaussianRational

W3 = Window(3, -2, 2)
W2 = Window(2, -1, 1)


def phi(k, x):
    return canonical_cocycle(k, x)


# canonical forms -----------------------------------------------------------------


@pytest.mark.parametrize("k, i", [(0, 0), (3, 1), (-2, 4)])
def test_canonical_values(k, i):
    assert phi(k, 1)(L(2, i), L(-2, k - i)) == Fraction(1, 2)
    assert phi(k, 1)(L(1, i), L(-1, k - i)) == 0
    assert phi(k, 2)(L(3, i), H(-3, k - i)) == 6
    assert phi(k, 3)(H(5, i), H(-5, k - i)) == 5


def test_canonical_support():
    assert phi(1, 1)(L(2, 0), L(-2, 0)) == 0  # wrong loop sum
    assert phi(0, 2)(L(2, 0), H(-1, 0)) == 0  # degrees do not cancel
    assert phi(0, 3)(L(1, 0), H(-1, 0)) == 0  # wrong kinds


def test_canonical_antisymmetric():
    assert phi(0, 2)(H(-3, 0), L(3, 0)) == -6
    assert phi(0, 1)(L(2, 0), L(2, 0)) == 0


def test_bad_family_rejected():
    with pytest.raises(ValueError):
        CanonicalCocycle(0, 4)


def test_accessor_views():
    f = phi(1, 2)
    assert f.B(3, 0, 1) == 6
    assert f.A(3, 0, 1) == 0
    assert phi(1, 3).C(2, 1, 0) == 2


# cocycle identity ------------------------------------------------------------------


def test_cocycle_residual_examples():
    assert cocycle_residual(phi(0, 3), L(1, 0), H(2, 0), H(-3, 0)) == 0
    assert cocycle_residual(phi(0, 1), L(2, 0), L(2, 0), L(-4, 0)) == 0
    single = SparseForm({(L(1, 0), L(2, 0)): 1})
    assert cocycle_residual(single, L(1, 0), L(2, 0), L(0, 0)) != 0


def test_guarded_triple_count_frozen():
    assert len(guarded_triples(W3)) == 22206


@pytest.mark.parametrize("x", [1, 2, 3])
@pytest.mark.parametrize("k", [-2, 0, 1])
def test_canonical_cocycles_pass_exhaustively(k, x):
    assert verify_cocycle(phi(k, x), W3).passed


def test_perturbed_cocycle_fails_with_witness():
    bad = phi(0, 1).restrict(W2).with_entry(L(1, 0), L(2, 0), 1)
    res = verify_cocycle(bad, W2)
    assert not res.passed
    assert res.first_witness is not None


def test_coboundaries_are_cocycles():
    rng = random.Random(11)
    for _ in range(3):
        assert verify_cocycle(coboundary_of(sample_functional(W3, rng)), W3).passed


# coboundaries -----------------------------------------------------------------------


def test_coboundary_examples():
    assert coboundary_of(LinearFunctional())(L(1, 0), L(-1, 1)) == 0
    f = LinearFunctional({L(0, 1): 1})
    assert coboundary_of(f)(L(1, 0), L(-1, 1)) == 2
    g = LinearFunctional({H(0, 0): 1})
    assert coboundary_of(g)(L(1, 0), H(-1, 0)) == 1


def test_functional_extends_linearly():
    f = LinearFunctional({L(1, 0): 2, H(0, 0): Fraction(1, 3)})
    x = Element({L(1, 0): 3, H(0, 0): 3, L(2, 2): 7})
    assert f(x) == 7
    assert f.at(L(9, 9)) == 0


# normalization ----------------------------------------------------------------------


@pytest.mark.parametrize("k", [-1, 0, 2])
def test_normalizing_functional_of_canonical_class_vanishes(k):
    for x in (1, 2, 3):
        assert normalizing_functional(phi(k, x), W3).values == {}


def test_normalize_fixes_canonical_forms():
    for x in (1, 2, 3):
        assert normalize(phi(0, x), W3) == phi(0, x).restrict(W3)
    assert normalize(SparseForm(), W3) == SparseForm()


def test_normalize_recovers_class_part():
    rng = random.Random(5)
    g = sample_functional(W3, rng)
    psi = phi(0, 3) + coboundary_of(g)
    out = normalize(psi, W3)
    assert out == phi(0, 3).restrict(W3)
    assert all(c.passed for c in anchor_checks(out, W3))


def test_normalize_pure_coboundary_gives_zero():
    g = LinearFunctional({L(0, i): Fraction(i + 3, 2) for i in W3.loops})
    assert normalize(coboundary_of(g), W3) == SparseForm()


def test_printed_sign_leaves_twice_the_anchor():
    psi, _c, _g = sample_cocycle(W3, random.Random(1))
    printed = normalize(psi, W3, "printed")
    for i in W3.loops:
        assert printed.value(L(1, 0), H(-1, i)) == 2 * psi.value(L(1, 0), H(-1, i))


def test_sign_resolver_selects_corrected():
    rng = random.Random(2)
    forms = [sample_cocycle(W3, rng)[0] for _ in range(3)]
    verdict = resolve_normalization_sign(forms, W3)
    assert verdict.passing == ["corrected"]
    assert verdict.winner == "corrected"
    assert verdict.witnesses["printed"]["check"] == "normal_L10_H"


def test_unknown_sign_variant_rejected():
    with pytest.raises(ValueError):
        normalizing_functional(phi(0, 1), W3, "upside-down")


# identity chain -----------------------------------------------------------------------


@pytest.mark.parametrize("x", [1, 2, 3])
def test_canonical_forms_satisfy_identity_chain(x):
    rep = verify_normal_form(phi(1, x), W3)
    assert rep.precondition_ok
    assert rep.passed, rep.failing()


def test_lh_anchor_value():
    assert phi(0, 2).B(2, 0, 0) == 2


def test_closed_form_perturbation_detected():
    bad = phi(0, 1).restrict(W3).with_entry(L(3, 0), L(-3, 0), 1)
    rep = verify_normal_form(bad, W3)
    chk = rep.check("ll_closed_form")
    assert not chk.passed
    assert chk.first_witness == ("L(-3,0)", "L(3,0)")
    assert chk.residual == "-1/1"
    assert not rep.check("ll_sum_dependence").passed
    assert rep.check("lh_closed_form").passed


def test_support_property_for_normalized_samples():
    rng = random.Random(9)
    for _ in range(2):
        psi, _c, _g = sample_cocycle(W3, rng)
        out = normalize(psi, W3)
        for u, v in window_pairs(W3):
            if u.degree + v.degree:
                assert out.value(u, v) == 0


# coboundary membership ----------------------------------------------------------------


def test_phi_01_is_not_a_coboundary():
    cert = is_coboundary(phi(0, 1), W3)
    assert cert.status == "not_coboundary"
    assert cert.verify(phi(0, 1), W3)
    pairs = {p for p, _c in cert.witness}
    assert pairs == {(L(-3, -2), L(3, 2)), (L(-2, -2), L(2, 2))}


def test_phi_03_witness_is_one_row():
    cert = is_coboundary(phi(0, 3), W3)
    assert cert.status == "not_coboundary"
    assert len(cert.witness) == 1
    assert cert.verify(phi(0, 3), W3)


def test_random_coboundary_recovered():
    rng = random.Random(4)
    g = sample_functional(W3, rng)
    cert = is_coboundary(coboundary_of(g), W3)
    assert cert.status == "is_coboundary"
    assert cert.verify(coboundary_of(g), W3)


def test_tampered_certificate_fails_verification():
    g = sample_functional(W2, random.Random(6))
    cert = is_coboundary(coboundary_of(g), W2)
    other = coboundary_of(g) + phi(0, 3)
    assert not cert.verify(other, W2)


def test_class_differences_are_not_coboundaries():
    labels = [(0, 1), (1, 2), (-1, 3), (0, 2)]
    for (k, x), (k2, x2) in zip(labels, labels[1:]):
        for c in (ONE, Fraction(-2, 3), 5):
            psi = phi(k, x) - phi(k2, x2).scale(c)
            assert is_coboundary(psi, W3).status == "not_coboundary"


# truncated H² -----------------------------------------------------------------------------


def test_h2_degenerate_window():
    rep = truncated_h2(Window(0, 0, 0))
    assert (rep.dim_cocycles, rep.dim_coboundaries, rep.dim_quotient) == (1, 0, 1)
    assert not rep.imposes_identities


def test_h2_frozen_values():
    rep = truncated_h2(W3)
    assert (rep.dim_cocycles, rep.dim_coboundaries, rep.dim_quotient) == (381, 70, 311)
    assert (rep.n_pairs, rep.n_constraints) == (2415, 14687)
    assert sorted(rep.matched_classes) == [(k, x) for k in range(-4, 5) for x in (1, 2, 3)]
    assert rep.unmatched == 284
    assert rep.dim_quotient == rep.dim_cocycles - rep.dim_coboundaries


def test_each_class_raises_coboundary_rank_by_one():
    base = coboundary_space_dimension(W3)
    assert base == 70
    for k in (-4, 0, 4):
        for x in (1, 2, 3):
            assert coboundary_space_dimension(W3, [phi(k, x)]) == base + 1


# linearity ---------------------------------------------------------------------------------

coef = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@settings(max_examples=15, deadline=None)
@given(coef, coef, st.integers(-2, 2), st.integers(1, 3), st.integers(0, 10**6))
def test_cocycles_closed_under_combination(a, b, k, x, seed):
    g = sample_functional(W2, random.Random(seed))
    psi = FormCombination([(a, phi(k, x)), (b, coboundary_of(g))])
    assert verify_cocycle(psi, W2).passed


@settings(max_examples=15, deadline=None)
@given(coef, st.integers(0, 10**6))
def test_coboundaries_closed_under_scaling(a, seed):
    rng = random.Random(seed)
    f, g = sample_functional(W2, rng), sample_functional(W2, rng)
    combo = LinearFunctional({b: GaussianRational(a) * f.at(b) + g.at(b) for b in enumerate_basis(W2)})
    lhs = coboundary_of(f).scale(a) + coboundary_of(g)
    assert lhs.restrict(W2) == coboundary_of(combo).restrict(W2)
    assert is_coboundary(lhs, W2).status == "is_coboundary"
