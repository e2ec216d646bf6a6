from fractions import Fraction
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hvloop.algebra import BracketConvention, Element, H, L, Window
from hvloop.exact import I, parse_scalar
from hvloop.leftsym import (
    EQUATIONS,
    LsaDenominatorError,
    LsaParams,
    StructureFunctions,
    WittLsaParams,
    associator,
    compatibility_residual,
    graded_family,
    left_symmetry_residual,
    lsa_product,
    replay_c_derivation,
    resolve_c_sign,
    sample_perturbation,
    structure_equation_residuals,
    verify_compatibility,
    verify_left_symmetry,
    witt_convention_audit,
    witt_lsa_product,
)

W1 = Window(3, -1, 1)
WS = Window(2, 0, 1)
P23 = LsaParams(parse_scalar("2/3"), 1)


def E(*pairs):
    return Element({b: c for c, b in pairs})


# products --------------------------------------------------------------------


def test_product_examples():
    assert lsa_product(L(1, 0), L(1, 0), LsaParams(parse_scalar("2/3"), 5)) == E((Fraction(-5, 7), L(2, 0)))
    assert lsa_product(L(1, 2), H(-1, 3), P23) == E((Fraction(8, 3), H(0, 5)))
    assert lsa_product(H(2, 0), H(-2, 1), P23) == 0
    assert lsa_product(H(1, 0), L(3, 0), P23) == 0


def test_product_is_bilinear_in_elements():
    x = E((2, L(1, 0)), (Fraction(1, 2), H(-1, 1)))
    y = E((-1, L(2, 0)), (3, H(1, 0)))
    expected = Element()
    for bx, cx in x.items():
        for by, cy in y.items():
            expected = expected + lsa_product(bx, by, P23).scale(cx * cy)
    assert lsa_product(x, y, P23) == expected


def test_minus_variant_flips_c():
    plus = graded_family(LsaParams(parse_scalar("2/3"), 1, "plus"))
    minus = graded_family(LsaParams(parse_scalar("2/3"), 1, "minus"))
    args = (Fraction(-1), 0, Fraction(1), 0)
    assert plus.c(*args) == -minus.c(*args) == Fraction(5, 3)


def test_params_validate():
    with pytest.raises(ValueError):
        LsaParams(parse_scalar("1/2"))
    with pytest.raises(ValueError):
        LsaParams(parse_scalar("2/3"), 1, "sideways")


def test_rational_degree_denominator_guarded():
    p = LsaParams(parse_scalar("2/3"), 1)
    with pytest.raises(LsaDenominatorError):
        lsa_product(L(Fraction(-3, 4), 0), L(Fraction(-3, 4), 0), p)


def test_loop_independence():
    sf = graded_family(P23)
    degs = [Fraction(d) for d in range(-2, 3)]
    for name in "abc":
        fn = sf.get(name)
        for a1, b1 in itertools.product(degs, repeat=2):
            vals = {fn(a1, i, b1, j) for i in range(-2, 3) for j in range(-2, 3)}
            assert len(vals) == 1


def test_structure_table_rows():
    rows = graded_family(P23).table(Window(1, 0, 0))
    assert len(rows) == 5 * 9
    assert ("a", "1", 0, "1", 0, "-5/7") in rows


# associator and left symmetry -------------------------------------------------------


def test_associator_examples():
    assert associator(Element(), L(1, 0), L(2, 0), P23) == 0
    assert left_symmetry_residual(L(1, 0), L(1, 0), L(1, 0), P23) == 0
    x, y, z = H(1, 0), H(-1, 0), L(2, 0)
    assert associator(x, y, z, P23) == associator(y, x, z, P23)


def test_compatibility_examples():
    p = LsaParams(parse_scalar("2/3"), 0)
    sf = graded_family(p)
    assert sf.a(Fraction(2), 0, Fraction(-1), 0) == Fraction(1, 5)
    assert sf.a(Fraction(-1), 0, Fraction(2), 0) == Fraction(-14, 5)
    assert compatibility_residual(L(2, 0), L(-1, 0), p) == 0
    assert compatibility_residual(H(1, 0), H(2, 0), p) == 0
    assert compatibility_residual(L(1, 0), H(-1, 0), P23) == 0


@pytest.mark.parametrize("eps", ["2/3", "0+1i"])
@pytest.mark.parametrize("m", ["0", "1"])
def test_family_left_symmetric_and_compatible(eps, m):
    p = LsaParams(parse_scalar(eps), parse_scalar(m))
    assert verify_left_symmetry(p, WS).passed
    assert verify_compatibility(p, WS).passed


def test_minus_variant_is_left_symmetric_but_incompatible():
    # products of two c values vanish on its support, so the flip survives left symmetry
    p = LsaParams(parse_scalar("2/3"), 1, "minus")
    assert verify_left_symmetry(p, W1).passed
    res = verify_compatibility(p, WS)
    assert not res.passed and res.first_witness is not None


def test_reversed_convention_not_compatible():
    assert not verify_compatibility(P23, WS, BracketConvention.REVERSED).passed


# the equation system --------------------------------------------------------------------


def test_equation_names():
    assert [e[0] for e in EQUATIONS] == [
        "a_antisymmetry", "b_minus_c", "de_symmetry", "aa", "bb", "cb_ac",
        "da_bd", "eb_be", "cd", "ce", "ee_dc", "ed",
    ]


@pytest.mark.parametrize("m", ["0", "1", "-2/7"])
def test_equations_pass_for_family(m):
    checks = structure_equation_residuals(LsaParams(parse_scalar("2/3"), parse_scalar(m)), W1)
    assert [c.name for c in checks if not c.passed] == []


def test_printed_transcription_fails_bb():
    checks = structure_equation_residuals(LsaParams(parse_scalar("2/3"), 1), WS, "printed")
    assert [c.name for c in checks if not c.passed] == ["bb"]


def test_zero_de_satisfies_de_equations():
    sf = StructureFunctions(lambda *a: I, lambda *a: 3, lambda *a: -2)
    names = {"da_bd", "eb_be", "cd", "ce", "ee_dc", "ed"}
    for c in structure_equation_residuals(sf, WS):
        if c.name in names:
            assert c.passed


def test_b_perturbation_detected():
    sf = graded_family(P23).perturbed("b", (1, 0, -1, 0), 1)
    failing = {c.name for c in structure_equation_residuals(sf, WS) if not c.passed}
    assert "b_minus_c" in failing or "bb" in failing
    details = [c.detail for c in structure_equation_residuals(sf, WS) if not c.passed]
    assert all("max_witness" in d for d in details)


def test_minus_residual_closed_form():
    # the rejected sign leaves -2β(1-εβ)m at (α,β) = (1,-1)
    p = LsaParams(parse_scalar("2/3"), 1, "minus")
    chk = structure_equation_residuals(p, WS)[1]
    assert chk.name == "b_minus_c" and not chk.passed
    sf = graded_family(p)
    r = sf.b(Fraction(1), 0, Fraction(-1), 0) - sf.c(Fraction(-1), 0, Fraction(1), 0) - 1
    assert r == Fraction(10, 3)


def test_unknown_transcription_rejected():
    with pytest.raises(ValueError):
        structure_equation_residuals(P23, WS, "paraphrased")


# sign resolution ---------------------------------------------------------------------------


def test_resolve_c_sign_plus():
    res = resolve_c_sign(parse_scalar("2/3"), [1], WS)
    assert res.verdict == "plus" and res.winner == "plus"
    probe = res.witnesses["minus"]["probe"]
    assert probe["at"] == "(1,0,-1,0)" and probe["residual"] == "10/3"


def test_resolve_c_sign_m_zero_gives_both():
    assert resolve_c_sign(parse_scalar("2/3"), [0], WS).verdict == "both"


def test_resolve_requires_samples():
    with pytest.raises(ValueError):
        resolve_c_sign(parse_scalar("2/3"), [], WS)


# replay -----------------------------------------------------------------------------------


def test_replay_recovers_m():
    tr = replay_c_derivation(Window(2, -1, 1), parse_scalar("2/3"), 1)
    assert tr.m_raw == -1
    assert tr.recovered_m == 1
    must_pass = [s.label for s in tr.steps if s.label not in (
        "α=i=0 specialization forces d ≡ 0", "α=i=0 specialization forces e ≡ 0",
        "α=i=0 linear d/e system is trivial")]
    for label in must_pass:
        assert tr.step(label).check.passed, label


def test_replay_forcing_coefficient_vanishes():
    # the d-coefficient of the α=i=0 specialization is identically zero
    tr = replay_c_derivation(Window(2, -1, 1), parse_scalar("2/3"), 1)
    chk = tr.step("α=i=0 specialization forces d ≡ 0").check
    assert chk.failures == chk.domain_size
    assert "coefficient of d(β,γ) is 0" in str(chk.residual)


def test_replay_perturbation_fails_at_predicted_step():
    w = Window(3, -1, 1)
    tr = replay_c_derivation(w, parse_scalar("2/3"), 1, perturb_C={(2, 0, -2, 0): 1})
    chk = tr.step("C(-γ,-k,γ,k) = -γ·m").check
    assert not chk.passed
    assert "(2,0,-2,0)" in chk.first_witness[0]
    assert tr.step("B(0,0,0,0) = C(0,0,0,0) = 0").check.passed
    assert not tr.passed


def test_replay_m_zero_gives_zero_c():
    tr = replay_c_derivation(Window(2, -1, 1), parse_scalar("2/3"), 0)
    assert tr.recovered_m == 0
    assert tr.step("C(α,i,β,j) = 0 for α+β ≠ 0").check.passed
    assert tr.step("C(-γ,-k,γ,k) = -γ·m").check.passed


# Witt table ---------------------------------------------------------------------------------


def test_witt_examples():
    w0 = WittLsaParams(0, parse_scalar("2/3"))
    assert witt_lsa_product(1, 1, w0) == Fraction(3, 7)
    assert witt_lsa_product(3, 0, w0) == 0
    assert witt_lsa_product(1, 2, WittLsaParams(1, parse_scalar("2/3"))) == Fraction(11, 9)


@pytest.mark.parametrize("ap", [0, 1])
def test_witt_audit_frozen(ap):
    rec = witt_convention_audit(WittLsaParams(ap, parse_scalar("2/3")), 3)
    assert rec["left_symmetric"] is False
    assert rec["compatible_with"] == []
    assert rec["matches_family_restriction"] is False
    assert rec == witt_convention_audit(WittLsaParams(ap, parse_scalar("2/3")), 3)


def test_witt_audit_bound_zero_is_vacuous():
    rec = witt_convention_audit(WittLsaParams(0, parse_scalar("2/3")), 0)
    assert rec["left_symmetric"] is True
    assert sorted(rec["compatible_with"]) == ["paper", "reversed"]


# perturbations ---------------------------------------------------------------------------------


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_perturbation_verdicts_agree(seed):
    sf, info = sample_perturbation(graded_family(P23), WS, random.Random(seed))
    eq_fail = not all(c.passed for c in structure_equation_residuals(sf, WS))
    sweep_fail = not (verify_left_symmetry(sf, WS).passed and verify_compatibility(sf, WS).passed)
    assert eq_fail and sweep_fail, info


def test_perturbed_rejects_bad_name():
    with pytest.raises(ValueError):
        graded_family(P23).perturbed("z", (0, 0, 0, 0), 1)
