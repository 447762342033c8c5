from fractions import Fraction
from random import Random

import pytest

from helpers import random_rational

from wreathord.groundwork import Ordering
from wreathord.embed_rationals import (
    GNormalForm,
    GWord,
    QC,
    W,
    alpha,
    beta_tilde,
    big_phi,
    c_elem,
    commutator_table,
    expected_commutator_case,
    g_normal_form,
    g_word_element,
    normal_form_element,
    phi,
    phi_element,
    random_g_word,
    subnormal_chain,
    tau,
    verify_order_laws,
    verify_section2,
    verify_theorem1,
)
from wreathord.reporting import emit_report
from wreathord.wreath import w_eval


def test_tau_values():
    t3 = tau(3)
    assert w_eval(t3, -1) == 0
    assert w_eval(t3, 0) == Fraction(-1, 3)
    assert w_eval(t3, 5) == Fraction(-1, 3)
    assert w_eval(t3, -(10**9)) == 0


def test_phi_values():
    assert w_eval(phi(1), 0) == Fraction(1, 1)
    assert w_eval(phi(4), 0) == Fraction(1, 4)
    assert w_eval(phi(4), 1) == 0
    with pytest.raises(ValueError):
        tau(0)
    with pytest.raises(ValueError):
        phi(-2)


def test_alpha_values():
    a = alpha()
    assert QC.equal(a.eval(0), c_elem())
    assert QC.is_identity(a.eval(-5))
    assert QC.equal(a.eval(7), tau(7))


def test_big_phi_word_and_values():
    assert big_phi(Fraction(0)).letters == ()
    assert W.is_identity(phi_element(Fraction(0)))

    e = phi_element(Fraction(1, 2))
    inner = e.eval(0)
    assert inner.eval(0) == Fraction(1, 2)
    for j in (-3, -1, 1, 2):
        assert QC.is_identity(e.eval(j))

    # pointwise oracle for a negative numerator: evaluate the raw word,
    # with no certificate attached, and read the value off directly
    word = big_phi(Fraction(-3, 4))
    raw = g_word_element(word)
    assert raw.top == 0
    assert raw.eval(0).eval(0) == Fraction(-3, 4)
    assert QC.is_identity(raw.eval(2))
    assert W.equal(raw, phi_element(Fraction(-3, 4)))


def test_commutator_table_five_cases():
    for n in range(1, 9):
        for j in range(-2 * n - 4, 2 * n + 5):
            got = commutator_table(n, j)
            if j == 0:
                assert QC.equal(got, phi(n))
            else:
                assert QC.is_identity(got)
            assert QC.equal(got, expected_commutator_case(n, j))


def test_g_normal_form_examples():
    nf = g_normal_form(GWord((("alpha", 1), ("z", 2))))
    assert nf == GNormalForm(2, ((2, 1),))

    assert g_normal_form(GWord((("z", 5),))) == GNormalForm(5, ())

    comm_word = GWord((
        ("z", 3), ("alpha", -1), ("z", -3),
        ("alpha", -1),
        ("z", 3), ("alpha", 1), ("z", -3),
        ("alpha", 1),
    ))
    nf = g_normal_form(comm_word)
    assert nf.k == 0
    assert nf.factors == ((-3, -1), (0, -1), (-3, 1), (0, 1))
    assert nf.grouped() == {-3: 0, 0: 0}


def test_g_normal_form_evaluation_preserving():
    rng = Random(31)
    for _ in range(500):
        word = random_g_word(rng, max_len=30)
        el = g_word_element(word)
        rebuilt = normal_form_element(g_normal_form(word))
        assert el.top == rebuilt.top
        for j in range(-8, 9):
            assert QC.equal(el.eval(j), rebuilt.eval(j))


def test_normal_form_bound_below_min_shift():
    rng = Random(32)
    for _ in range(100):
        nf = g_normal_form(random_g_word(rng, max_len=20))
        if not nf.factors:
            continue
        lo = min(s for s, _ in nf.factors)
        el = normal_form_element(nf)
        for j in (lo - 1, lo - 2, lo - 40):
            assert QC.is_identity(el.eval(j))


def test_beta_tilde():
    sf = beta_tilde([(0, 2, 1)])
    assert sf.value(-1) == 0
    assert sf.value(0) == Fraction(-1, 2)
    sf2 = beta_tilde([(0, 2, 1), (0, 3, 2)])
    assert sf2.value(0) == Fraction(-7, 6)
    assert sf2.value(9) == Fraction(-7, 6)
    assert beta_tilde([]).is_zero
    with pytest.raises(ValueError):
        beta_tilde([(0, 0, 1)])


def test_phi_homomorphism_and_order_samples():
    rng = Random(33)
    for _ in range(60):
        p, q = random_rational(rng), random_rational(rng)
        assert W.equal(W.mul(phi_element(p), phi_element(q)), phi_element(p + q))
        if p != q:
            assert (W.compare(phi_element(p), phi_element(q)) is Ordering.LESS) == (p < q)
    assert W.is_identity(phi_element(Fraction(0)))
    assert not W.is_identity(phi_element(Fraction(-7, 9)))


def test_verify_theorem1_small_budget():
    report = verify_theorem1(seed=3, budget=24)
    assert report.all_pass
    names = {c.name for c in report.checks}
    assert "relations-tau-c" in names
    assert "delta2-witness" in names


def test_subnormal_chain_report():
    report = subnormal_chain(seed=3, budget=24)
    assert report.all_pass
    assert report.check("chain-negative-control").details["support"] == "z^-1"


def test_verify_section2_merges_and_is_deterministic():
    r1 = verify_section2(seed=9, budget=16)
    r2 = verify_section2(seed=9, budget=16)
    assert emit_report(r1) == emit_report(r2)
    assert emit_report(r1, "json") == emit_report(r2, "json")
    assert r1.all_pass


def test_verify_order_laws_small():
    report = verify_order_laws(seed=4, budget=40)
    assert report.all_pass
