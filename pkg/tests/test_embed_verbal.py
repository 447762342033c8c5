import warnings
from fractions import Fraction
from random import Random

import pytest

from wreathord.groundwork import Ordering
from wreathord.nilpotent import CommutatorWord, PowerWord, UnsupportedWordSet
from wreathord.embed_verbal import (
    ConstructionViolation,
    VerbalContext,
    get_context,
    verify_theorem2,
)


CTX = get_context(CommutatorWord())
ZTX = get_context(PowerWord(2))


def test_chi_values():
    sc = CTX.scoords
    chi2 = CTX.chi(2)
    assert chi2.eval(sc.witness_power(3)) == Fraction(1, 2)
    assert chi2.eval(sc.witness_power(0)) == Fraction(1, 2)
    assert chi2.eval(sc.witness_power(-1)) == 0
    # off the witness ray the value vanishes
    off_ray = CTX.sgroup.generator(1)
    assert chi2.eval(off_ray) == 0
    with pytest.raises(ValueError):
        CTX.chi(0)


def test_psi_values():
    sc = CTX.scoords
    psi5 = CTX.psi(5)
    assert psi5.eval(sc.identity()) == Fraction(1, 5)
    assert psi5.eval(sc.witness_power(1)) == 0
    assert psi5.eval(CTX.sgroup.generator(2)) == 0


def test_psi_from_witness_both_families():
    for ctx, upto in ((CTX, 50), (ZTX, 50)):
        for n in range(1, upto + 1):
            computed, cert = ctx.psi_from_witness(n)
            assert ctx.QS.equal(computed, ctx.psi(n))
            assert ctx.QS.equal(cert.replay(ctx.QS), ctx.psi(n))


def test_psi_from_witness_corrupted_a():
    bad = CTX.QS.inv(CTX.a_elem())
    with pytest.raises(ConstructionViolation):
        CTX.psi_from_witness(3, a_element=bad)


def test_rho_pi_identity():
    rng = Random(41)
    for _ in range(50):
        g = CTX.random_t_element(rng)
        lhs = CTX.TC.comm(CTX.pi(CTX.QS.inv(g)), CTX.c_elem())
        assert CTX.TC.equal(lhs, CTX.rho(g))
    assert CTX.TC.is_identity(CTX.rho(CTX.QS.identity()))
    assert CTX.QS.is_identity(CTX.pi(CTX.psi(2)).eval(-1))
    assert CTX.QS.equal(CTX.pi(CTX.psi(2)).eval(4), CTX.psi(2))


def test_enumerate_d_reservations():
    assert CTX.TC.equal(CTX.enumerate_D(0), CTX.c_elem(1))
    for n in (1, 2, 3):
        reserved = CTX.enumerate_D(2 * n - 1)
        expected = CTX.pi(CTX.QS.inv(CTX.psi(n)))
        assert CTX.TC.equal(reserved, expected)
    for k in range(0, 10):
        assert not CTX.TC.is_identity(CTX.enumerate_D(k))
    with pytest.raises(ValueError):
        CTX.enumerate_D(-1)


def test_enumerate_d_deterministic_across_contexts():
    fresh = VerbalContext(CommutatorWord())
    for k in range(0, 9):
        a, b = CTX.enumerate_D(k), fresh.enumerate_D(k)
        assert a.top == b.top
        for j in range(-4, 5):
            assert CTX.QS.key(a.eval(j)) == fresh.QS.key(b.eval(j))


def test_omega_values():
    om = CTX.omega()
    assert CTX.TC.equal(om.eval(1), CTX.enumerate_D(0))
    assert CTX.TC.equal(om.eval(2), CTX.enumerate_D(1))
    assert CTX.TC.equal(om.eval(4), CTX.enumerate_D(2))
    assert CTX.TC.is_identity(om.eval(3))
    assert CTX.TC.is_identity(om.eval(0))
    assert CTX.TC.is_identity(om.eval(-8))
    # omega conjugated by z^-2^n evaluates to d_n at the origin
    for n in (0, 1, 3):
        moved = CTX.DZ.conj(om, CTX.z_elem(-(1 << n)))
        assert CTX.TC.equal(moved.eval(0), CTX.enumerate_D(n))


def test_omega_commutator():
    el = CTX.omega_commutator(2, 0)
    dval = CTX.TC.comm(CTX.enumerate_D(2), CTX.enumerate_D(0))
    assert CTX.TC.equal(el.eval(0), dval)
    for j in (-20, -3, -1, 1, 2, 3, 5, 16, 40):
        assert CTX.TC.is_identity(el.eval(j))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trivial = CTX.omega_commutator(4, 4)
    assert CTX.DZ.is_identity(trivial)
    assert caught and "trivially" in str(caught[0].message)


def test_omega_commutator_slot_value():
    # the reserved slots wire [omega^(z^-2^(2n-1)), omega^(z^-1)] to
    # rho(psi_n) at the origin
    el = CTX.omega_commutator(CTX.index_of_psi_slot(2), 0)
    assert CTX.TC.equal(el.eval(0), CTX.rho(CTX.psi(2)))


def test_embed_values_and_raw_word_oracle():
    assert CTX.DZ.is_identity(CTX.embed(Fraction(0)))
    e = CTX.embed(Fraction(1, 3))
    v = e.eval(0)                      # element of D = T wr C
    t = v.eval(0)                      # element of T = Q wr S
    assert t.eval(CTX.scoords.identity()) == Fraction(1, 3)
    for j in (-2, -1, 1, 2):
        assert CTX.TC.is_identity(e.eval(j))
    # independent route: evaluate the emitted word with no certificates
    raw = CTX.g_word_element(CTX.embed_word(Fraction(1, 3)))
    assert raw.top == 0
    assert CTX.TC.equal(raw.eval(0), CTX.rho(CTX.QS.pow(CTX.psi(3), 1)))
    assert CTX.DZ.equal(raw, e)


def test_embed_homomorphism_and_order():
    DZ = CTX.DZ
    pairs = [
        (Fraction(1, 2), Fraction(1, 3)),
        (Fraction(-2, 5), Fraction(3, 7)),
        (Fraction(4, 9), Fraction(-4, 9)),
    ]
    for p, q in pairs:
        assert DZ.equal(DZ.mul(CTX.embed(p), CTX.embed(q)), CTX.embed(p + q))
        if p != q:
            assert (DZ.compare(CTX.embed(p), CTX.embed(q)) is Ordering.LESS) == (p < q)
    assert DZ.compare(CTX.embed(Fraction(1, 3)), CTX.embed(Fraction(1, 2))) is Ordering.LESS


def test_power_word_context_embedding():
    DZ = ZTX.DZ
    e = ZTX.embed(Fraction(-2, 3))
    t = e.eval(0).eval(0)
    assert t.eval(ZTX.scoords.identity()) == Fraction(-2, 3)
    assert DZ.equal(DZ.mul(ZTX.embed(Fraction(1, 2)), ZTX.embed(Fraction(1, 3))),
                    ZTX.embed(Fraction(5, 6)))


def test_verify_theorem2_small_budget_both_families():
    for family in (CommutatorWord(), PowerWord(2)):
        report = verify_theorem2(family, seed=5, budget=16)
        assert report.all_pass, [c for c in report.checks if c.status != "pass"]


def test_unsupported_word_family():
    with pytest.raises(UnsupportedWordSet):
        get_context("x1*x2")
