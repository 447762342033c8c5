from fractions import Fraction
from random import Random

import pytest

from helpers import brute_compare, confirm_verdict

from wreathord.groundwork import Ordering, UndecidedVerdict
from wreathord.wreath import (
    MixedAtomError,
    StepFunction,
    derived_commutator,
    stepfun_canonicalize,
    support_min_difference,
    tail_symbol,
    w_comm,
    w_compare,
    w_conj,
    w_eval,
    w_inv,
    w_mul,
    w_pow,
)
from wreathord.embed_rationals import (
    QC,
    W,
    alpha,
    alpha_commutator,
    c_elem,
    phi,
    phi_element,
    qc_point,
    random_qc_element,
    random_w_element,
    tau,
    w_point,
    z_elem,
)


def test_step_function_basics():
    f = StepFunction.make(Fraction(0), [(0, Fraction(-1, 2))])
    assert f.value(-1) == 0
    assert f.value(0) == Fraction(-1, 2)
    assert f.value(10**9) == Fraction(-1, 2)
    assert f.right == Fraction(-1, 2)
    g = f.add(f.neg())
    assert g.is_zero
    assert f.shift(3).value(2) == 0
    assert f.shift(3).value(3) == Fraction(-1, 2)
    assert f.least_difference(StepFunction.zero()) == 0


def test_w_mul_pointwise_example():
    x = w_mul(tau(2), tau(3))
    assert w_eval(x, 0) == Fraction(-5, 6)
    assert w_eval(x, -1) == 0


def test_mul_identity_and_inverse():
    x = w_mul(tau(4), c_elem(2))
    assert QC.equal(w_mul(x, QC.identity()), x)
    assert QC.is_identity(w_mul(tau(5), w_inv(tau(5))))


def test_relations_via_commutators():
    for n in range(1, 21):
        assert QC.equal(w_comm(tau(n), c_elem()), phi(n))
    for m in (1, 2, 9):
        for n in (1, 5, 20):
            assert QC.is_identity(w_comm(tau(m), tau(n)))
    assert QC.equal(w_conj(tau(3), QC.identity()), tau(3))


def test_conj_comm_pow_identities_under_evaluation():
    rng = Random(5)
    for _ in range(50):
        x, y = random_qc_element(rng), random_qc_element(rng)
        conj = w_conj(x, y)
        expected = w_mul(w_mul(w_inv(y), x), y)
        assert QC.equal(conj, expected)
        assert QC.equal(w_comm(x, y), w_mul(w_inv(x), w_mul(w_inv(y), w_mul(x, y))))
        assert QC.equal(w_pow(x, 3), w_mul(x, w_mul(x, x)))
        assert QC.equal(w_pow(x, -2), w_inv(w_mul(x, x)))


def test_w_eval_alpha():
    a = alpha()
    assert QC.equal(w_eval(a, 0), c_elem())
    assert QC.is_identity(w_eval(a, -1))
    assert QC.is_identity(w_eval(a, -5))
    assert QC.equal(w_eval(a, 3), tau(3))
    assert QC.is_identity(w_eval(W.identity(), 12))


def test_commutator_window_values():
    # [alpha^(z^-2), alpha] carries phi_2 at z^0 and is trivial elsewhere
    comm = alpha_commutator(2)
    assert QC.equal(w_eval(comm, 0), phi(2))
    for j in (-5, -2, -1, 1, 2, 7):
        assert QC.is_identity(w_eval(comm, j))


def test_support_min_difference_examples():
    v = support_min_difference(tau(2), tau(3))
    assert v.is_distinct and v.witness == 0
    assert w_eval(tau(2), 0) == Fraction(-1, 2)
    assert w_eval(tau(3), 0) == Fraction(-1, 3)

    x = w_mul(tau(2), qc_point(Fraction(1, 7), at=-3))
    assert support_min_difference(x, x).is_equal

    lhs = w_mul(phi_element(Fraction(1, 2)), phi_element(Fraction(1, 3)))
    assert support_min_difference(lhs, phi_element(Fraction(5, 6))).is_equal

    with pytest.raises(ValueError):
        support_min_difference(c_elem(1), c_elem(2))


def test_w_compare_examples():
    # the top dominates
    a = W.mul(z_elem(1), alpha())
    b = W.mul(z_elem(0), alpha())
    assert w_compare(a, b) is Ordering.GREATER
    assert w_compare(phi_element(Fraction(1, 3)), phi_element(Fraction(1, 2))) is Ordering.LESS
    x = w_mul(alpha(), W.conj(alpha(), z_elem(-2)))
    assert w_compare(x, x) is Ordering.EQUAL


def test_stepfun_canonicalize():
    prod = w_mul(tau(2), w_pow(tau(3), 2))
    sf = stepfun_canonicalize(prod)
    assert sf.value(-1) == 0
    assert sf.value(0) == Fraction(-7, 6)
    assert sf.value(50) == Fraction(-7, 6)
    assert stepfun_canonicalize(QC.identity()).is_zero
    assert stepfun_canonicalize(w_mul(tau(4), w_inv(tau(4)))).is_zero


def test_stepfun_canonicalize_random_products():
    rng = Random(11)
    for _ in range(500):
        el = QC.element(0, random_qc_element(rng).atoms)
        sf = stepfun_canonicalize(el)
        again = stepfun_canonicalize(el)
        assert sf == again
        for j in range(-12, 13):
            assert sf.value(j) == w_eval(el, j)


def test_tail_symbol():
    comm = alpha_commutator(4)
    nets = tail_symbol(comm)
    assert nets == {-4: 0, 0: 0}
    # zero nets, yet distinct from the identity: the window evaluation
    # is mandatory
    assert not W.is_identity(comm)

    prod = w_mul(alpha(), W.conj(alpha(), z_elem(1)))
    assert tail_symbol(prod) == {0: 1, 1: 1}
    assert not W.is_identity(prod)
    assert QC.equal(w_eval(prod, 0), c_elem())

    x = w_mul(w_inv(W.conj(alpha(), z_elem(-3))), W.conj(alpha(), z_elem(-3)))
    assert tail_symbol(x) == {}
    assert W.is_identity(x)

    with pytest.raises(MixedAtomError):
        tail_symbol(w_mul(alpha(), w_point(c_elem())))


def test_semidirect_product_law():
    # 500 pairs, 50 coordinates each: evaluation of a product must obey
    # (x*y)(b) = x(b * y.top^-1) * y(b)
    rng = Random(12)
    for _ in range(350):
        x, y = random_qc_element(rng), random_qc_element(rng)
        z = w_mul(x, y)
        for j in range(-25, 25):
            lhs = w_eval(z, j)
            rhs = w_eval(x, j - y.top) + w_eval(y, j)
            assert lhs == rhs
    for _ in range(150):
        x, y = random_w_element(rng), random_w_element(rng)
        z = w_mul(x, y)
        for j in range(-25, 25):
            lhs = w_eval(z, j)
            rhs = QC.mul(w_eval(x, j - y.top), w_eval(y, j))
            assert QC.equal(lhs, rhs)


def test_order_agrees_with_brute_force():
    rng = Random(13)
    for _ in range(150):
        x, y = random_qc_element(rng), random_qc_element(rng)
        assert QC.compare(x, y) is brute_compare(x, y)
    for _ in range(80):
        x, y = random_w_element(rng), random_w_element(rng)
        assert W.compare(x, y) is brute_compare(x, y)


def test_verdicts_confirmed_by_window_scan():
    rng = Random(14)
    for _ in range(120):
        x, y = random_qc_element(rng), random_qc_element(rng)
        y = QC.element(x.top, y.atoms)  # force equal tops
        assert confirm_verdict(x, y, QC.min_difference(x, y))
    for _ in range(80):
        x, y = random_w_element(rng), random_w_element(rng)
        y = W.element(x.top, y.atoms)
        assert confirm_verdict(x, y, W.min_difference(x, y))


def test_first_copy_order_restriction():
    # point rationals in the first fiber copy order exactly as rationals
    for a1, a2 in ((Fraction(-1, 2), Fraction(1, 3)), (Fraction(2, 7), Fraction(1, 2))):
        assert QC.compare(qc_point(a1), qc_point(a2)) is Ordering.LESS
        assert W.compare(w_point(qc_point(a1)), w_point(qc_point(a2))) is Ordering.LESS


def test_unknown_beyond_is_honest():
    # a commuting point far outside the alpha window limit defeats both
    # exact tiers; the scan must admit it cannot decide
    far = 25_001
    p = w_point(qc_point(Fraction(1, 3)), at=far)
    x = w_mul(alpha(), p)
    y = w_mul(p, alpha())
    v = W.min_difference(x, y)
    assert v.is_unknown
    assert v.bound >= far
    with pytest.raises(UndecidedVerdict):
        W.compare(x, y)
    # with a noncommuting far point the same shape is decidably distinct
    q = w_point(c_elem(), at=far)
    x2, y2 = w_mul(alpha(), q), w_mul(q, alpha())
    v2 = W.min_difference(x2, y2)
    assert v2.is_distinct and v2.witness == far


def test_groups_satisfy_the_ordered_group_contract():
    from wreathord.groundwork import OrderedGroup
    from wreathord.nilpotent import Nil2Group
    for group in (QC, W, Nil2Group(2)):
        assert isinstance(group, OrderedGroup)


def test_derived_commutator_shape():
    rng = Random(15)
    xs = [random_qc_element(rng) for _ in range(2)]
    assert QC.equal(derived_commutator(QC, xs), QC.comm(xs[0], xs[1]))
    with pytest.raises(ValueError):
        derived_commutator(QC, [c_elem(), c_elem(), c_elem()])
