"""Order-preserving embedding of the additive rationals into G = <alpha, z>.

The ambient group is W = (Q Wr C) Wr Z with C = <c> and Z = <z> infinite
cyclic.  The base of Q Wr C holds, for each n >= 1, the step functions

    tau_n:  0 below c^0, -1/n from c^0 on
    phi_n:  1/n at c^0, 0 elsewhere

with [tau_n, c] = phi_n and [tau_m, tau_n] = 1.  The element alpha of
the base of W takes the value 1 below z^0, c at z^0 and tau_j at z^j for
j > 0, and the embedding is

    m/n  |->  [alpha^(z^-n), alpha]^m,

whose evaluation is the point function with value m/n at (z^0, c^0).
Every image element carries that point form as a verified certificate,
so downstream equality and order queries on embedded rationals are O(1)
instead of re-running the tail criterion.

The verification suites at the bottom (homomorphism, injectivity, order
preservation, normal-form bound, torsion-freeness, solvable length 3,
the subnormal chain, and the order-law battery) are deterministic for a
fixed seed and budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from random import Random
from typing import Iterable

from .groundwork import (
    IntCoords,
    Ordering,
    RATIONALS,
    Rational,
    UndecidedVerdict,
    format_rational,
)
from .reporting import FAIL, PASS, Report, UNKNOWN, merge_reports, run_checks
from .wreath import (
    _ALPHA_WINDOW_LIMIT,
    Atom,
    BaseFunction,
    FiberSteps,
    StepFunction,
    WreathElement,
    WreathGroup,
    derived_commutator,
)

QC = WreathGroup("QwrC", IntCoords("c"), RATIONALS, canonical="steps")
W = WreathGroup("W", IntCoords("z"), QC, canonical="tail", tail_kind="alpha")


@dataclass(frozen=True)
class TauFn(BaseFunction):
    n: int
    finite = False

    @property
    def name(self) -> str:
        return f"tau({self.n})"

    def value(self, rel: int) -> Rational:
        return Fraction(0) if rel < 0 else Fraction(-1, self.n)

    def support_min(self) -> int:
        return 0

    def support(self):
        return itertools.count(0)

    def step(self) -> StepFunction:
        return StepFunction.make(Fraction(0), [(0, Fraction(-1, self.n))])

    def key(self) -> tuple:
        return ("tau", self.n)

    def fmt(self) -> str:
        return self.name


@dataclass(frozen=True)
class PhiFn(BaseFunction):
    n: int
    finite = True

    @property
    def name(self) -> str:
        return f"phi({self.n})"

    def value(self, rel: int) -> Rational:
        return Fraction(1, self.n) if rel == 0 else Fraction(0)

    def support_min(self) -> int:
        return 0

    def support(self):
        yield 0

    def finite_coords(self) -> tuple:
        return (0,)

    def step(self) -> StepFunction:
        return StepFunction.make(Fraction(0), [(0, Fraction(1, self.n)), (1, Fraction(0))])

    def key(self) -> tuple:
        return ("phi", self.n)

    def fmt(self) -> str:
        return self.name


class AlphaFn(BaseFunction):
    """alpha: identity below z^0, c at z^0, tau_j at z^j for j > 0."""

    name = "alpha"
    tail_kind = "alpha"

    def value(self, rel: int) -> WreathElement:
        return alpha_value(rel)

    def support_min(self) -> int:
        return 0

    def support(self):
        return itertools.count(0)

    def key(self) -> tuple:
        return ("alpha",)

    def tail_identity(self, group, element, tails, finites) -> str | None:
        # Beyond the largest shift every alpha factor is in its tau
        # range, where the pointwise sum is -(sum of n_t/(j-k_t)) from
        # c^0 on.  That rational function of j vanishes for all large j
        # only when the exponents grouped by shift all vanish, so zero
        # nets plus a trivial window force triviality everywhere.
        nets: dict[int, int] = {}
        for a in tails:
            nets[a.shift] = nets.get(a.shift, 0) + a.exp
        if any(nets.values()):
            return "distinct"
        coords = [a.shift for a in tails]
        for a in finites:
            coords.extend(c + a.shift for c in a.fn.finite_coords())
        lo, hi = min(coords), max(coords)
        if hi - lo > _ALPHA_WINDOW_LIMIT:
            return None
        fiber = group.fiber
        for j in range(lo, hi + 1):
            if not fiber.is_identity(group.eval(element, j)):
                return "distinct"
        return "equal"


_ALPHA_FN = AlphaFn()


@lru_cache(maxsize=None)
def tau(n: int) -> WreathElement:
    """The element tau_n of the base of Q Wr C."""
    if n < 1:
        raise ValueError("tau(n) needs n >= 1")
    return QC.atom_element(TauFn(n))


@lru_cache(maxsize=None)
def phi(n: int) -> WreathElement:
    """The element phi_n of the base of Q Wr C."""
    if n < 1:
        raise ValueError("phi(n) needs n >= 1")
    return QC.atom_element(PhiFn(n))


def c_elem(k: int = 1) -> WreathElement:
    return QC.top_element(k)


def z_elem(k: int = 1) -> WreathElement:
    return W.top_element(k)


def qc_point(q: Rational, at: int = 0) -> WreathElement:
    """Rational point function: q at c^at, 0 elsewhere."""
    return QC.point(Fraction(q), at=at)


def w_point(g: WreathElement, at: int = 0) -> WreathElement:
    """Element of the base of W supported at z^at with value g in Q Wr C."""
    return W.point(g, at=at)


@lru_cache(maxsize=None)
def alpha_value(j: int) -> WreathElement:
    if j < 0:
        return QC.identity()
    if j == 0:
        return c_elem()
    return tau(j)


@lru_cache(maxsize=None)
def alpha() -> WreathElement:
    return W.atom_element(_ALPHA_FN)


# -- words over the two generators and their normal form ----------------

@dataclass(frozen=True)
class GWord:
    """Word over a two-generator alphabet, stored as exponent runs."""

    letters: tuple[tuple[str, int], ...]

    def inv(self) -> "GWord":
        return GWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __mul__(self, other: "GWord") -> "GWord":
        return GWord(self.letters + other.letters)

    def power(self, m: int) -> "GWord":
        base = self if m >= 0 else self.inv()
        return GWord(base.letters * abs(m))

    def fmt(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(g if e == 1 else f"{g}^{e}" for g, e in self.letters)

    def __str__(self) -> str:
        return self.fmt()


def g_word_element(w: GWord) -> WreathElement:
    """Evaluate a word over {alpha, z} in W."""
    out = W.identity()
    for name, e in w.letters:
        if name == "z":
            g = z_elem(e)
        elif name == "alpha":
            g = W.pow(alpha(), e)
        else:
            raise ValueError(f"unknown generator {name!r}")
        out = W.mul(out, g)
    return out


@dataclass(frozen=True)
class GNormalForm:
    """z^k times an ordered product of shifted alpha powers.

    ``factors`` keeps the ordered list as produced by the rewriting; the
    grouped view nets the exponents per shift.
    """

    k: int
    factors: tuple[tuple[int, int], ...]

    def grouped(self) -> dict[int, int]:
        nets: dict[int, int] = {}
        for shift, exp in self.factors:
            nets[shift] = nets.get(shift, 0) + exp
        return dict(sorted(nets.items()))

    def fmt(self) -> str:
        if not self.k and not self.factors:
            return "1"
        parts = [f"z^{self.k}"] if self.k else []
        for shift, exp in self.factors:
            s = f"(alpha^[z^{shift}])"
            parts.append(s if exp == 1 else s + f"^{exp}")
        return " * ".join(parts)


def g_normal_form(w: GWord | WreathElement) -> GNormalForm:
    """Collect all z letters in front: z^k (alpha^{z^k1})^{n1} ..."""
    el = g_word_element(w) if isinstance(w, GWord) else w
    return GNormalForm(el.top, tuple((a.shift, a.exp) for a in el.atoms))


def normal_form_element(nf: GNormalForm) -> WreathElement:
    return W.element(nf.k, tuple(Atom(_ALPHA_FN, s, e) for s, e in nf.factors))


# -- the embedding -------------------------------------------------------

@lru_cache(maxsize=None)
def alpha_commutator(n: int) -> WreathElement:
    """[alpha^(z^-n), alpha], kept as a raw formal product."""
    if n < 1:
        raise ValueError("need n >= 1")
    return W.comm(W.conj(alpha(), z_elem(-n)), alpha())


@lru_cache(maxsize=None)
def phi_star(n: int) -> WreathElement:
    """The image of phi_n in the first copy of Q Wr C, certified.

    Both commutands are single-atom base elements (top z^0), so the
    commutator evaluates pointwise: value at z^j is
    [alpha(j+n), alpha(j)].  alpha(j) is the identity for j < 0, which
    kills every coordinate below 0, and for j > 0 both values lie in
    the abelian base Q^C, which kills every coordinate above 0.  The
    only coordinate left, j = 0, is computed exactly.
    """
    raw = alpha_commutator(n)
    if raw.top != 0 or any(a.shift not in (-n, 0) for a in raw.atoms):
        raise AssertionError("unexpected commutator shape")
    at0 = QC.comm(alpha_value(n), alpha_value(0))
    if not QC.equal(at0, phi(n)):
        raise AssertionError(f"[tau_{n}, c] != phi_{n}")
    steps = FiberSteps.make(QC, QC.identity(), [(0, phi(n)), (1, QC.identity())])
    return WreathElement(W, raw.top, raw.atoms, steps)


def big_phi(q: Rational) -> GWord:
    """The word [z^n alpha z^-n, alpha]^m sent to m/n (n > 0 canonical)."""
    q = Fraction(q)
    m, n = q.numerator, q.denominator
    if m == 0:
        return GWord(())
    base = GWord((
        ("z", n), ("alpha", -1), ("z", -n),
        ("alpha", -1),
        ("z", n), ("alpha", 1), ("z", -n),
        ("alpha", 1),
    ))
    return base.power(m)


@lru_cache(maxsize=None)
def phi_element(q: Rational) -> WreathElement:
    """Certified element of W representing the embedded rational q."""
    q = Fraction(q)
    if q == 0:
        return W.identity()
    return W.pow(phi_star(q.denominator), q.numerator)


def commutator_table(n: int, j: int) -> WreathElement:
    """[alpha^(z^-n), alpha](z^j), computed by evaluation (never looked up)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return alpha_commutator(n).eval(j)


def expected_commutator_case(n: int, j: int) -> WreathElement:
    """The five-case value of the commutator at z^j."""
    if j < -n:
        return QC.identity()        # [1, 1]
    if j == -n:
        return QC.identity()        # [c, 1]
    if j < 0:
        return QC.identity()        # [tau_{j+n}, 1]
    if j == 0:
        return phi(n)               # [tau_n, c]
    return QC.identity()            # [tau_{j+n}, tau_j]


def beta_tilde(factors: Iterable[tuple[int, int, int]]) -> StepFunction:
    """Canonical step form of a product of shifted tau powers.

    Each factor (k, i, n) is (tau_i^(c^k))^n; the value from c^k on
    moves by -n/i, by direct evaluation of the tau definition.
    """
    sf = StepFunction.zero()
    for k, i, n in factors:
        if i < 1:
            raise ValueError("tau indices must be >= 1")
        sf = sf.add(TauFn(i).step().shift(k).scale(n))
    return sf


# -- randomized element families (shared by the suites) ------------------

def random_rational(rng: Random, max_num: int = 100, max_den: int = 100) -> Rational:
    return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))


def random_qc_element(rng: Random) -> WreathElement:
    el = QC.top_element(rng.randint(-3, 3))
    for _ in range(rng.randint(0, 4)):
        n = rng.randint(1, 10)
        fn = TauFn(n) if rng.random() < 0.5 else PhiFn(n)
        exp = rng.choice([-2, -1, 1, 2])
        el = QC.mul(el, QC.atom_element(fn, shift=rng.randint(-8, 8), exp=exp))
    return el


def random_qc_base(rng: Random) -> WreathElement:
    el = random_qc_element(rng)
    return QC.element(0, el.atoms)


def random_w_element(rng: Random, max_atoms: int = 3) -> WreathElement:
    el = W.top_element(rng.randint(-3, 3))
    for _ in range(rng.randint(0, max_atoms)):
        if rng.random() < 0.85:
            g = W.atom_element(_ALPHA_FN, shift=rng.randint(-8, 8), exp=rng.choice([-1, 1]))
        else:
            g = w_point(random_qc_element(rng), at=rng.randint(-8, 8))
        el = W.mul(el, g)
    return el


def random_w_base(rng: Random) -> WreathElement:
    el = random_w_element(rng)
    return W.element(0, el.atoms)


def random_g_word(rng: Random, max_len: int = 8) -> GWord:
    letters = tuple(
        (rng.choice(["alpha", "z"]), rng.choice([-1, 1]))
        for _ in range(rng.randint(1, max_len))
    )
    return GWord(letters)


def brute_compare(x: WreathElement, y: WreathElement, window: int = 64) -> Ordering:
    """Independent least-difference scan over [-window, window]."""
    group = x.group
    o = group.coords.compare(x.top, y.top)
    if o is not Ordering.EQUAL:
        return o
    for j in range(-window, window + 1):
        vx, vy = group.eval(x, j), group.eval(y, j)
        if not group.fiber.equal(vx, vy):
            return group.fiber.compare(vx, vy)
    return Ordering.EQUAL


# -- the rational-embedding suite ------------------------------------------

def verify_theorem1(seed: int = 0, budget: int = 200) -> Report:
    """Checks of the Section-2 embedding: relations, the commutator
    table, homomorphism/injectivity/order preservation of the embedding,
    the normal-form bound, torsion-freeness, and solvable length 3."""

    def relations_tau_c(rng, budget):
        for n in range(1, 51):
            if not QC.equal(QC.comm(tau(n), c_elem()), phi(n)):
                return FAIL, {"n": n}
        return PASS, {"range": "n<=50"}

    def relations_tau_tau(rng, budget):
        for m in range(1, 51):
            for n in range(1, 51):
                if not QC.is_identity(QC.comm(tau(m), tau(n))):
                    return FAIL, {"m": m, "n": n}
        return PASS, {"range": "m,n<=50"}

    def table(rng, budget):
        for n in range(1, 21):
            for j in range(-2 * n - 4, 2 * n + 5):
                if not QC.equal(commutator_table(n, j), expected_commutator_case(n, j)):
                    return FAIL, {"n": n, "j": j}
        return PASS, {"range": "n<=20, |j|<=2n+4"}

    def homomorphism(rng, budget):
        unknown, bound = 0, None
        for _ in range(budget):
            p, q = random_rational(rng), random_rational(rng)
            v = W.equal_verdict(W.mul(phi_element(p), phi_element(q)), phi_element(p + q))
            if v.is_unknown:
                unknown += 1
                bound = v.bound if bound is None else max(bound, v.bound)
            elif not v.is_equal:
                return FAIL, {"p": format_rational(p), "q": format_rational(q)}
        if unknown:
            return UNKNOWN, {"unknown": unknown, "scanned_to": bound}
        return PASS, {"pairs": budget}

    def injectivity(rng, budget):
        if not W.is_identity(phi_element(Fraction(0))):
            return FAIL, {"p": "0"}
        for _ in range(budget):
            p = random_rational(rng)
            if p == 0:
                continue
            if W.is_identity(phi_element(p)):
                return FAIL, {"p": format_rational(p)}
        return PASS, {"samples": budget}

    def order_preserving(rng, budget):
        for _ in range(budget):
            p, q = random_rational(rng), random_rational(rng)
            if p == q:
                continue
            o = W.compare(phi_element(p), phi_element(q))
            if (o is Ordering.LESS) != (p < q):
                return FAIL, {"p": format_rational(p), "q": format_rational(q), "got": str(o)}
        return PASS, {"pairs": budget}

    def normal_form(rng, budget):
        for _ in range(max(1, budget // 2)):
            word = random_g_word(rng, max_len=30)
            el = g_word_element(word)
            nf = g_normal_form(word)
            rebuilt = normal_form_element(nf)
            if not W.equal(el, rebuilt):
                return FAIL, {"word": word.fmt()}
            if nf.factors:
                lo = min(s for s, _ in nf.factors)
                for j in (lo - 1, lo - 5):
                    if not QC.is_identity(rebuilt.eval(j)):
                        return FAIL, {"word": word.fmt(), "below": j}
        return PASS, {"words": max(1, budget // 2)}

    def torsion_free(rng, budget):
        for _ in range(budget):
            g = g_word_element(random_g_word(rng, max_len=6))
            while W.is_identity(g):
                g = g_word_element(random_g_word(rng, max_len=6))
            for k in range(1, 11):
                if W.is_identity(W.pow(g, k)):
                    return FAIL, {"k": k}
        return PASS, {"words": budget, "k": "<=10"}

    def solvable_length_3(rng, budget):
        for _ in range(max(1, budget // 4)):
            elems = [g_word_element(random_g_word(rng, max_len=4)) for _ in range(8)]
            if not W.is_identity(derived_commutator(W, elems)):
                return FAIL, {}
        return PASS, {"tuples": max(1, budget // 4)}

    def delta2_witness(rng, budget):
        g1, g2 = alpha(), z_elem()
        g3, g4 = W.conj(alpha(), z_elem(-1)), z_elem()
        el = derived_commutator(W, [g1, g2, g3, g4])
        if not W.is_identity(el):
            return PASS, {"witness": "[[alpha,z],[alpha^(z^-1),z]]"}
        for _ in range(200):
            elems = [g_word_element(random_g_word(rng, max_len=4)) for _ in range(4)]
            if not W.is_identity(derived_commutator(W, elems)):
                return PASS, {"witness": "random tuple", "note": "default tuple was trivial"}
        return FAIL, {"note": "no delta2 witness found"}

    checks = [
        ("relations-tau-c", relations_tau_c),
        ("relations-tau-tau", relations_tau_tau),
        ("commutator-table", table),
        ("phi-homomorphism", homomorphism),
        ("phi-injectivity", injectivity),
        ("phi-order-preserving", order_preserving),
        ("normal-form-bound", normal_form),
        ("torsion-free", torsion_free),
        ("solvable-length-3", solvable_length_3),
        ("delta2-witness", delta2_witness),
    ]
    return run_checks("theorem1", seed, budget, checks)


def subnormal_chain(seed: int = 0, budget: int = 200) -> Report:
    """Sampled normality witnesses for each link of the chain carrying
    the embedded rationals up to G, plus the negative control showing
    why the chain (and not direct normality in G) is what holds."""
    samples = max(4, budget // 8)

    def q_copy_abelian(rng, budget):
        for _ in range(samples):
            r, s = random_rational(rng), random_rational(rng)
            if not QC.equal(QC.conj(qc_point(r), qc_point(s)), qc_point(r)):
                return FAIL, {"r": format_rational(r)}
        return PASS, {"samples": samples}

    def q_copy_in_base(rng, budget):
        for _ in range(samples):
            r = random_rational(rng)
            x = random_qc_base(rng)
            if not QC.equal(QC.conj(qc_point(r), x), qc_point(r)):
                return FAIL, {"r": format_rational(r)}
        return PASS, {"samples": samples}

    def base_normal_in_qwrc(rng, budget):
        for _ in range(samples):
            x = random_qc_base(rng)
            y = random_qc_element(rng)
            if QC.conj(x, y).top != 0:
                return FAIL, {}
        return PASS, {"samples": samples}

    def first_copy_normal_in_w_base(rng, budget):
        for _ in range(samples):
            n = rng.randint(1, 10)
            x = random_w_base(rng)
            conj = W.conj(phi_star(n), x)
            expected = w_point(QC.conj(phi(n), x.eval(0)))
            if not W.equal(conj, expected):
                return FAIL, {"n": n}
        return PASS, {"samples": samples}

    def w_base_normal_in_w(rng, budget):
        for _ in range(samples):
            x = random_w_base(rng)
            y = random_w_element(rng)
            if W.conj(x, y).top != 0:
                return FAIL, {}
        return PASS, {"samples": samples}

    def negative_control(rng, budget):
        # conjugating by z^-1 moves the support off z^0, out of the
        # first copy: normality really does need the full chain.
        # With f^b(b0) = f(b0 b^-1) the support lands at z^-1.
        moved = W.conj(phi_star(3), z_elem(-1))
        at_zero_trivial = QC.is_identity(moved.eval(0))
        moved_value = QC.equal(moved.eval(-1), phi(3))
        if at_zero_trivial and moved_value:
            return PASS, {"support": "z^-1"}
        return FAIL, {}

    checks = [
        ("chain-image-in-q-copy", q_copy_abelian),
        ("chain-q-copy-in-base", q_copy_in_base),
        ("chain-base-in-qwrc", base_normal_in_qwrc),
        ("chain-first-copy-in-w-base", first_copy_normal_in_w_base),
        ("chain-w-base-in-w", w_base_normal_in_w),
        ("chain-negative-control", negative_control),
    ]
    return run_checks("subnormal", seed, budget, checks)


def verify_section2(seed: int = 0, budget: int = 200) -> Report:
    """Theorem-1 checks together with the subnormal chain, one report."""
    return merge_reports(
        "section2", [verify_theorem1(seed, budget), subnormal_chain(seed, budget)]
    )


# -- full-order laws (the Lemma-1 order battery) --------------------------

def _order_family_checks(name: str, sampler, group, window: int):
    def total_transitive(rng, budget):
        unknown = 0
        for _ in range(budget):
            a, b, c = sampler(rng), sampler(rng), sampler(rng)
            try:
                o_ab = group.compare(a, b)
                o_bc = group.compare(b, c)
                o_ac = group.compare(a, c)
            except UndecidedVerdict:
                unknown += 1
                continue
            if group.compare(b, a) is not o_ab.reversed():
                return FAIL, {"law": "antisymmetry"}
            if o_ab is Ordering.LESS and o_bc is Ordering.LESS and o_ac is not Ordering.LESS:
                return FAIL, {"law": "transitivity"}
            if o_ab is Ordering.EQUAL and o_bc is not o_ac:
                return FAIL, {"law": "transitivity"}
            if o_bc is Ordering.EQUAL and o_ab is not o_ac:
                return FAIL, {"law": "transitivity"}
        if unknown:
            return UNKNOWN, {"undecided": unknown}
        return PASS, {"triples": budget}

    def bi_invariance(rng, budget):
        checked = 0
        for _ in range(budget):
            x, y = sampler(rng), sampler(rng)
            o = group.compare(x, y)
            if o is Ordering.EQUAL:
                continue
            if o is Ordering.GREATER:
                x, y = y, x
            for _ in range(20):
                t = sampler(rng)
                if group.compare(group.mul(x, t), group.mul(y, t)) is not Ordering.LESS:
                    return FAIL, {"side": "right"}
                if group.compare(group.mul(t, x), group.mul(t, y)) is not Ordering.LESS:
                    return FAIL, {"side": "left"}
            checked += 1
        return PASS, {"pairs": checked, "translations": 20}

    def brute_agreement(rng, budget):
        for _ in range(budget):
            x, y = sampler(rng), sampler(rng)
            if group.compare(x, y) is not brute_compare(x, y, window):
                return FAIL, {}
        return PASS, {"pairs": budget, "window": window}

    return [
        (f"{name}-total-transitive", total_transitive),
        (f"{name}-bi-invariance", bi_invariance),
        (f"{name}-brute-agreement", brute_agreement),
    ]


def verify_order_laws(seed: int = 0, budget: int = 500, window: int = 64) -> Report:
    """Totality, transitivity, bi-invariance and brute-force agreement of
    the least-difference order on both reachable element families, plus
    the first-copy order restriction."""

    def first_copy_restriction(rng, budget):
        for _ in range(max(20, budget // 10)):
            a1, a2 = random_rational(rng), random_rational(rng)
            if a1 == a2:
                continue
            lo, hi = min(a1, a2), max(a1, a2)
            if QC.compare(qc_point(lo), qc_point(hi)) is not Ordering.LESS:
                return FAIL, {"a1": format_rational(lo), "a2": format_rational(hi)}
            if W.compare(w_point(qc_point(lo)), w_point(qc_point(hi))) is not Ordering.LESS:
                return FAIL, {"a1": format_rational(lo), "a2": format_rational(hi), "level": "W"}
        return PASS, {}

    checks = (
        _order_family_checks("qc", random_qc_element, QC, window)
        + _order_family_checks("w", random_w_element, W, window)
        + [("first-copy-restriction", first_copy_restriction)]
    )
    return run_checks("orders", seed, budget, checks, params={"window": window})
