"""Verbal order-preserving embedding: Q into V(T), then into G = <omega, z>.

For a word family V the construction stacks three wreath products:

* ``Q Wr S`` with S the selected fiber/top group (Z for power words,
  the free class-2 group of rank 2 for the commutator word) carrying a
  positive verbal witness ``a``.  The base elements ``psi_n`` (1/n at
  s = 1) and ``chi_n`` (1/n along the ray a^i, i >= 0) satisfy
  ``psi_n = a^-1 a^(chi_n)``, which puts the embedded rationals inside
  V(T) for T = <chi_n, witness arguments>.
* ``T Wr C`` with ``rho_g`` the point copy of g at c^0 and ``pi_g``
  equal to g from c^0 on; ``[pi_(g^-1), c] = rho_g`` puts the first
  copy of T inside the derived subgroup of D = <pi_g, c>.
* ``D Wr Z`` with ``omega(z^i) = d_k`` for i = 2^k, where d_0, d_1, ...
  is a deterministic enumeration of D.  Commutators of shifted omegas
  recover every [d_n, d_m] at z^0 and vanish elsewhere, because
  2^a - 2^b = 2^n - 2^m forces (a, b) = (n, m).

Enumeration layout: d_0 = c, d_(2n-1) = pi applied to psi_n^-1, and the
even indices >= 2 carry a breadth-first sweep of D words (duplicates
permitted, semantically trivial words skipped).  The reserved indices
make the embedding's word for m/n computable in O(1):

    m/n  |->  [omega^(z^-2^(2n-1)), omega^(z^-1)]^m.

Images carry verified point-form certificates exactly as in the
rational embedding, so equality and order queries stay cheap even
though the shifts grow like 2^(2n-1).
"""

from __future__ import annotations

import itertools
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from random import Random
from typing import Any

from .groundwork import (
    IntCoords,
    Ordering,
    RATIONALS,
    Rational,
    format_rational,
)
from .nilpotent import (
    CommutatorWord,
    MalcevElement,
    Nil2Group,
    Word,
    WordFamily,
    classify_word,
    eval_word,
    parse_word,
    select_S,
    verify_witness,
)
from .reporting import FAIL, PASS, Report, UNKNOWN, run_checks
from .wreath import (
    Atom,
    BaseFunction,
    FiberSteps,
    PointFn,
    RayStepFunction,
    StepFunction,
    WreathElement,
    WreathGroup,
    derived_commutator,
)
from .embed_rationals import GWord


class ConstructionViolation(Exception):
    """An identity the construction guarantees failed to verify."""


class SCoords:
    """The selected group S acting as the coordinate group of Q Wr S.

    Provides the ray decomposition s = a^i * rep used by ray-step
    canonical forms, with the canonical representative independent of
    the chosen point on the ray.
    """

    def __init__(self, sgroup: Nil2Group, witness: MalcevElement, family_key: str):
        self.group = sgroup
        self.witness = witness
        self.family_key = family_key
        self._powers: dict[int, MalcevElement] = {}

    def identity(self) -> MalcevElement:
        return self.group.identity()

    def mul(self, a, b):
        return self.group.mul(a, b)

    def inv(self, a):
        return self.group.inv(a)

    def compare(self, a, b) -> Ordering:
        return self.group.compare(a, b)

    def key(self, a) -> tuple:
        return self.group.key_of(a)

    def sort_key(self, a) -> tuple:
        gens, comms = a.gens, a.comms
        if self.group.inverted:
            return (tuple(-g for g in gens), tuple(-f for f in comms))
        return (gens, comms)

    def fmt(self, a) -> str:
        return a.fmt()

    def ray_decompose(self, s: MalcevElement) -> tuple[MalcevElement, int]:
        return self.group.ray_decompose(s, self.witness)

    def rep_key(self, rep: MalcevElement) -> tuple:
        return self.group.key_of(rep)

    def witness_power(self, i: int) -> MalcevElement:
        if i not in self._powers:
            self._powers[i] = self.group.pow(self.witness, i)
        return self._powers[i]


class ChiFn(BaseFunction):
    """chi_n: 1/n on the ray {a^i : i >= 0}, 0 elsewhere."""

    finite = False

    def __init__(self, n: int, scoords: SCoords):
        self.n = n
        self.scoords = scoords
        rep0, i0 = scoords.ray_decompose(scoords.identity())
        self._rep0 = rep0
        self._rep0_key = scoords.rep_key(rep0)
        self._i0 = i0

    @property
    def name(self) -> str:
        return f"chi({self.n})"

    def value(self, rel: MalcevElement) -> Rational:
        rep, i = self.scoords.ray_decompose(rel)
        if self.scoords.rep_key(rep) == self._rep0_key and i >= self._i0:
            return Fraction(1, self.n)
        return Fraction(0)

    def support_min(self) -> MalcevElement:
        return self.scoords.identity()

    def support(self):
        for i in itertools.count(0):
            yield self.scoords.witness_power(i)

    def rays(self, coords: SCoords) -> RayStepFunction:
        steps = StepFunction.make(Fraction(0), [(self._i0, Fraction(1, self.n))])
        return RayStepFunction.make([(self._rep0_key, self._rep0, steps)])

    def key(self) -> tuple:
        return ("chi", self.n)

    def fmt(self) -> str:
        return self.name


class PsiFn(PointFn):
    """psi_n: 1/n at s = 1; the same function as a rational point atom."""

    def __init__(self, n: int, scoords: SCoords):
        super().__init__(Fraction(1, n), RATIONALS, scoords.identity())
        self.n = n

    def fmt(self) -> str:
        return f"psi({self.n})"


class PiFn(BaseFunction):
    """pi_g: g at every c^i with i >= 0, identity below."""

    finite = False

    def __init__(self, g: WreathElement, tgroup: WreathGroup):
        self.g = g
        self.tgroup = tgroup
        self._trivial: bool | None = None

    @property
    def name(self) -> str:
        return "pi"

    @property
    def is_trivial(self) -> bool:
        if self._trivial is None:
            self._trivial = self.tgroup.is_identity(self.g)
        return self._trivial

    def value(self, rel: int) -> WreathElement:
        return self.g if rel >= 0 else self.tgroup.identity()

    def support_min(self) -> int:
        return 0

    def support(self):
        return itertools.count(0)

    def fiber_steps(self, fiber: Any) -> FiberSteps:
        return FiberSteps.make(fiber, fiber.identity(), [(0, self.g)])

    def merge_with(self, other: BaseFunction, e1: int, e2: int) -> "BaseFunction | None":
        if isinstance(other, PiFn):
            g = self.tgroup.mul(self.tgroup.pow(self.g, e1),
                                self.tgroup.pow(other.g, e2))
            return PiFn(g, self.tgroup)
        return None

    def key(self) -> tuple:
        return ("pi", self.tgroup.key(self.g))

    def fmt(self) -> str:
        return f"pi({self.tgroup.fmt(self.g)})"


class OmegaFn(BaseFunction):
    """omega: d_k at z^(2^k) for k >= 0, identity elsewhere."""

    name = "omega"
    tail_kind = "omega"

    def __init__(self, ctx: "VerbalContext"):
        self.ctx = ctx

    def value(self, rel: int) -> WreathElement:
        if rel >= 1 and rel & (rel - 1) == 0:
            return self.ctx.enumerate_D(rel.bit_length() - 1)
        return self.ctx.TC.identity()

    def support_min(self) -> int:
        return 1

    def support(self):
        for k in itertools.count(0):
            yield 1 << k

    def key(self) -> tuple:
        return ("omega", self.ctx.family_key)

    def tail_identity(self, group, element, tails, finites) -> str | None:
        # Away from the finitely many collision coordinates (where two
        # distinct shift groups are active at once: k1 + 2^a = k2 + 2^b
        # has at most one solution per shift pair) the value at
        # k + 2^b is d_b raised to the net exponent of shift k, so zero
        # nets plus trivial collision values force triviality; a
        # nonzero net is witnessed at the first non-collision power.
        fiber = group.fiber
        nets: dict[int, int] = {}
        for a in tails:
            nets[a.shift] = nets.get(a.shift, 0) + a.exp
        eval_coords: set[int] = set()
        for a in finites:
            eval_coords.update(c + a.shift for c in a.fn.finite_coords())
        shifts = sorted(nets)
        for i, k1 in enumerate(shifts):
            for k2 in shifts[i + 1:]:
                delta = k2 - k1
                v = (delta & -delta).bit_length() - 1
                m = delta >> v
                if (m + 1) & m == 0:
                    a_exp = v + (m + 1).bit_length() - 1
                    eval_coords.add(k1 + (1 << a_exp))
        bad = next((k for k, net in nets.items() if net), None)
        if bad is not None:
            net = nets[bad]
            for b in range(512):
                j = bad + (1 << b)
                if j in eval_coords:
                    continue
                if not fiber.is_identity(fiber.pow(self.ctx.enumerate_D(b), net)):
                    return "distinct"
            raise RuntimeError("no nontrivial enumeration element within 512 indices")
        for j in sorted(eval_coords):
            if not fiber.is_identity(group.eval(element, j)):
                return "distinct"
        return "equal"


@dataclass(frozen=True)
class PsiCertificate:
    """psi_n as a signed product of word values of V over T: the inverse
    of the witness presentation followed by the presentation with every
    argument conjugated by chi_n."""

    n: int
    factors: tuple[tuple[Word, tuple[WreathElement, ...], int], ...]

    def replay(self, group: WreathGroup) -> WreathElement:
        out = group.identity()
        for word, args, sign in self.factors:
            value = eval_word(word, args, group)
            out = group.mul(out, value if sign == 1 else group.inv(value))
        return out


class VerbalContext:
    """All the groups and named elements of the verbal embedding for one
    word family."""

    def __init__(self, family: WordFamily | Word | str | Any,
                 invert_order: bool = False, scan_pad: int = 64):
        if isinstance(family, str):
            family = parse_word(family)
        if isinstance(family, Word):
            classified = classify_word(family)
            family = classified if classified is not None else family
        self.family = family
        self.sgroup, self.witness = select_S(family, invert_order=invert_order)
        self.family_key = getattr(family, "family_key", repr(family))
        self.scoords = SCoords(self.sgroup, self.witness.element, self.family_key)
        self.QS = WreathGroup(f"QwrS[{self.family_key}]", self.scoords, RATIONALS,
                              canonical="rays")
        self.TC = WreathGroup(f"TwrC[{self.family_key}]", IntCoords("c"), self.QS,
                              canonical="fibersteps")
        self.DZ = WreathGroup(f"DwrZ[{self.family_key}]", IntCoords("z"), self.TC,
                              canonical="tail", tail_kind="omega", scan_pad=scan_pad)
        self._chi: dict[int, WreathElement] = {}
        self._psi: dict[int, WreathElement] = {}
        self._sweep: list[WreathElement] = []
        self._sweep_seen: set = set()
        self._sweep_budget = 0
        self._t_elems: list[WreathElement] = []
        self._t_seen: set = set()
        self._t_budget = 0
        self._omega: WreathElement | None = None
        self._omega_comms: dict[tuple[int, int], WreathElement] = {}
        self._embeds: dict[Rational, WreathElement] = {}
        # the enumeration is a shared read-only sequence; extension is
        # idempotent and index-stable, and serialized by this lock
        self._enum_lock = threading.RLock()

    # -- Q wr S ----------------------------------------------------------

    def s_top(self, s: MalcevElement) -> WreathElement:
        return self.QS.top_element(s)

    def a_elem(self) -> WreathElement:
        return self.s_top(self.witness.element)

    def chi(self, n: int) -> WreathElement:
        if n < 1:
            raise ValueError("chi(n) needs n >= 1")
        if n not in self._chi:
            self._chi[n] = self.QS.atom_element(ChiFn(n, self.scoords))
        return self._chi[n]

    def psi(self, n: int) -> WreathElement:
        if n < 1:
            raise ValueError("psi(n) needs n >= 1")
        if n not in self._psi:
            self._psi[n] = self.QS.atom_element(PsiFn(n, self.scoords))
        return self._psi[n]

    def psi_from_witness(self, n: int, a_element: WreathElement | None = None,
                         ) -> tuple[WreathElement, PsiCertificate]:
        """Compute a^-1 a^(chi_n) inside Q Wr S, check it against psi_n,
        and emit the verbal certificate (a product of V-values: the
        conjugate of a word value is the word value of the conjugated
        arguments)."""
        a_el = self.a_elem() if a_element is None else a_element
        computed = self.QS.mul(self.QS.inv(a_el), self.QS.conj(a_el, self.chi(n)))
        if not self.QS.equal(computed, self.psi(n)):
            raise ConstructionViolation(
                f"a^-1 a^(chi_{n}) disagrees with psi_{n} for {self.family_key}"
            )
        factors = []
        for word, args, sign in reversed(self.witness.presentation):
            factors.append((word, tuple(self.s_top(g) for g in args), -sign))
        for word, args, sign in self.witness.presentation:
            conj_args = tuple(
                self.QS.conj(self.s_top(g), self.chi(n)) for g in args
            )
            factors.append((word, conj_args, sign))
        return computed, PsiCertificate(n, tuple(factors))

    # -- T wr C ------------------------------------------------------------

    def c_elem(self, k: int = 1) -> WreathElement:
        return self.TC.top_element(k)

    def rho(self, g: WreathElement) -> WreathElement:
        return self.TC.point(g)

    def pi(self, g: WreathElement) -> WreathElement:
        return self.TC.atom_element(PiFn(g, self.QS))

    # -- enumeration of D ---------------------------------------------------

    def _t_generators(self) -> list[WreathElement]:
        gens = []
        seen = set()
        for _, args, _ in self.witness.presentation:
            for g in args:
                k = self.sgroup.key_of(g)
                if k not in seen:
                    seen.add(k)
                    gens.append(self.s_top(g))
        return gens

    def _t_element(self, i: int) -> WreathElement:
        with self._enum_lock:
            return self._t_element_locked(i)

    def _t_element_locked(self, i: int) -> WreathElement:
        while len(self._t_elems) <= i:
            self._t_budget += 1
            if self._t_budget > 8:
                raise RuntimeError("T-word enumeration budget exhausted")
            b = self._t_budget
            base_gens = self._t_generators()
            gens = base_gens + [self.chi(j + 1) for j in range(b)]
            gens = gens[: b + len(base_gens)]
            symbols: list[WreathElement] = []
            for g in gens:
                symbols.append(g)
                symbols.append(self.QS.inv(g))
            for length in range(0, b + 1):
                for combo in itertools.product(range(len(symbols)), repeat=length):
                    if combo in self._t_seen:
                        continue
                    self._t_seen.add(combo)
                    el = self.QS.identity()
                    for idx in combo:
                        el = self.QS.mul(el, symbols[idx])
                    self._t_elems.append(el)
        return self._t_elems[i]

    def _sweep_element(self, i: int) -> WreathElement:
        with self._enum_lock:
            return self._sweep_element_locked(i)

    def _sweep_element_locked(self, i: int) -> WreathElement:
        while len(self._sweep) <= i:
            self._sweep_budget += 1
            if self._sweep_budget > 8:
                raise RuntimeError("D-word enumeration budget exhausted")
            b = self._sweep_budget
            symbols: list[WreathElement] = [self.c_elem(1), self.c_elem(-1)]
            for j in range(b):
                p = self.pi(self._t_element(j))
                symbols.append(p)
                symbols.append(self.TC.inv(p))
            for length in range(1, b + 1):
                for combo in itertools.product(range(len(symbols)), repeat=length):
                    key = (length, combo)
                    if key in self._sweep_seen:
                        continue
                    self._sweep_seen.add(key)
                    el = self.TC.identity()
                    for idx in combo:
                        el = self.TC.mul(el, symbols[idx])
                    if not self.TC.is_identity(el):
                        self._sweep.append(el)
        return self._sweep[i]

    def enumerate_D(self, k: int) -> WreathElement:
        """Deterministic enumeration of D: index 0 is c, the odd index
        2n-1 is pi applied to psi_n^-1, and the even indices >= 2 sweep
        all remaining D words breadth-first (duplicates permitted)."""
        if k < 0:
            raise ValueError("enumeration index must be >= 0")
        if k == 0:
            return self.c_elem(1)
        if k % 2 == 1:
            n = (k + 1) // 2
            return self.pi(self.QS.inv(self.psi(n)))
        return self._sweep_element((k - 2) // 2)

    def index_of_psi_slot(self, n: int) -> int:
        return 2 * n - 1

    # -- D wr Z ------------------------------------------------------------

    def z_elem(self, k: int = 1) -> WreathElement:
        return self.DZ.top_element(k)

    def omega(self) -> WreathElement:
        if self._omega is None:
            self._omega = self.DZ.atom_element(OmegaFn(self))
        return self._omega

    def omega_commutator(self, n: int, m: int) -> WreathElement:
        """[omega^(z^-2^n), omega^(z^-2^m)], certified equal to the point
        function with value [d_n, d_m] at z^0.

        The only coordinate where both shift groups are active is z^0
        (the dyadic collision equation has no other solution), which the
        omega tail criterion checks exactly.
        """
        if n < 0 or m < 0:
            raise ValueError("enumeration indices must be >= 0")
        if n == m:
            warnings.warn("omega_commutator(n, n) is trivially the identity")
            return self.DZ.identity()
        if (n, m) in self._omega_comms:
            return self._omega_comms[(n, m)]
        x = self.DZ.conj(self.omega(), self.z_elem(-(1 << n)))
        y = self.DZ.conj(self.omega(), self.z_elem(-(1 << m)))
        raw = self.DZ.comm(x, y)
        dval = self.TC.comm(self.enumerate_D(n), self.enumerate_D(m))
        # normalize the certificate value extensionally so that its powers
        # stay single atoms (a point form when the support is finite)
        try:
            dval = self.TC.from_finite_steps(dval.top, self.TC.base_canonical(dval))
        except ValueError:
            pass
        steps = FiberSteps.make(self.TC, self.TC.identity(),
                                [(0, dval), (1, self.TC.identity())])
        expected = self.DZ.from_finite_steps(0, steps)
        if not self.DZ.equal_verdict(raw, expected).is_equal:
            raise ConstructionViolation(
                f"omega commutator ({n}, {m}) failed its point-form certificate"
            )
        out = WreathElement(self.DZ, raw.top, raw.atoms, steps)
        self._omega_comms[(n, m)] = out
        return out

    def embed(self, q: Rational) -> WreathElement:
        """Certified image of q in G = <omega, z>: for m/n the word
        [omega^(z^-2^(2n-1)), omega^(z^-1)]^m, whose value at z^0 is
        rho applied to psi_n^m (and identity everywhere else)."""
        q = Fraction(q)
        if q in self._embeds:
            return self._embeds[q]
        if q == 0:
            out = self.DZ.identity()
        else:
            comm = self.omega_commutator(self.index_of_psi_slot(q.denominator), 0)
            # power the atoms and the certificate separately: the base of a
            # top-trivial element powers pointwise, so one FiberSteps.pow
            # replaces a cascade of per-multiplication compositions
            bare = WreathElement(self.DZ, comm.top, comm.atoms, None)
            powed = self.DZ.pow(bare, q.numerator)
            out = WreathElement(self.DZ, powed.top, powed.atoms,
                                comm.ext.pow(q.numerator))
        self._embeds[q] = out
        return out

    def embed_word(self, q: Rational) -> GWord:
        q = Fraction(q)
        if q == 0:
            return GWord(())
        m, n = q.numerator, q.denominator
        p = 1 << self.index_of_psi_slot(n)
        base = GWord((
            ("z", p), ("omega", -1), ("z", -p),
            ("z", 1), ("omega", -1), ("z", -1),
            ("z", p), ("omega", 1), ("z", -p),
            ("z", 1), ("omega", 1), ("z", -1),
        ))
        return base.power(m)

    def g_word_element(self, w: GWord) -> WreathElement:
        out = self.DZ.identity()
        for name, e in w.letters:
            if name == "z":
                g = self.z_elem(e)
            elif name == "omega":
                g = self.DZ.pow(self.omega(), e)
            else:
                raise ValueError(f"unknown generator {name!r}")
            out = self.DZ.mul(out, g)
        return out

    # -- randomized families --------------------------------------------------

    def random_t_element(self, rng: Random, max_len: int = 6) -> WreathElement:
        gens = self._t_generators() + [self.chi(n) for n in (1, 2, 3)]
        out = self.QS.identity()
        for _ in range(rng.randint(1, max_len)):
            g = rng.choice(gens)
            if rng.random() < 0.5:
                g = self.QS.inv(g)
            out = self.QS.mul(out, g)
        return out

    def random_d_element(self, rng: Random, max_len: int = 5) -> WreathElement:
        out = self.TC.identity()
        for _ in range(rng.randint(1, max_len)):
            if rng.random() < 0.4:
                out = self.TC.mul(out, self.c_elem(rng.choice([-1, 1])))
            else:
                p = self.pi(self.random_t_element(rng, max_len=3))
                if rng.random() < 0.5:
                    p = self.TC.inv(p)
                out = self.TC.mul(out, p)
        return out

    def random_g_word(self, rng: Random, max_len: int = 4) -> GWord:
        letters = tuple(
            (rng.choice(["omega", "z"]), rng.choice([-1, 1]))
            for _ in range(rng.randint(1, max_len))
        )
        return GWord(letters)


def _normalize_family(family: WordFamily | Word | str | Any) -> Any:
    if isinstance(family, str):
        family = parse_word(family)
    if isinstance(family, Word):
        classified = classify_word(family)
        if classified is not None:
            return classified
    return family


@lru_cache(maxsize=None)
def _context_cache(family: Any, invert_order: bool) -> VerbalContext:
    return VerbalContext(family, invert_order=invert_order)


def get_context(family: WordFamily | Word | str | Any = CommutatorWord(),
                invert_order: bool = False) -> VerbalContext:
    family = _normalize_family(family)
    try:
        return _context_cache(family, invert_order)
    except TypeError:
        return VerbalContext(family, invert_order=invert_order)


# -- flat operation aliases (context-threaded) ---------------------------

def chi(ctx: VerbalContext, n: int) -> WreathElement:
    return ctx.chi(n)


def psi(ctx: VerbalContext, n: int) -> WreathElement:
    return ctx.psi(n)


def psi_from_witness(ctx: VerbalContext, n: int) -> tuple[WreathElement, PsiCertificate]:
    return ctx.psi_from_witness(n)


def rho(ctx: VerbalContext, g: WreathElement) -> WreathElement:
    return ctx.rho(g)


def pi(ctx: VerbalContext, g: WreathElement) -> WreathElement:
    return ctx.pi(g)


def enumerate_D(ctx: VerbalContext, k: int) -> WreathElement:
    return ctx.enumerate_D(k)


def omega(ctx: VerbalContext) -> WreathElement:
    return ctx.omega()


def omega_commutator(ctx: VerbalContext, n: int, m: int) -> WreathElement:
    return ctx.omega_commutator(n, m)


def embed_verbal(ctx: VerbalContext, q: Rational) -> GWord:
    return ctx.embed_word(q)


# -- the verbal-embedding suite ---------------------------------------------

def verify_theorem2(family: WordFamily | Word | str | Any = CommutatorWord(),
                    seed: int = 0, budget: int = 200) -> Report:
    """Checks of the verbal embedding for one word family: the witness,
    psi_n = a^-1 a^(chi_n) with its replayable certificate, order
    preservation into T, the rho/pi identity, D normal forms, the omega
    commutator identities, the end-to-end embedding, subnormality
    witnesses, and the solvable-length bound."""
    ctx = get_context(family)
    QS, TC, DZ = ctx.QS, ctx.TC, ctx.DZ

    def witness_ok(rng, budget):
        rep = verify_witness(ctx.witness, ctx.sgroup)
        if rep.all_pass:
            return PASS, {"witness": ctx.sgroup.fmt(ctx.witness.element)}
        return FAIL, {c.name: c.status for c in rep.checks if c.status != PASS}

    def psi_identity(rng, budget):
        for n in range(1, 51):
            computed, cert = ctx.psi_from_witness(n)
            if not QS.equal(computed, ctx.psi(n)):
                return FAIL, {"n": n}
            if not QS.equal(cert.replay(QS), ctx.psi(n)):
                return FAIL, {"n": n, "stage": "certificate replay"}
        return PASS, {"range": "n<=50"}

    def chi_commute(rng, budget):
        for i in range(1, 6):
            for j in range(1, 6):
                if not QS.is_identity(QS.comm(ctx.chi(i), ctx.chi(j))):
                    return FAIL, {"i": i, "j": j}
        return PASS, {"range": "i,j<=5"}

    def q_to_t_order(rng, budget):
        for _ in range(budget):
            p = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            q = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            if p == q:
                continue
            img_p = QS.pow(ctx.psi(p.denominator), p.numerator)
            img_q = QS.pow(ctx.psi(q.denominator), q.numerator)
            if (QS.compare(img_p, img_q) is Ordering.LESS) != (p < q):
                return FAIL, {"p": format_rational(p), "q": format_rational(q)}
        return PASS, {"pairs": budget}

    def rho_pi(rng, budget):
        count = max(4, budget // 4)
        for _ in range(count):
            g = ctx.random_t_element(rng, max_len=10)
            lhs = TC.comm(ctx.pi(QS.inv(g)), ctx.c_elem())
            if not TC.equal(lhs, ctx.rho(g)):
                return FAIL, {"g": QS.fmt(g)}
        return PASS, {"samples": count}

    def d_normal_form(rng, budget):
        count = max(4, budget // 4)
        for _ in range(count):
            el = ctx.random_d_element(rng)
            rebuilt = TC.element(
                el.top,
                tuple(Atom(PiFn(a.fn.g, QS), a.shift, a.exp) for a in el.atoms),
            )
            if not TC.equal(el, rebuilt):
                return FAIL, {}
            if el.atoms:
                lo = min(a.shift for a in el.atoms)
                if not QS.is_identity(el.eval(lo - 1)):
                    return FAIL, {"below": lo - 1}
        return PASS, {"samples": count}

    def omega_comms(rng, budget):
        for n in range(0, 9):
            for m in range(0, 9):
                if n == m:
                    continue
                el = ctx.omega_commutator(n, m)
                dval = TC.comm(ctx.enumerate_D(n), ctx.enumerate_D(m))
                if not TC.equal(el.eval(0), dval):
                    return FAIL, {"n": n, "m": m, "at": 0}
                hi = 1 << (max(n, m) + 2)
                raw = DZ.comm(
                    DZ.conj(ctx.omega(), ctx.z_elem(-(1 << n))),
                    DZ.conj(ctx.omega(), ctx.z_elem(-(1 << m))),
                )
                for j in range(-hi, hi + 1):
                    if j == 0:
                        if not TC.equal(raw.eval(0), dval):
                            return FAIL, {"n": n, "m": m, "at": 0}
                    elif not TC.is_identity(raw.eval(j)):
                        return FAIL, {"n": n, "m": m, "at": j}
        return PASS, {"range": "n,m<=8", "window": "2^(max+2)"}

    def embed_hom(rng, budget):
        count = max(4, budget // 2)
        unknown, bound = 0, None
        for _ in range(count):
            p = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            q = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            v = DZ.equal_verdict(DZ.mul(ctx.embed(p), ctx.embed(q)), ctx.embed(p + q))
            if v.is_unknown:
                unknown += 1
                bound = v.bound if bound is None else max(bound, v.bound)
            elif not v.is_equal:
                return FAIL, {"p": format_rational(p), "q": format_rational(q)}
        if unknown:
            return UNKNOWN, {"unknown": unknown, "scanned_to": bound}
        return PASS, {"pairs": count}

    def embed_injective(rng, budget):
        if not DZ.is_identity(ctx.embed(Fraction(0))):
            return FAIL, {"p": "0"}
        for _ in range(max(4, budget // 2)):
            p = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            if p == 0:
                continue
            if DZ.is_identity(ctx.embed(p)):
                return FAIL, {"p": format_rational(p)}
        return PASS, {}

    def embed_order(rng, budget):
        count = max(4, budget // 2)
        for _ in range(count):
            p = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            q = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
            if p == q:
                continue
            if (DZ.compare(ctx.embed(p), ctx.embed(q)) is Ordering.LESS) != (p < q):
                return FAIL, {"p": format_rational(p), "q": format_rational(q)}
        return PASS, {"pairs": count}

    def subnormal_links(rng, budget):
        count = max(4, budget // 8)
        for _ in range(count):
            g = ctx.random_t_element(rng, max_len=3)
            x = ctx.random_d_element(rng, max_len=3)
            x_base = TC.element(0, x.atoms)
            moved = TC.conj(ctx.rho(g), x_base)
            expected = ctx.rho(QS.conj(g, x_base.eval(0)))
            if not TC.equal(moved, expected):
                return FAIL, {"link": "rho copy normal in D base"}
            if TC.conj(x_base, x).top != 0:
                return FAIL, {"link": "base normal in T wr C"}
        off = TC.conj(ctx.rho(ctx.psi(2)), ctx.c_elem(-1))
        if QS.is_identity(off.eval(-1)) or not QS.is_identity(off.eval(0)):
            return FAIL, {"link": "negative control"}
        return PASS, {"samples": count}

    def variety_bound(rng, budget):
        c = ctx.sgroup.nilpotency_class
        depth = c + 3
        tuples = max(2, budget // 100)
        for _ in range(tuples):
            elems = [ctx.g_word_element(ctx.random_g_word(rng, max_len=3))
                     for _ in range(1 << depth)]
            if not DZ.is_identity(derived_commutator(DZ, elems)):
                return FAIL, {"depth": depth}
        return PASS, {"solvable_length": depth, "tuples": tuples}

    checks = [
        ("witness", witness_ok),
        ("psi-via-witness", psi_identity),
        ("chi-commute", chi_commute),
        ("q-to-t-order", q_to_t_order),
        ("rho-pi-identity", rho_pi),
        ("d-normal-form", d_normal_form),
        ("omega-commutators", omega_comms),
        ("embed-homomorphism", embed_hom),
        ("embed-injectivity", embed_injective),
        ("embed-order-preserving", embed_order),
        ("subnormal-links", subnormal_links),
        ("variety-bound", variety_bound),
    ]
    return run_checks("verbal", seed, budget, checks,
                      params={"word": ctx.family_key})
