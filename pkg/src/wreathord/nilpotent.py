"""Finitely generated torsion-free ordered groups in collected coordinates.

Free abelian groups and free nilpotent groups of class 2 are represented
in collected (Mal'cev) form: generator exponents ``e_1 .. e_k`` followed
by exponents of the basic commutators ``[x_p, x_q]`` for ``p < q``.  The
collected form is unique, so equality is coordinate equality, and the
"first nonzero layer" order (lexicographic on generator exponents, then
on commutator exponents) is a bi-invariant total order: conjugation acts
trivially on both lower-central quotients.

Commutator convention throughout the package: ``[x, y] = x^-1 y^-1 x y``
and ``x^y = y^-1 x y``.

Word syntax (used by the CLI and by plugin word sets)::

    word    := factor { "*" factor }
    factor  := atom [ "^" int ]
    atom    := var | "[" word "," word "]" | "(" word ")"
    var     := "x" digits          (1-based index)

Built-in word families are the power words ``x1^n`` (n >= 2) and the
commutator word ``[x1,x2]``.  Anything else requires a user plugin
supplying an ordered group and a verbal witness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Sequence

from .groundwork import Ordering, Verdict
from .reporting import FAIL, PASS, Report, run_checks


class UnsupportedWordSet(Exception):
    """Word family with no built-in group; supply a plugin instead."""


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Word:
    """Element of the free group on x1, x2, ... as a letter sequence.

    Letters are (variable index >= 1, exponent +1 or -1).
    """

    letters: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for var, exp in self.letters:
            if var < 1 or exp not in (1, -1):
                raise ValueError(f"bad letter ({var}, {exp})")

    @property
    def arity(self) -> int:
        return max((var for var, _ in self.letters), default=0)

    def reduced(self) -> "Word":
        """Freely reduced form: no adjacent x_i^{+1} x_i^{-1} pairs."""
        out: list[tuple[int, int]] = []
        for letter in self.letters:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
        return Word(tuple(out))

    def inv(self) -> "Word":
        return Word(tuple((v, -e) for v, e in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    @staticmethod
    def power(var: int, n: int) -> "Word":
        sign = 1 if n >= 0 else -1
        return Word(tuple((var, sign) for _ in range(abs(n))))

    @staticmethod
    def commutator(u: "Word", v: "Word") -> "Word":
        return u.inv() * v.inv() * u * v

    def fmt(self) -> str:
        if not self.letters:
            return "1"
        parts = []
        i = 0
        while i < len(self.letters):
            var, exp = self.letters[i]
            n = exp
            while i + 1 < len(self.letters) and self.letters[i + 1] == (var, exp):
                n += exp
                i += 1
            parts.append(f"x{var}" if n == 1 else f"x{var}^{n}")
            i += 1
        return "*".join(parts)

    def __str__(self) -> str:
        return self.fmt()


class _WordParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> WordSyntaxError:
        return WordSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse_int(self) -> int:
        self.skip_ws()
        m = re.match(r"-?\d+", self.text[self.pos:])
        if m is None:
            raise self.error("expected an integer")
        self.pos += m.end()
        return int(m.group(0))

    def parse_word(self) -> Word:
        w = self.parse_factor()
        while self.peek() == "*":
            self.pos += 1
            w = w * self.parse_factor()
        return w

    def parse_factor(self) -> Word:
        w = self.parse_atom()
        if self.peek() == "^":
            self.pos += 1
            n = self.parse_int()
            if n >= 0:
                w = Word(w.letters * n)
            else:
                w = Word(w.inv().letters * (-n))
        return w

    def parse_atom(self) -> Word:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            w = self.parse_word()
            self.expect(")")
            return w
        if ch == "[":
            self.pos += 1
            u = self.parse_word()
            self.expect(",")
            v = self.parse_word()
            self.expect("]")
            return Word.commutator(u, v)
        if ch == "x":
            self.pos += 1
            m = re.match(r"\d+", self.text[self.pos:])
            if m is None:
                raise self.error("expected a variable index after 'x'")
            self.pos += m.end()
            var = int(m.group(0))
            if var < 1:
                raise self.error("variable indices start at 1")
            return Word(((var, 1),))
        raise self.error("expected a variable, '[' or '('")


def parse_word(text: str) -> Word:
    p = _WordParser(text)
    w = p.parse_word()
    p.skip_ws()
    if p.pos != len(text):
        raise p.error("trailing input")
    return w


@dataclass(frozen=True)
class MalcevElement:
    """Collected-form element: generator exponents plus basic-commutator exponents."""

    rank: int
    gens: tuple[int, ...]
    comms: tuple[int, ...]

    def __post_init__(self):
        if len(self.gens) != self.rank:
            raise ValueError("generator coordinate count must equal rank")
        if len(self.comms) != self.rank * (self.rank - 1) // 2:
            raise ValueError("commutator coordinate count mismatch")

    @property
    def is_identity(self) -> bool:
        return not any(self.gens) and not any(self.comms)

    def fmt(self) -> str:
        if self.is_identity:
            return "1"
        parts = [f"x{i + 1}^{e}" if e != 1 else f"x{i + 1}"
                 for i, e in enumerate(self.gens) if e]
        idx = 0
        for p in range(self.rank):
            for q in range(p + 1, self.rank):
                f = self.comms[idx]
                idx += 1
                if f:
                    com = f"[x{p + 1},x{q + 1}]"
                    parts.append(com if f == 1 else f"{com}^{f}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.fmt()


class Nil2Group:
    """Free nilpotent group of class <= 2 and given rank, fully ordered.

    Rank 1 degenerates to the free abelian group Z.  ``inverted=True``
    replaces the order by its inverse; the group operations are
    unaffected.
    """

    def __init__(self, rank: int, inverted: bool = False):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = rank
        self.inverted = inverted
        self._pairs = [(p, q) for p in range(rank) for q in range(p + 1, rank)]

    @property
    def nilpotency_class(self) -> int:
        return 1 if self.rank == 1 else 2

    @property
    def key(self) -> tuple:
        return ("nil2", self.rank, self.inverted)

    def with_inverted_order(self) -> "Nil2Group":
        return Nil2Group(self.rank, not self.inverted)

    def identity(self) -> MalcevElement:
        return MalcevElement(self.rank, (0,) * self.rank, (0,) * len(self._pairs))

    def generator(self, i: int) -> MalcevElement:
        if not 1 <= i <= self.rank:
            raise ValueError(f"no generator x{i} at rank {self.rank}")
        gens = tuple(1 if j == i - 1 else 0 for j in range(self.rank))
        return MalcevElement(self.rank, gens, (0,) * len(self._pairs))

    def element(self, gens: Sequence[int], comms: Sequence[int] = ()) -> MalcevElement:
        comms = tuple(comms) or (0,) * len(self._pairs)
        return MalcevElement(self.rank, tuple(gens), comms)

    def _check(self, *xs: MalcevElement):
        for x in xs:
            if x.rank != self.rank:
                raise ValueError(f"rank mismatch: {x.rank} vs {self.rank}")

    def mul(self, x: MalcevElement, y: MalcevElement) -> MalcevElement:
        """Collected product: generator exponents add; commutator exponents
        add plus the bilinear cross terms from exchanging generators."""
        self._check(x, y)
        gens = tuple(a + b for a, b in zip(x.gens, y.gens))
        comms = tuple(
            f1 + f2 - y.gens[p] * x.gens[q]
            for (p, q), f1, f2 in zip(self._pairs, x.comms, y.comms)
        )
        return MalcevElement(self.rank, gens, comms)

    def inv(self, x: MalcevElement) -> MalcevElement:
        self._check(x)
        gens = tuple(-a for a in x.gens)
        comms = tuple(
            -f - x.gens[p] * x.gens[q]
            for (p, q), f in zip(self._pairs, x.comms)
        )
        return MalcevElement(self.rank, gens, comms)

    def pow(self, x: MalcevElement, n: int) -> MalcevElement:
        self._check(x)
        if n < 0:
            return self.pow(self.inv(x), -n)
        binom = n * (n - 1) // 2
        gens = tuple(n * a for a in x.gens)
        comms = tuple(
            n * f - binom * x.gens[p] * x.gens[q]
            for (p, q), f in zip(self._pairs, x.comms)
        )
        return MalcevElement(self.rank, gens, comms)

    def conj(self, x: MalcevElement, y: MalcevElement) -> MalcevElement:
        return self.mul(self.mul(self.inv(y), x), y)

    def comm(self, x: MalcevElement, y: MalcevElement) -> MalcevElement:
        return self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))

    def is_identity(self, x: MalcevElement) -> bool:
        self._check(x)
        return x.is_identity

    def equal(self, x: MalcevElement, y: MalcevElement) -> bool:
        self._check(x, y)
        return x == y

    def equal_verdict(self, x: MalcevElement, y: MalcevElement) -> Verdict:
        if self.equal(x, y):
            return Verdict.equal()
        for i, (a, b) in enumerate(zip(x.gens, y.gens)):
            if a != b:
                return Verdict.distinct(f"x{i + 1}")
        for (p, q), a, b in zip(self._pairs, x.comms, y.comms):
            if a != b:
                return Verdict.distinct(f"[x{p + 1},x{q + 1}]")
        raise AssertionError("unreachable")

    def compare(self, x: MalcevElement, y: MalcevElement) -> Ordering:
        self._check(x, y)
        o = Ordering.of((x.gens, x.comms), (y.gens, y.comms))
        return o.reversed() if self.inverted else o

    def is_positive(self, x: MalcevElement) -> bool:
        return self.compare(x, self.identity()) is Ordering.GREATER

    def key_of(self, x: MalcevElement) -> tuple:
        return (x.gens, x.comms)

    def fmt(self, x: MalcevElement) -> str:
        return x.fmt()

    def ray_decompose(self, s: MalcevElement, a: MalcevElement) -> tuple[MalcevElement, int]:
        """Write s = a^i * rep with rep the canonical representative of the
        ray {a^i s}.  The pivot coordinate grows linearly along the ray,
        which makes the representative independent of the start point."""
        self._check(s, a)
        for idx, v in enumerate(a.gens):
            if v:
                i = s.gens[idx] // v
                return self.mul(self.pow(a, -i), s), i
        # a is central here (all generator exponents vanish)
        for idx, v in enumerate(a.comms):
            if v:
                i = s.comms[idx] // v
                return self.mul(self.pow(a, -i), s), i
        raise ValueError("ray element must be nontrivial")


def nil2_mul(x: MalcevElement, y: MalcevElement) -> MalcevElement:
    return Nil2Group(x.rank).mul(x, y)


def nil2_compare(x: MalcevElement, y: MalcevElement) -> Ordering:
    return Nil2Group(x.rank).compare(x, y)


def eval_word(w: Word, args: Sequence[Any], group: Any = None) -> Any:
    """Image of the substitution w(args...) computed with the group's ops.

    Works for any group object exposing identity/mul/inv; when the
    arguments are Mal'cev elements the group is inferred from their rank.
    """
    if group is None:
        if not args or not isinstance(args[0], MalcevElement):
            raise ValueError("cannot infer the group; pass it explicitly")
        group = Nil2Group(args[0].rank)
    if len(args) < w.arity:
        raise ValueError(f"word needs {w.arity} arguments, got {len(args)}")
    out = group.identity()
    for var, exp in w.letters:
        g = args[var - 1]
        out = group.mul(out, g if exp == 1 else group.inv(g))
    return out


# -- word families and verbal witnesses --------------------------------

@dataclass(frozen=True)
class PowerWord:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("power words need exponent >= 2")

    def word(self) -> Word:
        return Word.power(1, self.n)

    @property
    def family_key(self) -> str:
        return f"x1^{self.n}"


@dataclass(frozen=True)
class CommutatorWord:
    def word(self) -> Word:
        return Word.commutator(Word(((1, 1),)), Word(((2, 1),)))

    @property
    def family_key(self) -> str:
        return "[x1,x2]"


WordFamily = PowerWord | CommutatorWord


def classify_word(w: Word) -> WordFamily | None:
    """Recognize the built-in families from a parsed word."""
    r = w.reduced()
    if r.letters and len({var for var, _ in r.letters}) == 1:
        total = sum(exp for _, exp in r.letters)
        if abs(total) >= 2 and len(r.letters) == abs(total):
            return PowerWord(abs(total))
    if len(r.letters) == 4:
        (v1, e1), (v2, e2), (v3, e3), (v4, e4) = r.letters
        if (v1, v2) == (v3, v4) and v1 != v2 and (e1, e2, e3, e4) == (-1, -1, 1, 1):
            return CommutatorWord()
    return None


@dataclass(frozen=True)
class VerbalWitness:
    """Nontrivial positive element of V(S) together with its presentation
    as a signed product of word values."""

    element: MalcevElement
    presentation: tuple[tuple[Word, tuple[MalcevElement, ...], int], ...]

    def replay(self, group: Any) -> MalcevElement:
        out = group.identity()
        for word, args, sign in self.presentation:
            value = eval_word(word, args, group)
            out = group.mul(out, value if sign == 1 else group.inv(value))
        return out


def select_S(
    family: WordFamily | Word | str | Any,
    invert_order: bool = False,
) -> tuple[Nil2Group, VerbalWitness]:
    """Pick the fiber/top group for a word family plus a positive witness.

    PowerWord(n) selects Z (free abelian of rank 1) with witness n;
    CommutatorWord selects the free class-2 group of rank 2 with witness
    [x1, x2].  If the chosen order makes the witness negative, the order
    is replaced by its inverse.  Arbitrary word sets are not supported
    natively; a plugin object exposing ``select()`` may supply its own
    (ordered group, witness) pair.
    """
    if isinstance(family, str):
        family = parse_word(family)
    if isinstance(family, Word):
        known = classify_word(family)
        if known is None:
            raise UnsupportedWordSet(
                f"no built-in group for word {family.fmt()!r};"
                " supply a plugin with select()"
            )
        family = known

    if isinstance(family, PowerWord):
        group = Nil2Group(1, inverted=invert_order)
        gen = group.generator(1)
        a = group.pow(gen, family.n)
        witness = VerbalWitness(a, ((family.word(), (gen,), 1),))
    elif isinstance(family, CommutatorWord):
        group = Nil2Group(2, inverted=invert_order)
        x1, x2 = group.generator(1), group.generator(2)
        a = group.comm(x1, x2)
        witness = VerbalWitness(a, ((family.word(), (x1, x2), 1),))
    elif hasattr(family, "select"):
        group, witness = family.select()
        a = witness.element
    else:
        raise UnsupportedWordSet(f"unsupported word family: {family!r}")

    a = witness.element
    if group.is_identity(a):
        raise ValueError("verbal witness must be nontrivial")
    if not group.is_positive(a):
        group = group.with_inverted_order()
        if not group.is_positive(a):
            raise AssertionError("witness not positive under either order")
    return group, witness


def verify_witness(witness: VerbalWitness, group: Any, seed: int = 0) -> Report:
    """Re-evaluate the witness presentation and check it against the element."""

    def reconstruct(rng, budget):
        got = witness.replay(group)
        if group.equal(got, witness.element):
            return PASS, {"element": group.fmt(witness.element)}
        return FAIL, {
            "expected": group.fmt(witness.element),
            "recomputed": group.fmt(got),
        }

    def nontrivial(rng, budget):
        if group.is_identity(witness.element):
            return FAIL, {"element": group.fmt(witness.element)}
        return PASS, {}

    def positive(rng, budget):
        if group.is_positive(witness.element):
            return PASS, {}
        return FAIL, {"element": group.fmt(witness.element)}

    checks = [
        ("witness-reconstruct", reconstruct),
        ("witness-nontrivial", nontrivial),
        ("witness-positive", positive),
    ]
    return run_checks("witness", seed, 0, checks)
