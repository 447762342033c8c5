"""Exact rationals, cyclic coordinates, and the ordering vocabulary.

Everything in this package computes with exact integer and rational
arithmetic; there is no floating point anywhere.  All values are
immutable after construction and all operations are pure functions, so
unrestricted concurrent use is safe.

Comparisons come in two flavours:

* ``Ordering`` -- the outcome of an exact three-way comparison
  (trichotomy holds: exactly one of Less / Equal / Greater).
* ``Verdict`` -- the outcome of an equality test that may be only
  semi-decidable.  ``Equal`` and ``Distinct(witness)`` are exact;
  ``UnknownBeyond(bound)`` records that all coordinates up to ``bound``
  were checked and agreed, and that no exact tail criterion applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Protocol, runtime_checkable

#: Exact arbitrary-precision fraction.  ``fractions.Fraction`` already
#: guarantees lowest terms and a positive denominator, which is exactly
#: the canonical form required everywhere in this package.
Rational = Fraction

#: Coordinate in an infinite cyclic group written multiplicatively: the
#: integer ``i`` stands for ``c**i`` (or ``z**i``).  The group law is
#: exponent addition and the order is the integer order.
CyclicCoordinate = int


class Ordering(Enum):
    """Exact three-way comparison outcome."""

    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    @staticmethod
    def of(a: Any, b: Any) -> "Ordering":
        """Compare two values that support ``<``."""
        if a < b:
            return Ordering.LESS
        if b < a:
            return Ordering.GREATER
        return Ordering.EQUAL

    def reversed(self) -> "Ordering":
        if self is Ordering.LESS:
            return Ordering.GREATER
        if self is Ordering.GREATER:
            return Ordering.LESS
        return self

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verdict:
    """Three-valued equality outcome: Equal / Distinct / UnknownBeyond.

    ``Distinct`` carries a witness: either a coordinate at which
    evaluation confirms the inequality, or the string ``"top"`` when the
    two elements already differ in their top components.
    ``UnknownBeyond(bound)`` means every coordinate up to ``bound`` was
    checked and agreed.
    """

    kind: str
    witness: Any = None
    bound: Any = None

    @staticmethod
    def equal() -> "Verdict":
        return Verdict("equal")

    @staticmethod
    def distinct(witness: Any) -> "Verdict":
        return Verdict("distinct", witness=witness)

    @staticmethod
    def unknown_beyond(bound: Any) -> "Verdict":
        return Verdict("unknown", bound=bound)

    @property
    def is_equal(self) -> bool:
        return self.kind == "equal"

    @property
    def is_distinct(self) -> bool:
        return self.kind == "distinct"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def __str__(self) -> str:
        if self.is_equal:
            return "Equal"
        if self.is_distinct:
            return f"Distinct({self.witness})"
        return f"UnknownBeyond({self.bound})"


class UndecidedVerdict(Exception):
    """Raised when an order query hits an UnknownBeyond equality verdict.

    Order queries never guess: an undecided equality makes the
    comparison fail loudly, carrying the scanned bound.
    """

    def __init__(self, bound: Any):
        super().__init__(f"equality undecided; scanned up to {bound}")
        self.bound = bound


@runtime_checkable
class OrderedGroup(Protocol):
    """Contract shared by every group in this package.

    ``compare`` is a total order on elements whose equality verdicts are
    decidable (it raises :class:`UndecidedVerdict` otherwise), and is
    bi-invariant: g1 < g2 implies g1*x < g2*x and x*g1 < x*g2.
    """

    def identity(self) -> Any: ...

    def mul(self, x: Any, y: Any) -> Any: ...

    def inv(self, x: Any) -> Any: ...

    def equal_verdict(self, x: Any, y: Any) -> Verdict: ...

    def compare(self, x: Any, y: Any) -> Ordering: ...

    def is_positive(self, x: Any) -> bool: ...


# -- rational helpers --------------------------------------------------

def rat_add(a: Rational, b: Rational) -> Rational:
    """Exact sum, automatically in lowest terms."""
    return a + b


def rat_cmp(a: Rational, b: Rational) -> Ordering:
    """Sign of ``a - b`` via exact cross-multiplication."""
    return Ordering.of(a, b)


def canonical_fraction(m: int, n: int) -> Rational:
    """m/n in lowest terms with a positive denominator.

    Raises ValueError for n == 0.
    """
    if n == 0:
        raise ValueError("denominator must be nonzero")
    return Fraction(m, n)


_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def parse_rational(text: str) -> Rational:
    """Parse the literal syntax ``m/n`` or ``m`` (optional leading -)."""
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    return canonical_fraction(num, den)


def format_rational(q: Rational) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class RationalFiber:
    """The additive group of exact rationals, as a fiber of a wreath base."""

    name = "Q"

    def identity(self) -> Rational:
        return Fraction(0)

    def mul(self, x: Rational, y: Rational) -> Rational:
        return x + y

    def inv(self, x: Rational) -> Rational:
        return -x

    def pow(self, x: Rational, n: int) -> Rational:
        return x * n

    def is_identity(self, x: Rational) -> bool:
        return x == 0

    def equal(self, x: Rational, y: Rational) -> bool:
        return x == y

    def equal_verdict(self, x: Rational, y: Rational) -> Verdict:
        return Verdict.equal() if x == y else Verdict.distinct(x - y)

    def compare(self, x: Rational, y: Rational) -> Ordering:
        return Ordering.of(x, y)

    def is_positive(self, x: Rational) -> bool:
        return x > 0

    def key(self, x: Rational) -> Any:
        return x

    def fmt(self, x: Rational) -> str:
        return format_rational(x)


RATIONALS = RationalFiber()


class IntCoords:
    """Infinite cyclic coordinate group: ints standing for powers of one letter."""

    def __init__(self, letter: str):
        self.letter = letter

    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return a + b

    def inv(self, a: int) -> int:
        return -a

    def compare(self, a: int, b: int) -> Ordering:
        return Ordering.of(a, b)

    def key(self, a: int) -> int:
        return a

    def sort_key(self, a: int) -> int:
        return a

    def fmt(self, a: int) -> str:
        return f"{self.letter}^{a}"
