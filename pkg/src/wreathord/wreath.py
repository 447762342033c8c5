"""Generic Cartesian wreath-product elements with lazy formal-product bases.

An element of ``A Wr B`` (the semidirect product ``B ⋉ A^B``) is stored
as a top element of the coordinate group B plus a *formal product* of
shifted base atoms.  Base functions are never materialized as infinite
maps; an atom knows its value at any coordinate, a lower bound of its
support, and an increasing enumeration of its support.  The action
convention is ``f^b(b0) = f(b0 * b^-1)``, and ``[x, y] = x^-1 y^-1 x y``,
``x^y = y^-1 x y``.

Equality of two elements with equal tops is decided in three tiers:

1. canonical extensional forms, when every atom of the level admits one
   (rational step functions over an integer line, ray-step functions
   over a nilpotent coordinate group, or fiber-valued step forms);
2. an exact tail criterion for products of shifted powers of a single
   tail atom plus finitely supported atoms (each tail atom kind supplies
   its own criterion, e.g. partial-fraction uniqueness or power-of-two
   collision enumeration);
3. a bounded window scan that returns an honest ``UnknownBeyond`` when
   neither exact route applies.

``Equal`` and ``Distinct`` verdicts are only ever produced by tiers with
an exact justification; order queries on ``UnknownBeyond`` pairs fail
loudly instead of guessing.

The well-ordered-support invariant is what makes the least-difference
scan meaningful: every atom's support is bounded below and enumerable in
increasing coordinate order, and a finite union of well-ordered sets is
well-ordered.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .groundwork import Ordering, Rational, UndecidedVerdict, Verdict, format_rational

_SCAN_LIMIT = 1_000_000
_ALPHA_WINDOW_LIMIT = 20_000


class MixedAtomError(ValueError):
    """tail_symbol got a product mixing different atom kinds."""


# ----------------------------------------------------------------------
# canonical extensional forms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """Rational-valued function on an integer line with finitely many
    value changes.

    ``value(i)`` is ``left`` for ``i < breaks[0]`` and ``values[j]`` for
    ``breaks[j] <= i < breaks[j+1]``; the right tail is the last value.
    Canonical form (adjacent values distinct) makes equality structural.
    """

    left: Rational
    breaks: tuple[int, ...]
    values: tuple[Rational, ...]

    @staticmethod
    def zero() -> "StepFunction":
        return StepFunction(Fraction(0), (), ())

    @staticmethod
    def make(left: Rational, changes: Iterable[tuple[int, Rational]]) -> "StepFunction":
        running = left
        breaks: list[int] = []
        values: list[Rational] = []
        for b, v in sorted(changes):
            if breaks and breaks[-1] == b:
                if values[-1] == v:
                    continue
                values[-1] = v
                running = v
                if len(values) >= 2 and values[-2] == v:
                    breaks.pop(); values.pop()
                elif len(values) == 1 and left == v:
                    breaks.pop(); values.pop()
                continue
            if v != running:
                breaks.append(b)
                values.append(v)
                running = v
        return StepFunction(left, tuple(breaks), tuple(values))

    def value(self, i: int) -> Rational:
        idx = bisect_right(self.breaks, i) - 1
        return self.left if idx < 0 else self.values[idx]

    @property
    def right(self) -> Rational:
        return self.values[-1] if self.values else self.left

    @property
    def is_zero(self) -> bool:
        return self.left == 0 and not self.breaks

    def add(self, other: "StepFunction") -> "StepFunction":
        merged = sorted(set(self.breaks) | set(other.breaks))
        changes = [(b, self.value(b) + other.value(b)) for b in merged]
        return StepFunction.make(self.left + other.left, changes)

    def neg(self) -> "StepFunction":
        return StepFunction(-self.left, self.breaks, tuple(-v for v in self.values))

    def scale(self, n: int) -> "StepFunction":
        if n == 0:
            return StepFunction.zero()
        return StepFunction(self.left * n, self.breaks, tuple(v * n for v in self.values))

    def shift(self, k: int) -> "StepFunction":
        return StepFunction(self.left, tuple(b + k for b in self.breaks), self.values)

    def least_difference(self, other: "StepFunction") -> int | None:
        """Least integer where the two functions differ, or None."""
        if self.left != other.left:
            raise ValueError("left tails differ: no least difference exists")
        for b in sorted(set(self.breaks) | set(other.breaks)):
            if self.value(b) != other.value(b):
                return b
        return None

    def compare(self, other: "StepFunction") -> Ordering:
        b = self.least_difference(other)
        if b is None:
            return Ordering.EQUAL
        return Ordering.of(self.value(b), other.value(b))

    def fmt(self) -> str:
        if not self.breaks:
            return "{all: %s}" % format_rational(self.left)
        parts = [f"i<{self.breaks[0]}: {format_rational(self.left)}"]
        for j, b in enumerate(self.breaks):
            v = format_rational(self.values[j])
            if j + 1 < len(self.breaks):
                parts.append(f"{b}<=i<{self.breaks[j + 1]}: {v}")
            else:
                parts.append(f"i>={b}: {v}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class RayStepFunction:
    """Rational function on a coordinate group S supported on finitely
    many rays ``{a^i * g : i in Z}``.

    Each ray is keyed by the canonical coset representative of ``g``
    under left translation by the witness ``a``; the function along the
    ray is a StepFunction in the ray index ``i``.  Value off every
    stored ray is 0.
    """

    rays: tuple[tuple[Any, Any, StepFunction], ...]

    @staticmethod
    def zero() -> "RayStepFunction":
        return RayStepFunction(())

    @staticmethod
    def make(entries: Iterable[tuple[Any, Any, StepFunction]]) -> "RayStepFunction":
        acc: dict[Any, tuple[Any, StepFunction]] = {}
        for key, rep, steps in entries:
            if key in acc:
                acc[key] = (acc[key][0], acc[key][1].add(steps))
            else:
                acc[key] = (rep, steps)
        rays = tuple(
            (key, rep, steps)
            for key, (rep, steps) in sorted(acc.items())
            if not steps.is_zero
        )
        return RayStepFunction(rays)

    @property
    def is_zero(self) -> bool:
        return not self.rays

    def value(self, s: Any, coords: Any) -> Rational:
        rep, i = coords.ray_decompose(s)
        key = coords.rep_key(rep)
        for k, _, steps in self.rays:
            if k == key:
                return steps.value(i)
        return Fraction(0)

    def add(self, other: "RayStepFunction") -> "RayStepFunction":
        return RayStepFunction.make(self.rays + other.rays)

    def neg(self) -> "RayStepFunction":
        return RayStepFunction(tuple((k, r, s.neg()) for k, r, s in self.rays))

    def scale(self, n: int) -> "RayStepFunction":
        if n == 0:
            return RayStepFunction.zero()
        return RayStepFunction(tuple((k, r, s.scale(n)) for k, r, s in self.rays))

    def translate(self, s: Any, coords: Any) -> "RayStepFunction":
        """Form of this function conjugated by the coordinate ``s``
        (support moves from ``sigma`` to ``sigma * s``)."""
        entries = []
        for _, rep, steps in self.rays:
            rep2, i1 = coords.ray_decompose(coords.mul(rep, s))
            entries.append((coords.rep_key(rep2), rep2, steps.shift(i1)))
        return RayStepFunction.make(entries)

    def least_difference(self, other: "RayStepFunction", coords: Any) -> Any | None:
        diff = self.add(other.neg())
        if diff.is_zero:
            return None
        candidates = []
        for _, rep, steps in diff.rays:
            if steps.left != 0:
                raise ValueError("ray support unbounded below")
            candidates.append(coords.mul(coords.witness_power(steps.breaks[0]), rep))
        best = candidates[0]
        for cand in candidates[1:]:
            if coords.compare(cand, best) is Ordering.LESS:
                best = cand
        return best

    def fmt(self, coords: Any) -> str:
        if not self.rays:
            return "{0}"
        parts = [f"ray({coords.fmt(rep)}): {steps.fmt()}" for _, rep, steps in self.rays]
        return "{" + "; ".join(parts) + "}"


class FiberSteps:
    """Piecewise-constant function on an integer line with values in an
    arbitrary fiber group; the canonical form for base functions whose
    atoms are all threshold- or point-shaped."""

    __slots__ = ("fiber", "left", "breaks", "values", "_key")

    def __init__(self, fiber, left, breaks: tuple[int, ...], values: tuple):
        self.fiber = fiber
        self.left = left
        self.breaks = breaks
        self.values = values
        self._key = None

    @staticmethod
    def make(fiber, left, changes: Iterable[tuple[int, Any]]) -> "FiberSteps":
        running = left
        breaks: list[int] = []
        values: list[Any] = []
        for b, v in sorted(changes, key=lambda bv: bv[0]):
            if not fiber.equal(v, running):
                breaks.append(b)
                values.append(v)
                running = v
        return FiberSteps(fiber, left, tuple(breaks), tuple(values))

    @staticmethod
    def identity(fiber) -> "FiberSteps":
        return FiberSteps(fiber, fiber.identity(), (), ())

    def value(self, i: int):
        idx = bisect_right(self.breaks, i) - 1
        return self.left if idx < 0 else self.values[idx]

    @property
    def is_identity_form(self) -> bool:
        return not self.breaks and self.fiber.is_identity(self.left)

    def shifted(self, k: int) -> "FiberSteps":
        if k == 0:
            return self
        return FiberSteps(self.fiber, self.left, tuple(b + k for b in self.breaks), self.values)

    def mul(self, other: "FiberSteps") -> "FiberSteps":
        f = self.fiber
        merged = sorted(set(self.breaks) | set(other.breaks))
        changes = [(b, f.mul(self.value(b), other.value(b))) for b in merged]
        return FiberSteps.make(f, f.mul(self.left, other.left), changes)

    def inv(self) -> "FiberSteps":
        f = self.fiber
        return FiberSteps(f, f.inv(self.left), self.breaks, tuple(f.inv(v) for v in self.values))

    def pow(self, n: int) -> "FiberSteps":
        f = self.fiber
        return FiberSteps.make(
            f, f.pow(self.left, n), [(b, f.pow(v, n)) for b, v in zip(self.breaks, self.values)]
        )

    def key(self) -> tuple:
        if self._key is None:
            f = self.fiber
            self._key = (f.key(self.left), self.breaks, tuple(f.key(v) for v in self.values))
        return self._key

    def least_difference(self, other: "FiberSteps") -> int | None:
        f = self.fiber
        if not f.equal(self.left, other.left):
            raise ValueError("left tails differ: no least difference exists")
        for b in sorted(set(self.breaks) | set(other.breaks)):
            if not f.equal(self.value(b), other.value(b)):
                return b
        return None

    def finite_support_pairs(self) -> list[tuple[int, Any]]:
        """(coordinate, value) for every coordinate with nontrivial value;
        only valid when both tails are the identity and segments are of
        finite width."""
        f = self.fiber
        if not f.is_identity(self.left):
            raise ValueError("left tail is not the identity")
        if self.values and not f.is_identity(self.values[-1]):
            raise ValueError("right tail is not the identity")
        pairs = []
        for j, b in enumerate(self.breaks[:-1]):
            v = self.values[j]
            if not f.is_identity(v):
                pairs.extend((i, v) for i in range(b, self.breaks[j + 1]))
        return pairs

    def fmt(self) -> str:
        f = self.fiber
        if not self.breaks:
            return "{all: %s}" % f.fmt(self.left)
        parts = [f"i<{self.breaks[0]}: {f.fmt(self.left)}"]
        for j, b in enumerate(self.breaks):
            v = f.fmt(self.values[j])
            if j + 1 < len(self.breaks):
                parts.append(f"{b}<=i<{self.breaks[j + 1]}: {v}")
            else:
                parts.append(f"i>={b}: {v}")
        return "{" + ", ".join(parts) + "}"


# ----------------------------------------------------------------------
# atoms
# ----------------------------------------------------------------------

def _coord_is_origin(rel: Any) -> bool:
    if isinstance(rel, int):
        return rel == 0
    return rel.is_identity


class BaseFunction:
    """A named generator function of a wreath base.

    Subclasses report the value at any (unshifted) coordinate, a lower
    bound of the support, and an increasing enumeration of the support;
    extensional kinds additionally expose their step/ray/fiber-step
    forms for the tier-1 equality path.
    """

    name = "?"
    finite = False
    tail_kind: str | None = None

    def value(self, rel: Any) -> Any:
        raise NotImplementedError

    @property
    def is_trivial(self) -> bool:
        return False

    def support_min(self) -> Any | None:
        raise NotImplementedError

    def support(self) -> Iterator[Any]:
        raise NotImplementedError

    def finite_coords(self) -> tuple:
        raise TypeError(f"{self.name} does not have finite support")

    def step(self) -> StepFunction:
        raise TypeError(f"{self.name} has no step form")

    def rays(self, coords: Any) -> RayStepFunction:
        raise TypeError(f"{self.name} has no ray form")

    def fiber_steps(self, fiber: Any) -> FiberSteps:
        raise TypeError(f"{self.name} has no fiber-step form")

    def tail_identity(self, group: "WreathGroup", element: "WreathElement",
                      tails: list, finites: list) -> str | None:
        return None

    def merge_with(self, other: "BaseFunction", e1: int, e2: int) -> "BaseFunction | None":
        """Pointwise product with another function at the same shift, if
        the two collapse to a single atom (point with point, threshold
        with threshold); None when no merge applies."""
        return None

    def key(self) -> tuple:
        return (self.name,)

    def fmt(self) -> str:
        return self.name


class PointFn(BaseFunction):
    """The base function supported at the origin coordinate only."""

    name = "point"
    finite = True

    def __init__(self, value: Any, fiber: Any, origin: Any):
        self.point_value = value
        self.fiber = fiber
        self.origin = origin
        self._trivial: bool | None = None

    def value(self, rel: Any) -> Any:
        if _coord_is_origin(rel):
            return self.point_value
        return self.fiber.identity()

    @property
    def is_trivial(self) -> bool:
        if self._trivial is None:
            self._trivial = self.fiber.is_identity(self.point_value)
        return self._trivial

    def support_min(self) -> Any | None:
        return None if self.is_trivial else self.origin

    def support(self) -> Iterator[Any]:
        if not self.is_trivial:
            yield self.origin

    def finite_coords(self) -> tuple:
        return () if self.is_trivial else (self.origin,)

    def step(self) -> StepFunction:
        return StepFunction.make(Fraction(0), [(0, self.point_value), (1, Fraction(0))])

    def rays(self, coords: Any) -> RayStepFunction:
        rep, i = coords.ray_decompose(self.origin)
        steps = StepFunction.make(Fraction(0), [(i, self.point_value), (i + 1, Fraction(0))])
        return RayStepFunction.make([(coords.rep_key(rep), rep, steps)])

    def fiber_steps(self, fiber: Any) -> FiberSteps:
        return FiberSteps.make(
            fiber, fiber.identity(), [(0, self.point_value), (1, fiber.identity())]
        )

    def merge_with(self, other: BaseFunction, e1: int, e2: int) -> "BaseFunction | None":
        if isinstance(other, PointFn) and other.origin == self.origin:
            v = self.fiber.mul(
                self.fiber.pow(self.point_value, e1),
                self.fiber.pow(other.point_value, e2),
            )
            return PointFn(v, self.fiber, self.origin)
        return None

    def key(self) -> tuple:
        return ("point", self.fiber.key(self.point_value))

    def fmt(self) -> str:
        return f"point({self.fiber.fmt(self.point_value)})"


@dataclass(frozen=True)
class Atom:
    """A base function together with a shift by a top-group coordinate
    and an integer exponent."""

    fn: BaseFunction
    shift: Any
    exp: int


# ----------------------------------------------------------------------
# elements and groups
# ----------------------------------------------------------------------

_MISSING = object()


class WreathElement:
    """top * base, with the base a formal product of shifted atoms.

    ``ext``, when present, is a FiberSteps form that is evaluation-equal
    to the formal product; it is attached only by certified constructors
    and is preserved by products, inverses, and powers.  Per-element
    caches only ever hold deterministically recomputable values, so
    concurrent readers either miss (and recompute the same value) or
    observe a consistent entry.
    """

    __slots__ = ("group", "top", "atoms", "ext", "_evals", "_canon")

    def __init__(self, group: "WreathGroup", top: Any, atoms: tuple[Atom, ...],
                 ext: FiberSteps | None = None):
        self.group = group
        self.top = top
        self.atoms = atoms
        self.ext = ext
        self._evals: dict = {}
        self._canon = _MISSING

    def eval(self, coord: Any) -> Any:
        return self.group.eval(self, coord)

    def inv(self) -> "WreathElement":
        return self.group.inv(self)

    def conj(self, other: "WreathElement") -> "WreathElement":
        return self.group.conj(self, other)

    def comm(self, other: "WreathElement") -> "WreathElement":
        return self.group.comm(self, other)

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        return self.group.mul(self, other)

    def __pow__(self, n: int) -> "WreathElement":
        return self.group.pow(self, n)

    def __repr__(self) -> str:
        return f"<{self.group.name}: {self.group.fmt(self)}>"


class WreathGroup:
    """Operations of one wreath-product level.

    ``canonical`` picks the tier-1 strategy: "steps" (rational step
    functions), "rays" (ray-step functions), "fibersteps" (fiber-valued
    step forms; all atoms threshold/point shaped), or "tail" (canonical
    only for all-finite or certified elements; tier 2 applies to
    products of the level's tail atom).
    """

    def __init__(self, name: str, coords: Any, fiber: Any, canonical: str,
                 tail_kind: str | None = None, scan_pad: int = 64):
        if canonical not in ("steps", "rays", "fibersteps", "tail"):
            raise ValueError(f"unknown canonical strategy {canonical!r}")
        self.name = name
        self.coords = coords
        self.fiber = fiber
        self.canonical = canonical
        self.tail_kind = tail_kind
        self.scan_pad = scan_pad
        self._identity: WreathElement | None = None

    @property
    def carries_ext(self) -> bool:
        return self.canonical == "tail"

    # -- construction ---------------------------------------------------

    def element(self, top: Any, atoms: Iterable[Atom],
                ext: FiberSteps | None = None) -> WreathElement:
        return WreathElement(self, top, self._reduce(atoms), ext)

    def identity(self) -> WreathElement:
        if self._identity is None:
            ext = FiberSteps.identity(self.fiber) if self.carries_ext else None
            self._identity = WreathElement(self, self.coords.identity(), (), ext)
        return self._identity

    def top_element(self, k: Any) -> WreathElement:
        ext = FiberSteps.identity(self.fiber) if self.carries_ext else None
        return WreathElement(self, k, (), ext)

    def atom_element(self, fn: BaseFunction, shift: Any = None, exp: int = 1) -> WreathElement:
        if shift is None:
            shift = self.coords.identity()
        ext = None
        if self.carries_ext and fn.finite:
            ext = fn.fiber_steps(self.fiber).shifted(shift).pow(exp)
        return self.element(self.coords.identity(), (Atom(fn, shift, exp),), ext)

    def point(self, value: Any, at: Any = None) -> WreathElement:
        fn = PointFn(value, self.fiber, self.coords.identity())
        return self.atom_element(fn, shift=at)

    def from_finite_steps(self, top: Any, steps: FiberSteps) -> WreathElement:
        """Element whose base is the given finite-support form, realized
        as a product of point atoms (so the formal-product algebra stays
        sound) with the form attached as its certificate."""
        atoms = tuple(
            Atom(PointFn(v, self.fiber, self.coords.identity()), c, 1)
            for c, v in steps.finite_support_pairs()
        )
        return WreathElement(self, top, atoms, steps if self.carries_ext else None)

    def _push(self, out: list[Atom], a: Atom) -> None:
        """Append one atom to an already-reduced list, merging or
        cancelling at the boundary."""
        while True:
            if a.exp == 0 or a.fn.is_trivial:
                return
            if not out or self.coords.key(out[-1].shift) != self.coords.key(a.shift):
                out.append(a)
                return
            prev = out[-1]
            if prev.fn.key() == a.fn.key():
                out.pop()
                e = prev.exp + a.exp
                if e:
                    out.append(Atom(prev.fn, prev.shift, e))
                return
            merged = prev.fn.merge_with(a.fn, prev.exp, a.exp)
            if merged is None:
                out.append(a)
                return
            out.pop()
            a = Atom(merged, prev.shift, 1)

    def _reduce(self, atoms: Iterable[Atom]) -> tuple[Atom, ...]:
        out: list[Atom] = []
        for a in atoms:
            self._push(out, a)
        return tuple(out)

    def _concat_reduced(self, left: tuple[Atom, ...], right: tuple[Atom, ...]) -> tuple[Atom, ...]:
        """Concatenate two already-reduced atom tuples; only the junction
        can merge or cancel, so interior atoms are not re-examined."""
        if not left:
            return right
        if not right:
            return left
        out = list(left)
        for i, a in enumerate(right):
            n = len(out)
            self._push(out, a)
            if len(out) > n:
                # nothing merged: the rest of the right side is untouched
                return tuple(out) + right[i + 1:]
        return tuple(out)

    def _same(self, *xs: WreathElement):
        for x in xs:
            if x.group is not self:
                raise ValueError(f"element of {x.group.name} used in {self.name}")

    # -- group operations -------------------------------------------------

    def mul(self, x: WreathElement, y: WreathElement) -> WreathElement:
        self._same(x, y)
        if self.coords.key(y.top) == self.coords.key(self.coords.identity()):
            shifted = x.atoms
        else:
            shifted = tuple(
                Atom(a.fn, self.coords.mul(a.shift, y.top), a.exp) for a in x.atoms
            )
        ext = None
        if self.carries_ext and x.ext is not None and y.ext is not None:
            ext = x.ext.shifted(y.top).mul(y.ext)
        atoms = self._concat_reduced(shifted, y.atoms)
        return WreathElement(self, self.coords.mul(x.top, y.top), atoms, ext)

    def inv(self, x: WreathElement) -> WreathElement:
        self._same(x)
        ti = self.coords.inv(x.top)
        # reversing a reduced product keeps it reduced
        atoms = tuple(
            Atom(a.fn, self.coords.mul(a.shift, ti), -a.exp) for a in reversed(x.atoms)
        )
        ext = None
        if self.carries_ext and x.ext is not None:
            ext = x.ext.inv().shifted(ti)
        return WreathElement(self, ti, atoms, ext)

    def pow(self, x: WreathElement, n: int) -> WreathElement:
        if n < 0:
            return self.pow(self.inv(x), -n)
        out = self.identity()
        base = x
        while n:
            if n & 1:
                out = self.mul(out, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return out

    def conj(self, x: WreathElement, y: WreathElement) -> WreathElement:
        return self.mul(self.mul(self.inv(y), x), y)

    def comm(self, x: WreathElement, y: WreathElement) -> WreathElement:
        return self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))

    # -- evaluation -------------------------------------------------------

    def eval(self, x: WreathElement, coord: Any) -> Any:
        self._same(x)
        if x.ext is not None:
            return x.ext.value(coord)
        k = self.coords.key(coord)
        hit = x._evals.get(k, _MISSING)
        if hit is not _MISSING:
            return hit
        v = self.fiber.identity()
        for a in x.atoms:
            rel = self.coords.mul(coord, self.coords.inv(a.shift))
            av = a.fn.value(rel)
            if not self.fiber.is_identity(av):
                v = self.fiber.mul(v, av if a.exp == 1 else self.fiber.pow(av, a.exp))
        x._evals[k] = v
        return v

    # -- canonical forms ----------------------------------------------------

    def base_canonical(self, x: WreathElement):
        if x._canon is _MISSING:
            x._canon = self._compute_canonical(x)
        return x._canon

    def _compute_canonical(self, x: WreathElement):
        if self.canonical == "steps":
            sf = StepFunction.zero()
            for a in x.atoms:
                sf = sf.add(a.fn.step().shift(a.shift).scale(a.exp))
            return sf
        if self.canonical == "rays":
            rs = RayStepFunction.zero()
            for a in x.atoms:
                rs = rs.add(a.fn.rays(self.coords).translate(a.shift, self.coords).scale(a.exp))
            return rs
        if self.canonical == "fibersteps":
            return self._fold_fiber_steps(x.atoms)
        if all(a.fn.finite for a in x.atoms):
            return self._fold_fiber_steps(x.atoms)
        return x.ext

    def _fold_fiber_steps(self, atoms: tuple[Atom, ...]) -> FiberSteps:
        fs = FiberSteps.identity(self.fiber)
        for a in atoms:
            part = a.fn.fiber_steps(self.fiber).shifted(a.shift)
            if a.exp != 1:
                part = part.pow(a.exp)
            fs = fs.mul(part)
        return fs

    def _canonical_diff(self, c1, c2) -> Verdict:
        if isinstance(c1, StepFunction):
            b = c1.least_difference(c2)
        elif isinstance(c1, RayStepFunction):
            b = c1.least_difference(c2, self.coords)
        else:
            b = c1.least_difference(c2)
        return Verdict.equal() if b is None else Verdict.distinct(b)

    # -- equality and order ---------------------------------------------------

    def min_difference(self, x: WreathElement, y: WreathElement,
                       pad: int | None = None) -> Verdict:
        """Verdict on the least coordinate where the base functions of x
        and y differ.  Requires equal tops."""
        self._same(x, y)
        if self.coords.key(x.top) != self.coords.key(y.top):
            raise ValueError("min_difference requires equal tops")
        c1 = self.base_canonical(x)
        c2 = self.base_canonical(y)
        if c1 is not None and c2 is not None:
            return self._canonical_diff(c1, c2)
        d = self.mul(x, self.inv(y))
        dc = self.base_canonical(d)
        if dc is not None:
            trivial = dc.is_identity_form if isinstance(dc, FiberSteps) else dc.is_zero
            t = "equal" if trivial else "distinct"
        else:
            t = self._tail_identity(d)
        if t == "equal":
            return Verdict.equal()
        if t == "distinct":
            b, _ = self._first_difference(x, y, None)
            if b is None:
                raise AssertionError("tail criterion found inequality but scan did not")
            return Verdict.distinct(b)
        bound = self._scan_hi(x, y) + (self.scan_pad if pad is None else pad)
        b, hit_bound = self._first_difference(x, y, bound)
        if b is not None:
            return Verdict.distinct(b)
        if hit_bound:
            return Verdict.unknown_beyond(bound)
        return Verdict.equal()

    def _tail_identity(self, d: WreathElement) -> str | None:
        if self.tail_kind is None:
            return None
        tails: list[Atom] = []
        finites: list[Atom] = []
        for a in d.atoms:
            if a.fn.tail_kind == self.tail_kind:
                tails.append(a)
            elif a.fn.finite:
                finites.append(a)
            else:
                return None
        if not tails:
            return None
        return tails[0].fn.tail_identity(self, d, tails, finites)

    def _shifted_support(self, a: Atom) -> Iterator[Any]:
        for sigma in a.fn.support():
            yield self.coords.mul(sigma, a.shift)

    def _first_difference(self, x: WreathElement, y: WreathElement,
                          bound: Any | None) -> tuple[Any | None, bool]:
        streams = [self._shifted_support(a) for el in (x, y) for a in el.atoms]
        if not streams:
            return None, False
        merged = heapq.merge(*streams, key=self.coords.sort_key)
        seen = _MISSING
        steps = 0
        for b in merged:
            sk = self.coords.sort_key(b)
            if seen is not _MISSING and sk == seen:
                continue
            seen = sk
            if bound is not None and sk > bound:
                return None, True
            steps += 1
            if steps > _SCAN_LIMIT:
                raise RuntimeError("support scan exceeded the safety limit")
            if not self.fiber.equal(self.eval(x, b), self.eval(y, b)):
                return b, False
        return None, False

    def _scan_hi(self, x: WreathElement, y: WreathElement) -> int:
        vals = [0]
        for el in (x, y):
            for a in el.atoms:
                if a.fn.finite:
                    vals.extend(c + a.shift for c in a.fn.finite_coords())
                else:
                    vals.append(a.shift)
        return max(vals)

    def equal_verdict(self, x: WreathElement, y: WreathElement,
                      pad: int | None = None) -> Verdict:
        self._same(x, y)
        if self.coords.key(x.top) != self.coords.key(y.top):
            return Verdict.distinct("top")
        return self.min_difference(x, y, pad)

    def equal(self, x: WreathElement, y: WreathElement) -> bool:
        self._same(x, y)
        if x is y:
            return True
        if self.coords.key(x.top) != self.coords.key(y.top):
            return False
        c1 = self.base_canonical(x)
        c2 = self.base_canonical(y)
        if c1 is not None and c2 is not None:
            if isinstance(c1, FiberSteps):
                return c1.key() == c2.key()
            return c1 == c2
        v = self.min_difference(x, y)
        if v.is_unknown:
            raise UndecidedVerdict(v.bound)
        return v.is_equal

    def is_identity(self, x: WreathElement) -> bool:
        self._same(x)
        if self.coords.key(x.top) != self.coords.key(self.coords.identity()):
            return False
        c = self.base_canonical(x)
        if c is not None:
            if isinstance(c, FiberSteps):
                return c.is_identity_form
            return c.is_zero
        return self.equal(x, self.identity())

    def compare(self, x: WreathElement, y: WreathElement,
                pad: int | None = None) -> Ordering:
        self._same(x, y)
        o = self.coords.compare(x.top, y.top)
        if o is not Ordering.EQUAL:
            return o
        v = self.min_difference(x, y, pad)
        if v.is_equal:
            return Ordering.EQUAL
        if v.is_distinct:
            return self.fiber.compare(self.eval(x, v.witness), self.eval(y, v.witness))
        raise UndecidedVerdict(v.bound)

    def is_positive(self, x: WreathElement) -> bool:
        return self.compare(x, self.identity()) is Ordering.GREATER

    # -- fiber protocol (so a wreath group can be the fiber of the next level)

    def key(self, x: WreathElement) -> tuple:
        c = self.base_canonical(x)
        if c is None:
            raise ValueError("no canonical form available for key()")
        ckey = c.key() if isinstance(c, FiberSteps) else c
        return (self.coords.key(x.top), ckey)

    def fmt(self, x: WreathElement) -> str:
        if self.canonical in ("steps", "rays", "fibersteps"):
            c = self.base_canonical(x)
            cstr = c.fmt(self.coords) if isinstance(c, RayStepFunction) else c.fmt()
            if self.coords.key(x.top) == self.coords.key(self.coords.identity()):
                return cstr
            return f"{self.coords.fmt(x.top)} * {cstr}"
        parts = []
        if self.coords.key(x.top) != self.coords.key(self.coords.identity()):
            parts.append(self.coords.fmt(x.top))
        for a in x.atoms:
            s = a.fn.fmt()
            if self.coords.key(a.shift) != self.coords.key(self.coords.identity()):
                s += f"[{self.coords.fmt(a.shift)}]"
            if a.exp != 1:
                s += f"^{a.exp}"
            parts.append(s)
        return " * ".join(parts) if parts else "1"


# ----------------------------------------------------------------------
# module-level operation surface
# ----------------------------------------------------------------------

def w_mul(x: WreathElement, y: WreathElement) -> WreathElement:
    return x.group.mul(x, y)


def w_inv(x: WreathElement) -> WreathElement:
    return x.group.inv(x)


def w_conj(x: WreathElement, y: WreathElement) -> WreathElement:
    """y^-1 * x * y"""
    return x.group.conj(x, y)


def w_comm(x: WreathElement, y: WreathElement) -> WreathElement:
    """x^-1 * y^-1 * x * y"""
    return x.group.comm(x, y)


def w_pow(x: WreathElement, n: int) -> WreathElement:
    return x.group.pow(x, n)


def w_eval(x: WreathElement, coord: Any) -> Any:
    return x.group.eval(x, coord)


def support_min_difference(x: WreathElement, y: WreathElement,
                           pad: int | None = None) -> Verdict:
    return x.group.min_difference(x, y, pad)


def w_compare(x: WreathElement, y: WreathElement, pad: int | None = None) -> Ordering:
    return x.group.compare(x, y, pad)


def tail_symbol(x: WreathElement) -> dict[Any, int]:
    """Exponents of a single-tail-atom product grouped by shift.

    Grouped exponents all being zero does NOT by itself certify
    triviality; the window/collision evaluation of the tail criterion is
    still mandatory.
    """
    if not x.atoms:
        return {}
    kinds = {a.fn.tail_kind for a in x.atoms}
    if len(kinds) != 1 or None in kinds:
        raise MixedAtomError("base atoms must all be shifted powers of one tail atom")
    nets: dict[Any, int] = {}
    for a in x.atoms:
        nets[a.shift] = nets.get(a.shift, 0) + a.exp
    return dict(sorted(nets.items(), key=lambda kv: x.group.coords.sort_key(kv[0])))


def stepfun_canonicalize(x: WreathElement | Iterable[Atom]) -> StepFunction:
    """Canonical step form of a formal product of step-shaped atoms."""
    atoms = x.atoms if isinstance(x, WreathElement) else tuple(x)
    sf = StepFunction.zero()
    for a in atoms:
        sf = sf.add(a.fn.step().shift(a.shift).scale(a.exp))
    return sf


def derived_commutator(group: Any, elems: list) -> Any:
    """delta_k word value: elems has length 2^k; delta_0 is the element
    itself and delta_k = [delta_{k-1}(left half), delta_{k-1}(right half)]."""
    n = len(elems)
    if n == 1:
        return elems[0]
    if n % 2:
        raise ValueError("derived words need 2^k arguments")
    return group.comm(
        derived_commutator(group, elems[: n // 2]),
        derived_commutator(group, elems[n // 2:]),
    )
