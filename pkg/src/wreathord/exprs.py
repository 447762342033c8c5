"""Element expression parser and printer.

Grammar (whitespace-insensitive)::

    expr := atom | "(" "*" expr+ ")" | "(inv" expr ")" | "(pow" expr int ")"
          | "(conj" expr expr ")" | "(comm" expr expr ")"
    atom := "c" | "z" | "tau(" int ")" | "phi(" int ")" | "alpha" | "omega"
          | "chi(" int ")" | "psi(" int ")" | "pi(" expr ")"
          | "shift(" atom "," int ")"

The level an expression lives at is inferred from its atoms: c/tau/phi
build elements of Q Wr C, z/alpha of (Q Wr C) Wr Z, chi/psi of Q Wr S,
pi (with c) of T Wr C, and omega (with z) of D Wr Z.  Incompatible
mixtures are rejected.  shift(a, k) shifts the atom by the k-th power of
the level's top generator (the witness a for Q Wr S).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .nilpotent import CommutatorWord
from . import embed_rationals as er
from . import embed_verbal as ev
from .wreath import WreathElement


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int, expected: str | None = None):
        detail = f"{message} (at position {position}"
        if expected:
            detail += f"; expected {expected}"
        detail += ")"
        super().__init__(detail)
        self.position = position
        self.expected = expected


@dataclass(frozen=True)
class NameAtom:
    name: str  # c | z | alpha | omega


@dataclass(frozen=True)
class IndexedAtom:
    name: str  # tau | phi | chi | psi
    n: int


@dataclass(frozen=True)
class PiAtom:
    arg: "Expr"


@dataclass(frozen=True)
class ShiftAtom:
    atom: "Expr"
    k: int


@dataclass(frozen=True)
class Mul:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Inv:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    arg: "Expr"
    n: int


@dataclass(frozen=True)
class Conj:
    x: "Expr"
    y: "Expr"


@dataclass(frozen=True)
class Comm:
    x: "Expr"
    y: "Expr"


Expr = Union[NameAtom, IndexedAtom, PiAtom, ShiftAtom, Mul, Inv, Pow, Conj, Comm]

_BARE_ATOMS = ("alpha", "omega", "c", "z")
_INDEXED_ATOMS = ("tau", "phi", "chi", "psi")
_OPS = ("*", "inv", "pow", "conj", "comm")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, expected: str | None = None):
        raise ExprSyntaxError(message, self.pos, expected)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"unexpected {self.peek()!r}", expected=repr(ch))
        self.pos += 1

    def read_name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in "*_"):
            self.pos += 1
        if self.pos == start:
            self.error("expected a name", expected="atom or operator")
        return self.text[start:self.pos]

    def read_int(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            self.error("expected an integer", expected="integer")
        return int(self.text[start:self.pos])

    def parse_expr(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            op = self.read_name()
            if op == "*":
                args = [self.parse_expr()]
                while self.peek() != ")":
                    args.append(self.parse_expr())
                self.expect(")")
                return Mul(tuple(args))
            if op == "inv":
                arg = self.parse_expr()
                self.expect(")")
                return Inv(arg)
            if op == "pow":
                arg = self.parse_expr()
                n = self.read_int()
                self.expect(")")
                return Pow(arg, n)
            if op == "conj":
                x = self.parse_expr()
                y = self.parse_expr()
                self.expect(")")
                return Conj(x, y)
            if op == "comm":
                x = self.parse_expr()
                y = self.parse_expr()
                self.expect(")")
                return Comm(x, y)
            self.error(f"unknown operator {op!r}", expected="one of " + ", ".join(_OPS))
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        name = self.read_name()
        if name in ("c", "z", "alpha", "omega"):
            return NameAtom(name)
        if name in _INDEXED_ATOMS:
            self.expect("(")
            at = self.pos
            n = self.read_int()
            if n < 1:
                self.pos = at
                self.error(f"{name} index must be >= 1")
            self.expect(")")
            return IndexedAtom(name, n)
        if name == "pi":
            self.expect("(")
            arg = self.parse_expr()
            self.expect(")")
            return PiAtom(arg)
        if name == "shift":
            self.expect("(")
            atom = self.parse_atom()
            self.expect(",")
            k = self.read_int()
            self.expect(")")
            return ShiftAtom(atom, k)
        self.error(f"unknown atom {name!r}",
                   expected="one of " + ", ".join(_BARE_ATOMS + _INDEXED_ATOMS + ("pi", "shift")))


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    expr = p.parse_expr()
    p.skip_ws()
    if p.pos != len(text):
        p.error("trailing input after the expression")
    return expr


def print_expr(expr: Expr) -> str:
    if isinstance(expr, NameAtom):
        return expr.name
    if isinstance(expr, IndexedAtom):
        return f"{expr.name}({expr.n})"
    if isinstance(expr, PiAtom):
        return f"pi({print_expr(expr.arg)})"
    if isinstance(expr, ShiftAtom):
        return f"shift({print_expr(expr.atom)}, {expr.k})"
    if isinstance(expr, Mul):
        return "(* " + " ".join(print_expr(a) for a in expr.args) + ")"
    if isinstance(expr, Inv):
        return f"(inv {print_expr(expr.arg)})"
    if isinstance(expr, Pow):
        return f"(pow {print_expr(expr.arg)} {expr.n})"
    if isinstance(expr, Conj):
        return f"(conj {print_expr(expr.x)} {print_expr(expr.y)})"
    if isinstance(expr, Comm):
        return f"(comm {print_expr(expr.x)} {print_expr(expr.y)})"
    raise TypeError(f"not an expression node: {expr!r}")


# -- level inference and element binding ---------------------------------

_QC_ATOMS = {"c", "tau", "phi"}
_W_ATOMS = {"z", "alpha"}
_QS_ATOMS = {"chi", "psi"}


def _atom_names(expr: Expr, out: set[str]) -> None:
    if isinstance(expr, NameAtom):
        out.add(expr.name)
    elif isinstance(expr, IndexedAtom):
        out.add(expr.name)
    elif isinstance(expr, PiAtom):
        out.add("pi")
        # the argument lives one level down; validated during binding
    elif isinstance(expr, ShiftAtom):
        _atom_names(expr.atom, out)
    elif isinstance(expr, Mul):
        for a in expr.args:
            _atom_names(a, out)
    elif isinstance(expr, (Inv, Pow)):
        _atom_names(expr.arg, out)
    elif isinstance(expr, (Conj, Comm)):
        _atom_names(expr.x, out)
        _atom_names(expr.y, out)


def infer_level(expr: Expr) -> str:
    """One of qc, w, qs, tc, dz; c and z re-resolve upward when the
    Section-4 atoms pi/omega are present."""
    names: set[str] = set()
    _atom_names(expr, names)
    if "omega" in names:
        bad = names - {"omega", "z"}
        if bad:
            raise ExprSyntaxError(f"atoms {sorted(bad)} cannot appear beside omega", 0)
        return "dz"
    if "pi" in names:
        bad = names - {"pi", "c"}
        if bad:
            raise ExprSyntaxError(f"atoms {sorted(bad)} cannot appear beside pi", 0)
        return "tc"
    if names & _QS_ATOMS:
        bad = names - _QS_ATOMS
        if bad:
            raise ExprSyntaxError(f"atoms {sorted(bad)} cannot appear beside chi/psi", 0)
        return "qs"
    if names & _W_ATOMS:
        bad = names - _W_ATOMS
        if bad:
            raise ExprSyntaxError(f"atoms {sorted(bad)} cannot appear beside alpha/z", 0)
        return "w"
    return "qc"


def _group_for(level: str, ctx: "ev.VerbalContext"):
    return {
        "qc": er.QC,
        "w": er.W,
        "qs": ctx.QS,
        "tc": ctx.TC,
        "dz": ctx.DZ,
    }[level]


def _top_power(level: str, ctx: "ev.VerbalContext", k: int):
    group = _group_for(level, ctx)
    if level == "qs":
        return group.top_element(ctx.scoords.witness_power(k))
    return group.top_element(k)


def _build(expr: Expr, level: str, ctx: "ev.VerbalContext") -> WreathElement:
    group = _group_for(level, ctx)
    if isinstance(expr, NameAtom):
        if expr.name == "c":
            if level == "qc":
                return er.c_elem()
            if level == "tc":
                return ctx.c_elem()
        if expr.name == "z":
            if level == "w":
                return er.z_elem()
            if level == "dz":
                return ctx.z_elem()
        if expr.name == "alpha" and level == "w":
            return er.alpha()
        if expr.name == "omega" and level == "dz":
            return ctx.omega()
        raise ExprSyntaxError(f"atom {expr.name!r} is not available at level {level}", 0)
    if isinstance(expr, IndexedAtom):
        if expr.name == "tau" and level == "qc":
            return er.tau(expr.n)
        if expr.name == "phi" and level == "qc":
            return er.phi(expr.n)
        if expr.name == "chi" and level == "qs":
            return ctx.chi(expr.n)
        if expr.name == "psi" and level == "qs":
            return ctx.psi(expr.n)
        raise ExprSyntaxError(f"atom {expr.name!r} is not available at level {level}", 0)
    if isinstance(expr, PiAtom):
        if level != "tc":
            raise ExprSyntaxError("pi(...) only builds T Wr C elements", 0)
        inner_level = infer_level(expr.arg)
        if inner_level not in ("qs",):
            raise ExprSyntaxError("the argument of pi must be a Q Wr S expression", 0)
        return ctx.pi(_build(expr.arg, "qs", ctx))
    if isinstance(expr, ShiftAtom):
        inner = _build(expr.atom, level, ctx)
        return group.conj(inner, _top_power(level, ctx, expr.k))
    if isinstance(expr, Mul):
        out = group.identity()
        for a in expr.args:
            out = group.mul(out, _build(a, level, ctx))
        return out
    if isinstance(expr, Inv):
        return group.inv(_build(expr.arg, level, ctx))
    if isinstance(expr, Pow):
        return group.pow(_build(expr.arg, level, ctx), expr.n)
    if isinstance(expr, Conj):
        return group.conj(_build(expr.x, level, ctx), _build(expr.y, level, ctx))
    if isinstance(expr, Comm):
        return group.comm(_build(expr.x, level, ctx), _build(expr.y, level, ctx))
    raise TypeError(f"not an expression node: {expr!r}")


def build_element(expr: Expr, ctx: "ev.VerbalContext | None" = None,
                  ) -> tuple[str, WreathElement]:
    """Infer the level, bind atoms, and evaluate the expression tree."""
    if ctx is None:
        ctx = ev.get_context(CommutatorWord())
    level = infer_level(expr)
    return level, _build(expr, level, ctx)
