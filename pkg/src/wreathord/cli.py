"""wreathord command line: evaluate, multiply, compare, embed, verify.

Exit statuses: 0 all good, 1 a verification check failed, 2 usage or
parse error, 3 an undecided (UnknownBeyond) verdict was encountered.
All numeric input and output is exact.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .groundwork import UndecidedVerdict, format_rational, parse_rational
from .nilpotent import UnsupportedWordSet, WordSyntaxError
from .reporting import emit_report, exit_status
from .wreath import WreathElement
from . import embed_rationals as er
from . import embed_verbal as ev
from .exprs import ExprSyntaxError, build_element, parse_expr

USAGE_ERROR = 2
UNDECIDED = 3


@dataclass(frozen=True)
class Command:
    name: str
    args: tuple[str, ...] = ()
    options: dict = field(default_factory=dict)


def _ctx(options) -> ev.VerbalContext:
    word = options.get("word") or "[x1,x2]"
    return ev.get_context(word)


def _coord_of(text: str, level: str, ctx: ev.VerbalContext):
    try:
        letter, _, num = text.partition(":")
        k = int(num)
    except ValueError:
        raise ValueError(f"coordinate must look like z:3 or c:-2, got {text!r}")
    expected = {"qc": "c", "w": "z", "qs": "a", "tc": "c", "dz": "z"}[level]
    if letter != expected:
        raise ValueError(f"level uses coordinates {expected}:<int>, got {text!r}")
    if level == "qs":
        return ctx.scoords.witness_power(k)
    return k


def _fiber_fmt(element: WreathElement, value) -> str:
    return element.group.fiber.fmt(value)


def _render_eval(element: WreathElement, level: str, ctx: ev.VerbalContext,
                 at: str | None, window: int) -> str:
    group = element.group
    lines = [f"level: {level}", f"element: {group.fmt(element)}"]
    if at is not None:
        coord = _coord_of(at, level, ctx)
        lines.append(f"value at {group.coords.fmt(coord)}: "
                     f"{_fiber_fmt(element, element.eval(coord))}")
        return "\n".join(lines) + "\n"
    if level == "qs":
        lines.append("values along the witness ray:")
        shown = 0
        for i in range(-window, window + 1):
            coord = ctx.scoords.witness_power(i)
            v = element.eval(coord)
            if not group.fiber.is_identity(v):
                lines.append(f"  a^{i}: {_fiber_fmt(element, v)}")
                shown += 1
        if not shown:
            lines.append(f"  identity at every a^i, |i| <= {window}")
        return "\n".join(lines) + "\n"
    shown = 0
    letter = group.coords.letter
    lines.append(f"values on [{-window}, {window}]:")
    for j in range(-window, window + 1):
        v = element.eval(j)
        if not group.fiber.is_identity(v):
            lines.append(f"  {letter}^{j}: {_fiber_fmt(element, v)}")
            shown += 1
    if not shown:
        lines.append(f"  identity at every coordinate in the window")
    return "\n".join(lines) + "\n"


def run_command(cmd: Command) -> tuple[int, str]:
    """Execute one parsed command; returns (exit status, output text)."""
    opts = cmd.options
    window = opts.get("window") or 8
    try:
        if cmd.name in ("eval", "mul"):
            ctx = _ctx(opts)
            trees = [parse_expr(a) for a in cmd.args]
            levels_elements = [build_element(t, ctx) for t in trees]
            level = levels_elements[0][0]
            if any(lv != level for lv, _ in levels_elements):
                return USAGE_ERROR, "error: expressions live at different levels\n"
            el = levels_elements[0][1]
            for _, other in levels_elements[1:]:
                el = el.group.mul(el, other)
            return 0, _render_eval(el, level, ctx, opts.get("at"), window)

        if cmd.name == "cmp":
            ctx = _ctx(opts)
            (l1, x), (l2, y) = (build_element(parse_expr(a), ctx) for a in cmd.args)
            if l1 != l2:
                return USAGE_ERROR, f"error: cannot compare {l1} with {l2}\n"
            try:
                o = x.group.compare(x, y, pad=opts.get("window"))
            except UndecidedVerdict as u:
                return UNDECIDED, f"UnknownBeyond({u.bound})\n"
            return 0, f"{o}\n"

        if cmd.name == "embed-q":
            q = parse_rational(cmd.args[0])
            word = er.big_phi(q)
            el = er.phi_element(q)
            n = q.denominator
            expr = (f"(pow (comm (conj alpha (pow z {-n})) alpha) {q.numerator})"
                    if q != 0 else "(* )")
            out = [
                f"rational: {format_rational(q)}",
                f"word: {word.fmt()}",
                f"expression: {expr}" if q != 0 else "expression: identity",
                "certificate: value "
                + (er.QC.fmt(el.eval(0)) if q != 0 else "identity")
                + " at z^0; identity at every other coordinate",
            ]
            return 0, "\n".join(out) + "\n"

        if cmd.name == "embed-verbal":
            ctx = _ctx(opts)
            q = parse_rational(cmd.args[0])
            word = ctx.embed_word(q)
            el = ctx.embed(q)
            out = [
                f"rational: {format_rational(q)}",
                f"word-family: {ctx.family_key}",
                f"word: {word.fmt()}",
                "certificate: value "
                + (ctx.TC.fmt(el.eval(0)) if q != 0 else "identity")
                + " at z^0; identity at every other coordinate",
            ]
            return 0, "\n".join(out) + "\n"

        if cmd.name == "normal-form":
            ctx = _ctx(opts)
            level, el = build_element(parse_expr(cmd.args[0]), ctx)
            if level not in ("w", "dz"):
                return USAGE_ERROR, "error: normal-form applies to alpha/z or omega/z words\n"
            gen = "alpha" if level == "w" else "omega"
            nf = er.g_normal_form(el)
            parts = [f"z^{nf.k}"]
            parts += [f"({gen}^[z^{s}])^{e}" for s, e in nf.factors]
            grouped = ", ".join(f"{s}: {e}" for s, e in nf.grouped().items())
            return 0, (f"normal form: {' * '.join(parts)}\n"
                       f"grouped exponents: {{{grouped}}}\n")

        if cmd.name == "table":
            n = int(cmd.args[0])
            if n < 1:
                return USAGE_ERROR, "error: n must be >= 1\n"
            if len(cmd.args) > 1:
                js = [int(cmd.args[1])]
            else:
                js = list(range(-2 * n - 4, 2 * n + 5))
            lines = [f"[alpha^(z^-{n}), alpha] at z^j:"]
            for j in js:
                lines.append(f"  j={j}: {er.QC.fmt(er.commutator_table(n, j))}")
            return 0, "\n".join(lines) + "\n"

        if cmd.name == "verify":
            suite = cmd.args[0]
            seed = opts.get("seed") or 0
            budget = opts.get("budget") or 200
            if suite == "section2":
                report = er.verify_section2(seed=seed, budget=budget)
            elif suite == "verbal":
                word = opts.get("word") or "[x1,x2]"
                report = ev.verify_theorem2(word, seed=seed, budget=budget)
            elif suite == "orders":
                report = er.verify_order_laws(seed=seed, budget=budget,
                                              window=opts.get("window") or 64)
            else:
                return USAGE_ERROR, f"error: unknown suite {suite!r}\n"
            fmt = "json" if opts.get("json") else "text"
            return exit_status(report), emit_report(report, fmt)

        return USAGE_ERROR, f"error: unknown command {cmd.name!r}\n"

    except (ExprSyntaxError, WordSyntaxError, UnsupportedWordSet, ValueError) as e:
        return USAGE_ERROR, f"error: {e}\n"
    except UndecidedVerdict as u:
        return UNDECIDED, f"UnknownBeyond({u.bound})\n"


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wreathord",
        description="Exact order-preserving embeddings of the rationals "
                    "into two-generator wreath-product groups.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *, word=True, window=True):
        if word:
            p.add_argument("--word", help="word family, e.g. '[x1,x2]' or 'x1^2'")
        if window:
            p.add_argument("--window", type=int, help="scan window half-width")

    p = sub.add_parser("eval", help="evaluate an element expression")
    p.add_argument("expr")
    p.add_argument("--at", help="coordinate, e.g. z:3")
    common(p)

    p = sub.add_parser("mul", help="multiply element expressions")
    p.add_argument("exprs", nargs="+")
    p.add_argument("--at", help="coordinate, e.g. z:3")
    common(p)

    p = sub.add_parser("cmp", help="compare two elements in the full order")
    p.add_argument("left")
    p.add_argument("right")
    common(p)

    p = sub.add_parser("embed-q", help="embed a rational via the alpha/z word")
    p.add_argument("rational")

    p = sub.add_parser("embed-verbal", help="embed a rational via the omega/z word")
    p.add_argument("rational")
    common(p, window=False)

    p = sub.add_parser("normal-form", help="z^k times shifted generator powers")
    p.add_argument("expr")
    common(p, window=False)

    p = sub.add_parser("table", help="commutator values [alpha^(z^-n), alpha](z^j)")
    p.add_argument("n")
    p.add_argument("j", nargs="?")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=["section2", "verbal", "orders"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--json", action="store_true")
    common(p)

    return ap


def parse_argv(argv: list[str]) -> Command:
    ns = _build_argparser().parse_args(argv)
    options = {
        k: v
        for k, v in vars(ns).items()
        if k not in ("command", "expr", "exprs", "left", "right", "rational", "n", "j", "suite")
        and v is not None and v is not False
    }
    if ns.command in ("eval", "normal-form"):
        args = (ns.expr,)
    elif ns.command == "mul":
        args = tuple(ns.exprs)
    elif ns.command == "cmp":
        args = (ns.left, ns.right)
    elif ns.command in ("embed-q", "embed-verbal"):
        args = (ns.rational,)
    elif ns.command == "table":
        args = (ns.n,) if ns.j is None else (ns.n, ns.j)
    elif ns.command == "verify":
        args = (ns.suite,)
    else:
        args = ()
    return Command(ns.command, args, options)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_argv(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_ERROR
    status, output = run_command(cmd)
    sys.stdout.write(output)
    return status


if __name__ == "__main__":
    sys.exit(main())
