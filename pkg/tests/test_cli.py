import json
from random import Random

import pytest

from wreathord.cli import Command, main, parse_argv, run_command
from wreathord.exprs import (
    Comm,
    Conj,
    ExprSyntaxError,
    IndexedAtom,
    Inv,
    Mul,
    NameAtom,
    PiAtom,
    Pow,
    ShiftAtom,
    build_element,
    infer_level,
    parse_expr,
    print_expr,
)
from wreathord.reporting import CheckRecord, Report, exit_status


def test_parse_examples():
    t = parse_expr("(comm tau(2) c)")
    assert t == Comm(IndexedAtom("tau", 2), NameAtom("c"))

    t2 = parse_expr("(pow (comm (conj alpha (pow z -3)) alpha) 2)")
    assert t2 == Pow(
        Comm(Conj(NameAtom("alpha"), Pow(NameAtom("z"), -3)), NameAtom("alpha")), 2
    )
    assert print_expr(t2) == "(pow (comm (conj alpha (pow z -3)) alpha) 2)"

    assert parse_expr("shift(tau(2), 3)") == ShiftAtom(IndexedAtom("tau", 2), 3)
    assert parse_expr("pi((* chi(1) psi(2)))") == PiAtom(
        Mul((IndexedAtom("chi", 1), IndexedAtom("psi", 2)))
    )


def test_parse_errors_carry_positions():
    with pytest.raises(ExprSyntaxError) as e:
        parse_expr("tau(0)")
    assert "must be >= 1" in str(e.value)
    with pytest.raises(ExprSyntaxError):
        parse_expr("(comm tau(2)")
    with pytest.raises(ExprSyntaxError):
        parse_expr("(frob alpha)")
    with pytest.raises(ExprSyntaxError):
        parse_expr("alpha alpha")
    with pytest.raises(ExprSyntaxError):
        parse_expr("(* )")


def _random_atom(rng: Random):
    kind = rng.randrange(6)
    if kind == 0:
        return NameAtom(rng.choice(["c", "z", "alpha", "omega"]))
    if kind == 1:
        return IndexedAtom(rng.choice(["tau", "phi", "chi", "psi"]), rng.randint(1, 9))
    if kind == 2:
        return ShiftAtom(_random_atom(rng), rng.randint(-9, 9))
    if kind == 3:
        return PiAtom(_random_expr(rng, 1))
    return NameAtom(rng.choice(["c", "z"]))


def _random_expr(rng: Random, depth: int):
    if depth <= 0 or rng.random() < 0.35:
        return _random_atom(rng)
    kind = rng.randrange(5)
    if kind == 0:
        return Mul(tuple(_random_expr(rng, depth - 1) for _ in range(rng.randint(1, 3))))
    if kind == 1:
        return Inv(_random_expr(rng, depth - 1))
    if kind == 2:
        return Pow(_random_expr(rng, depth - 1), rng.randint(-6, 6))
    if kind == 3:
        return Conj(_random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    return Comm(_random_expr(rng, depth - 1), _random_expr(rng, depth - 1))


def test_parser_round_trip_random():
    rng = Random(51)
    for _ in range(500):
        tree = _random_expr(rng, 3)
        assert parse_expr(print_expr(tree)) == tree


def test_infer_level():
    assert infer_level(parse_expr("(comm tau(2) c)")) == "qc"
    assert infer_level(parse_expr("(comm (conj alpha (pow z -2)) alpha)")) == "w"
    assert infer_level(parse_expr("(* chi(1) psi(2))")) == "qs"
    assert infer_level(parse_expr("(comm pi(psi(2)) c)")) == "tc"
    assert infer_level(parse_expr("(conj omega (pow z -4))")) == "dz"
    with pytest.raises(ExprSyntaxError):
        infer_level(parse_expr("(* alpha c)"))
    with pytest.raises(ExprSyntaxError):
        infer_level(parse_expr("(* omega alpha)"))


def test_build_element_phi_word():
    level, el = build_element(parse_expr("(comm (conj alpha (pow z -3)) alpha)"))
    assert level == "w"
    assert el.top == 0
    from wreathord.embed_rationals import QC, phi
    assert QC.equal(el.eval(0), phi(3))


def test_build_element_embedded_rational_word():
    # (pow (comm (conj alpha (pow z -3)) alpha) 2) is the word carrying 2/3
    from fractions import Fraction
    from wreathord.embed_rationals import W, phi_element
    _, el = build_element(parse_expr("(pow (comm (conj alpha (pow z -3)) alpha) 2)"))
    assert W.equal(el, phi_element(Fraction(2, 3)))


def test_run_cmp_phi_words():
    status, out = run_command(Command(
        "cmp",
        ("(comm (conj alpha (pow z -3)) alpha)", "(comm (conj alpha (pow z -2)) alpha)"),
    ))
    assert status == 0
    assert out == "Less\n"


def test_run_eval_alpha_at():
    status, out = run_command(Command("eval", ("alpha",), {"at": "z:3"}))
    assert status == 0
    assert "{i<0: 0, i>=0: -1/3}" in out


def test_run_eval_window_lists_support():
    status, out = run_command(Command("eval", ("(comm tau(2) c)",), {"window": 4}))
    assert status == 0
    assert "c^0: 1/2" in out


def test_run_mul():
    status, out = run_command(Command("mul", ("tau(2)", "tau(3)"), {"at": "c:0"}))
    assert status == 0
    assert "-5/6" in out


def test_run_table_single():
    status, out = run_command(Command("table", ("3", "0")))
    assert status == 0
    assert "j=0" in out and "1/3" in out


def test_run_embed_q():
    status, out = run_command(Command("embed-q", ("5/6",)))
    assert status == 0
    assert "(pow (comm (conj alpha (pow z -6)) alpha) 5)" in out
    assert "5/6" in out


def test_run_embed_verbal_families():
    status, out = run_command(Command("embed-verbal", ("1/3",), {"word": "[x1,x2]"}))
    assert status == 0
    assert "z^32" in out
    status, out = run_command(Command("embed-verbal", ("1/2",), {"word": "x1^2"}))
    assert status == 0
    assert "z^8" in out


def test_run_normal_form():
    status, out = run_command(Command("normal-form", ("(* alpha (pow z 2))",)))
    assert status == 0
    assert "z^2 * (alpha^[z^2])^1" in out


def test_usage_errors_exit_2():
    status, out = run_command(Command("eval", ("tau(0)",)))
    assert status == 2 and "error" in out
    status, _ = run_command(Command("cmp", ("tau(2)", "alpha")))
    assert status == 2
    status, _ = run_command(Command("verify", ("bogus",)))
    assert status == 2
    status, _ = run_command(Command("embed-verbal", ("1/2",), {"word": "x1*x2"}))
    assert status == 2


def test_verify_determinism_and_exit_codes():
    cmd = Command("verify", ("section2",), {"seed": 7, "budget": 12})
    s1, out1 = run_command(cmd)
    s2, out2 = run_command(cmd)
    assert (s1, out1) == (s2, out2)
    assert s1 == 0
    assert out1.endswith("ok: 16 checks\n")

    jcmd = Command("verify", ("orders",), {"seed": 7, "budget": 10, "json": True})
    s3, out3 = run_command(jcmd)
    s4, out4 = run_command(jcmd)
    assert out3 == out4 and s3 == 0
    doc = json.loads(out3)
    assert doc["schema_version"] == 1
    assert doc["summary"]["failed"] == 0


def test_exit_status_mapping():
    passing = Report("s", 0, 1, (CheckRecord("a", "pass"),))
    failing = Report("s", 0, 1, (CheckRecord("a", "pass"), CheckRecord("b", "fail")))
    undecided = Report("s", 0, 1, (CheckRecord("a", "unknown"),))
    assert exit_status(passing) == 0
    assert exit_status(failing) == 1
    assert exit_status(undecided) == 3


def test_undecided_cmp_reports_bound():
    # compare two library-level elements whose equality is honestly
    # undecided, through the same rendering path the CLI uses
    from fractions import Fraction
    from wreathord.embed_rationals import W, alpha, qc_point, w_point
    from wreathord.groundwork import UndecidedVerdict
    far = w_point(qc_point(Fraction(1, 5)), at=25_001)
    x, y = W.mul(alpha(), far), W.mul(far, alpha())
    with pytest.raises(UndecidedVerdict) as e:
        W.compare(x, y)
    assert e.value.bound >= 25_001


def test_main_entrypoint(capsys):
    status = main(["cmp", "tau(2)", "tau(2)"])
    assert status == 0
    assert capsys.readouterr().out == "Equal\n"
    assert main(["table", "2"]) == 0
    capsys.readouterr()


def test_parse_argv():
    cmd = parse_argv(["verify", "verbal", "--word", "x1^2", "--seed", "3", "--json"])
    assert cmd == Command("verify", ("verbal",),
                          {"word": "x1^2", "seed": 3, "budget": 200, "json": True})
