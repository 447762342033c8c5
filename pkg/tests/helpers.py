"""Shared test oracles: brute-force evaluation scans independent of the
library's equality tiers, plus small random element builders."""

from __future__ import annotations

from fractions import Fraction
from random import Random

from wreathord.groundwork import Ordering
from wreathord.wreath import WreathElement


def brute_least_difference(x: WreathElement, y: WreathElement,
                           window: int = 64) -> int | None:
    """First integer coordinate in [-window, window] where the base
    functions differ, by direct evaluation."""
    group = x.group
    for j in range(-window, window + 1):
        if not group.fiber.equal(group.eval(x, j), group.eval(y, j)):
            return j
    return None


def brute_compare(x: WreathElement, y: WreathElement, window: int = 64) -> Ordering:
    group = x.group
    o = group.coords.compare(x.top, y.top)
    if o is not Ordering.EQUAL:
        return o
    j = brute_least_difference(x, y, window)
    if j is None:
        return Ordering.EQUAL
    return group.fiber.compare(group.eval(x, j), group.eval(y, j))


def confirm_verdict(x: WreathElement, y: WreathElement, verdict,
                    window: int = 64) -> bool:
    """Equal/Distinct verdicts must agree with the brute-force window
    scan (and with direct evaluation at the claimed witness)."""
    group = x.group
    if verdict.is_equal:
        return brute_least_difference(x, y, window) is None
    if verdict.is_distinct:
        if verdict.witness == "top":
            return group.coords.key(x.top) != group.coords.key(y.top)
        return not group.fiber.equal(
            group.eval(x, verdict.witness), group.eval(y, verdict.witness)
        )
    return True


def random_rational(rng: Random, max_num: int = 100, max_den: int = 100) -> Fraction:
    return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
