"""Expression grammar: parsing, errors, and printer round-trips."""

import random

import pytest

from graded_zcr.exprtext import DictScope, ParseError, parse_expression
from graded_zcr.superscalar import (
    GR_I,
    GaussianRational,
    GradedPoly,
    odd_independent,
    parameter,
    poly_to_text,
    rational,
)


@pytest.fixture()
def scope():
    eps = parameter("eps", invertible=True)
    a = parameter("a")
    b = parameter("b")
    th1 = odd_independent("th1")
    th2 = odd_independent("th2")
    return DictScope().add(eps, a, b, th1, th2)


def P(scope, name):
    return scope.resolve_name(name)


def test_numbers_and_rationals(scope):
    assert parse_expression("42", scope) == GradedPoly.scalar(42)
    assert parse_expression("3/4", scope) == GradedPoly.scalar(
        GaussianRational(rational(3, 4))
    )
    assert parse_expression("-3/4 + 1", scope) == GradedPoly.scalar(
        GaussianRational(rational(1, 4))
    )
    assert parse_expression("i", scope) == GradedPoly.scalar(GR_I)
    assert parse_expression("2*i*i", scope) == GradedPoly.scalar(-2)


def test_precedence_and_signs(scope):
    a, b = P(scope, "a"), P(scope, "b")
    assert parse_expression("a + 2*b", scope) == a + 2 * b
    assert parse_expression("-a^2", scope) == -(a * a)
    assert parse_expression("(-a)^2", scope) == a * a
    assert parse_expression("a - -b", scope) == a + b
    assert parse_expression("2^3", scope) == GradedPoly.scalar(8)
    assert parse_expression("a*(b + 1)^2", scope) == a * (b + 1) * (b + 1)


def test_laurent_powers(scope):
    eps = P(scope, "eps")
    assert parse_expression("eps^-2", scope) == eps ** -2
    assert parse_expression("1/eps", scope) == eps ** -1
    with pytest.raises(ParseError):
        parse_expression("a^-1", scope)
    with pytest.raises(ParseError):
        parse_expression("1/(a+1)", scope)


def test_odd_variables(scope):
    th1, th2 = P(scope, "th1"), P(scope, "th2")
    assert parse_expression("th1*th2 + th2*th1", scope).is_zero()
    assert parse_expression("th1^2", scope).is_zero()
    with pytest.raises(ParseError):
        parse_expression("th1^-1", scope)


def test_error_positions(scope):
    with pytest.raises(ParseError) as err:
        parse_expression("a + unknown", scope)
    assert "unknown" in str(err.value)
    assert "column 5" in str(err.value)
    with pytest.raises(ParseError):
        parse_expression("a + ", scope)
    with pytest.raises(ParseError):
        parse_expression("(a", scope)
    with pytest.raises(ParseError):
        parse_expression("a ? b", scope)


def test_roundtrip_random(scope):
    rng = random.Random(1234)
    names = ["eps", "a", "b", "th1", "th2"]
    for _ in range(200):
        p = GradedPoly.zero()
        for _ in range(rng.randint(0, 5)):
            c = GaussianRational(
                rational(rng.randint(-6, 6), rng.randint(1, 4)),
                rational(rng.randint(-3, 3), rng.randint(1, 2)),
            )
            term = GradedPoly.scalar(c)
            for _ in range(rng.randint(0, 4)):
                name = rng.choice(names)
                exp = rng.choice([1, 1, 2, -1]) if name == "eps" else 1
                term = term * P(scope, name) ** exp
            p = p + term
        text = poly_to_text(p)
        assert parse_expression(text, scope) == p, text
