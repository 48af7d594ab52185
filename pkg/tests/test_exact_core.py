# test_exact_core.py - 精确算术与组合基元
from fractions import Fraction

import pytest
import sympy
from sympy.polys.polyerrors import ExactQuotientFailed

from src.errors import DomainError, InexactDivisionError
from src.exact_core import (
    T_SYMBOL,
    TAU,
    TauPoly,
    binomial,
    catalan,
    double_factorial,
    factorial,
    format_scalar,
    lagrange_interpolate,
    narayana,
    parse_rational,
    parse_scalar,
    pochhammer,
    reciprocal_factorial,
    scalar_div,
    scalar_to_float,
    stirling_first,
    substitute,
    taupoly_div_exact,
)


def test_parse_and_format_rational():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-4") == Fraction(-4)
    assert str(parse_rational(" 7 / 14 ")) == "1/2"
    with pytest.raises(DomainError):
        parse_rational("1/0")
    with pytest.raises(DomainError):
        parse_rational("abc")


def test_factorials_and_binomials():
    assert factorial(5) == 120
    assert binomial(3, -1) == 0
    assert binomial(3, 4) == 0
    assert binomial(-2, 1) == 0
    assert double_factorial(6) == 48
    assert double_factorial(0) == double_factorial(-1) == 1
    assert pochhammer(Fraction(1, 2), 3) == Fraction(15, 8)
    assert pochhammer(Fraction(7, 3), 0) == 1
    assert reciprocal_factorial(-1) == 0
    with pytest.raises(DomainError):
        factorial(-1)


def test_binomial_matches_factorial_ratio():
    for n in range(12):
        for k in range(n + 1):
            assert binomial(n, k) == factorial(n) // (factorial(k) * factorial(n - k))


def test_stirling_first_kind():
    assert stirling_first(3, 3) == 1
    assert stirling_first(3, 2) == -3
    assert stirling_first(3, 1) == 2
    assert stirling_first(4, 2) == 11
    assert stirling_first(2, 5) == 0


def test_stirling_rows_expand_falling_factorial():
    for n in range(1, 8):
        for x in range(n + 1):
            falling = 1
            for i in range(n):
                falling *= x - i
            assert sum(stirling_first(n, k) * x ** k for k in range(n + 1)) == falling


def test_catalan_and_narayana():
    assert catalan(4) == 14
    assert narayana(2, 1) == 2
    gamma = Fraction(3, 2)
    assert narayana(2, gamma) == gamma + gamma ** 2
    for p in range(1, 13):
        assert narayana(p, 1) == catalan(p)


def test_taupoly_division():
    one_minus_tau4 = TauPoly([1, 0, 0, 0, -1])
    one_minus_tau2 = TauPoly([1, 0, -1])
    assert taupoly_div_exact(one_minus_tau4, one_minus_tau2) == TauPoly([1, 0, 1])
    assert taupoly_div_exact(TauPoly(), one_minus_tau2).is_zero()
    with pytest.raises(InexactDivisionError):
        taupoly_div_exact(TauPoly([1, 1]), one_minus_tau2)


def test_taupoly_ring_laws():
    f = TauPoly([1, Fraction(-2, 3), 5])
    g = TauPoly([0, 4, 0, Fraction(1, 2)])
    h = TauPoly([Fraction(7, 5), -1])
    assert (f + g) * h == f * h + g * h
    assert f * g == g * f
    for t in (Fraction(0), Fraction(1, 3), Fraction(-2)):
        assert substitute(f * g, t) == substitute(f, t) * substitute(g, t)


def test_taupoly_printing_round_trip():
    value = (1 - TAU) ** 3
    assert str(TauPoly([1, 0, 2])) == "1 + 2*t^2"
    assert parse_scalar(format_scalar(value)) == value
    assert parse_scalar(format_scalar(Fraction(-27, 4))) == Fraction(-27, 4)
    assert str(TauPoly()) == "0"


def test_scalar_helpers():
    assert scalar_div(Fraction(3), Fraction(4)) == Fraction(3, 4)
    assert scalar_div(TauPoly([0, 2]), Fraction(2)) == TAU
    with pytest.raises(DomainError):
        scalar_div(Fraction(1), Fraction(0))
    assert scalar_to_float(Fraction(27, 4)) == 6.75
    assert scalar_to_float(TAU) is None
    assert scalar_to_float(TauPoly([3])) == 3.0


def test_lagrange_interpolation_recovers_polynomial():
    xs = [1, 2, 3, 4]
    ys = [Fraction(x ** 3 - 2 * x + 1) for x in xs]
    assert lagrange_interpolate(xs, ys) == [1, -2, 0, 1]
    with pytest.raises(DomainError):
        lagrange_interpolate([1, 1], [Fraction(0), Fraction(1)])


def test_taupoly_agrees_with_sympy_expressions():
    t = T_SYMBOL
    f = TauPoly([1, Fraction(-2, 3), 5])
    g = TauPoly([0, 4, 0, Fraction(1, 2)])
    assert f.as_expr() == 1 - sympy.Rational(2, 3) * t + 5 * t ** 2
    assert TauPoly.from_expr(sympy.expand((f.as_expr() - 2) * g.as_expr())) == (f - 2) * g
    assert TauPoly.from_expr(f.as_expr() ** 3) == f ** 3
    assert TauPoly().as_expr() == 0
    assert TauPoly.from_expr(sympy.Integer(7)) == 7
    with pytest.raises(DomainError):
        TauPoly.from_expr(1 / t)


def test_taupoly_inexact_division_chains_sympy_error():
    with pytest.raises(InexactDivisionError) as excinfo:
        TauPoly([1, 0, 1]) / TauPoly([1, 1])
    assert isinstance(excinfo.value.__cause__, ExactQuotientFailed)
    assert excinfo.value.details["denominator"] == "1 + 1*t"
    with pytest.raises(DomainError):
        taupoly_div_exact(TAU, TauPoly())


def test_taupoly_scalar_coercion():
    f = TauPoly([Fraction(3, 2), 0, -1])
    assert f / 3 == TauPoly([Fraction(1, 2), 0, Fraction(-1, 3)])
    assert 2 - f == TauPoly([Fraction(1, 2), 0, 1])
    assert f.coeffs == (Fraction(3, 2), Fraction(0), Fraction(-1))
    assert f.degree == 2 and TauPoly().degree == -1
    assert f(Fraction(1, 2)) == Fraction(5, 4)
    assert TauPoly([5]) == Fraction(5) and hash(TauPoly([5])) == hash(Fraction(5))


def test_interpolation_with_symbolic_values():
    xs = [1, 2, 3]
    ys = [TauPoly([x, 0, x * x]) for x in xs]
    coeffs = lagrange_interpolate(xs, ys)
    assert coeffs == [TauPoly(), TauPoly([1]), TauPoly([0, 0, 1])]
    assert all(isinstance(c, TauPoly) for c in coeffs)
