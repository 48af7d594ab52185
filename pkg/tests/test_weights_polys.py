# test_weights_polys.py - 权重族、递推系数与 A 系数
from fractions import Fraction

import pytest

from src.errors import DomainError
from src.exact_core import TAU, substitute
from src.weights_polys import (
    A_METHODS,
    Gegenbauer,
    Hermite,
    Laguerre,
    a_coeff,
    inversion_coeff,
    linearisation_coeff,
    make_family,
    norm_ratio,
    recurrence_coeffs,
)

HALF = Fraction(1, 2)


def test_recurrence_examples():
    tau = Fraction(1, 3)
    rec = recurrence_coeffs(Hermite(tau), 3)
    assert (rec.b, rec.c) == (0, 3 * tau)

    rec = recurrence_coeffs(Laguerre(tau, HALF), 0)
    assert (rec.b, rec.c) == (Fraction(3, 2) * tau, 0)

    rec = recurrence_coeffs(Gegenbauer(tau, Fraction(0)), 1)
    assert (rec.b, rec.c) == (0, tau / 4)

    for family in (Hermite(tau), Laguerre(tau, 2), Gegenbauer(tau, HALF)):
        assert recurrence_coeffs(family, 0).c == 0


def test_symbolic_recurrence():
    rec = recurrence_coeffs(Laguerre(TAU, Fraction(1)), 2)
    assert rec.b == 6 * TAU
    assert rec.c == 6 * TAU * TAU


def test_norm_ratios():
    assert norm_ratio(Hermite(HALF), 3, 1) == 6
    assert norm_ratio(Laguerre(HALF, Fraction(1)), 1, 0) == 2
    assert norm_ratio(Laguerre(HALF, Fraction(1)), 0, 1) == HALF
    # τ = 0, a = 0：半径 1/√2 圆盘上的均匀测度，h_1/h_0 = R²/2
    assert norm_ratio(Gegenbauer(Fraction(0), Fraction(0)), 1, 0) == Fraction(1, 4)
    with pytest.raises(DomainError):
        norm_ratio(Hermite(HALF), -1, 0)


def test_inversion_coefficients():
    hermite = Hermite(HALF)
    assert inversion_coeff(hermite, 2, 2) == Fraction(1, 4)
    assert inversion_coeff(hermite, 2, 0) == HALF
    assert inversion_coeff(hermite, 2, 1) == 0

    laguerre = Laguerre(HALF, Fraction(0))
    assert inversion_coeff(laguerre, 1, 0) == 1
    assert inversion_coeff(laguerre, 1, 1) == -1


def test_linearisation_coefficients():
    hermite = Hermite(HALF)
    assert linearisation_coeff(hermite, 1, 1, 2) == 1
    assert linearisation_coeff(hermite, 1, 1, 0) == 2
    assert linearisation_coeff(hermite, 1, 1, 1) == 0

    # C^{(1)}_1(x)² = 4x² = C^{(1)}_2 + 1
    gegenbauer = Gegenbauer(HALF, Fraction(0))
    assert linearisation_coeff(gegenbauer, 1, 1, 2) == 1
    assert linearisation_coeff(gegenbauer, 1, 1, 0) == 1


def test_a_coefficient_basics():
    tau = Fraction(2, 5)
    hermite = Hermite(tau)
    for k in range(6):
        assert a_coeff(hermite, 0, k, k) == 1
        assert a_coeff(hermite, 2, k, k) == tau * (2 * k + 1)
        assert a_coeff(hermite, 1, k + 1, k) == 1
    assert a_coeff(hermite, 3, 7, 2) == 0
    assert a_coeff(hermite, 3, 4, 2) == 0
    assert a_coeff(hermite, 3, 3, 2) == 3 * tau * 3


@pytest.mark.parametrize("family", [
    Hermite(Fraction(0)),
    Hermite(Fraction(1, 3)),
    Hermite(Fraction(1)),
    Laguerre(Fraction(0), Fraction(0)),
    Laguerre(HALF, HALF),
    Laguerre(HALF, Fraction(2)),
    Gegenbauer(Fraction(0), Fraction(0)),
    Gegenbauer(HALF, HALF),
])
def test_a_coefficient_methods_agree(family):
    for p in range(5):
        for k in range(9):
            for j in range(max(0, k - p), k + p + 1):
                values = {method: a_coeff(family, p, j, k, method) for method in A_METHODS}
                assert len(set(values.values())) == 1, (p, j, k, values)


def test_symbolic_a_coefficients_specialise():
    tau = Fraction(1, 3)
    for p in range(5):
        for k in range(4):
            for j in range(max(0, k - p), k + p + 1):
                symbolic = a_coeff(Hermite(TAU), p, j, k)
                assert substitute(symbolic, tau) == a_coeff(Hermite(tau), p, j, k)


def test_family_validation():
    assert make_family("Hermite", HALF) == Hermite(HALF)
    assert make_family("laguerre", HALF, nu="3/2").nu == Fraction(3, 2)
    assert make_family("gegenbauer", HALF, a=1).describe() == {"family": "gegenbauer", "tau": "1/2", "a": "1"}
    with pytest.raises(DomainError):
        make_family("jacobi", HALF)
    with pytest.raises(DomainError):
        Hermite(Fraction(3, 2))
    with pytest.raises(DomainError):
        Laguerre(HALF, Fraction(-1))
    with pytest.raises(DomainError):
        Gegenbauer(HALF, Fraction(-2))
    with pytest.raises(DomainError):
        Gegenbauer(TAU, Fraction(0))
    with pytest.raises(DomainError):
        a_coeff(Hermite(HALF), 2, 2, 2, method="bogus")
