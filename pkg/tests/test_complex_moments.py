# test_complex_moments.py - 复系综精确谱矩
from fractions import Fraction

import pytest

from src.complex_moments import (
    MomentQuery,
    complex_sum,
    eginue_appendixB_moment,
    eginue_cd_moment,
    ginue_moment,
    gue_moment,
    hermitian_unitary_moment,
    moment_complex,
    moment_complex_holomorphic,
    wishart_cd_moment,
)
from src.errors import DomainError
from src.exact_core import TAU, TauPoly, substitute
from src.weights_polys import Gegenbauer, Hermite, Laguerre

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


def test_elliptic_ginibre_first_mixed_moment():
    assert complex_sum(Hermite(HALF), 1, 1, 3) == Fraction(27, 4)
    # Σ_{k<N} (k + 1 + kτ²)
    assert complex_sum(Hermite(TAU), 1, 1, 3) == TauPoly([6, 0, 3])


def test_ginibre_closed_form():
    assert ginue_moment(2, 2, 5) == 70
    assert ginue_moment(2, 1, 5) == 0
    zero = Hermite(Fraction(0))
    for p1 in range(5):
        for p2 in range(5):
            for N in range(1, 6):
                assert complex_sum(zero, p1, p2, N) == ginue_moment(p1, p2, N)


def test_trivial_and_vanishing_moments():
    for family in (Hermite(THIRD), Laguerre(HALF, 1), Gegenbauer(HALF, HALF)):
        assert complex_sum(family, 0, 0, 4) == 4
    assert complex_sum(Hermite(THIRD), 2, 1, 4) == 0
    assert complex_sum(Gegenbauer(HALF, 0), 3, 0, 4) == 0
    assert complex_sum(Laguerre(HALF, 1), 1, 0, 1) != 0


def test_holomorphic_path_matches_general_sum():
    tau = THIRD
    family = Hermite(tau)
    for N in range(1, 6):
        assert moment_complex_holomorphic(family, 2, N) == tau * N * N
    laguerre = Laguerre(HALF, 1)
    for p in range(5):
        assert complex_sum(laguerre, p, 0, 3) == complex_sum(laguerre, 0, p, 3)


def test_hermitian_limits():
    for p in range(1, 5):
        for N in range(1, 6):
            assert hermitian_unitary_moment(Hermite(TAU), 2 * p, N) == gue_moment(p, N)
            assert hermitian_unitary_moment(Hermite(THIRD), 2 * p, N) == gue_moment(p, N)
    for N in range(1, 6):
        for nu in (Fraction(0), HALF, Fraction(2)):
            lue = Laguerre(HALF, nu)
            assert hermitian_unitary_moment(lue, 1, N) == N * (N + nu)
            assert hermitian_unitary_moment(lue, 2, N) == N * (N + nu) * (2 * N + nu)
    with pytest.raises(DomainError):
        hermitian_unitary_moment(Hermite(Fraction(0)), 2, 3)


def test_gue_small_cases():
    assert gue_moment(1, 4) == 16
    # 2N³ + N
    assert gue_moment(2, 3) == 57


@pytest.mark.parametrize("tau", [Fraction(0), THIRD, HALF])
def test_elliptic_ginibre_formulas_agree(tau):
    family = Hermite(tau)
    for p1 in range(4):
        for p2 in range(4):
            for N in range(1, 5):
                expected = complex_sum(family, p1, p2, N)
                assert eginue_cd_moment(p1, p2, N, tau) == expected, (p1, p2, N)
                assert eginue_appendixB_moment(p1, p2, N, tau) == expected, (p1, p2, N)


def test_differential_operator_formula_in_symbolic_mode():
    for p1, p2 in ((1, 1), (2, 2), (3, 1)):
        value = eginue_cd_moment(p1, p2, 3, TAU)
        assert value == complex_sum(Hermite(TAU), p1, p2, 3)
        assert substitute(value, THIRD) == complex_sum(Hermite(THIRD), p1, p2, 3)
    with pytest.raises(DomainError):
        eginue_cd_moment(1, 1, 3, Fraction(1))


def test_wishart_differential_operator_formula():
    family = Laguerre(HALF, Fraction(1))
    for p1, p2 in ((1, 0), (2, 1), (1, 3), (3, 0)):
        for N in range(1, 4):
            assert wishart_cd_moment(p1, p2, N, HALF, 1) == complex_sum(family, p1, p2, N)
    with pytest.raises(DomainError):
        wishart_cd_moment(2, 2, 3, HALF, 1)


def test_query_validation_and_result():
    with pytest.raises(DomainError):
        MomentQuery(Hermite(HALF), 1, 1, 0)
    with pytest.raises(DomainError):
        MomentQuery(Hermite(HALF), -1, 1, 2)
    with pytest.raises(DomainError):
        MomentQuery(Hermite(HALF), 1, 1, 2, component="real")
    with pytest.raises(DomainError):
        moment_complex(MomentQuery(Hermite(HALF), 1, 1, 2, component="symplectic"))

    result = moment_complex(MomentQuery(Hermite(HALF), 1, 1, 3))
    assert result.exact == "27/4"
    assert result.float_value == 6.75
    record = result.to_dict()
    assert record["method"] == "complex/main"
    assert record["query"]["family"] == "hermite"
    assert moment_complex(MomentQuery(Hermite(HALF), 2, 0, 3)).formula_used == "complex/holomorphic"


@pytest.mark.parametrize("family", [Hermite(THIRD), Laguerre(HALF, 1), Gegenbauer(HALF, HALF)],
                         ids=["hermite", "laguerre", "gegenbauer"])
def test_conjugation_symmetry_and_positivity(family):
    for N in range(1, 5):
        for p1 in range(4):
            for p2 in range(p1):
                assert complex_sum(family, p1, p2, N) == complex_sum(family, p2, p1, N), (p1, p2, N)
            assert complex_sum(family, p1, p1, N) > 0, (p1, N)


def test_conjugation_symmetry_in_symbolic_mode():
    family = Hermite(TAU)
    assert complex_sum(family, 3, 1, 3) == complex_sum(family, 1, 3, 3)
    assert complex_sum(family, 4, 2, 2) == complex_sum(family, 2, 4, 2)
