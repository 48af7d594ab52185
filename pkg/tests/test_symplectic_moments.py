# test_symplectic_moments.py - 辛系综精确谱矩
from fractions import Fraction

import pytest

from src.complex_moments import MomentQuery
from src.errors import DomainError
from src.exact_core import TAU, substitute
from src.symplectic_moments import (
    eginse_appendixB_moment,
    eginse_holomorphic_moment,
    eginse_recursive_moment,
    frak_m,
    ginse_holomorphic_moment,
    ginse_moment,
    gse_moment,
    moment_symplectic,
    moment_symplectic_holomorphic,
    skew_data,
    symplectic_sum,
)
from src.weights_polys import Gegenbauer, Hermite, Laguerre

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)
FAMILIES = [Hermite(THIRD), Laguerre(HALF, Fraction(1)), Gegenbauer(HALF, HALF)]
FAMILY_IDS = ["hermite", "laguerre", "gegenbauer"]


def test_ginibre_symplectic_closed_forms():
    zero = Hermite(Fraction(0))
    assert symplectic_sum(zero, 1, 1, 1) == 2
    assert ginse_moment(1, 1, 1) == 2
    for N in range(1, 6):
        assert ginse_holomorphic_moment(1, N) == -N
        assert symplectic_sum(zero, 2, 0, N) == -N


def test_ginibre_symplectic_general_agrees_with_closed_form():
    zero = Hermite(Fraction(0))
    for p1 in range(5):
        for p2 in range(5):
            if p1 + p2 == 0:
                continue
            for N in range(1, 4):
                assert symplectic_sum(zero, p1, p2, N) == ginse_moment(p1, p2, N), (p1, p2, N)


def test_gaussian_symplectic_moment():
    for N in range(1, 6):
        assert gse_moment(1, N) == 2 * N * N - N
        assert moment_symplectic_holomorphic(Hermite(TAU), 2, N) == 2 * N * N * TAU - N


def test_skew_data_for_hermite():
    skew = skew_data(Hermite(HALF))
    for l in range(5):
        assert skew.lam(l) == 2 * l + 2
    assert skew.mu(3, 1) == 4 * 6
    assert skew.mu(1, 2) == 0
    assert skew.skew_norm_ratio(2, 1) == Fraction(120, 6)


def test_rational_tau_one_needs_symbolic_mode():
    with pytest.raises(DomainError):
        symplectic_sum(Hermite(Fraction(1)), 1, 1, 2)
    value = symplectic_sum(Hermite(TAU), 1, 1, 2)
    assert substitute(value, 1) == gse_moment(1, 2)


@pytest.mark.parametrize("tau", [THIRD, HALF])
def test_elliptic_symplectic_formulas_agree(tau):
    family = Hermite(tau)
    for p1 in range(4):
        for p2 in range(4):
            for N in range(1, 4):
                expected = symplectic_sum(family, p1, p2, N)
                assert eginse_recursive_moment(p1, p2, N, tau) == expected, (p1, p2, N)
                assert eginse_appendixB_moment(p1, p2, N, tau) == expected, (p1, p2, N)


def test_elliptic_symplectic_holomorphic_formula():
    for p in range(1, 4):
        for N in range(1, 5):
            assert eginse_holomorphic_moment(p, N, THIRD) == symplectic_sum(Hermite(THIRD), 2 * p, 0, N)


def test_other_families():
    laguerre = Laguerre(HALF, Fraction(1))
    gegenbauer = Gegenbauer(HALF, HALF)
    for family in (laguerre, gegenbauer):
        assert symplectic_sum(family, 0, 0, 3) == 3
        assert symplectic_sum(family, 2, 1, 2) == symplectic_sum(family, 1, 2, 2)
    assert symplectic_sum(gegenbauer, 1, 0, 3) == 0
    assert symplectic_sum(laguerre, 1, 0, 2) > 0


def test_moment_symplectic_result():
    query = MomentQuery(Hermite(Fraction(0)), 2, 0, 4, component="symplectic")
    result = moment_symplectic(query)
    assert result.value == -4
    assert result.formula_used == "symplectic/holomorphic"
    with pytest.raises(DomainError):
        moment_symplectic(MomentQuery(Hermite(HALF), 1, 1, 2))


@pytest.mark.parametrize("family", FAMILIES, ids=FAMILY_IDS)
def test_symplectic_conjugation_symmetry_and_positivity(family):
    for N in range(1, 4):
        for p1 in range(4):
            for p2 in range(p1):
                assert symplectic_sum(family, p1, p2, N) == symplectic_sum(family, p2, p1, N), (p1, p2, N)
            assert symplectic_sum(family, p1, p1, N) > 0, (p1, N)


@pytest.mark.parametrize("family", FAMILIES, ids=FAMILY_IDS)
def test_general_sum_matches_holomorphic_formula(family):
    # symplectic_sum 对 p2 = 0 直接走全纯公式，这里单独走 𝔪 的一般求和
    for p in range(1, 5):
        for N in range(1, 5):
            general = sum((frak_m(family, p, 0, k) for k in range(N)), Fraction(0)) / 2
            assert general == moment_symplectic_holomorphic(family, p, N), (p, N)
            mirrored = sum((frak_m(family, 0, p, k) for k in range(N)), Fraction(0)) / 2
            assert mirrored == general, (p, N)
