# test_formula_registry.py - 公式注册与 auto 交叉校验
from fractions import Fraction

import pytest

from src.complex_moments import MomentQuery
from src.errors import DomainError, FormulaMismatchError
from src.exact_core import TAU, TauPoly
from src.formula_registry import FormulaRegistry, compute_moment, formula_registry
from src.weights_polys import Hermite, Laguerre

HALF = Fraction(1, 2)


def test_registered_formulas():
    names = formula_registry.get_available_formulas()
    assert len(names) == 11
    assert {"complex/main", "complex/cd-laguerre", "symplectic/appendixB"} <= set(names)
    info = formula_registry.get_formula_info("complex/closed-form")
    assert info["tau_zero_only"] and info["families"] == ("hermite",)
    rows = formula_registry.list_formulas()
    assert {row["name"] for row in rows} == set(names)


def test_method_resolution_and_applicability():
    registry = FormulaRegistry()
    query = MomentQuery(Laguerre(HALF, 1), 2, 1, 3, method="cd")
    assert registry.resolve_method(query) == "complex/cd-laguerre"
    assert registry.resolve_method(MomentQuery(Hermite(HALF), 1, 1, 2, "symplectic")) == "symplectic/main"

    hermite = MomentQuery(Hermite(HALF), 2, 2, 3)
    assert registry.applicability("complex/closed-form", hermite) is not None
    assert registry.applicability("complex/holomorphic", hermite) is not None
    assert registry.applicability("symplectic/main", hermite) is not None
    assert registry.applicability("complex/cd-laguerre", MomentQuery(Laguerre(HALF, 1), 2, 2, 3)) is not None
    assert registry.applicability("complex/cd", hermite) is None
    assert registry.crosscheck_candidates(hermite) == ["complex/cd", "complex/appendixB"]


def test_auto_mode_crosschecks():
    result = compute_moment(MomentQuery(Hermite(HALF), 1, 1, 3))
    assert result.value == Fraction(27, 4)
    assert result.formula_used == "complex/main"
    assert result.crosschecked_with == "complex/cd"

    ginse = compute_moment(MomentQuery(Hermite(Fraction(0)), 2, 2, 2, "symplectic"))
    assert ginse.crosschecked_with == "symplectic/closed-form"

    symbolic = compute_moment(MomentQuery(Hermite(TAU), 1, 1, 3))
    assert symbolic.value == TauPoly([6, 0, 3])
    assert symbolic.crosschecked_with == "complex/cd"


def test_auto_mode_skips_inapplicable_candidates():
    # 有理 τ = 1 时微分算子公式无法除以 (1-τ²)
    result = compute_moment(MomentQuery(Hermite(Fraction(1)), 2, 0, 3))
    assert result.value == 9
    assert result.crosschecked_with == "complex/appendixB"


def test_crosscheck_order_limit():
    result = compute_moment(MomentQuery(Hermite(HALF), 4, 4, 2), crosscheck_max_order=6)
    assert result.crosschecked_with is None


def test_explicit_methods():
    value = formula_registry.evaluate("complex/appendixB", MomentQuery(Hermite(HALF), 1, 1, 3))
    assert value == Fraction(27, 4)
    result = compute_moment(MomentQuery(Hermite(Fraction(0)), 2, 2, 5, method="closed-form"))
    assert result.value == 70
    assert result.formula_used == "complex/closed-form"
    with pytest.raises(DomainError):
        compute_moment(MomentQuery(Laguerre(HALF, 1), 1, 1, 3, method="appendixB"))
    with pytest.raises(DomainError):
        compute_moment(MomentQuery(Hermite(HALF), 1, 1, 3, method="closed-form"))


def test_mismatch_is_reported():
    registry = FormulaRegistry()
    info = registry.formulas["complex/cd"]
    info["formula_func"] = lambda p1, p2, N, tau: Fraction(-1)
    info["loaded"] = True
    with pytest.raises(FormulaMismatchError) as excinfo:
        registry.compute_moment(MomentQuery(Hermite(HALF), 1, 1, 3))
    assert excinfo.value.formula_b == "complex/cd"
    assert excinfo.value.details["value_a"] == "27/4"


def test_broken_registrations():
    registry = FormulaRegistry()
    assert registry.load_formula("complex/nope") is False
    registry.register_formula("complex/broken", "坏公式", "src.complex_moments", "no_such_function",
                              component="complex", call_style="query")
    assert registry.load_formula("complex/broken") is False
    assert "函数不存在" in registry.get_formula_info("complex/broken")["error"]
    with pytest.raises(DomainError):
        registry.evaluate("complex/broken", MomentQuery(Hermite(HALF), 1, 1, 3))
    with pytest.raises(DomainError):
        registry.register_formula("complex/odd", "坏约定", "src.complex_moments", "complex_sum",
                                  component="complex", call_style="positional")
