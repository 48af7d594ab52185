# asymptotics.py - 大 N 极限系数与校验
"""
椭圆 Ginibre：M/N^{P+1} = C1 + C2/N + O(N^-2)，P = (p1+p2)/2；
辛系综先除以 2^P，次主项换成 C2'。
非厄米 Wishart：M/N^{p1+p2+1} → L1，要求 ν/N → α。
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from src.complex_moments import complex_sum, gue_moment
from src.errors import DomainError, InterpolationError
from src.exact_core import (
    Scalar,
    TauPoly,
    binomial,
    catalan,
    double_factorial,
    factorial,
    format_scalar,
    lagrange_interpolate,
    scalar_div,
    scalar_pow,
    scalar_to_float,
    stirling_first,
)
from src.logger_config import get_logger, log_function_call
from src.symplectic_moments import symplectic_sum
from src.weights_polys import Hermite, Laguerre, WeightFamily


def _parity_set(m: int) -> range:
    """𝓘_m = {-m, -m+2, ..., m}"""
    return range(-m, m + 1, 2)


def c1(p1: int, p2: int, tau: Scalar) -> Scalar:
    """主项系数 C1(p1, p2)"""
    if (p1 + p2) % 2:
        return Fraction(0)
    half = (p1 + p2) // 2
    total: Scalar = Fraction(0)
    for r in _parity_set(min(p1, p2)):
        weight = binomial(p1, (p1 + r) // 2) * binomial(p2, (p2 + r) // 2)
        if weight:
            total = total + Fraction(weight) * scalar_pow(tau, half + r)
    return total / (half + 1)


def c2(p1: int, p2: int, tau: Scalar) -> Scalar:
    """复系综次主项系数 C2(p1, p2)"""
    if (p1 + p2) % 2:
        return Fraction(0)
    half = (p1 + p2) // 2
    total: Scalar = Fraction(0)
    for r in _parity_set(min(p1, p2)):
        weight = binomial(p1, (p1 + r) // 2) * binomial(p2, (p2 + r) // 2)
        if weight and r:
            total = total - Fraction(weight * r, 2) * scalar_pow(tau, half + r)
    return total


def c2_prime(p1: int, p2: int, tau: Scalar) -> Scalar:
    """辛系综次主项系数 C2'(p1, p2)"""
    if (p1 + p2) % 2 or p1 + p2 == 0:
        return Fraction(0)
    total_p = p1 + p2
    half = total_p // 2
    value = c2(p1, p2, tau) / 2
    if p1 and p2:
        value = value + (1 - tau * tau) / 2 * Fraction(p1 * p2, total_p) * c1(p1 - 1, p2 - 1, tau)

    width = max(p1, p2)
    correction: Scalar = Fraction(0)
    for r in _parity_set(width):
        for s in range(1, width + 1):
            weight = (Fraction(p1, total_p) * binomial(p1, (p1 + r) // 2 - s) * binomial(p2, (p2 + r) // 2)
                      + Fraction(p2, total_p) * binomial(p1, (p1 + r) // 2) * binomial(p2, (p2 + r) // 2 - s))
            if not weight:
                continue
            exponent = half + r - s
            if exponent < 0:
                raise DomainError("C2' 中出现 τ 的负幂次", {"p1": p1, "p2": p2, "r": r, "s": s})
            correction = correction + weight * scalar_pow(tau, exponent)
    return value - correction / 2


def l1(p1: int, p2: int, tau: Scalar, alpha) -> Scalar:
    """非厄米 Marchenko-Pastur 极限的矩 L1(p1, p2)"""
    alpha = Fraction(alpha)
    if alpha < 0:
        raise DomainError("α 必须 ≥ 0", {"alpha": str(alpha)})
    m = min(p1, p2)
    total: Scalar = Fraction(0)
    for r in range(-m, m + 1):
        coefficient = Fraction(0)
        for a in range(p1 + 1):
            left = binomial(p1, a) * binomial(p1 + a, a + r)
            if not left:
                continue
            for b in range(p2 + 1):
                right = binomial(p2, b) * binomial(p2 + b, b - r)
                if right:
                    coefficient += alpha ** (p1 + p2 - a - b) * Fraction(left * right, a + b + 1)
        if coefficient:
            total = total + coefficient * scalar_pow(tau, p1 + p2 + 2 * r)
    return total


def mp_law_moment_exact(p1: int, p2: int, tau: Scalar, alpha) -> Scalar:
    """非厄米 Marchenko-Pastur 律的精确矩，即 L1(p1, p2)"""
    return l1(p1, p2, tau, alpha)


def genus_coeff(g: int, p: int) -> Fraction:
    """GUE 亏格展开系数 𝓔_g(p)"""
    if p < 0 or g < 0 or g > (p + 1) // 2:
        raise DomainError("要求 0 ≤ g ≤ ⌊(p+1)/2⌋", {"g": g, "p": p})
    total = Fraction(0)
    # m > p 时 binomial(p, m) = 0
    for m in range(min(2 * g, p) + 1):
        total += (Fraction(stirling_first(p + 1 - m, p + 1 - 2 * g), factorial(p + 1 - m))
                  * binomial(p, m) * Fraction(2) ** (p - m))
    return total * double_factorial(2 * p - 1)


def _product_coeff(p1: int, p2: int, tau: Scalar, power: int) -> Scalar:
    """(u+τ)^{p1} (τu+1)^{p2+1} 中 u^power 的系数"""
    total: Scalar = Fraction(0)
    for a in range(p1 + 1):
        weight = binomial(p1, a) * binomial(p2 + 1, power - a)
        if weight:
            total = total + Fraction(weight) * scalar_pow(tau, p1 - a + power - a)
    return total


def elliptic_law_moment(p1: int, p2: int, tau: Scalar) -> Scalar:
    """(1/(1-τ²))∫_S z^{p1} z̄^{p2} dA，通过 Joukowsky 变换的系数提取"""
    if (p1 + p2) % 2:
        return Fraction(0)
    # u = w²：取 (u+τ)^{p1} (τu+1)^{p2+1} (u-τ) 中 u^{(p1+p2)/2+1} 的系数
    power = (p1 + p2) // 2 + 1
    coefficient = _product_coeff(p1, p2, tau, power - 1) - tau * _product_coeff(p1, p2, tau, power)
    denominator = (1 - tau * tau) * (p2 + 1)
    if not isinstance(denominator, TauPoly) and denominator == 0:
        raise DomainError("τ = 1 时椭圆律退化，请使用符号模式", {"tau": str(tau)})
    return scalar_div(coefficient, denominator)


def poly_in_N_extract(family: WeightFamily, p1: int, p2: int, max_degree: Optional[int] = None,
                      component: str = "complex") -> List[Scalar]:
    """精确插值 N ↦ M_{p1,p2,N}，返回升幂系数；留出点不一致即报错"""
    if not isinstance(family, Hermite):
        raise DomainError("N 多项式提取只适用于 Hermite 权重", family.describe())
    degree = (p1 + p2) // 2 + 1 if max_degree is None else max_degree
    engine = complex_sum if component == "complex" else symplectic_sum
    xs = list(range(1, degree + 2))
    ys = [engine(family, p1, p2, n) for n in xs]
    coeffs = lagrange_interpolate(xs, ys)
    held_out = degree + 2
    expected = engine(family, p1, p2, held_out)
    predicted = sum((c * held_out ** i for i, c in enumerate(coeffs)), Fraction(0))
    if predicted != expected:
        raise InterpolationError(
            f"N 多项式次数上界 {degree} 不成立",
            {"p1": p1, "p2": p2, "component": component, "N": held_out,
             "expected": format_scalar(expected), "predicted": format_scalar(predicted)},
        )
    # 常数项为 0（M_{p1,p2,0} = 0）
    coeffs = [Fraction(0) if c == 0 else c for c in coeffs]
    return coeffs + [Fraction(0)] * (degree + 1 - len(coeffs))


@dataclass
class AsymptoticCoeffs:
    """某个 (p1, p2) 的全部极限系数；α 是 ν/N 的极限，与缩放因子无关"""
    p1: int
    p2: int
    tau: Scalar
    c1: Scalar
    c2: Scalar
    c2_prime: Scalar
    alpha: Optional[Fraction] = None
    l1: Optional[Scalar] = None
    genus: Dict[int, Fraction] = field(default_factory=dict)

    @classmethod
    def compute(cls, p1: int, p2: int, tau: Scalar, alpha=None) -> "AsymptoticCoeffs":
        coeffs = cls(p1, p2, tau, c1(p1, p2, tau), c2(p1, p2, tau), c2_prime(p1, p2, tau))
        if alpha is not None:
            coeffs.alpha = Fraction(alpha)
            coeffs.l1 = l1(p1, p2, tau, coeffs.alpha)
        if p2 == 0 and p1 % 2 == 0:
            p = p1 // 2
            coeffs.genus = {g: genus_coeff(g, p) for g in range((p + 1) // 2 + 1)}
        return coeffs

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "p1": self.p1, "p2": self.p2, "tau": format_scalar(self.tau),
            "c1": format_scalar(self.c1), "c2": format_scalar(self.c2),
            "c2_prime": format_scalar(self.c2_prime),
        }
        if self.l1 is not None:
            record["alpha"] = str(self.alpha)
            record["l1"] = format_scalar(self.l1)
        if self.genus:
            record["genus"] = {str(g): str(v) for g, v in self.genus.items()}
        return record


@dataclass
class AsymptoticReport:
    family: Dict[str, str]
    p1: int
    p2: int
    component: str
    passed: bool = True
    rows: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def fail(self, formula_a: str, formula_b: str, value_a, value_b, **details):
        self.passed = False
        record = {"formula_a": formula_a, "formula_b": formula_b,
                  "value_a": str(value_a), "value_b": str(value_b)}
        record.update(details)
        self.failures.append(record)


def _hermite_check(family: Hermite, p1: int, p2: int, N_list: Sequence[int],
                   component: str, report: AsymptoticReport):
    tau = family.tau
    half = (p1 + p2) // 2
    coeffs = poly_in_N_extract(family, p1, p2, component=component)
    scale = Fraction(2 ** half) if component == "symplectic" else Fraction(1)
    leading = coeffs[half + 1] / scale
    subleading = coeffs[half] / scale
    target_c1 = c1(p1, p2, tau)
    target_c2 = c2_prime(p1, p2, tau) if component == "symplectic" else c2(p1, p2, tau)
    second_name = "c2_prime" if component == "symplectic" else "c2"
    if leading != target_c1:
        report.fail("N 多项式主项", "c1", leading, target_c1)
    if subleading != target_c2:
        report.fail("N 多项式次主项", second_name, subleading, target_c2)

    engine = complex_sum if component == "complex" else symplectic_sum
    for n in N_list:
        exact = engine(family, p1, p2, n) / (scale * Fraction(n) ** (half + 1))
        prediction = target_c1 + target_c2 / n
        residual = exact - prediction
        report.rows.append({
            "N": n,
            "exact": format_scalar(exact),
            "float": scalar_to_float(exact),
            "prediction": scalar_to_float(prediction),
            "residual": scalar_to_float(residual),
        })


def wishart_nu(alpha: Fraction, N: int, component: str) -> Fraction:
    """ν = round(αN)；辛系综权重参数取 2·round(αN)"""
    nu = Fraction(round(alpha * N))
    return 2 * nu if component == "symplectic" else nu


def _laguerre_check(family: Laguerre, p1: int, p2: int, N_list: Sequence[int],
                    component: str, alpha: Fraction, report: AsymptoticReport):
    tau = family.tau
    if isinstance(tau, TauPoly):
        raise DomainError("Wishart 渐近校验需要有理 τ", family.describe())
    order = p1 + p2
    scale = Fraction(2 ** order) if component == "symplectic" else Fraction(1)
    target = l1(p1, p2, tau, alpha)
    engine = complex_sum if component == "complex" else symplectic_sum

    errors = []
    for n in N_list:
        ensemble = Laguerre(tau, wishart_nu(alpha, n, component))
        value = engine(ensemble, p1, p2, n) / (scale * Fraction(n) ** (order + 1))
        error = abs(float(value - target))
        errors.append((n, error))
        report.rows.append({"N": n, "nu": str(ensemble.nu), "exact_scaled": float(value),
                            "l1": float(target), "residual": error})

    if not errors:
        return
    first_n, first_error = errors[0]
    fitted_k = first_error * first_n
    for n, error in errors[1:]:
        bound = 3 * fitted_k / n + 1e-12
        if error > bound:
            report.fail("M/N^{p1+p2+1}", "l1", error, bound, N=n, fitted_K=fitted_k)
    report.rows.append({"fitted_K": fitted_k})


@log_function_call("渐近校验")
def asymptotic_check(family: WeightFamily, p1: int, p2: int, N_list: Sequence[int],
                     component: str = "complex", alpha=None) -> AsymptoticReport:
    """把精确有限 N 矩与极限系数对比，返回结构化报告"""
    report = AsymptoticReport(family.describe(), p1, p2, component)
    logger = get_logger()
    if isinstance(family, Hermite):
        if (p1 + p2) % 2:
            return report
        _hermite_check(family, p1, p2, N_list, component, report)
    elif isinstance(family, Laguerre):
        if alpha is None:
            raise DomainError("Laguerre 渐近校验需要 α", family.describe())
        _laguerre_check(family, p1, p2, N_list, component, Fraction(alpha), report)
    else:
        raise DomainError("Gegenbauer 权重没有已知的极限测度", family.describe())

    if report.passed:
        logger.debug("渐近校验通过", {"p1": p1, "p2": p2, "component": component})
    else:
        logger.warning("渐近校验失败", {"p1": p1, "p2": p2, "failures": report.failures})
    return report


def hermitian_limit_checks(p_max: int) -> List[Dict[str, Any]]:
    """C1(p,p)|τ=1 = Catalan(p) 与 𝓔_0(p) = Catalan(p)"""
    rows = []
    for p in range(p_max + 1):
        rows.append({
            "p": p,
            "catalan": catalan(p),
            "c1_tau1": format_scalar(c1(p, p, Fraction(1))),
            "genus0": str(genus_coeff(0, p)),
        })
    return rows


def genus_identity_holds(p: int, N: int) -> bool:
    expansion = sum((genus_coeff(g, p) * Fraction(N) ** (p + 1 - 2 * g)
                     for g in range((p + 1) // 2 + 1)), Fraction(0))
    return expansion == gue_moment(p, N)
