# complex_moments.py - 复（行列式）系综的精确谱矩
"""
M^ℂ_{p1,p2,N} = E Σ_j z_j^{p1} conj(z_j)^{p2}

- moment_complex: 一般公式 Σ_{k<N} Σ_j (h_j/h_k)(A^{p1})^j_k (A^{p2})^j_k
- moment_complex_holomorphic: p2 = 0 的快速路径 Σ_{k<N} (A^p)^k_k
- hermitian_unitary_moment: 除以 α^p 得到 GUE / LUE / JUE 矩
- ginue_moment / gue_moment: τ = 0 与 τ = 1 的闭式
- eginue_cd_moment: 椭圆 Ginibre 的微分算子公式
- eginue_appendixB_moment: 椭圆 Ginibre 的显式四重和
- wishart_cd_moment: 非厄米 Wishart 的微分算子公式（p1 ≠ p2）
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

from src.errors import DomainError
from src.exact_core import (
    Scalar,
    TauPoly,
    binomial,
    factorial,
    format_scalar,
    reciprocal_factorial,
    scalar_div,
    scalar_pow,
    scalar_to_float,
)
from src.weights_polys import Hermite, Laguerre, WeightFamily, a_coeff, norm_ratio

COMPONENTS = ("complex", "symplectic")


@dataclass(frozen=True)
class MomentQuery:
    """一次谱矩查询；method 由 formula_registry 解释"""
    family: WeightFamily
    p1: int
    p2: int
    N: int
    component: str = "complex"
    method: str = "auto"

    def __post_init__(self):
        if self.p1 < 0 or self.p2 < 0:
            raise DomainError("p1, p2 必须 ≥ 0", {"p1": self.p1, "p2": self.p2})
        if self.N < 1:
            raise DomainError("N 必须 ≥ 1", {"N": self.N})
        if self.component not in COMPONENTS:
            raise DomainError(f"未知的系综类型: {self.component}", {"component": self.component})

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = dict(self.family.describe())
        info.update({"p1": self.p1, "p2": self.p2, "N": self.N,
                     "ensemble": self.component, "method": self.method})
        return info


@dataclass
class MomentResult:
    value: Scalar
    formula_used: str
    query: MomentQuery
    crosschecked_with: Optional[str] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def family(self) -> Dict[str, str]:
        return self.query.family.describe()

    @property
    def exact(self) -> str:
        return format_scalar(self.value)

    @property
    def float_value(self) -> Optional[float]:
        return scalar_to_float(self.value)

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "query": self.query.describe(),
            "exact": self.exact,
            "float": self.float_value,
            "method": self.formula_used,
        }
        if self.crosschecked_with:
            record["crosschecked_with"] = self.crosschecked_with
        record.update(self.extras)
        return record


def _parity_vanishes(family: WeightFamily, p1: int, p2: int) -> bool:
    return family.parity_restricted and (p1 + p2) % 2 == 1


def _one_minus_tau_sq(tau: Scalar) -> Scalar:
    value = 1 - tau * tau
    if not isinstance(value, TauPoly) and value == 0:
        raise DomainError("τ = 1 时需要除以 (1-τ²)，请改用符号模式 --tau symbolic", {"tau": str(tau)})
    return value


def complex_sum(family: WeightFamily, p1: int, p2: int, N: int) -> Scalar:
    """Σ_{k<N} Σ_j (h_j/h_k)(A^{p1})^j_k (A^{p2})^j_k"""
    if p1 == 0 and p2 == 0:
        return Fraction(N)
    if _parity_vanishes(family, p1, p2):
        return Fraction(0)
    if p2 == 0 or p1 == 0:
        return moment_complex_holomorphic(family, max(p1, p2), N)
    m = min(p1, p2)
    total: Scalar = Fraction(0)
    for k in range(N):
        for j in range(max(0, k - m), k + m + 1):
            a1 = a_coeff(family, p1, j, k)
            if not a1:
                continue
            a2 = a_coeff(family, p2, j, k)
            if not a2:
                continue
            total = total + norm_ratio(family, j, k) * a1 * a2
    return total


def moment_complex(q: MomentQuery) -> MomentResult:
    if q.component != "complex":
        raise DomainError("moment_complex 只处理 complex 系综", q.describe())
    formula = "holomorphic" if 0 in (q.p1, q.p2) else "main"
    return MomentResult(complex_sum(q.family, q.p1, q.p2, q.N), f"complex/{formula}", q)


def moment_complex_holomorphic(family: WeightFamily, p: int, N: int) -> Scalar:
    """M^ℂ_{p,0,N} = Σ_{k<N} (A^p)^k_k"""
    if p < 0 or N < 1:
        raise DomainError("要求 p ≥ 0, N ≥ 1", {"p": p, "N": N})
    if p == 0:
        return Fraction(N)
    if family.parity_restricted and p % 2:
        return Fraction(0)
    total: Scalar = Fraction(0)
    for k in range(N):
        total = total + a_coeff(family, p, k, k)
    return total


def hermitian_unitary_moment(family: WeightFamily, p: int, N: int) -> Scalar:
    """M^ℝ_{p,N} = M^ℂ_{p,0,N} / α^p（GUE / LUE / JUE 矩）"""
    if family.parity_restricted and p % 2:
        return Fraction(0)
    if not family.symbolic and family.tau == 0 and p > 0:
        raise DomainError("τ = 0 时 α^p = 0，无法还原厄米矩；请使用符号模式或闭式公式",
                          family.describe())
    value = moment_complex_holomorphic(family, p, N)
    scaled = scalar_div(value, family.alpha_pow(p))
    if isinstance(scaled, TauPoly):
        if not scaled.is_constant():
            raise DomainError("α^p 缩放后仍依赖 τ", {"value": str(scaled)})
        return scaled.coeff(0)
    return scaled


def ginue_moment(p1: int, p2: int, N: int) -> Fraction:
    """GinUE: (1/(p+1))·(N+p)!/(N-1)!，p1 ≠ p2 时为 0"""
    if p1 != p2:
        return Fraction(0)
    return Fraction(factorial(N + p1), (p1 + 1) * factorial(N - 1))


def gue_moment(p: int, N: int) -> Fraction:
    """GUE 的 2p 阶矩（权重 e^{-x²/2}）"""
    total = 0
    for l in range(p + 1):
        total += factorial(2 * p) // (2 ** l * factorial(l) * factorial(p - l)) * binomial(N, p - l + 1)
    return Fraction(total)


def eginue_cd_moment(p1: int, p2: int, N: int, tau: Scalar) -> Scalar:
    """椭圆 Ginibre 的微分算子公式，在 TauPoly 模式下做精确的 (1-τ²) 除法"""
    family = Hermite(tau)
    if p1 == 0 and p2 == 0:
        return Fraction(N)
    if (p1 + p2) % 2:
        return Fraction(0)
    tau = family.tau
    q1 = p1 + 1
    width = max(q1, p2)
    total: Scalar = Fraction(0)
    for n in range(max(0, N - 1 - width), N + width + 1):
        first = a_coeff(family, q1, n, N - 1) * a_coeff(family, p2, n, N)
        second = a_coeff(family, q1, n, N) * a_coeff(family, p2, n, N - 1)
        bracket = first - tau * second
        if bracket:
            total = total + norm_ratio(family, n, N - 1) * bracket
    return scalar_div(total, _one_minus_tau_sq(tau) * q1)


def _appendix_b_weight(p: int, r: int, l: int, k: int) -> Fraction:
    """p!/(2^l l! ((p-r)/2-l)!)·C(k, (p+r)/2-l)"""
    inverse = reciprocal_factorial((p - r) // 2 - l)
    if not inverse:
        return Fraction(0)
    return Fraction(factorial(p), 2 ** l * factorial(l)) * inverse * binomial(k, (p + r) // 2 - l)


def eginue_appendixB_moment(p1: int, p2: int, N: int, tau: Scalar) -> Scalar:
    """椭圆 Ginibre 的显式公式：Σ_k Σ_{r∈I_{p1∧p2}} Σ_{l1,l2}"""
    family = Hermite(tau)
    if (p1 + p2) % 2:
        return Fraction(0)
    tau = family.tau
    m = min(p1, p2)
    half = (p1 + p2) // 2
    total: Scalar = Fraction(0)
    for r in range(-m, m + 1, 2):
        coefficient = Fraction(0)
        for k in range(max(r, 0), N):
            # (k-r)!/k!
            ratio = Fraction(factorial(k - r), factorial(k))
            left = sum((_appendix_b_weight(p1, r, l1, k) for l1 in range(p1 // 2 + 1)), Fraction(0))
            if not left:
                continue
            right = sum((_appendix_b_weight(p2, r, l2, k) for l2 in range(p2 // 2 + 1)), Fraction(0))
            coefficient += ratio * left * right
        if coefficient:
            total = total + coefficient * scalar_pow(tau, half + r)
    return total


def wishart_cd_moment(p1: int, p2: int, N: int, tau: Scalar, nu) -> Scalar:
    """非厄米 Wishart 的微分算子公式，仅适用于 p1 ≠ p2"""
    if p1 == p2:
        raise DomainError("Wishart 微分算子公式要求 p1 ≠ p2", {"p1": p1, "p2": p2})
    family = Laguerre(tau, nu)
    tau = family.tau
    width = max(p1, p2)
    total: Scalar = Fraction(0)
    for n in range(max(0, N - 1 - width), N + width + 1):
        bracket = (a_coeff(family, p1, n, N - 1) * a_coeff(family, p2, n, N)
                   - a_coeff(family, p1, n, N) * a_coeff(family, p2, n, N - 1))
        if bracket:
            total = total + norm_ratio(family, n, N - 1) * bracket
    if not total:
        return Fraction(0)
    # total 必含因子 (1-τ²)
    return scalar_div(total * tau, _one_minus_tau_sq(tau) * (p1 - p2))
