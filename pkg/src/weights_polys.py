# weights_polys.py - 权重族、平面正交多项式与 A 系数表
"""
三类平面权重（Hermite / Laguerre / Gegenbauer）：
- 三项递推系数 b_k, c_k
- 范数比 h_j/h_k（Gegenbauer 用反转多项式 G_k(τ) 使 τ=0 正则）
- 经典基的反演系数与线性化系数
- A 系数 (A^p)^j_k 的三种算法：recursive / explicit / scaling

平面多项式满足 z p_k = p_{k+1} + b_k p_k + c_k p_{k-1}，
且 p_k(z) = α^k P_k(z/α)，α = √τ（Hermite、Gegenbauer）或 τ（Laguerre）。
"""
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple, Union

from sympy.polys.densebasic import dup_reverse
from sympy.polys.densetools import dup_eval
from sympy.polys.domains import QQ
from sympy.polys.orthopolys import dup_gegenbauer

from src.errors import DomainError
from src.exact_core import (
    TAU,
    Scalar,
    TauPoly,
    binomial,
    factorial,
    pochhammer,
    reciprocal_factorial,
    scalar_pow,
)
from src.logger_config import get_logger

A_METHODS = ("recursive", "explicit", "scaling")


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """z p_k = p_{k+1} + b_k p_k + c_k p_{k-1}"""
    b: Scalar
    c: Scalar


def _validate_tau(tau, allow_symbolic: bool, family_name: str) -> Scalar:
    if isinstance(tau, TauPoly):
        if not allow_symbolic:
            raise DomainError(f"{family_name} 不支持符号 τ", {"family": family_name})
        if tau != TAU:
            raise DomainError("符号模式下 τ 必须是形式变量 t", {"tau": str(tau)})
        return tau
    try:
        value = Fraction(tau)
    except (TypeError, ValueError) as e:
        raise DomainError(f"τ 不是有理数: {tau!r}") from e
    if not 0 <= value <= 1:
        raise DomainError(f"τ 必须位于 [0, 1]: {value}", {"tau": str(value)})
    return value


@dataclass(frozen=True)
class WeightFamily(ABC):
    """权重族基类；实例不可变、可哈希，用作记忆表的键"""
    tau: Scalar

    name = "abstract"
    parity_restricted = False

    @property
    def symbolic(self) -> bool:
        return isinstance(self.tau, TauPoly)

    @abstractmethod
    def recurrence(self, k: int) -> RecurrenceCoeffs:
        ...

    @abstractmethod
    def norm_ratio(self, j: int, k: int) -> Scalar:
        ...

    @abstractmethod
    def alpha_pow(self, e: int) -> Scalar:
        """缩放因子 α 的 e 次幂"""

    # 经典基 Q_k（H_k、L_k^ν、C_k^{(1+a)}）
    @abstractmethod
    def inversion_coeff(self, n: int, degree: int) -> Fraction:
        ...

    @abstractmethod
    def linearisation_coeff(self, n: int, m: int, k: int) -> Fraction:
        ...

    @abstractmethod
    def leading_coeff(self, k: int) -> Fraction:
        """经典多项式 Q_k 的首项系数 κ_k"""

    @abstractmethod
    def explicit_a(self, p: int, j: int, k: int) -> Scalar:
        ...

    # 首一实多项式 P_k(x) = σ^k Q_k(x/σ) / κ_k；只有 Hermite 的 σ² = 2
    variable_scale_sq = 1

    def in_support(self, p: int, j: int, k: int) -> bool:
        if j < 0 or k < 0 or abs(j - k) > p:
            return False
        if self.parity_restricted and (p + k - j) % 2:
            return False
        return True

    def describe(self) -> Dict[str, str]:
        return {"family": self.name, "tau": str(self.tau)}


@dataclass(frozen=True)
class Hermite(WeightFamily):
    """椭圆 Ginibre：ω = exp(-(|z|² - τ Re z²)/(1-τ²))"""

    name = "hermite"
    parity_restricted = True
    variable_scale_sq = 2

    def __post_init__(self):
        object.__setattr__(self, "tau", _validate_tau(self.tau, True, self.name))

    def recurrence(self, k: int) -> RecurrenceCoeffs:
        return RecurrenceCoeffs(Fraction(0), k * self.tau)

    def norm_ratio(self, j: int, k: int) -> Scalar:
        return Fraction(factorial(j), factorial(k))

    def alpha_pow(self, e: int) -> Scalar:
        if e % 2:
            raise DomainError("α = √τ 的奇数次幂不是有理数", {"exponent": e})
        return scalar_pow(self.tau, e // 2)

    def inversion_coeff(self, n: int, degree: int) -> Fraction:
        # x^n = n!/2^n Σ_l H_{n-2l} / (l!(n-2l)!)
        if degree < 0 or degree > n or (n - degree) % 2:
            return Fraction(0)
        l = (n - degree) // 2
        return Fraction(factorial(n), 2 ** n * factorial(l) * factorial(degree))

    def linearisation_coeff(self, n: int, m: int, k: int) -> Fraction:
        # H_n H_m = Σ_s 2^s s! C(n,s) C(m,s) H_{n+m-2s}
        if k > n + m or (n + m - k) % 2:
            return Fraction(0)
        s = (n + m - k) // 2
        if s > min(n, m):
            return Fraction(0)
        return Fraction(2 ** s * factorial(s) * binomial(n, s) * binomial(m, s))

    def leading_coeff(self, k: int) -> Fraction:
        return Fraction(2 ** k)

    def explicit_a(self, p: int, j: int, k: int) -> Scalar:
        if not self.in_support(p, j, k):
            return Fraction(0)
        u = (p + k - j) // 2
        v = (p - k + j) // 2
        total = Fraction(0)
        for l in range(p // 2 + 1):
            weight = reciprocal_factorial(v - l)
            if weight:
                total += Fraction(factorial(p), 2 ** l * factorial(l)) * weight * binomial(k, u - l)
        return total * scalar_pow(self.tau, u)


@dataclass(frozen=True)
class Laguerre(WeightFamily):
    """非厄米 Wishart：ω = |z|^ν K_ν(2|z|/(1-τ²)) exp(2τ Re z/(1-τ²))"""
    nu: Fraction = Fraction(0)

    name = "laguerre"

    def __post_init__(self):
        object.__setattr__(self, "tau", _validate_tau(self.tau, True, self.name))
        nu = Fraction(self.nu)
        if nu <= -1:
            raise DomainError(f"ν 必须 > -1: {nu}", {"nu": str(nu)})
        object.__setattr__(self, "nu", nu)

    def recurrence(self, k: int) -> RecurrenceCoeffs:
        tau = self.tau
        return RecurrenceCoeffs(tau * (2 * k + 1 + self.nu), tau * tau * (k * (k + self.nu)))

    def norm_ratio(self, j: int, k: int) -> Scalar:
        # h_n ∝ n! Γ(n+ν+1)，按有理因子逐项相乘
        if j == k:
            return Fraction(1)
        low, high = min(j, k), max(j, k)
        ratio = Fraction(1)
        for i in range(low + 1, high + 1):
            ratio *= i * (i + self.nu)
        return ratio if j > k else 1 / ratio

    def alpha_pow(self, e: int) -> Scalar:
        return scalar_pow(self.tau, e)

    def inversion_coeff(self, n: int, degree: int) -> Fraction:
        # x^n = n! Σ_l (-1)^l C(n+ν, n-l) L_l^ν
        if degree < 0 or degree > n:
            return Fraction(0)
        # C(n+ν, n-l) = (l+ν+1)_{n-l} / (n-l)!
        value = pochhammer(degree + self.nu + 1, n - degree) / factorial(n - degree)
        return (-1) ** degree * factorial(n) * value

    def linearisation_coeff(self, n: int, m: int, k: int) -> Fraction:
        if k > n + m:
            return Fraction(0)
        total = Fraction(0)
        for s in range(max(n, m, k), (n + m + k) // 2 + 1):
            # (ν+s)!/(k+ν)! = (k+ν+1)_{s-k}
            term = Fraction((-2) ** (k + n + m - 2 * s) * factorial(k))
            term *= pochhammer(k + self.nu + 1, s - k)
            term /= (factorial(s - k) * factorial(s - n) * factorial(s - m)
                     * factorial(k + n + m - 2 * s))
            total += term
        return total

    def leading_coeff(self, k: int) -> Fraction:
        return Fraction((-1) ** k, factorial(k))

    def explicit_a(self, p: int, j: int, k: int) -> Scalar:
        if not self.in_support(p, j, k):
            return Fraction(0)
        nu = self.nu
        total = Fraction(0)
        for l in range(p + 1):
            inner = Fraction(0)
            for s in range(max(j, k, l), (j + k + l) // 2 + 1):
                inner += (pochhammer(j + nu + 1, s - j) * 2 ** (j + k + l - 2 * s)
                          / (factorial(s - j) * factorial(s - k) * factorial(s - l)
                             * factorial(j + k + l - 2 * s)))
            if inner:
                total += (Fraction(factorial(p), factorial(p - l))
                          * pochhammer(l + nu + 1, p - l) * factorial(k) * inner)
        return total * scalar_pow(self.tau, p + k - j)

    def describe(self) -> Dict[str, str]:
        info = super().describe()
        info["nu"] = str(self.nu)
        return info


@dataclass(frozen=True)
class Gegenbauer(WeightFamily):
    """ω = (1 - 2x²/(1+τ) - 2y²/(1-τ))^a，支撑在椭圆 K 上；τ 只能取有理数"""
    a: Fraction = Fraction(0)

    name = "gegenbauer"
    parity_restricted = True

    def __post_init__(self):
        object.__setattr__(self, "tau", _validate_tau(self.tau, False, self.name))
        a = Fraction(self.a)
        if a <= -1:
            raise DomainError(f"a 必须 > -1: {a}", {"a": str(a)})
        object.__setattr__(self, "a", a)

    @property
    def lam(self) -> Fraction:
        """经典 Gegenbauer 参数 λ = 1 + a"""
        return 1 + self.a

    def recurrence(self, k: int) -> RecurrenceCoeffs:
        if k == 0:
            return RecurrenceCoeffs(Fraction(0), Fraction(0))
        a = self.a
        c = self.tau / 4 * Fraction(k) * (k + 1 + 2 * a) / ((k + a) * (k + 1 + a))
        return RecurrenceCoeffs(Fraction(0), c)

    def _norm_value(self, n: int) -> Fraction:
        # h_n / (√(1-τ²)) 去掉公共前因子后的部分
        a = self.a
        return ((1 + a) / (n + 1 + a)
                * (factorial(n) / pochhammer(1 + a, n)) ** 2
                * _reversed_gegenbauer(a, self.tau, n) / 4 ** n)

    def norm_ratio(self, j: int, k: int) -> Scalar:
        if j == k:
            return Fraction(1)
        return self._norm_value(j) / self._norm_value(k)

    def alpha_pow(self, e: int) -> Scalar:
        if e % 2:
            raise DomainError("α = √τ 的奇数次幂不是有理数", {"exponent": e})
        return self.tau ** (e // 2)

    def inversion_coeff(self, n: int, degree: int) -> Fraction:
        # x^n = n!/2^n Σ_l (n+λ-2l) / (l! (λ)_{n+1-l}) C^{(λ)}_{n-2l}
        if degree < 0 or degree > n or (n - degree) % 2:
            return Fraction(0)
        lam = self.lam
        l = (n - degree) // 2
        return (Fraction(factorial(n), 2 ** n) * (n + lam - 2 * l)
                / (factorial(l) * pochhammer(lam, n + 1 - l)))

    def linearisation_coeff(self, n: int, m: int, k: int) -> Fraction:
        if k > n + m or (n + m - k) % 2:
            return Fraction(0)
        l = (n + m - k) // 2
        if l > min(n, m):
            return Fraction(0)
        lam = self.lam
        numerator = ((n + m + lam - 2 * l) * pochhammer(lam, l) * pochhammer(lam, n - l)
                     * pochhammer(lam, m - l) * pochhammer(2 * lam, n + m - l)
                     * factorial(n + m - 2 * l))
        denominator = ((n + m + lam - l) * factorial(l) * factorial(n - l) * factorial(m - l)
                       * pochhammer(lam, n + m - l) * pochhammer(2 * lam, n + m - 2 * l))
        return numerator / denominator

    def leading_coeff(self, k: int) -> Fraction:
        return 2 ** k * pochhammer(self.lam, k) / factorial(k)

    def explicit_a(self, p: int, j: int, k: int) -> Scalar:
        if not self.in_support(p, j, k):
            return Fraction(0)
        a = self.a
        prefactor = (Fraction(factorial(k) * 2 ** j, 2 ** k) * pochhammer(1 + a, j)
                     / pochhammer(1 + a, k) * Fraction(factorial(p), 2 ** p))
        total = Fraction(0)
        for l in range(p // 2 + 1):
            x1 = (k + p - 2 * l - j) // 2
            x2 = (j + p - 2 * l - k) // 2
            x3 = (j + k - p + 2 * l) // 2
            x4 = (j + k + p - 2 * l) // 2
            if min(x1, x2, x3) < 0:
                continue
            term = (p - 2 * l + a + 1) / (factorial(l) * pochhammer(a + 1, p + 1 - l))
            term *= (j + a + 1) / (Fraction(p - 2 * l + k + j, 2) + a + 1)
            term *= (pochhammer(a + 1, x1) * pochhammer(a + 1, x2) * pochhammer(a + 1, x3)
                     * pochhammer(2 * a + 2, x4))
            term /= (factorial(x1) * factorial(x2) * factorial(x3)
                     * pochhammer(a + 1, x4) * pochhammer(2 * a + 2, j))
            total += term
        return prefactor * total * self.tau ** ((p + k - j) // 2)

    def describe(self) -> Dict[str, str]:
        info = super().describe()
        info["a"] = str(self.a)
        return info


@lru_cache(maxsize=None)
def _reversed_gegenbauer(a: Fraction, tau: Fraction, n: int) -> Fraction:
    """G_n(τ) = τ^n C_n^{(1+a)}(1/τ)：把 C_n 的系数表反转后在 τ 处求值"""
    lam = 1 + a
    coeffs = dup_gegenbauer(n, QQ(lam.numerator, lam.denominator), QQ)
    value = dup_eval(dup_reverse(coeffs), QQ(tau.numerator, tau.denominator), QQ)
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def make_family(name: str, tau: Scalar, nu: Union[str, Fraction] = 0,
                a: Union[str, Fraction] = 0) -> WeightFamily:
    """按名称构造权重族"""
    key = name.lower()
    if key == "hermite":
        return Hermite(tau)
    if key == "laguerre":
        return Laguerre(tau, Fraction(nu))
    if key == "gegenbauer":
        return Gegenbauer(tau, Fraction(a))
    raise DomainError(f"未知的权重族: {name}", {"family": name})


# ---------- 模块级操作 ----------

@lru_cache(maxsize=None)
def recurrence_coeffs(family: WeightFamily, k: int) -> RecurrenceCoeffs:
    if k < 0:
        raise DomainError("递推下标不能为负", {"k": k})
    return family.recurrence(k)


def norm_ratio(family: WeightFamily, j: int, k: int) -> Scalar:
    if j < 0 or k < 0:
        raise DomainError("范数下标不能为负", {"j": j, "k": k})
    return family.norm_ratio(j, k)


def inversion_coeff(family: WeightFamily, n: int, idx: int) -> Fraction:
    """x^n 在经典基中 idx 次多项式前的系数"""
    if n < 0:
        raise DomainError("反演次数不能为负", {"n": n})
    return family.inversion_coeff(n, idx)


def linearisation_coeff(family: WeightFamily, n: int, m: int, k: int) -> Fraction:
    if min(n, m, k) < 0:
        return Fraction(0)
    return family.linearisation_coeff(n, m, k)


def monic_inversion_coeff(family: WeightFamily, n: int, l: int) -> Fraction:
    """x^n = Σ_l a_{n,l} P_l(x)，P_l 为首一多项式"""
    value = family.inversion_coeff(n, l)
    if not value:
        return Fraction(0)
    value = value * family.leading_coeff(l)
    if family.variable_scale_sq != 1:
        value *= Fraction(family.variable_scale_sq) ** ((n - l) // 2)
    return value


def monic_linearisation_coeff(family: WeightFamily, n: int, m: int, k: int) -> Fraction:
    """P_n P_m = Σ_k b_{n,m,k} P_k"""
    value = linearisation_coeff(family, n, m, k)
    if not value:
        return Fraction(0)
    value = value * family.leading_coeff(k) / (family.leading_coeff(n) * family.leading_coeff(m))
    if family.variable_scale_sq != 1:
        value *= Fraction(family.variable_scale_sq) ** ((n + m - k) // 2)
    return value


class ACoeffTable:
    """(A^p)^j_k 的记忆表，每个权重族实例一张"""

    def __init__(self, family: WeightFamily):
        self.family = family
        self.entries: Dict[Tuple[int, int, int], Scalar] = {}
        self._lock = threading.Lock()

    def entry(self, p: int, j: int, k: int) -> Scalar:
        if not self.family.in_support(p, j, k):
            return Fraction(0)
        if p == 0:
            return Fraction(1)
        key = (p, j, k)
        cached = self.entries.get(key)
        if cached is not None:
            return cached
        # T_p = T_1 ∘ T_{p-1}
        value = self.entry(p - 1, j - 1, k)
        rec = recurrence_coeffs(self.family, j)
        if rec.b != 0:
            value = value + rec.b * self.entry(p - 1, j, k)
        value = value + recurrence_coeffs(self.family, j + 1).c * self.entry(p - 1, j + 1, k)
        with self._lock:
            self.entries.setdefault(key, value)
        return value


_tables: Dict[WeightFamily, ACoeffTable] = {}
_tables_lock = threading.Lock()


def a_table(family: WeightFamily) -> ACoeffTable:
    table = _tables.get(family)
    if table is None:
        with _tables_lock:
            table = _tables.get(family)
            if table is None:
                table = ACoeffTable(family)
                _tables[family] = table
                get_logger().trace("新建 A 系数表", family.describe())
    return table


def _a_scaling(family: WeightFamily, p: int, j: int, k: int) -> Scalar:
    if not family.in_support(p, j, k):
        return Fraction(0)
    total = Fraction(0)
    for l in range(max(j - k, 0), p + 1):
        a_pl = monic_inversion_coeff(family, p, l)
        if a_pl:
            total += a_pl * monic_linearisation_coeff(family, l, k, j)
    if not total:
        return Fraction(0)
    return total * family.alpha_pow(p + k - j)


def a_coeff(family: WeightFamily, p: int, j: int, k: int, method: str = "recursive") -> Scalar:
    """(A^p)^j_k：z^p p_k = Σ_j (A^p)^j_k p_j"""
    if p < 0 or k < 0:
        raise DomainError("A 系数要求 p, k ≥ 0", {"p": p, "k": k})
    if method == "recursive":
        return a_table(family).entry(p, j, k)
    if method == "explicit":
        if p == 0:
            return Fraction(1 if j == k else 0)
        return family.explicit_a(p, j, k)
    if method == "scaling":
        return _a_scaling(family, p, j, k)
    raise DomainError(f"未知的 A 系数算法: {method}", {"method": method, "choices": list(A_METHODS)})
