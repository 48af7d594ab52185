# symplectic_moments.py - 辛（Pfaffian）系综的精确谱矩
"""
斜正交多项式 q_{2k+1} = p_{2k+1}，q_{2k} = Σ_{j≤k} μ_{k,j} p_{2j}，
反过来 p_{2k} = q_{2k} - λ_{k-1} q_{2k-2}。

z^p q_k 在 q 基下的展开系数记为 (B^p)，谱矩 M^ℍ = ½ Σ_{k<N} 𝔪_{p1,p2,k}
"""
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

from src.complex_moments import (
    MomentQuery,
    MomentResult,
    complex_sum,
    gue_moment,
    moment_complex_holomorphic,
)
from src.errors import DomainError, InexactDivisionError
from src.exact_core import (
    Scalar,
    TauPoly,
    binomial,
    double_factorial,
    factorial,
    reciprocal_double_factorial,
    reciprocal_factorial,
    scalar_div,
    scalar_pow,
)
from src.logger_config import get_logger
from src.weights_polys import Hermite, WeightFamily, a_coeff, norm_ratio, recurrence_coeffs


@dataclass
class SkewData:
    """λ_l、μ_{k,j} 与斜范数比 r_n/r_k，按需计算并缓存"""
    family: WeightFamily
    _lambdas: Dict[int, Scalar] = field(default_factory=dict, repr=False)
    _rhos: Dict[int, Scalar] = field(default_factory=dict, repr=False)
    _mus: Dict[Tuple[int, int], Scalar] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _reduced_norm(self, m: int) -> Scalar:
        """h_{m+1} - c_{m+1} h_m，以 h_0 为单位"""
        c = recurrence_coeffs(self.family, m + 1).c
        return norm_ratio(self.family, m + 1, 0) - c * norm_ratio(self.family, m, 0)

    def _divide(self, num: Scalar, den: Scalar, what: str) -> Scalar:
        if not isinstance(den, TauPoly) and den == 0:
            raise DomainError(f"{what} 出现 0/0（τ = 1 时的有理模式），请改用符号模式",
                              self.family.describe())
        try:
            return scalar_div(num, den)
        except InexactDivisionError:
            get_logger().error(f"{what} 的 τ 多项式除法不精确", self.family.describe())
            raise

    def lam(self, l: int) -> Scalar:
        """λ_l = (h_{2l+2} - c_{2l+2}h_{2l+1}) / (h_{2l+1} - c_{2l+1}h_{2l})"""
        value = self._lambdas.get(l)
        if value is None:
            value = self._divide(self._reduced_norm(2 * l + 1), self._reduced_norm(2 * l), "λ")
            with self._lock:
                self._lambdas[l] = value
        return value

    def mu(self, k: int, j: int) -> Scalar:
        """μ_{k,j} = Π_{l=j}^{k-1} λ_l"""
        if j > k or j < 0:
            return Fraction(0)
        if j == k:
            return Fraction(1)
        key = (k, j)
        value = self._mus.get(key)
        if value is None:
            value = self.lam(j) * self.mu(k, j + 1) if k - j > 1 else self.lam(j)
            with self._lock:
                self._mus[key] = value
        return value

    def rho(self, n: int) -> Scalar:
        """r_n 去掉公共常数后的值: h_{2n+1} - c_{2n+1} h_{2n}"""
        value = self._rhos.get(n)
        if value is None:
            value = self._reduced_norm(2 * n)
            with self._lock:
                self._rhos[n] = value
        return value

    def skew_norm_ratio(self, n: int, k: int) -> Scalar:
        if n == k:
            return Fraction(1)
        return self._divide(self.rho(n), self.rho(k), "r_n/r_k")


@lru_cache(maxsize=None)
def skew_data(family: WeightFamily) -> SkewData:
    return SkewData(family)


def _even_combination(family: WeightFamily, skew: SkewData, p: int, target: int, source: int,
                      n: int) -> Scalar:
    """(A^p)^{target}_{source} - λ_n (A^p)^{target+2}_{source}"""
    value = a_coeff(family, p, target, source)
    shifted = a_coeff(family, p, target + 2, source)
    if shifted:
        value = value - skew.lam(n) * shifted
    return value


def b_coeff(family: WeightFamily, p: int, target: int, source: int) -> Scalar:
    """(B^p)^{target}_{source}：z^p q_source 中 q_target 的系数"""
    if p < 0 or source < 0:
        raise DomainError("B 系数要求 p, source ≥ 0", {"p": p, "source": source})
    if target < 0:
        return Fraction(0)
    skew = skew_data(family)
    n = target // 2
    if source % 2:
        if target % 2:
            return a_coeff(family, p, target, source)
        return _even_combination(family, skew, p, target, source, n)

    k = source // 2
    # 只保留 A 支撑内的 j：|target - 2j| ≤ p + 2
    j_min = max(0, n - p // 2 - 1)
    j_max = min(k, (target + p) // 2 + 1)
    total: Scalar = Fraction(0)
    for j in range(j_min, j_max + 1):
        if target % 2:
            term = a_coeff(family, p, target, 2 * j)
        else:
            term = _even_combination(family, skew, p, target, 2 * j, n)
        if term:
            total = total + skew.mu(k, j) * term
    return total


def frak_m(family: WeightFamily, p1: int, p2: int, k: int) -> Scalar:
    """𝔪_{p1,p2,k}"""
    if k < 0:
        raise DomainError("k 必须 ≥ 0", {"k": k})
    if family.parity_restricted and (p1 + p2) % 2:
        return Fraction(0)
    skew = skew_data(family)
    odd, even = 2 * k + 1, 2 * k
    total: Scalar = Fraction(0)
    for n in range(0, k + max(p1, p2) // 2 + 2):
        bracket = (b_coeff(family, p1, 2 * n + 1, odd) * b_coeff(family, p2, 2 * n, even)
                   + b_coeff(family, p1, 2 * n, even) * b_coeff(family, p2, 2 * n + 1, odd)
                   - b_coeff(family, p1, 2 * n, odd) * b_coeff(family, p2, 2 * n + 1, even)
                   - b_coeff(family, p1, 2 * n + 1, even) * b_coeff(family, p2, 2 * n, odd))
        if bracket:
            total = total + skew.skew_norm_ratio(n, k) * bracket
    return total


def symplectic_sum(family: WeightFamily, p1: int, p2: int, N: int) -> Scalar:
    if p1 == 0 and p2 == 0:
        return Fraction(N)
    if family.parity_restricted and (p1 + p2) % 2:
        return Fraction(0)
    if p1 == 0 or p2 == 0:
        return moment_symplectic_holomorphic(family, max(p1, p2), N)
    total: Scalar = Fraction(0)
    for k in range(N):
        total = total + frak_m(family, p1, p2, k)
    return total / 2


def moment_symplectic(q: MomentQuery) -> MomentResult:
    if q.component != "symplectic":
        raise DomainError("moment_symplectic 只处理 symplectic 系综", q.describe())
    formula = "holomorphic" if 0 in (q.p1, q.p2) else "main"
    return MomentResult(symplectic_sum(q.family, q.p1, q.p2, q.N), f"symplectic/{formula}", q)


def holomorphic_correction(family: WeightFamily, p: int, N: int) -> Scalar:
    """Σ_{j<N} μ_{N,j} (A^p)^{2N}_{2j}"""
    skew = skew_data(family)
    total: Scalar = Fraction(0)
    for j in range(max(0, N - p // 2), N):
        term = a_coeff(family, p, 2 * N, 2 * j)
        if term:
            total = total + skew.mu(N, j) * term
    return total


def moment_symplectic_holomorphic(family: WeightFamily, p: int, N: int) -> Scalar:
    """M^ℍ_{p,0,N} = ½M^ℂ_{p,0,2N} - ½Σ_{j<N} μ_{N,j}(A^p)^{2N}_{2j}"""
    if p < 0 or N < 1:
        raise DomainError("要求 p ≥ 0, N ≥ 1", {"p": p, "N": N})
    if p == 0:
        return Fraction(N)
    if family.parity_restricted and p % 2:
        return Fraction(0)
    return (moment_complex_holomorphic(family, p, 2 * N) - holomorphic_correction(family, p, N)) / 2


def ginse_moment(p1: int, p2: int, N: int) -> Fraction:
    """GinSE 闭式，两种情形 p1 = p2 与 p1 > p2"""
    if (p1 - p2) % 2:
        return Fraction(0)
    p1, p2 = max(p1, p2), min(p1, p2)
    total = Fraction(0)
    if p1 == p2:
        for k in range(N):
            total += Fraction(factorial(2 * k + 1 + p1), factorial(2 * k + 1))
        return total
    for k in range(N):
        total += (Fraction(factorial(2 * k + 1 + p2), factorial(2 * k + 1))
                  * double_factorial(2 * k) * reciprocal_double_factorial(2 * k + 2 - p1 + p2))
    return -Fraction(p1, 2) * total


def ginse_holomorphic_moment(p: int, N: int) -> Fraction:
    """M^{GinSE}_{2p,0,N} = -2^{p-1} N!/(N-p)!"""
    if p == 0:
        return Fraction(N)
    return -Fraction(2 ** (p - 1)) * factorial(N) * reciprocal_factorial(N - p)


def _gse_correction(p: int, N: int, tau: Scalar) -> Scalar:
    """Σ_{r=1}^{p} Σ_l τ^{p-r} ((2N)!!/(2N-2r)!!)((2p)!/(2^l l!(p-l+r)!)) C(2N-2r, p-l-r)"""
    total: Scalar = Fraction(0)
    for r in range(1, p + 1):
        if 2 * N - 2 * r < 0:
            continue
        coefficient = Fraction(0)
        for l in range(p + 1):
            weight = binomial(2 * N - 2 * r, p - l - r)
            if not weight:
                continue
            coefficient += (Fraction(double_factorial(2 * N), double_factorial(2 * N - 2 * r))
                            * Fraction(factorial(2 * p), 2 ** l * factorial(l) * factorial(p - l + r))
                            * weight)
        if coefficient:
            total = total + coefficient * scalar_pow(tau, p - r)
    return total


def gse_moment(p: int, N: int) -> Fraction:
    """GSE 的 2p 阶矩"""
    return gue_moment(p, 2 * N) / 2 - Fraction(_gse_correction(p, N, Fraction(1))) / 2


def eginse_holomorphic_moment(p: int, N: int, tau: Scalar) -> Scalar:
    """椭圆 GinSE 的全纯矩 M_{2p,0,N}"""
    family = Hermite(tau)
    if p == 0:
        return Fraction(N)
    half_complex = moment_complex_holomorphic(family, 2 * p, 2 * N) / 2
    return half_complex - _gse_correction(p, N, family.tau) / 2


def eginse_recursive_moment(p1: int, p2: int, N: int, tau: Scalar) -> Scalar:
    """椭圆 GinSE 关于 (p1, p2) 的递推，递推深度 min(p1, p2)"""
    family = Hermite(tau)
    if (p1 + p2) % 2:
        return Fraction(0)
    return _eginse_recursive(family, p1, p2, N)


@lru_cache(maxsize=None)
def _eginse_recursive(family: Hermite, p1: int, p2: int, N: int) -> Scalar:
    if p1 + p2 == 0:
        return Fraction(N)
    tau = family.tau
    total = p1 + p2
    value = complex_sum(family, p1, p2, 2 * N) / 2
    if p1 and p2:
        middle = _eginse_recursive(family, p1 - 1, p2 - 1, N)
        value = value + (1 - tau * tau) * Fraction(p1 * p2, total) * middle

    width = max(p1, p2)
    correction: Scalar = Fraction(0)
    two_n = 2 * N
    for k in range(N):
        # (2N)!!/(2k)!!
        chain = Fraction(double_factorial(two_n), double_factorial(2 * k))
        for n in range(max(0, two_n - width), two_n + width + 1):
            bracket = (Fraction(p1, total) * a_coeff(family, p1, n, 2 * k) * a_coeff(family, p2, n, two_n)
                       + Fraction(p2, total) * a_coeff(family, p1, n, two_n) * a_coeff(family, p2, n, 2 * k))
            if bracket:
                correction = correction + norm_ratio(family, n, two_n) * chain * bracket
    return value - correction / 2


def _appendix_b_f(p1: int, p2: int, k: int, s: int, l1: int, l2: int, tau: Scalar) -> Scalar:
    """f_{k,s,l1,l2}(p1,p2)，偶偶与奇奇两种定义"""
    half = (p1 + p2) // 2
    denominator = factorial(2 * k + 1)
    total: Scalar = Fraction(0)

    def add(exponent: int, top: int, weight: Fraction):
        nonlocal total
        if not weight or top < 0:
            return
        if exponent < 0:
            raise DomainError("τ 的负幂次", {"p1": p1, "p2": p2, "k": k, "s": s})
        total = total + Fraction(factorial(top), denominator) * weight * scalar_pow(tau, exponent)

    if p1 % 2 == 0:
        a1, b2 = p1 // 2 - l1, p2 // 2 - l2
        for r in range(-a1, a1 + 1):
            first = (binomial(2 * k + 1, a1 + r) * reciprocal_factorial(a1 - r)
                     * binomial(2 * k - 2 * s, b2 + r - s) * reciprocal_factorial(b2 + s - r))
            add(half + 2 * r - s, 2 * k + 1 - 2 * r, Fraction(first))
            second = (binomial(2 * k + 1, a1 + r) * reciprocal_factorial(a1 - r)
                      * binomial(2 * k - 2 * s, b2 + r - s - 1) * reciprocal_factorial(b2 + s - r + 1))
            add(half + 2 * r - s - 1, 2 * k + 2 - 2 * r, -Fraction(second))
    else:
        up, down = (p1 + 1) // 2 - l1, (p1 - 1) // 2 - l1
        b2_low, b2_high = (p2 - 1) // 2 - l2, (p2 + 1) // 2 - l2
        for r in range(-up, up + 1):
            first = (binomial(2 * k + 1, up + r) * reciprocal_factorial(down - r)
                     * binomial(2 * k - 2 * s, b2_low + r - s) * reciprocal_factorial(b2_high + s - r))
            add(half + 2 * r - s, 2 * k + 1 - 2 * r, -Fraction(first))
            second = (binomial(2 * k + 1, down + r) * reciprocal_factorial(up - r)
                      * binomial(2 * k - 2 * s, b2_low + r - s) * reciprocal_factorial(b2_high + s - r))
            add(half + 2 * r - s - 1, 2 * k + 2 - 2 * r, Fraction(second))
    return total


def eginse_appendixB_moment(p1: int, p2: int, N: int, tau: Scalar) -> Scalar:
    """椭圆 GinSE 的显式公式 ½Σ_k Σ_s Σ_{l1} Σ_{l2}"""
    family = Hermite(tau)
    if (p1 - p2) % 2:
        return Fraction(0)
    tau = family.tau
    half = (p1 + p2) // 2
    total: Scalar = Fraction(0)
    for k in range(N):
        for s in range(min(k, half) + 1):
            chain = Fraction(double_factorial(2 * k), double_factorial(2 * k - 2 * s))
            for l1 in range(p1 // 2 + 1):
                w1 = Fraction(factorial(p1), 2 ** l1 * factorial(l1))
                for l2 in range(p2 // 2 + 1):
                    w2 = Fraction(factorial(p2), 2 ** l2 * factorial(l2))
                    pair = (_appendix_b_f(p1, p2, k, s, l1, l2, tau)
                            + _appendix_b_f(p2, p1, k, s, l2, l1, tau))
                    if pair:
                        total = total + chain * w1 * w2 * pair
    return total / 2
