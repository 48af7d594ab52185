# verification_suites.py - 统一的分层校验系统
"""
每条验收标准对应一个校验套件：
1. 精确套件：A 系数、交叉公式、闭式、缩放、极限
2. 渐近套件：N 多项式系数、椭圆律、亏格展开、Wishart 极限
3. 数值套件：二维求积与精确值对照
所有套件共享 BaseSuite 接口，由 VerificationManager 统一调度
"""
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from src.asymptotics import (
    asymptotic_check,
    c1,
    c2,
    c2_prime,
    elliptic_law_moment,
    genus_coeff,
    genus_identity_holds,
    l1,
)
from src.complex_moments import (
    complex_sum,
    eginue_appendixB_moment,
    eginue_cd_moment,
    ginue_moment,
    gue_moment,
    hermitian_unitary_moment,
    moment_complex_holomorphic,
    wishart_cd_moment,
)
from src.errors import PlanarMomentsError
from src.exact_core import TAU, TauPoly, binomial, catalan, format_scalar, narayana, substitute
from src.logger_config import get_logger, log_function_call
from src.numeric_oracle import (
    QuadratureGrid,
    absolute_norms,
    mp_law_moment_quadrature,
    oracle_tolerance,
    quadrature_moment,
    quadrature_orthogonality,
)
from src.symplectic_moments import (
    eginse_appendixB_moment,
    eginse_holomorphic_moment,
    eginse_recursive_moment,
    ginse_holomorphic_moment,
    ginse_moment,
    gse_moment,
    moment_symplectic_holomorphic,
    symplectic_sum,
)
from src.weights_polys import A_METHODS, Gegenbauer, Hermite, Laguerre, WeightFamily, a_coeff

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


class SuiteType(Enum):
    EXACT = "exact"            # 零容差的有理 / τ 多项式恒等式
    ASYMPTOTIC = "asymptotic"  # 大 N 极限
    NUMERIC = "numeric"        # 浮点求积


@dataclass
class SuiteResult:
    """校验结果"""
    name: str
    passed: bool
    checked: int
    failures: int
    first_counterexample: Optional[Dict[str, Any]] = None
    elapsed: float = 0.0
    notes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
            "first_counterexample": self.first_counterexample,
            "elapsed": round(self.elapsed, 3),
        }


class _Tally:
    """累计检查次数，只保留第一个反例"""

    def __init__(self):
        self.checked = 0
        self.failures = 0
        self.first: Optional[Dict[str, Any]] = None

    def expect(self, ok: bool, **context):
        self.checked += 1
        if ok:
            return
        self.failures += 1
        if self.first is None:
            self.first = {k: (format_scalar(v) if isinstance(v, (Fraction, TauPoly)) else v)
                          for k, v in context.items()}

    def equal(self, left, right, **context):
        self.expect(left == right, left=left, right=right, **context)


def _pairs(order_max: int, order_min: int = 0, even_only: bool = False) -> Iterable[Tuple[int, int]]:
    for total in range(order_min, order_max + 1):
        if even_only and total % 2:
            continue
        for p1 in range(total, -1, -1):
            yield p1, total - p1


def _tau_label(tau) -> str:
    return "symbolic" if isinstance(tau, TauPoly) else str(tau)


class BaseSuite(ABC):
    """校验套件基类"""
    name = ""

    def __init__(self, config: Dict[str, Any], family_filter: Optional[str] = None):
        self.config = config
        self.family_filter = family_filter
        self.enabled = config.get('enabled', True)

    @abstractmethod
    def check(self, tally: _Tally):
        """执行所有检查，把结果计入 tally"""

    @abstractmethod
    def get_suite_type(self) -> SuiteType:
        pass

    def run(self, step_num: int = 1, total_steps: int = 1) -> SuiteResult:
        logger = get_logger()
        logger.step_start(f"校验套件 {self.name}", step_num, total_steps)
        tally = _Tally()
        started = time.perf_counter()
        try:
            self.check(tally)
        except PlanarMomentsError as e:
            tally.failures += 1
            tally.first = tally.first or dict(e.details, error=str(e), error_type=type(e).__name__)
            logger.error(f"套件 {self.name} 中断", {"error": str(e)}, e)
        elapsed = time.perf_counter() - started
        result = SuiteResult(self.name, tally.failures == 0, tally.checked, tally.failures,
                             tally.first, elapsed)
        logger.step_end(f"校验套件 {self.name}", result.passed, result.to_dict())
        return result


# ========== 精确套件 ==========

class ACoefficientSuite(BaseSuite):
    """三种 A 系数算法一致、T_{p+q} = T_p∘T_q、大 k 比值"""
    name = "a-coefficients"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.EXACT

    @staticmethod
    def families() -> List[WeightFamily]:
        grid: List[WeightFamily] = [Hermite(t) for t in (Fraction(0), THIRD, Fraction(1), TAU)]
        grid += [Laguerre(t, nu) for t in (Fraction(0), HALF) for nu in (Fraction(0), HALF, Fraction(2))]
        grid.append(Laguerre(TAU, Fraction(0)))
        grid += [Gegenbauer(t, a) for t in (Fraction(0), HALF) for a in (Fraction(0), HALF)]
        return grid

    def check(self, tally: _Tally):
        p_max = int(self.config.get('p_max', 6))
        k_max = int(self.config.get('k_max', 20))
        composition_k_max = int(self.config.get('composition_k_max', 12))

        for family in self.families():
            label = family.describe()
            for p in range(p_max + 1):
                for k in range(k_max + 1):
                    for j in range(max(0, k - p - 1), k + p + 2):
                        values = [a_coeff(family, p, j, k, method) for method in A_METHODS]
                        tally.expect(values[0] == values[1] == values[2], family=label, p=p, j=j, k=k,
                                     values=[format_scalar(v) for v in values])

            for p in range(1, p_max):
                for q in range(1, p_max + 1 - p):
                    for k in range(composition_k_max + 1):
                        for j in range(max(0, k - p - q), k + p + q + 1):
                            composed = sum((a_coeff(family, p, m, k) * a_coeff(family, q, j, m)
                                            for m in range(max(0, k - p), k + p + 1)), Fraction(0))
                            tally.equal(composed, a_coeff(family, p + q, j, k),
                                        family=label, p=p, q=q, j=j, k=k, check="composition")

        # 固定 r, p，k = 10⁴ 时 (A^p)^{k-r}_k ≈ τ^{(p+r)/2} C(p, (p+r)/2) k^{(p+r)/2}
        family = Hermite(HALF)
        k = 10 ** 4
        for p in range(2, 5):
            for r in range(p % 2, p + 1, 2):
                m = (p + r) // 2
                predicted = family.tau ** m * binomial(p, m) * Fraction(k) ** m
                ratio = float(a_coeff(family, p, k - r, k) / predicted)
                tally.expect(abs(ratio - 1) < 0.01, check="large-k ratio", p=p, r=r, ratio=ratio)


class CrossFormulaSuite(BaseSuite):
    """同一个谱矩的几条独立精确公式必须逐位相等"""
    name = "cross-formula"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.EXACT

    def check(self, tally: _Tally):
        complex_cfg = self.config.get('complex_cross', {})
        symplectic_cfg = self.config.get('symplectic_cross', {})
        taus = (Fraction(0), THIRD, HALF, TAU)

        order_max, n_max = int(complex_cfg.get('order_max', 8)), int(complex_cfg.get('N_max', 12))
        for tau in taus:
            family = Hermite(tau)
            for p1, p2 in _pairs(order_max):
                for N in range(1, n_max + 1):
                    main = complex_sum(family, p1, p2, N)
                    context = {"tau": _tau_label(tau), "p1": p1, "p2": p2, "N": N}
                    tally.equal(main, eginue_cd_moment(p1, p2, N, tau), formula="complex/cd", **context)
                    tally.equal(main, eginue_appendixB_moment(p1, p2, N, tau),
                                formula="complex/appendixB", **context)

        for tau in (HALF, TAU):
            for nu in (Fraction(0), Fraction(1)):
                family = Laguerre(tau, nu)
                for p1, p2 in _pairs(6, order_min=1):
                    if p1 == p2:
                        continue
                    for N in range(1, 7):
                        tally.equal(complex_sum(family, p1, p2, N), wishart_cd_moment(p1, p2, N, tau, nu),
                                    formula="complex/cd-laguerre", tau=_tau_label(tau), nu=str(nu),
                                    p1=p1, p2=p2, N=N)

        order_max, n_max = int(symplectic_cfg.get('order_max', 8)), int(symplectic_cfg.get('N_max', 8))
        for tau in taus:
            family = Hermite(tau)
            for p1, p2 in _pairs(order_max):
                for N in range(1, n_max + 1):
                    main = symplectic_sum(family, p1, p2, N)
                    context = {"tau": _tau_label(tau), "p1": p1, "p2": p2, "N": N}
                    tally.equal(main, eginse_recursive_moment(p1, p2, N, tau),
                                formula="symplectic/recursive", **context)
                    tally.equal(main, eginse_appendixB_moment(p1, p2, N, tau),
                                formula="symplectic/appendixB", **context)


class ClosedFormSuite(BaseSuite):
    """τ = 0 的 Ginibre 闭式、τ := 1 的 GUE / GSE 闭式与全纯特例"""
    name = "closed-forms"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.EXACT

    def check(self, tally: _Tally):
        order_max = int(self.config.get('order_max', 8))
        n_max = int(self.config.get('N_max', 10))
        ginibre = Hermite(Fraction(0))
        for p1, p2 in _pairs(order_max):
            for N in range(1, n_max + 1):
                tally.equal(complex_sum(ginibre, p1, p2, N), ginue_moment(p1, p2, N),
                            formula="GinUE", p1=p1, p2=p2, N=N)
                tally.equal(symplectic_sum(ginibre, p1, p2, N), ginse_moment(p1, p2, N),
                            formula="GinSE", p1=p1, p2=p2, N=N)
        for p in range(order_max // 2 + 1):
            for N in range(1, n_max + 1):
                tally.equal(ginse_holomorphic_moment(p, N), symplectic_sum(ginibre, 2 * p, 0, N),
                            formula="GinSE holomorphic", p=p, N=N)

        symbolic = Hermite(TAU)
        for N in range(1, 9):
            for p in range(7):
                tally.equal(substitute(moment_complex_holomorphic(symbolic, 2 * p, N), 1), gue_moment(p, N),
                            formula="GUE", p=p, N=N)
            for p in range(5):
                tally.equal(substitute(moment_symplectic_holomorphic(symbolic, 2 * p, N), 1), gse_moment(p, N),
                            formula="GSE", p=p, N=N)

        for tau in (THIRD, TAU):
            for p in range(5):
                for N in range(1, 7):
                    tally.equal(eginse_holomorphic_moment(p, N, tau),
                                moment_symplectic_holomorphic(Hermite(tau), 2 * p, N),
                                formula="eGinSE holomorphic", tau=_tau_label(tau), p=p, N=N)

        tally.equal(complex_sum(ginibre, 2, 2, 5), Fraction(70), formula="GinUE spot value")
        for N in range(1, n_max + 1):
            tally.equal(symplectic_sum(ginibre, 2, 0, N), Fraction(-N), formula="GinSE spot value", N=N)


class ScalingSuite(BaseSuite):
    """M^{H,ℂ}_{2p,0,N} / τ^p 与 τ 无关，且等于 GUE 矩"""
    name = "scaling"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.EXACT

    def check(self, tally: _Tally):
        for tau in (Fraction(1, 4), HALF, Fraction(3, 4)):
            family = Hermite(tau)
            for p in range(7):
                for N in range(1, 13):
                    scaled = moment_complex_holomorphic(family, 2 * p, N) / tau ** p
                    tally.equal(scaled, gue_moment(p, N), tau=str(tau), p=p, N=N)
                    tally.equal(hermitian_unitary_moment(family, 2 * p, N), gue_moment(p, N),
                                formula="hermitian_unitary_moment", tau=str(tau), p=p, N=N)


class LimitsSuite(BaseSuite):
    """有限 N 的 τ → 0 / τ → 1 极限：GinUE、GUE、LUE"""
    name = "limits"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.EXACT

    def check(self, tally: _Tally):
        symbolic = Hermite(TAU)
        for p in range(4):
            for N in range(1, 7):
                tally.equal(substitute(complex_sum(symbolic, p, p, N), 0), ginue_moment(p, p, N),
                            limit="tau->0", p=p, N=N)
        for p in range(7):
            for N in range(1, 9):
                tally.equal(hermitian_unitary_moment(symbolic, 2 * p, N), gue_moment(p, N),
                            limit="GUE", p=p, N=N)
        for nu in (Fraction(0), HALF, Fraction(2)):
            family = Laguerre(HALF, nu)
            for N in range(1, 9):
                tally.equal(hermitian_unitary_moment(family, 1, N), N * (N + nu), limit="LUE p=1", nu=str(nu), N=N)
                tally.equal(hermitian_unitary_moment(family, 2, N), N * (N + nu) * (2 * N + nu),
                            limit="LUE p=2", nu=str(nu), N=N)


# ========== 渐近套件 ==========

class AsymptoticsSuite(BaseSuite):
    """N 多项式的前两项系数等于 c1 与 c2（辛系综为 c2′）"""
    name = "asymptotics"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.ASYMPTOTIC

    def check(self, tally: _Tally):
        order_max = int(self.config.get('order_max', 6))
        for component in ("complex", "symplectic"):
            for p1, p2 in _pairs(order_max, order_min=2, even_only=True):
                report = asymptotic_check(Hermite(TAU), p1, p2, [], component)
                tally.expect(report.passed, component=component, p1=p1, p2=p2, failures=report.failures)
        spot = TauPoly([THIRD, 0, Fraction(4, 3), 0, THIRD])
        tally.equal(c1(2, 2, TAU), spot, formula="c1(2,2)")


class EllipticLawSuite(BaseSuite):
    """椭圆律的矩与 c1 一致"""
    name = "elliptic-law"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.ASYMPTOTIC

    def check(self, tally: _Tally):
        for p1, p2 in _pairs(int(self.config.get('order_max', 12)), order_min=2, even_only=True):
            tally.equal(elliptic_law_moment(p1, p2, TAU), c1(p1, p2, TAU), p1=p1, p2=p2)


class GenusSuite(BaseSuite):
    """GUE 矩的亏格展开"""
    name = "genus"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.ASYMPTOTIC

    def check(self, tally: _Tally):
        for p in range(int(self.config.get('p_max', 6)) + 1):
            tally.equal(genus_coeff(0, p), Fraction(catalan(p)), check="genus 0", p=p)
            for N in range(1, int(self.config.get('N_max', 20)) + 1):
                tally.expect(genus_identity_holds(p, N), p=p, N=N)


class HermitianLimitsSuite(BaseSuite):
    """τ = 1 时极限系数退化为 Catalan 数与 Narayana 多项式"""
    name = "hermitian-limits"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.ASYMPTOTIC

    def check(self, tally: _Tally):
        one = Fraction(1)
        for p in range(9):
            tally.equal(c1(p, p, one), Fraction(catalan(p)), formula="c1", p=p)
        for alpha in (Fraction(0), HALF, one):
            for p1, p2 in _pairs(5, order_min=1):
                tally.equal(l1(p1, p2, one, alpha), narayana(p1 + p2, 1 + alpha),
                            formula="l1", alpha=str(alpha), p1=p1, p2=p2)
        for p1, p2 in _pairs(8, order_min=2, even_only=True):
            p = (p1 + p2) // 2
            tally.equal(c2(p1, p2, one), Fraction(0), formula="c2", p1=p1, p2=p2)
            expected = -Fraction(sum(binomial(2 * p, l) for l in range(p)), 2)
            tally.equal(c2_prime(p1, p2, one), expected, formula="c2_prime", p1=p1, p2=p2)


class WishartAsymptoticsSuite(BaseSuite):
    """非厄米 Wishart：M/N^{p1+p2+1} 以 O(1/N) 收敛到 l1"""
    name = "wishart-asymptotics"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.ASYMPTOTIC

    def check(self, tally: _Tally):
        order_max = int(self.config.get('order_max', 3))
        lists = {
            "complex": [int(n) for n in self.config.get('N_list', [50, 100, 200])],
            "symplectic": [int(n) for n in self.config.get('symplectic_N_list', [25, 50])],
        }
        for component, n_list in lists.items():
            for tau in (Fraction(0), HALF):
                for alpha in (Fraction(0), Fraction(1)):
                    for p1, p2 in _pairs(order_max, order_min=1):
                        report = asymptotic_check(Laguerre(tau, 0), p1, p2, n_list, component, alpha)
                        tally.expect(report.passed, component=component, tau=str(tau), alpha=str(alpha),
                                     p1=p1, p2=p2, failures=report.failures)


# ========== 数值套件 ==========

class OracleSuite(BaseSuite):
    """精确值与二维求积对照，外加 MP 律与正交性"""
    name = "oracle"

    def get_suite_type(self) -> SuiteType:
        return SuiteType.NUMERIC

    def families(self) -> List[WeightFamily]:
        grid: List[WeightFamily] = [
            Hermite(Fraction(0)), Hermite(HALF),
            Laguerre(HALF, Fraction(0)), Laguerre(HALF, Fraction(1)),
            Gegenbauer(HALF, Fraction(0)), Gegenbauer(HALF, HALF),
        ]
        if self.family_filter:
            grid = [f for f in grid if f.name == self.family_filter]
        return grid

    def n_values(self) -> List[int]:
        """默认逐个检查 1..N_max；配置了 N_values 时只检查这些 N"""
        chosen = self.config.get('N_values')
        if chosen:
            return sorted(set(int(n) for n in chosen))
        return list(range(1, int(self.config.get('N_max', 6)) + 1))

    def check(self, tally: _Tally):
        oracle_cfg = self.config.get('oracle', {})
        tolerances = oracle_cfg.get('tolerance', {})
        order_max = int(self.config.get('order_max', 4))
        checked_grid = QuadratureGrid.from_config(oracle_cfg)
        sweep_grid = replace(checked_grid, refinement_check=False)
        n_values = self.n_values()

        for family in self.families():
            tol = oracle_tolerance(family, tolerances)
            label = family.describe()
            # 每个权重族做一次加密网格收敛检查，容差不严于该族的验收容差
            refine_grid = replace(checked_grid, refinement_tolerance=max(checked_grid.refinement_tolerance, tol / 10))
            quadrature_moment(family, 1, 1, 2, "complex", refine_grid)
            for component in ("complex", "symplectic"):
                engine = complex_sum if component == "complex" else symplectic_sum
                for p1, p2 in _pairs(order_max):
                    for N in n_values:
                        exact = float(engine(family, p1, p2, N))
                        numeric = quadrature_moment(family, p1, p2, N, component, sweep_grid)
                        error = abs(numeric - exact) / max(1.0, abs(exact))
                        tally.expect(error < tol, family=label, component=component, p1=p1, p2=p2, N=N,
                                     exact=exact, numeric=numeric, error=error)

        if self.family_filter in (None, "hermite"):
            family = Hermite(HALF)
            norms = absolute_norms(family, 8)
            for j in range(9):
                for k in range(j, 9):
                    value = quadrature_orthogonality(family, j, k, sweep_grid)
                    target = norms[k] if j == k else 0.0
                    scale = (norms[j] * norms[k]) ** 0.5
                    tally.expect(abs(value - target) <= 1e-8 * scale, check="orthogonality", j=j, k=k,
                                 value=value, target=target)

        if self.family_filter is None:
            mp_tol = float(tolerances.get('mp_law', 1e-5))
            for tau in (Fraction(0), HALF):
                for alpha in (Fraction(0), Fraction(1)):
                    for p1, p2 in _pairs(2):
                        exact = float(l1(p1, p2, tau, alpha))
                        numeric = mp_law_moment_quadrature(p1, p2, float(tau), float(alpha), checked_grid)
                        error = abs(numeric - exact) / max(1.0, abs(exact))
                        tally.expect(error < mp_tol, check="mp-law", tau=str(tau), alpha=str(alpha),
                                     p1=p1, p2=p2, exact=exact, numeric=numeric)


SUITE_CLASSES = {
    cls.name: cls
    for cls in (ACoefficientSuite, CrossFormulaSuite, ClosedFormSuite, HermitianLimitsSuite, ScalingSuite,
                AsymptoticsSuite, EllipticLawSuite, GenusSuite, LimitsSuite, WishartAsymptoticsSuite,
                OracleSuite)
}

# 套件名 -> config['verify'] 中对应的小节
_CONFIG_SECTIONS = {
    "a-coefficients": "a_coefficients",
    "closed-forms": "closed_forms",
    "wishart-asymptotics": "wishart",
    "oracle": "oracle",
}


class VerificationManager:
    """统一的校验管理器"""

    def __init__(self, config: Dict[str, Any], family_filter: Optional[str] = None):
        self.config = config
        self.family_filter = family_filter

    def _suite_config(self, name: str) -> Dict[str, Any]:
        verify_cfg = self.config.get('verify', {})
        if name == "cross-formula":
            return {"complex_cross": verify_cfg.get('complex_cross', {}),
                    "symplectic_cross": verify_cfg.get('symplectic_cross', {})}
        section = dict(verify_cfg.get(_CONFIG_SECTIONS.get(name, ""), {}))
        if name == "oracle":
            section["oracle"] = self.config.get('oracle', {})
        return section

    def build_suites(self, names: Optional[List[str]] = None) -> List[BaseSuite]:
        if not names or names == ["all"]:
            names = self.config.get('verify', {}).get('suites', list(SUITE_CLASSES))
        suites = []
        for name in names:
            if name not in SUITE_CLASSES:
                get_logger().warning(f"未知的校验套件: {name}", {"available": sorted(SUITE_CLASSES)})
                continue
            suite = SUITE_CLASSES[name](self._suite_config(name), self.family_filter)
            if suite.enabled:
                suites.append(suite)
        return suites

    @log_function_call("校验套件调度")
    def run(self, names: Optional[List[str]] = None, threads: int = 1) -> List[SuiteResult]:
        """运行套件，结果按名称排序，与调度顺序无关"""
        suites = self.build_suites(names)
        logger = get_logger()
        logger.info(f"开始校验: {len(suites)} 个套件", {"suites": [s.name for s in suites], "threads": threads})
        if threads > 1 and len(suites) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda item: item[1].run(item[0], len(suites)), enumerate(suites, 1)))
        else:
            results = [suite.run(i, len(suites)) for i, suite in enumerate(suites, 1)]
        results.sort(key=lambda r: r.name)

        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.warning(f"校验失败: {', '.join(failed)}")
        else:
            logger.success(f"全部 {len(results)} 个套件通过")
        return results
