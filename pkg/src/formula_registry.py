"""
公式注册器
管理所有可用的谱矩公式，按需动态加载，并负责 --method auto 的交叉校验
"""
import importlib
from typing import Callable, Dict, List, Optional

from src.complex_moments import MomentQuery, MomentResult
from src.errors import DomainError, FormulaMismatchError
from src.exact_core import TauPoly
from src.logger_config import get_logger

# 调用约定：函数签名各不相同，这里统一成 (query) -> Scalar
_CALL_STYLES: Dict[str, Callable] = {
    "query": lambda func, q: func(q).value,
    "holomorphic": lambda func, q: func(q.family, max(q.p1, q.p2), q.N),
    "hermite": lambda func, q: func(q.p1, q.p2, q.N, q.family.tau),
    "laguerre": lambda func, q: func(q.p1, q.p2, q.N, q.family.tau, q.family.nu),
    "closed-form": lambda func, q: func(q.p1, q.p2, q.N),
}

# auto 模式下交叉校验的优先顺序：越独立越靠前
_CROSSCHECK_ORDER = {
    "complex": ["complex/closed-form", "complex/cd", "complex/cd-laguerre", "complex/appendixB"],
    "symplectic": ["symplectic/closed-form", "symplectic/recursive", "symplectic/appendixB"],
}


def _is_tau_zero(query: MomentQuery) -> bool:
    tau = query.family.tau
    return not isinstance(tau, TauPoly) and tau == 0


class FormulaRegistry:
    """公式注册器，管理所有可用的精确公式"""

    def __init__(self):
        self.formulas: Dict[str, Dict] = {}
        self._register_default_formulas()

    def _register_default_formulas(self):
        """注册默认的公式"""
        self.register_formula(
            name="complex/main", display_name="复系综一般公式",
            module_name="src.complex_moments", function_name="moment_complex",
            component="complex", call_style="query",
            description="Σ_k Σ_j (h_j/h_k)(A^{p1})^j_k (A^{p2})^j_k，适用于所有权重族",
        )
        self.register_formula(
            name="complex/holomorphic", display_name="复系综全纯公式",
            module_name="src.complex_moments", function_name="moment_complex_holomorphic",
            component="complex", call_style="holomorphic", holomorphic_only=True,
            description="Σ_k (A^p)^k_k，仅 p1 = 0 或 p2 = 0",
        )
        self.register_formula(
            name="complex/cd", display_name="椭圆 Ginibre 微分算子公式",
            module_name="src.complex_moments", function_name="eginue_cd_moment",
            component="complex", families=("hermite",), call_style="hermite",
            description="在 N-1, N 两行上的有限和，除以 (1-τ²)(p1+1)",
        )
        self.register_formula(
            name="complex/cd-laguerre", display_name="非厄米 Wishart 微分算子公式",
            module_name="src.complex_moments", function_name="wishart_cd_moment",
            component="complex", families=("laguerre",), call_style="laguerre", distinct_orders=True,
            description="仅 p1 ≠ p2",
        )
        self.register_formula(
            name="complex/appendixB", display_name="椭圆 Ginibre 显式四重和",
            module_name="src.complex_moments", function_name="eginue_appendixB_moment",
            component="complex", families=("hermite",), call_style="hermite",
            description="按 τ 的幂次展开的显式公式",
        )
        self.register_formula(
            name="complex/closed-form", display_name="GinUE 闭式",
            module_name="src.complex_moments", function_name="ginue_moment",
            component="complex", families=("hermite",), call_style="closed-form", tau_zero_only=True,
            description="τ = 0: δ_{p1,p2}(N+p)!/((p+1)(N-1)!)",
        )
        self.register_formula(
            name="symplectic/main", display_name="辛系综一般公式",
            module_name="src.symplectic_moments", function_name="moment_symplectic",
            component="symplectic", call_style="query",
            description="½ Σ_k 𝔪_{p1,p2,k}，适用于所有权重族",
        )
        self.register_formula(
            name="symplectic/holomorphic", display_name="辛系综全纯公式",
            module_name="src.symplectic_moments", function_name="moment_symplectic_holomorphic",
            component="symplectic", call_style="holomorphic", holomorphic_only=True,
            description="½M^ℂ_{p,0,2N} - ½Σ_j μ_{N,j}(A^p)^{2N}_{2j}",
        )
        self.register_formula(
            name="symplectic/recursive", display_name="椭圆 GinSE 递推",
            module_name="src.symplectic_moments", function_name="eginse_recursive_moment",
            component="symplectic", families=("hermite",), call_style="hermite",
            description="关于 (p1, p2) 的递推，深度 min(p1, p2)",
        )
        self.register_formula(
            name="symplectic/appendixB", display_name="椭圆 GinSE 显式公式",
            module_name="src.symplectic_moments", function_name="eginse_appendixB_moment",
            component="symplectic", families=("hermite",), call_style="hermite",
            description="½Σ_k Σ_s Σ_{l1,l2} f 项",
        )
        self.register_formula(
            name="symplectic/closed-form", display_name="GinSE 闭式",
            module_name="src.symplectic_moments", function_name="ginse_moment",
            component="symplectic", families=("hermite",), call_style="closed-form", tau_zero_only=True,
            description="τ = 0 的两种情形 p1 = p2 与 p1 ≠ p2",
        )

    def register_formula(
        self,
        name: str,
        display_name: str,
        module_name: str,
        function_name: str,
        component: str,
        call_style: str,
        families: tuple = ("hermite", "laguerre", "gegenbauer"),
        description: str = "",
        holomorphic_only: bool = False,
        tau_zero_only: bool = False,
        distinct_orders: bool = False,
    ):
        """注册一个新的公式"""
        if call_style not in _CALL_STYLES:
            raise DomainError(f"未知的调用约定: {call_style}", {"name": name})
        self.formulas[name] = {
            "display_name": display_name,
            "module_name": module_name,
            "function_name": function_name,
            "component": component,
            "call_style": call_style,
            "families": families,
            "description": description,
            "holomorphic_only": holomorphic_only,
            "tau_zero_only": tau_zero_only,
            "distinct_orders": distinct_orders,
            "loaded": False,
            "formula_func": None,
            "error": None,
        }

    def load_formula(self, name: str) -> bool:
        """动态加载指定的公式"""
        if name not in self.formulas:
            get_logger().error(f"未知的公式: {name}", {"available": self.get_available_formulas()})
            return False

        info = self.formulas[name]
        if info["loaded"]:
            return True

        try:
            module = importlib.import_module(info["module_name"])
            info["formula_func"] = getattr(module, info["function_name"])
            info["loaded"] = True
            info["error"] = None
            get_logger().trace(f"已加载公式: {name}")
            return True
        except ImportError as e:
            info["error"] = f"模块导入失败: {e}"
        except AttributeError as e:
            info["error"] = f"函数不存在: {e}"
        get_logger().error(f"加载公式失败 {name}", {"error": info["error"]})
        return False

    def get_available_formulas(self) -> List[str]:
        return list(self.formulas.keys())

    def get_formula_info(self, name: str) -> Optional[Dict]:
        return self.formulas.get(name)

    def applicability(self, name: str, query: MomentQuery) -> Optional[str]:
        """不适用时返回原因，适用时返回 None"""
        info = self.formulas.get(name)
        if info is None:
            return f"未知的公式: {name}"
        if info["component"] != query.component:
            return f"{name} 只适用于 {info['component']} 系综"
        if query.family.name not in info["families"]:
            return f"{name} 只适用于 {', '.join(info['families'])} 权重"
        if info["holomorphic_only"] and query.p1 and query.p2:
            return f"{name} 要求 p1 = 0 或 p2 = 0"
        if info["tau_zero_only"] and not _is_tau_zero(query):
            return f"{name} 只适用于 τ = 0"
        if info["distinct_orders"] and query.p1 == query.p2:
            return f"{name} 要求 p1 ≠ p2"
        return None

    def resolve_method(self, query: MomentQuery) -> str:
        """把 CLI 的 --method 映射成注册名"""
        method = query.method
        if method in ("auto", "main"):
            return f"{query.component}/main"
        if method == "cd" and query.family.name == "laguerre":
            method = "cd-laguerre"
        return f"{query.component}/{method}"

    def evaluate(self, name: str, query: MomentQuery):
        reason = self.applicability(name, query)
        if reason:
            raise DomainError(reason, query.describe())
        if not self.load_formula(name):
            raise DomainError(f"公式不可用: {name}", {"error": self.formulas[name]["error"]})
        info = self.formulas[name]
        return _CALL_STYLES[info["call_style"]](info["formula_func"], query)

    def crosscheck_candidates(self, query: MomentQuery) -> List[str]:
        return [name for name in _CROSSCHECK_ORDER[query.component]
                if self.applicability(name, query) is None]

    def compute_moment(self, query: MomentQuery, crosscheck_max_order: int = 6) -> MomentResult:
        """
        计算一个谱矩

        auto 模式走一般公式，p1 + p2 ≤ crosscheck_max_order 时再用一条独立公式复核，
        不一致时抛出 FormulaMismatchError
        """
        logger = get_logger()
        name = self.resolve_method(query)
        value = self.evaluate(name, query)
        result = MomentResult(value, name, query)
        logger.trace("谱矩计算完成", dict(query.describe(), formula=name, value=str(value)))

        if query.method != "auto" or query.p1 + query.p2 > crosscheck_max_order:
            return result

        for candidate in self.crosscheck_candidates(query):
            try:
                other = self.evaluate(candidate, query)
            except DomainError as e:
                # 例如有理 τ = 1 时微分算子公式需要除以 (1-τ²)
                logger.debug(f"跳过交叉校验 {candidate}", {"reason": str(e)})
                continue
            if other != value:
                raise FormulaMismatchError(name, candidate, value, other, query.describe())
            result.crosschecked_with = candidate
            break
        return result

    def list_formulas(self) -> List[Dict]:
        """所有公式的摘要，供 CLI 展示"""
        rows = []
        for name, info in self.formulas.items():
            status = "loaded" if info["loaded"] else ("error" if info["error"] else "pending")
            rows.append({
                "name": name,
                "display_name": info["display_name"],
                "families": ",".join(info["families"]),
                "status": status,
                "description": info["description"],
            })
        return rows


# 创建全局实例
formula_registry = FormulaRegistry()


def compute_moment(query: MomentQuery, crosscheck_max_order: int = 6) -> MomentResult:
    return formula_registry.compute_moment(query, crosscheck_max_order)
