# errors.py - 统一异常定义
"""
所有模块共用的异常层级。CLI 根据异常类型映射退出码：
DomainError -> 2，FormulaMismatchError -> 1，
OracleMismatchError / QuadratureConvergenceError -> 3
"""
from typing import Any, Dict, Optional


class PlanarMomentsError(Exception):
    """基类，附带结构化上下文，方便写入调试日志"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class DomainError(PlanarMomentsError, ValueError):
    """参数不合法（τ 超出范围、ν ≤ -1、负阶乘等）"""


class InexactDivisionError(PlanarMomentsError, ArithmeticError):
    """TauPoly 精确除法出现非零余式，说明公式实现有误"""


class InterpolationError(PlanarMomentsError):
    """N 多项式插值在留出点上不一致（次数上界错误）"""


class FormulaMismatchError(PlanarMomentsError):
    """两条独立的精确公式给出不同结果"""

    def __init__(self, formula_a: str, formula_b: str, value_a: Any, value_b: Any,
                 details: Optional[Dict[str, Any]] = None):
        message = f"{formula_a} != {formula_b}: {value_a} vs {value_b}"
        merged = {"formula_a": formula_a, "formula_b": formula_b,
                  "value_a": str(value_a), "value_b": str(value_b)}
        merged.update(details or {})
        super().__init__(message, merged)
        self.formula_a = formula_a
        self.formula_b = formula_b


class QuadratureConvergenceError(PlanarMomentsError):
    """两次加密网格的积分结果差异超过容差"""


class OracleMismatchError(PlanarMomentsError):
    """数值积分与精确值差异超过容差"""
