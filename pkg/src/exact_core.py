# exact_core.py - 精确有理数运算、τ 多项式与组合基元
"""
所有精确公式共用的底层：
1. Rational（fractions.Fraction）的解析与打印
2. TauPoly：sympy 在 QQ 上的稠密多项式（dup 表示）的薄封装，支持精确除法
3. 阶乘、二项式、双阶乘、Pochhammer、第一类 Stirling 数、Catalan、Narayana
4. 精确插值（sympy.interpolate）

负参数约定：1/Γ(n+1) = 0 (n < 0)，统一在本模块处理。
"""
import re
import threading
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Union

import sympy
from sympy.functions.combinatorial.numbers import stirling
from sympy.polys.densearith import (
    dup_add,
    dup_exquo,
    dup_mul,
    dup_mul_ground,
    dup_neg,
    dup_pow,
    dup_quo_ground,
    dup_sub,
)
from sympy.polys.densebasic import dup_strip
from sympy.polys.densetools import dup_eval
from sympy.polys.domains import QQ
from sympy.polys.polyerrors import CoercionFailed, ExactQuotientFailed, PolynomialError

from src.errors import DomainError, InexactDivisionError

Rational = Fraction

T_SYMBOL = sympy.Symbol("t")
N_SYMBOL = sympy.Symbol("N")

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_TERM_PATTERN = re.compile(r"^(?:(\d+(?:/\d+)?)(\*)?)?(t(?:\^(\d+))?)?$")


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """解析 "a/b" 或 "a" 形式的有理数"""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    match = _RATIONAL_PATTERN.match(str(text))
    if not match:
        raise DomainError(f"无法解析有理数: {text!r}", {"input": str(text)})
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) else 1
    if denominator == 0:
        raise DomainError(f"分母为零: {text!r}", {"input": str(text)})
    return Fraction(numerator, denominator)


def format_rational(value: Union[int, Fraction]) -> str:
    return str(Fraction(value))


def _to_qq(value: Union[int, Fraction]):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _to_fraction(value) -> Fraction:
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


class TauPoly:
    """τ 的多项式；rep 是 QQ 上的降幂系数表（sympy dup），零多项式为空表"""

    __slots__ = ("rep",)

    def __init__(self, coeffs: Iterable[Union[int, Fraction]] = ()):
        # coeffs 按升幂给出，coeffs[i] 为 τ^i 的系数
        rep = [_to_qq(c) for c in reversed(list(coeffs))]
        object.__setattr__(self, "rep", dup_strip(rep))

    def __setattr__(self, name, value):
        raise AttributeError("TauPoly is immutable")

    # ---------- 构造 ----------

    @classmethod
    def _from_rep(cls, rep: list) -> "TauPoly":
        poly = cls.__new__(cls)
        object.__setattr__(poly, "rep", dup_strip(list(rep)))
        return poly

    @classmethod
    def tau(cls) -> "TauPoly":
        """形式变量 τ 本身"""
        return cls((0, 1))

    @classmethod
    def constant(cls, value: Union[int, Fraction]) -> "TauPoly":
        return cls((value,))

    @classmethod
    def monomial(cls, coefficient: Union[int, Fraction], power: int) -> "TauPoly":
        if power < 0:
            raise DomainError("τ 的幂次不能为负", {"power": power})
        return cls([0] * power + [coefficient])

    @classmethod
    def from_expr(cls, expr) -> "TauPoly":
        """sympy 表达式 -> TauPoly，只接受 t 的有理系数多项式"""
        try:
            poly = sympy.Poly(expr, T_SYMBOL, domain=QQ)
        except (PolynomialError, CoercionFailed) as e:
            raise DomainError(f"不是 t 的有理系数多项式: {expr}", {"expr": str(expr)}) from e
        return cls._from_rep([QQ.from_sympy(c) for c in poly.all_coeffs()])

    @classmethod
    def parse(cls, text: str) -> "TauPoly":
        """解析 "c0 + c1*t + c2*t^2" 形式"""
        compact = text.replace(" ", "")
        if compact in ("", "0"):
            return cls()
        terms = re.findall(r"[+-]?[^+-]+", compact)
        if "".join(terms) != compact:
            raise DomainError(f"无法解析 τ 多项式: {text!r}")
        coeffs: dict = {}
        for term in terms:
            sign = -1 if term.startswith("-") else 1
            body = term.lstrip("+-")
            match = _TERM_PATTERN.match(body)
            if not match or (match.group(1) is None and match.group(3) is None):
                raise DomainError(f"无法解析 τ 多项式项: {term!r}", {"input": text})
            if match.group(2) and not match.group(3):
                raise DomainError(f"悬空的乘号: {term!r}", {"input": text})
            coefficient = Fraction(match.group(1)) if match.group(1) else Fraction(1)
            if match.group(3) is None:
                power = 0
            else:
                power = int(match.group(4)) if match.group(4) else 1
            coeffs[power] = coeffs.get(power, Fraction(0)) + sign * coefficient
        degree = max(coeffs)
        return cls([coeffs.get(i, 0) for i in range(degree + 1)])

    def as_expr(self):
        if not self.rep:
            return sympy.Integer(0)
        return sympy.Poly.from_list(self.rep, T_SYMBOL, domain=QQ).as_expr()

    # ---------- 基本属性 ----------

    @property
    def coeffs(self) -> tuple:
        """升幂的 Fraction 系数"""
        return tuple(_to_fraction(c) for c in reversed(self.rep))

    @property
    def degree(self) -> int:
        return len(self.rep) - 1

    def coeff(self, i: int) -> Fraction:
        if 0 <= i < len(self.rep):
            return _to_fraction(self.rep[len(self.rep) - 1 - i])
        return Fraction(0)

    def is_zero(self) -> bool:
        return not self.rep

    def is_constant(self) -> bool:
        return len(self.rep) <= 1

    def __bool__(self) -> bool:
        return bool(self.rep)

    def __call__(self, t: Union[int, Fraction]) -> Fraction:
        return self.evaluate(t)

    def evaluate(self, t: Union[int, Fraction]) -> Fraction:
        return _to_fraction(dup_eval(self.rep, _to_qq(t), QQ))

    # ---------- 环运算 ----------

    @staticmethod
    def _coerce(other) -> Optional["TauPoly"]:
        if isinstance(other, TauPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return TauPoly((other,))
        return None

    def __add__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return TauPoly._from_rep(dup_add(self.rep, rhs.rep, QQ))

    __radd__ = __add__

    def __neg__(self):
        return TauPoly._from_rep(dup_neg(self.rep, QQ))

    def __sub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return TauPoly._from_rep(dup_sub(self.rep, rhs.rep, QQ))

    def __rsub__(self, other):
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return TauPoly._from_rep(dup_sub(lhs.rep, self.rep, QQ))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TauPoly._from_rep(dup_mul_ground(self.rep, _to_qq(other), QQ))
        if not isinstance(other, TauPoly):
            return NotImplemented
        return TauPoly._from_rep(dup_mul(self.rep, other.rep, QQ))

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        return TauPoly._from_rep(dup_pow(self.rep, exponent, QQ))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DomainError("除以零")
            return TauPoly._from_rep(dup_quo_ground(self.rep, _to_qq(other), QQ))
        if isinstance(other, TauPoly):
            return taupoly_div_exact(self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return taupoly_div_exact(lhs, self)

    # ---------- 比较与打印 ----------

    def __eq__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.rep == rhs.rep

    def __hash__(self):
        if self.is_constant():
            return hash(self.coeff(0))
        return hash(("TauPoly", self.coeffs))

    def __repr__(self):
        return f"TauPoly({self})"

    def __str__(self):
        parts: List[str] = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                body = str(abs(c))
            elif i == 1:
                body = f"{abs(c)}*t"
            else:
                body = f"{abs(c)}*t^{i}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {body}")
        return " ".join(parts) if parts else "0"


Scalar = Union[Fraction, TauPoly]
TAU = TauPoly.tau()


def taupoly_div_exact(num: TauPoly, den: TauPoly) -> TauPoly:
    """精确多项式除法；余式非零即视为实现错误"""
    num = TauPoly._coerce(num)
    den = TauPoly._coerce(den)
    if den.is_zero():
        raise DomainError("TauPoly 除数为零")
    try:
        return TauPoly._from_rep(dup_exquo(num.rep, den.rep, QQ))
    except ExactQuotientFailed as e:
        raise InexactDivisionError(
            f"({num}) 不能被 ({den}) 整除",
            {"numerator": str(num), "denominator": str(den)},
        ) from e


def scalar_div(num: Scalar, den: Scalar) -> Scalar:
    """Scalar 除法：有理模式普通除法，符号模式精确多项式除法"""
    if isinstance(num, TauPoly) or isinstance(den, TauPoly):
        return taupoly_div_exact(TauPoly._coerce(num), TauPoly._coerce(den))
    if den == 0:
        raise DomainError("除以零", {"numerator": str(num)})
    return Fraction(num) / den


def scalar_pow(base: Scalar, exponent: int) -> Scalar:
    if exponent < 0:
        raise DomainError("Scalar 幂次不能为负", {"exponent": exponent})
    if isinstance(base, TauPoly):
        return base ** exponent
    return Fraction(base) ** exponent


def substitute(value: Scalar, t: Union[int, Fraction]) -> Fraction:
    """τ := t，把 TauPoly 映射为有理数"""
    if isinstance(value, TauPoly):
        return value.evaluate(Fraction(t))
    return Fraction(value)


def scalar_to_expr(value: Scalar):
    if isinstance(value, TauPoly):
        return value.as_expr()
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def parse_scalar(text: str) -> Scalar:
    if "t" in text:
        return TauPoly.parse(text)
    return parse_rational(text)


def format_scalar(value: Scalar) -> str:
    if isinstance(value, TauPoly):
        return str(value)
    return format_rational(value)


def scalar_to_float(value: Scalar) -> Optional[float]:
    if isinstance(value, TauPoly):
        return float(value.coeff(0)) if value.is_constant() else None
    return float(value)


# ---------- 组合基元 ----------

_cache_lock = threading.Lock()
_factorials: List[int] = [1]
_factorial_cap = 512


def set_factorial_cache_cap(cap: int):
    """阶乘表上限，默认 4·N_max + p_max 量级；超出部分按需计算"""
    global _factorial_cap
    _factorial_cap = max(int(cap), 16)


def factorial(n: int) -> int:
    if n < 0:
        raise DomainError(f"负整数的阶乘: {n}", {"n": n})
    if n < len(_factorials):
        return _factorials[n]
    if n > _factorial_cap:
        value = _factorials[-1]
        for i in range(len(_factorials), n + 1):
            value *= i
        return value
    with _cache_lock:
        while len(_factorials) <= n:
            _factorials.append(_factorials[-1] * len(_factorials))
    return _factorials[n]


def reciprocal_factorial(n: int) -> Fraction:
    """1/n!，负整数时为 0"""
    if n < 0:
        return Fraction(0)
    return Fraction(1, factorial(n))


def binomial(n: Union[int, Fraction], k: int) -> Union[int, Fraction]:
    """二项式系数；k < 0、k > n 或 n < 0 时为 0。n 可为有理数（广义二项式）"""
    if k < 0:
        return 0
    if isinstance(n, Fraction) and n.denominator != 1:
        value = Fraction(1)
        for i in range(k):
            value *= n - i
        return value / factorial(k)
    n = int(n)
    if n < 0 or k > n:
        return 0
    return factorial(n) // (factorial(k) * factorial(n - k))


def double_factorial(n: int) -> int:
    """n!!，约定 0!! = (-1)!! = 1"""
    if n < -1:
        raise DomainError(f"双阶乘参数过小: {n}", {"n": n})
    value = 1
    for i in range(n, 0, -2):
        value *= i
    return value


def reciprocal_double_factorial(n: int) -> Fraction:
    """1/n!!；负偶数时取 0（与 1/Γ 的约定一致）"""
    if n < -1:
        return Fraction(0)
    return Fraction(1, double_factorial(n))


def pochhammer(a: Union[int, Fraction], k: int) -> Fraction:
    """上升阶乘 (a)_k"""
    if k < 0:
        raise DomainError("Pochhammer 下标不能为负", {"k": k})
    value = Fraction(1)
    for i in range(k):
        value *= a + i
    return value


def stirling_first(n: int, k: int) -> int:
    """带符号第一类 Stirling 数 s(n,k)"""
    if n < 0 or k < 0 or k > n:
        return 0
    return int(stirling(n, k, kind=1, signed=True))


def catalan(p: int) -> int:
    if p < 0:
        raise DomainError("Catalan 下标不能为负", {"p": p})
    return int(sympy.catalan(p))


def narayana(p: int, y: Union[int, Fraction]) -> Fraction:
    """Narayana 多项式 N_p(y) = Σ_k (1/p)·C(p,k)·C(p,k-1)·y^k"""
    if p < 1:
        raise DomainError("Narayana 下标需 ≥ 1", {"p": p})
    total = Fraction(0)
    for k in range(1, p + 1):
        total += Fraction(binomial(p, k) * binomial(p, k - 1), p) * Fraction(y) ** k
    return total


# ---------- 精确插值 ----------

def lagrange_interpolate(xs: Sequence[int], ys: Sequence[Scalar]) -> List[Scalar]:
    """经过 (xs, ys) 的最低次多项式，返回 N 的升幂系数；ys 含 TauPoly 时系数也是 TauPoly"""
    if len(xs) != len(ys) or not xs:
        raise DomainError("插值点数量不匹配")
    if len(set(xs)) != len(xs):
        raise DomainError("插值节点重复", {"xs": list(xs)})
    symbolic = any(isinstance(y, TauPoly) for y in ys)
    points = [(int(x), scalar_to_expr(y)) for x, y in zip(xs, ys)]
    poly = sympy.Poly(sympy.interpolate(points, N_SYMBOL), N_SYMBOL)
    coeffs = [TauPoly.from_expr(c) for c in reversed(poly.all_coeffs())]
    if symbolic:
        return coeffs
    return [c.coeff(0) for c in coeffs]
