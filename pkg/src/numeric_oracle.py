# numeric_oracle.py - 浮点数值积分校验（独立于精确公式的验证路径）
"""
1-点函数 + 二维求积，按 dA = d²z/π 归一：

- complex:    R(z) = ω(z) Σ_{k<N} |p_k(z)|² / h_k
- symplectic: R(z) = ω(z) · 4y · Σ_{k<N} Im(q_{2k+1}(z) conj q_{2k}(z)) / r_k，
              r_k = 2(h_{2k+1} - c_{2k+1} h_{2k})

求积方案：
- Hermite:    椭圆极坐标 x = √(1+τ)ρcosθ, y = √(1-τ)ρsinθ，ρ ≤ R，R² = 2·deg + 40（deg 为被积多项式的总次数）
- Gegenbauer: 椭圆极坐标 x = √((1+τ)/2)ρcosθ, y = √((1-τ)/2)ρsinθ，径向 Gauss-Jacobi
- Laguerre:   以 0 为极点，径向几何分级的 Gauss-Legendre 面板
角向统一用梯形公式（周期函数）
"""
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import special

from src.errors import DomainError, QuadratureConvergenceError
from src.exact_core import TauPoly
from src.logger_config import get_logger
from src.symplectic_moments import skew_data
from src.weights_polys import Gegenbauer, Hermite, Laguerre, WeightFamily, recurrence_coeffs

_RESCALE_THRESHOLD = 1e100


def _require_rational(family: WeightFamily):
    if isinstance(family.tau, TauPoly):
        raise DomainError("数值积分需要有理 τ", family.describe())
    if family.tau >= 1:
        raise DomainError("数值积分要求 τ < 1", family.describe())


def _float_recurrence(family: WeightFamily, k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    b = np.array([float(recurrence_coeffs(family, k).b) for k in range(k_max + 1)])
    c = np.array([float(recurrence_coeffs(family, k).c) for k in range(k_max + 1)])
    return b, c


# ---------- 多项式求值 ----------

def eval_planar_polys(family: WeightFamily, k_max: int, z) -> np.ndarray:
    """p_0..p_{k_max} 在 z（任意形状数组）处的值，返回形状 (k_max+1,) + z.shape"""
    _require_rational(family)
    z = np.asarray(z, dtype=complex)
    b, c = _float_recurrence(family, k_max)
    values = np.empty((k_max + 1,) + z.shape, dtype=complex)
    values[0] = 1.0
    if k_max >= 1:
        values[1] = z - b[0]
    for k in range(1, k_max):
        values[k + 1] = (z - b[k]) * values[k] - c[k] * values[k - 1]
    return values


def eval_planar_poly_log(family: WeightFamily, k: int, z: complex) -> Tuple[float, float]:
    """(log|p_k(z)|, arg p_k(z))；前向递推时逐步缩放，避免溢出"""
    _require_rational(family)
    if k < 0:
        raise DomainError("k 必须 ≥ 0", {"k": k})
    b, c = _float_recurrence(family, k)
    z = complex(z)
    previous, current = 0j, 1 + 0j
    log_scale = 0.0
    for m in range(k):
        previous, current = current, (z - b[m]) * current - c[m] * previous
        size = max(abs(current), abs(previous))
        if size > _RESCALE_THRESHOLD:
            previous /= size
            current /= size
            log_scale += math.log(size)
    if current == 0:
        return -math.inf, 0.0
    return log_scale + math.log(abs(current)), math.atan2(current.imag, current.real)


def eval_planar_poly(family: WeightFamily, k: int, z: complex) -> complex:
    """p_k(z)，三项递推的浮点实现"""
    log_abs, phase = eval_planar_poly_log(family, k, z)
    if log_abs == -math.inf:
        return 0j
    if log_abs > 700:
        get_logger().warning("p_k(z) 超出浮点范围，请改用 eval_planar_poly_log",
                             {"k": k, "log_abs": log_abs})
        return complex(math.inf, 0.0)
    return complex(math.exp(log_abs) * math.cos(phase), math.exp(log_abs) * math.sin(phase))


# ---------- Bessel K ----------

def bessel_k(nu: float, x, scaled: bool = False):
    """第二类修正 Bessel 函数 K_ν(x)，x 可为数组；scaled=True 时返回 e^x·K_ν(x)"""
    values = np.asarray(x, dtype=float)
    if np.any(values <= 0):
        raise DomainError(f"K_ν 要求 x > 0: {x}", {"x_min": float(np.min(values))})
    nu = abs(nu)
    result = special.kve(nu, values) if scaled else special.kv(nu, values)
    return float(result) if np.ndim(result) == 0 else result


def bessel_k_integral(nu: float, x: float, t_max: float, n_nodes: int = 256) -> float:
    """∫_0^{t_max} e^{-x cosh t} cosh(νt) dt，用于自洽校验"""
    if x <= 0:
        raise DomainError(f"K_ν 要求 x > 0: {x}", {"x": x})
    nodes, weights = special.roots_legendre(n_nodes)
    t = 0.5 * t_max * (nodes + 1.0)
    values = np.exp(-x * np.cosh(t)) * np.cosh(nu * t)
    return float(0.5 * t_max * np.sum(weights * values))


# ---------- 权重与范数 ----------

def absolute_h0(family: WeightFamily) -> float:
    """h_0 = ∫ ω dA"""
    tau = float(family.tau)
    if isinstance(family, Hermite):
        return math.sqrt(1 - tau * tau)
    if isinstance(family, Laguerre):
        return (1 - tau * tau) / 2 * math.gamma(float(family.nu) + 1)
    if isinstance(family, Gegenbauer):
        return math.sqrt(1 - tau * tau) / (2 * (1 + float(family.a)))
    raise DomainError("未知的权重族", family.describe())


def absolute_norms(family: WeightFamily, k_max: int) -> np.ndarray:
    h0 = absolute_h0(family)
    return np.array([h0 * float(family.norm_ratio(k, 0)) for k in range(k_max + 1)])


def weight(family: WeightFamily, z) -> np.ndarray:
    """ω(z)，向量化"""
    _require_rational(family)
    z = np.asarray(z, dtype=complex)
    tau = float(family.tau)
    x, y = z.real, z.imag
    if isinstance(family, Hermite):
        return np.exp(-(x * x / (1 + tau) + y * y / (1 - tau)))
    if isinstance(family, Laguerre):
        nu = float(family.nu)
        r = np.abs(z)
        # r = 0 处单独取极限，Bessel 参数先换成 1
        big_x = np.where(r > 0, 2 * r / (1 - tau * tau), 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = r ** nu * bessel_k(nu, big_x, scaled=True) * np.exp(-2 * (r - tau * x) / (1 - tau * tau))
        return np.where(r > 0, value, np.inf if nu == 0 else 0.0)
    if isinstance(family, Gegenbauer):
        inside = 1 - 2 * x * x / (1 + tau) - 2 * y * y / (1 - tau)
        return np.where(inside > 0, np.abs(inside) ** float(family.a), 0.0)
    raise DomainError("未知的权重族", family.describe())


class DensityEval:
    """预先计算的 1-点函数求值器"""

    def __init__(self, family: WeightFamily, N: int, component: str):
        _require_rational(family)
        if component not in ("complex", "symplectic"):
            raise DomainError(f"未知的系综类型: {component}")
        self.family = family
        self.N = N
        self.component = component
        self.degree = N - 1 if component == "complex" else 2 * N - 1
        self.norms = absolute_norms(family, self.degree)
        _, self._c = _float_recurrence(family, self.degree)
        if component == "symplectic":
            skew = skew_data(family)
            self.mu = np.array([[float(skew.mu(k, j)) for j in range(N)] for k in range(N)])
            self.skew_norms = np.array([2 * (self.norms[2 * k + 1] - self._c[2 * k + 1] * self.norms[2 * k])
                                        for k in range(N)])

    def kernel_sum(self, z) -> np.ndarray:
        """不含 ω 的部分"""
        z = np.asarray(z, dtype=complex)
        polys = eval_planar_polys(self.family, self.degree, z)
        if self.component == "complex":
            inverse = (1.0 / self.norms).reshape((-1,) + (1,) * z.ndim)
            return np.sum(np.abs(polys) ** 2 * inverse, axis=0)
        evens = polys[0::2]
        odds = polys[1::2]
        # q_{2k} = Σ_j μ_{k,j} p_{2j}
        skew_evens = np.tensordot(self.mu, evens, axes=(1, 0))
        pairs = np.imag(odds * np.conj(skew_evens))
        inverse = (1.0 / self.skew_norms).reshape((-1,) + (1,) * z.ndim)
        return 4 * z.imag * np.sum(pairs * inverse, axis=0)

    def __call__(self, z) -> np.ndarray:
        return weight(self.family, z) * self.kernel_sum(z)


@lru_cache(maxsize=64)
def _density_eval(family: WeightFamily, N: int, component: str) -> DensityEval:
    return DensityEval(family, N, component)


def density(family: WeightFamily, N: int, component: str, z: complex) -> float:
    return float(_density_eval(family, N, component)(np.array([z]))[0])


# ---------- 求积网格 ----------

@dataclass(frozen=True)
class QuadratureGrid:
    n_radial: int = 96
    n_angular: int = 128
    extra_mass: float = 40.0
    panel_nodes: int = 24
    refinement_check: bool = True
    refinement_tolerance: float = 1e-9

    def __post_init__(self):
        if self.n_radial < 32 or self.n_angular < 32:
            raise DomainError("每个方向至少 32 个节点",
                              {"n_radial": self.n_radial, "n_angular": self.n_angular})

    def refined(self) -> "QuadratureGrid":
        return replace(self, n_radial=2 * self.n_radial, n_angular=2 * self.n_angular,
                       panel_nodes=2 * self.panel_nodes, refinement_check=False)

    @classmethod
    def from_config(cls, oracle_config: Dict) -> "QuadratureGrid":
        return cls(n_radial=int(oracle_config.get("n_radial", 96)),
                   n_angular=int(oracle_config.get("n_angular", 128)),
                   extra_mass=float(oracle_config.get("hermite_extra_mass", 40)),
                   refinement_check=bool(oracle_config.get("refinement_check", True)),
                   refinement_tolerance=float(oracle_config.get("refinement_tolerance", 1e-9)))


def _trapezoid_angles(n: int) -> Tuple[np.ndarray, float]:
    return 2 * np.pi * np.arange(n) / n, 2 * np.pi / n


def _legendre_on(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(n)
    return 0.5 * (b - a) * (nodes + 1) + a, 0.5 * (b - a) * weights


def _hermite_nodes(family: Hermite, degree: int, grid: QuadratureGrid):
    tau = float(family.tau)
    radius = math.sqrt(2 * degree + grid.extra_mass)
    n_r = max(grid.n_radial, 2 * degree + 64)
    n_theta = max(grid.n_angular, 2 * degree + 16)
    rho, w_rho = _legendre_on(0.0, radius, n_r)
    theta, w_theta = _trapezoid_angles(n_theta)
    rho_grid, theta_grid = np.meshgrid(rho, theta, indexing="ij")
    z = math.sqrt(1 + tau) * rho_grid * np.cos(theta_grid) + 1j * math.sqrt(1 - tau) * rho_grid * np.sin(theta_grid)
    # ω = e^{-ρ²} 直接并入权重
    w = (w_rho * rho * np.exp(-rho * rho))[:, None] * w_theta * math.sqrt(1 - tau * tau) / np.pi
    return z, w


def _gegenbauer_nodes(family: Gegenbauer, degree: int, grid: QuadratureGrid):
    tau = float(family.tau)
    a = float(family.a)
    n_r = max(grid.n_radial, degree + 32)
    n_theta = max(grid.n_angular, 2 * degree + 16)
    # ∫_0^1 f(ρ)(1-ρ²)^a ρ dρ，t = 2ρ - 1，权重 (1-t)^a (1+t)
    t, w_t = special.roots_jacobi(n_r, a, 1.0)
    rho = (t + 1) / 2
    radial_w = w_t * 2.0 ** (-a - 2) * (1 + rho) ** a
    theta, w_theta = _trapezoid_angles(n_theta)
    rho_grid, theta_grid = np.meshgrid(rho, theta, indexing="ij")
    z = (math.sqrt((1 + tau) / 2) * rho_grid * np.cos(theta_grid)
         + 1j * math.sqrt((1 - tau) / 2) * rho_grid * np.sin(theta_grid))
    w = radial_w[:, None] * w_theta * math.sqrt(1 - tau * tau) / 2 / np.pi
    return z, w


def _graded_radial_nodes(radius: float, scale: float, panel_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """[0, r0] 上几何分级、[r0, R] 上等宽面板的复合 Gauss-Legendre"""
    r0 = min(1.0, radius / 16)
    edges = [r0 * 2.0 ** (-j) for j in range(40, -1, -1)]
    edges = [0.0] + edges
    n_uniform = max(1, int(math.ceil((radius - r0) / scale)))
    edges += list(np.linspace(r0, radius, n_uniform + 1)[1:])
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = _legendre_on(a, b, panel_nodes)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _laguerre_nodes(family: Laguerre, degree: int, grid: QuadratureGrid):
    tau = float(family.tau)
    nu = float(family.nu)
    decay = 2 / (1 + tau)
    total_degree = degree + nu + 2
    radius = (2 * total_degree + grid.extra_mass + 20) / decay
    r, w_r = _graded_radial_nodes(radius, 4 / decay, grid.panel_nodes)
    swing = 2 * tau * radius / (1 - tau * tau)
    n_theta = max(grid.n_angular, int(2 * decay * radius + swing + degree) + 64)
    theta, w_theta = _trapezoid_angles(n_theta)
    r_grid, theta_grid = np.meshgrid(r, theta, indexing="ij")
    z = r_grid * np.exp(1j * theta_grid)
    w = (w_r * r)[:, None] * w_theta / np.pi * weight(family, z)
    return z, w


def quadrature_nodes(family: WeightFamily, degree: int, grid: QuadratureGrid):
    """(z, w)：w 含 Jacobian、1/π 与 ω；degree 为被积多项式的总次数上界"""
    _require_rational(family)
    if isinstance(family, Hermite):
        return _hermite_nodes(family, degree, grid)
    if isinstance(family, Gegenbauer):
        if family.a < 0:
            raise DomainError("Gegenbauer 数值积分要求 a ≥ 0", family.describe())
        return _gegenbauer_nodes(family, degree, grid)
    if isinstance(family, Laguerre):
        if family.nu < 0:
            raise DomainError("Laguerre 数值积分要求 ν ≥ 0", family.describe())
        return _laguerre_nodes(family, degree, grid)
    raise DomainError("未知的权重族", family.describe())


def _real_part(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise QuadratureConvergenceError(f"{what} 的虚部过大: {value.imag:.3e}",
                                         {"real": value.real, "imag": value.imag})
    return float(value.real)


def _with_refinement(compute, grid: QuadratureGrid, what: str, details: Dict) -> float:
    value = compute(grid)
    if grid.refinement_check:
        refined = compute(grid.refined())
        gap = abs(value - refined)
        if gap > grid.refinement_tolerance * max(1.0, abs(refined)):
            raise QuadratureConvergenceError(
                f"{what}: 加密网格结果不一致 ({value!r} vs {refined!r})",
                dict(details, coarse=value, refined=refined, gap=gap),
            )
        value = refined
    return value


def quadrature_moment(family: WeightFamily, p1: int, p2: int, N: int, component: str,
                      grid: Optional[QuadratureGrid] = None) -> float:
    """∫ z^{p1} z̄^{p2} R_{N,1}(z) dA 的数值近似"""
    grid = grid or QuadratureGrid()
    evaluator = _density_eval(family, N, component)
    degree = 2 * evaluator.degree + p1 + p2 + 2

    def compute(g: QuadratureGrid) -> float:
        z, w = quadrature_nodes(family, degree, g)
        integrand = w * evaluator.kernel_sum(z) * z ** p1 * np.conj(z) ** p2
        return _real_part(complex(np.sum(integrand)), "谱矩")

    details = dict(family.describe(), p1=p1, p2=p2, N=N, component=component)
    value = _with_refinement(compute, grid, "quadrature_moment", details)
    get_logger().trace("数值积分谱矩", dict(details, value=value))
    return value


def quadrature_orthogonality(family: WeightFamily, j: int, k: int,
                             grid: Optional[QuadratureGrid] = None) -> float:
    """⟨p_j, p_k⟩ = ∫ p_j conj(p_k) ω dA"""
    if j < 0 or k < 0:
        raise DomainError("下标必须 ≥ 0", {"j": j, "k": k})
    grid = grid or QuadratureGrid()

    def compute(g: QuadratureGrid) -> float:
        z, w = quadrature_nodes(family, j + k + 2, g)
        polys = eval_planar_polys(family, max(j, k), z)
        return _real_part(complex(np.sum(w * polys[j] * np.conj(polys[k]))), "内积")

    return _with_refinement(compute, grid, "quadrature_orthogonality", dict(family.describe(), j=j, k=k))


# ---------- 非厄米 Marchenko-Pastur 律 ----------

@dataclass(frozen=True)
class MPSupport:
    """Ŝ：中心 τ(2+α)，半轴 (1±τ²)√(1+α)"""
    tau: float
    alpha: float

    @property
    def centre(self) -> float:
        return self.tau * (2 + self.alpha)

    @property
    def semi_axes(self) -> Tuple[float, float]:
        root = math.sqrt(1 + self.alpha)
        return (1 + self.tau ** 2) * root, (1 - self.tau ** 2) * root

    def contains(self, x: float, y: float) -> bool:
        big_a, big_b = self.semi_axes
        return ((x - self.centre) / big_a) ** 2 + (y / big_b) ** 2 <= 1

    def ray_length(self, pole: float, theta: np.ndarray) -> np.ndarray:
        big_a, big_b = self.semi_axes
        cos, sin = np.cos(theta), np.sin(theta)
        shift = pole - self.centre
        qa = cos ** 2 / big_a ** 2 + sin ** 2 / big_b ** 2
        qb = 2 * shift * cos / big_a ** 2
        qc = shift ** 2 / big_a ** 2 - 1
        return (-qb + np.sqrt(qb * qb - 4 * qa * qc)) / (2 * qa)


def mp_law_moment_quadrature(p1: int, p2: int, tau: float, alpha: float,
                             grid: Optional[QuadratureGrid] = None) -> float:
    """(1/(1-τ²)) ∫_Ŝ z^{p1} z̄^{p2} / √(4|z|² + (1-τ²)²α²) dA"""
    tau, alpha = float(tau), float(alpha)
    if not 0 <= tau < 1 or alpha < 0:
        raise DomainError("要求 0 ≤ τ < 1, α ≥ 0", {"tau": tau, "alpha": alpha})
    grid = grid or QuadratureGrid()
    support = MPSupport(tau, alpha)
    # 0 在 Ŝ 内时以 0 为极点，r dr 抵消 α = 0 时的 1/|z| 奇点
    pole = 0.0 if support.contains(0.0, 0.0) else support.centre
    kappa = (1 - tau * tau) ** 2 * alpha * alpha

    def compute(g: QuadratureGrid) -> float:
        n_theta = max(g.n_angular, 4 * (p1 + p2) + 64)
        theta, w_theta = _trapezoid_angles(n_theta)
        lengths = support.ray_length(pole, theta)
        s, w_s = special.roots_legendre(g.n_radial)
        unit = 0.5 * (s + 1)
        r = lengths[:, None] * unit[None, :]
        z = pole + r * np.exp(1j * theta)[:, None]
        integrand = z ** p1 * np.conj(z) ** p2 / np.sqrt(4 * np.abs(z) ** 2 + kappa)
        jac = r * (0.5 * lengths)[:, None] * w_s[None, :]
        total = np.sum(integrand * jac, axis=1)
        value = complex(np.sum(total * w_theta)) / np.pi / (1 - tau * tau)
        return _real_part(value, "MP 律矩")

    return _with_refinement(compute, grid, "mp_law_moment_quadrature",
                            {"p1": p1, "p2": p2, "tau": tau, "alpha": alpha})


def oracle_tolerance(family: WeightFamily, tolerances: Optional[Dict[str, float]] = None) -> float:
    defaults = {"hermite": 1e-7, "gegenbauer": 1e-7, "laguerre": 1e-5}
    if tolerances:
        defaults.update(tolerances)
    return float(defaults[family.name])
