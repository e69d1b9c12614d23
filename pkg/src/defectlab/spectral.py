"""Angular mode decomposition of the Laplacian on covers of the punctured plane.

Each angular mode of ``Delta psi = psi`` reduces to the modified Bessel
equation of order ``nu`` in ``r``.  Its L^2-at-infinity solution is ``K_nu``,
which is square integrable near ``r = 0`` against ``r dr`` exactly when the
origin is limit circle (``nu < 1``).  Those modes span the defect space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .quad import integrate, kv_norm_integral, kv_norm_rhs, relative_error
from .specfun import EvalConfig, bessel_k

# K values feeding finite-difference stencils need to be smooth in r
STENCIL_CFG = EvalConfig(rel_tol=1e-14)
XI_MARGIN = 1e-3


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n: int
    spacing: str = "uniform"

    def __post_init__(self):
        if not self.r_min > 0:
            raise ValueError("r_min must be positive")
        if not self.r_max > self.r_min:
            raise ValueError("r_max must exceed r_min")
        if self.n < 16:
            raise ValueError("a radial grid needs at least 16 points")
        if self.spacing not in ("uniform", "log"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    @classmethod
    def with_step(cls, r_min: float, r_max: float, h: float) -> "RadialGrid":
        """Uniform grid whose step is ``h`` (r_max is rounded onto the grid)."""
        n = int(round((r_max - r_min) / h)) + 1
        return cls(r_min, r_min + (n - 1) * h, n)

    @property
    def points(self) -> np.ndarray:
        if self.spacing == "uniform":
            return np.linspace(self.r_min, self.r_max, self.n)
        return np.geomspace(self.r_min, self.r_max, self.n)

    @property
    def step(self) -> float:
        """Largest spacing on the grid."""
        return float(np.diff(self.points).max())


def _derivatives(r: np.ndarray, u: np.ndarray):
    """Three-point first and second derivatives at interior nodes of any grid."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    um, u0, up = u[:-2], u[1:-1], u[2:]
    d1 = (hm**2 * up - hp**2 * um + (hp**2 - hm**2) * u0) / (hm * hp * (hm + hp))
    d2 = 2.0 * (hm * up - (hm + hp) * u0 + hp * um) / (hm * hp * (hm + hp))
    return d1, d2


def _check_grid(nu: float, grid: RadialGrid):
    if not 0.0 <= nu <= 5.0:
        raise DomainError("mode order must lie in [0, 5]")
    if grid.r_min < 0.05:
        raise DomainError("residual grids must start at r_min >= 0.05")


def radial_profile(nu: float, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    r = grid.points
    return r, bessel_k(nu, r, STENCIL_CFG)


def radial_defect_residual(nu: float, grid: RadialGrid) -> float:
    """max |(1/r)(r u')' - (nu^2/r^2) u - u| over interior nodes, u = K_nu."""
    _check_grid(nu, grid)
    r, u = radial_profile(nu, grid)
    d1, d2 = _derivatives(r, u)
    ri = r[1:-1]
    return float(np.max(np.abs(d2 + d1 / ri - (nu * nu / ri**2 + 1.0) * u[1:-1])))


def weight_transform_residual(nu: float, grid: RadialGrid) -> float:
    """Same equation after u -> sqrt(r) u: max |v'' - ((nu^2 - 1/4)/r^2) v - v|."""
    _check_grid(nu, grid)
    r, u = radial_profile(nu, grid)
    v = np.sqrt(r) * u
    _, d2 = _derivatives(r, v)
    ri = r[1:-1]
    return float(np.max(np.abs(d2 - ((nu * nu - 0.25) / ri**2 + 1.0) * v[1:-1])))


class Endpoint(enum.Enum):
    LIMIT_CIRCLE = "LimitCircle"
    LIMIT_POINT = "LimitPoint"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EndpointTest:
    """Evidence behind a limit-point / limit-circle call at r = 0.

    ``chunk_ratio`` is J_1 / J_0 for consecutive chunks of
    ``∫ r |y_2(r)|^2 dr`` written in ``s = -log r``; a ratio below one means
    the chunks shrink geometrically and the second solution is L^2 near 0.
    """

    nu: float
    kind: Endpoint
    chunk_width: float
    chunk_ratio: float


# chunks must shrink by at least this factor to count as decaying
_RATIO_MARGIN = 1e-6


def lp_lc_test(nu: float) -> EndpointTest:
    """Classify r = 0 for the order-nu Bessel operator from the second solution.

    The second Frobenius solution is ``r^-nu`` (``log r`` at nu = 0).  In
    ``s = -log r`` the measure ``r dr`` becomes ``e^{-2s} ds``, so the
    integrand is ``e^{-(2 - 2 nu) s}`` (``s^2 e^{-2s}`` at nu = 0).  The chunk
    width is scaled so that a decaying integrand shrinks by ~e^-20 per chunk,
    which keeps the test decisive down to ``1 - nu`` of a few ulps.
    """
    nu = float(nu)
    if not nu >= 0 or not math.isfinite(nu):
        raise DomainError(f"mode order must be finite and >= 0, got {nu}")
    a = 2.0 - 2.0 * nu
    if nu == 0.0:
        width = 10.0
        g = lambda s: s * s * np.exp(-2.0 * s)
    else:
        width = min(1e12, 20.0 / abs(a)) if a != 0 else 1e12
        g = lambda s: np.exp(-a * s)
    j0 = integrate(g, 0.0, width, 1e-12).value
    j1 = integrate(g, width, 2.0 * width, 1e-12).value
    ratio = j1 / j0
    kind = Endpoint.LIMIT_CIRCLE if ratio < 1.0 - _RATIO_MARGIN else Endpoint.LIMIT_POINT
    return EndpointTest(nu, kind, width, ratio)


def lp_lc_classify(nu: float) -> Endpoint:
    return lp_lc_test(abs(nu)).kind


@dataclass(frozen=True)
class DefectBasisElement:
    """``K_nu(r) exp(i * sign * nu * theta)`` with ``nu = k/N``; sign 0 only for k = 0."""

    k: int
    N: int
    sign: int

    @property
    def nu(self) -> float:
        return self.k / self.N

    @property
    def label(self) -> str:
        return f"k={self.k}" + {0: "", 1: "+", -1: "-"}[self.sign]

    def evaluate(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return bessel_k(self.nu, r) * np.exp(1j * self.sign * self.nu * theta)

    def to_json(self) -> dict:
        return {"k": self.k, "N": self.N, "nu": self.nu, "sign": self.sign, "label": self.label}


def defect_basis_finite(N: int) -> list[DefectBasisElement]:
    """Defect solutions of ``Delta psi = psi`` on the N-fold cover."""
    if int(N) != N or N < 1:
        raise DomainError(f"cover degree must be an integer >= 1, got {N}")
    N = int(N)
    basis = [DefectBasisElement(0, N, 0)]
    for k in range(1, N):
        basis += [DefectBasisElement(k, N, +1), DefectBasisElement(k, N, -1)]
    return basis


def defect_dimension(N: int) -> int:
    """Number of angular modes e^{i k theta / N}, k in Z, whose origin is limit circle."""
    if int(N) != N or N < 1:
        raise DomainError(f"cover degree must be an integer >= 1, got {N}")
    count = 0
    k = 0
    # orders grow with |k|, so the first limit-point mode ends the count
    while lp_lc_classify(k / N) is Endpoint.LIMIT_CIRCLE:
        count += 1 if k == 0 else 2
        k += 1
    return count


def xi_grid(n: int, margin: float = XI_MARGIN) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (-1 + margin, 1 - margin)."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 1.0 - margin
    return half * x, half * w


@dataclass(frozen=True)
class GFunction:
    """Samples of a profile g(xi) on the xi-grid, with g vanishing outside ``support``."""

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    support: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.support
        if not -1.0 < lo < hi < 1.0:
            raise DomainError(f"g must be supported strictly inside (-1, 1), got {self.support}")
        outside = (self.nodes <= lo) | (self.nodes >= hi)
        if np.any(self.values[outside] != 0):
            raise DomainError("g has non-zero samples outside its declared support")

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], support: tuple[float, float],
                      n: int = 256) -> "GFunction":
        x, w = xi_grid(n)
        lo, hi = support
        inside = (x > lo) & (x < hi)
        vals = np.zeros(n, dtype=complex)
        vals[inside] = fn(x[inside])
        return cls(x, w, vals, (float(lo), float(hi)))

    @classmethod
    def bump(cls, center: float = 0.0, half_width: float = 0.5, amplitude: complex = 1.0,
             n: int = 256) -> "GFunction":
        """amplitude * exp(-1/(1 - u^2)), u = (xi - center)/half_width."""
        def fn(x):
            u = (x - center) / half_width
            return amplitude * np.exp(-1.0 / (1.0 - u * u))
        return cls.from_callable(fn, (center - half_width, center + half_width), n)

    @classmethod
    def zero(cls, n: int = 256) -> "GFunction":
        x, w = xi_grid(n)
        return cls(x, w, np.zeros(n, dtype=complex), (-0.5, 0.5))

    @property
    def active(self) -> np.ndarray:
        return self.values != 0


def synthesize_defect(g: GFunction, r, theta) -> np.ndarray:
    """psi(r, theta) = (1/2pi) ∫ g(xi) K_xi(r) e^{i xi theta} dxi on the xi-grid."""
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    out = np.zeros(r.shape, dtype=complex)
    act = g.active
    if not act.any():
        return out
    xi, w, gv = g.nodes[act], g.weights[act], g.values[act]
    rf, tf = r.ravel(), theta.ravel()
    k = bessel_k(xi[None, :], rf[:, None])
    phase = np.exp(1j * xi[None, :] * tf[:, None])
    out = (k * phase) @ (w * gv) / (2.0 * math.pi)
    return out.reshape(r.shape)


@dataclass(frozen=True)
class ParsevalReport:
    direct: float
    weighted: float
    rel_err: float
    tol: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol


def defect_norm_parseval(g: GFunction, tol: float = 1e-6) -> ParsevalReport:
    """Two routes to ∫ |g(xi)|^2 ∫_0^∞ K_xi(r)^2 r dr dxi.

    ``direct`` does the radial integral by quadrature at every active
    xi-node and sums with the xi-grid weights.  ``weighted`` replaces the
    radial integral by its closed form ½ pi xi / sin(pi xi).  Both routes
    use the same xi-grid, so their difference isolates the radial factor.
    """
    act = g.active
    if not act.any():
        return ParsevalReport(0.0, 0.0, 0.0, tol)
    xi, w, gv = g.nodes[act], g.weights[act], g.values[act]
    radial = kv_norm_integral(xi, tol=1e-11).value
    direct = float(np.sum(w * np.abs(gv) ** 2 * radial))
    weighted = float(np.sum(w * np.abs(gv) ** 2 * np.array([kv_norm_rhs(x) for x in xi])))
    return ParsevalReport(direct, weighted, relative_error(direct, weighted), tol)
