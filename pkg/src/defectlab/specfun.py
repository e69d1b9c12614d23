r"""Gamma and the modified Bessel function of the second kind for real order.

:math:`K_\nu` is evaluated from

.. math::
    K_\nu(z) = \int_0^\infty e^{-z\cosh t}\cosh(\nu t)\,dt ,

integrated in the exponentially scaled form
:math:`e^{z}K_\nu(z) = \int_0^T e^{-2z\sinh^2(t/2)}\cosh(\nu t)\,dt + \text{tail}`
with adaptive Gauss-Kronrod panels.  The representation holds for every real
order, so no series/asymptotic switching is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _gk
from .errors import DomainError, PoleError

MAX_ORDER = 5.0
# exp(-z) underflows to 0 for z beyond this
UNDERFLOW_Z = 745.0

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EvalConfig:
    """Accuracy knobs for :func:`bessel_k`.

    ``truncation_margin`` is the extra factor (as a natural log) by which the
    integrand at the truncation point must fall below ``rel_tol``.
    """

    rel_tol: float = 1e-12
    max_panels: int = 400
    truncation_margin: float = 6.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_panels < 8:
            raise ValueError("max_panels must be at least 8")
        if self.truncation_margin < 0:
            raise ValueError("truncation_margin must be non-negative")


DEFAULT_CONFIG = EvalConfig()


class BesselKInfo(NamedTuple):
    error_estimate: np.ndarray
    underflow: np.ndarray
    panels_used: int
    truncation: float


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real ``x``; reflection is used below 1/2."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x = {x:g}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + k)
    t = x + _LANCZOS_G + 0.5
    if x < 140.0:
        return _SQRT_2PI * t ** (x + 0.5) * math.exp(-t) * acc
    # split the power so it does not overflow before the exponential damps it
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def gamma_reflection(nu: float) -> tuple[float, float]:
    """Both sides of Gamma(nu) Gamma(1 - nu) = pi / sin(pi nu) for 0 < nu < 1."""
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise DomainError(f"reflection check needs 0 < nu < 1, got {nu}")
    return gamma(nu) * gamma(1.0 - nu), math.pi / math.sin(math.pi * nu)


def _log_integrand(t, nu, z):
    # log of exp(nu t - z (cosh t - 1)), the dominant half of the scaled integrand
    return nu * t - 2.0 * z * np.sinh(0.5 * t) ** 2


def _truncation_point(nu: np.ndarray, z: np.ndarray, cfg: EvalConfig) -> float:
    """Smallest common T past every integrand peak where the integrand has
    dropped by rel_tol * exp(-truncation_margin) relative to that peak."""
    drop = math.log(cfg.rel_tol) - cfg.truncation_margin
    t_peak = np.arcsinh(nu / z)
    peak = _log_integrand(t_peak, nu, z)
    lo = t_peak.copy()
    hi = t_peak + 1.0
    while True:
        above = _log_integrand(hi, nu, z) - peak > drop
        if not above.any():
            break
        lo = np.where(above, hi, lo)
        hi = np.where(above, 2.0 * hi, hi)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        above = _log_integrand(mid, nu, z) - peak > drop
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return max(1.0, float(hi.max()))


def bessel_k(nu, z, cfg: EvalConfig | None = None, *, full_output: bool = False):
    r"""Modified Bessel function of the second kind :math:`K_\nu(z)`.

    Parameters
    ----------
    nu : float or array_like
        Real order with ``|nu| <= 5``.  ``K_{-nu} = K_nu`` exactly, because
        the order is replaced by ``|nu|`` before anything is computed.
    z : float or array_like
        Positive argument.  ``nu`` and ``z`` are broadcast together and all
        entries share a single panel partition.
    cfg : EvalConfig, optional
        Tolerance and panel budget.
    full_output : bool
        Also return a :class:`BesselKInfo` with per-entry error estimates and
        an ``underflow`` mask.  Entries whose ``e^{-z}`` factor underflows are
        returned as 0.0 and flagged there instead of raising.

    Raises
    ------
    DomainError
        If any ``z <= 0`` or ``|nu| > 5``.
    NonConvergenceError
        If the panel budget is exhausted.
    """
    cfg = cfg or DEFAULT_CONFIG
    nu_arr, z_arr = np.broadcast_arrays(np.abs(np.asarray(nu, dtype=float)),
                                        np.asarray(z, dtype=float))
    shape = nu_arr.shape
    nu_f = nu_arr.ravel().copy()
    z_f = z_arr.ravel().copy()
    if np.any(~np.isfinite(z_f)) or np.any(z_f <= 0):
        raise DomainError("bessel_k requires z > 0")
    if np.any(~np.isfinite(nu_f)) or np.any(nu_f > MAX_ORDER):
        raise DomainError(f"bessel_k supports |nu| <= {MAX_ORDER:g}")

    under = z_f > UNDERFLOW_Z
    value = np.zeros_like(z_f)
    err = np.zeros_like(z_f)
    panels = 0
    T = 0.0
    live = ~under
    if np.any(live):
        nl, zl = nu_f[live], z_f[live]
        T = _truncation_point(nl, zl, cfg)

        def integrand(t):
            t = t[:, None]
            damp = -2.0 * zl * np.sinh(0.5 * t) ** 2
            return 0.5 * (np.exp(nl * t + damp) + np.exp(-nl * t + damp))

        cuts = np.linspace(0.0, T, 9)
        scaled, scaled_err, panels = _gk.adaptive(
            [(integrand, cuts)], rel_tol=0.1 * cfg.rel_tol, max_panels=cfg.max_panels)
        # tail past T: log-integrand slope is at most nu - z sinh T there
        slope = zl * np.sinh(T) - nl
        edge = integrand(np.array([T]))[0]
        tail = np.where(slope > 0, edge / np.where(slope > 0, slope, 1.0), np.inf)
        factor = np.exp(-zl)
        value[live] = scaled * factor
        err[live] = (scaled_err + tail) * factor
    value = value.reshape(shape)
    if not full_output:
        return value if shape else float(value)
    info = BesselKInfo(err.reshape(shape), under.reshape(shape), panels, T)
    return (value if shape else float(value)), info


def bessel_k_ode_residual(nu: float, r: float, h: float,
                          cfg: EvalConfig | None = None) -> float:
    """|(1/r)(r u')' - (nu^2/r^2) u - u| for u = K_nu by central differences.

    The three stencil values come from one vectorised call, so they share a
    panel partition and the quadrature error does not pollute the stencil.
    """
    if h <= 0:
        raise DomainError("step h must be positive")
    if r - 2.0 * h <= 0:
        raise DomainError(f"stencil leaves the half line: r - 2h = {r - 2*h:g} <= 0")
    cfg = cfg or EvalConfig(rel_tol=1e-14)
    um, u0, up = bessel_k(nu, np.array([r - h, r, r + h]), cfg)
    d2 = (up - 2.0 * u0 + um) / h**2
    d1 = (up - um) / (2.0 * h)
    return abs(d2 + d1 / r - (nu * nu / (r * r) + 1.0) * u0)
