r"""Adaptive quadrature on finite and half-infinite intervals, and the three
Bessel-K integral identities checked with it.

Identities
----------
* norm identity   :math:`\int_0^\infty K_\nu(z)^2 z\,dz = \tfrac12\,\pi\nu/\sin\pi\nu`, :math:`|\nu|<1`
* Nicholson       :math:`K_\nu(z)^2 = 2\int_0^\infty K_{2\nu}(2z\cosh t)\,dt`
* Mellin          :math:`\int_0^\infty K_\nu(z) z^{\beta-1} dz = 2^{\beta-2}\Gamma(\tfrac{\beta+\nu}2)\Gamma(\tfrac{\beta-\nu}2)`
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import _gk
from .errors import DomainError
from .specfun import EvalConfig, bessel_k, gamma

# Grading for integrable endpoint singularities: first panel edge sits at or below this.
SINGULAR_CUTOFF = 1e-10
# deeper than this, K_nu^2 near nu = 1 overflows; the sliver error then reports the shortfall
MAX_GRADING_DECADES = 100
TINY = 1e-300

_K_CFG = EvalConfig(rel_tol=1e-13)


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    error_estimate: float | np.ndarray
    panels_used: int


@dataclass
class IdentityReport:
    """Both sides of one identity check; ``rel_err = |lhs - rhs| / max(|rhs|, tiny)``."""

    name: str
    lhs: float
    rhs: float
    rel_err: float
    tol: float
    params: dict[str, Any] = field(default_factory=dict)
    lhs_error_estimate: float = 0.0

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol

    def as_record(self) -> dict[str, Any]:
        rec = asdict(self)
        rec["pass"] = self.passed
        return rec


def relative_error(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(rhs), TINY)


def singular_cutoff(alpha: float, tol: float) -> float:
    """Decade 10^-k where grading toward an (z-a)^alpha singularity stops.

    At least 1e-10; deeper when alpha is close to -1, so that the untreated
    sliver, of size ~ d^(alpha+1), stays about 100x below ``tol``.
    """
    p = alpha + 1.0
    k = max(10, math.ceil(math.log10(100.0 / tol) / p))
    return 10.0 ** -min(k, MAX_GRADING_DECADES)


def _graded_cuts(a: float, b: float, cutoff: float) -> list[float]:
    """a + cutoff, a + 10*cutoff, ... up to b (decade grading toward a)."""
    cuts = []
    x = cutoff
    while a + x < b and x < 1.0:
        cuts.append(a + x)
        x *= 10.0
    cuts.append(b)
    return cuts


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    decay_rate: float | None = None,
    singular_exponent: float | np.ndarray | None = None,
    tail_start: float | None = None,
    max_panels: int = 600,
) -> QuadResult:
    r"""Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``f`` is called with a 1-D array of abscissae and may return one value per
    abscissa or a row of ``m`` values per abscissa (vector integrand).

    Parameters
    ----------
    b : float
        May be ``math.inf``; then ``decay_rate`` is required and the tail
        ``[T, inf)`` is mapped onto ``(0, 1]`` by ``z = T - log(u)/decay_rate``.
        The integrand must decay at least like ``exp(-decay_rate * z)``.
    singular_exponent : float or array, optional
        Caller's local model ``f(z) ~ C (z - a)^alpha`` near ``a`` (alpha > -1).
        Panels are graded by decades down to ``a + d`` with ``d <= 1e-10``
        chosen by :func:`singular_cutoff`; the sliver ``[a, a + d]`` is
        integrated from a fitted power-log model and counted in full in the
        error estimate.
    tail_start : float, optional
        Override the default ``T = a + 8 / decay_rate``.

    Raises
    ------
    NonConvergenceError
        When ``max_panels`` is exhausted above tolerance.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not b > a:
        raise ValueError("integrate requires b > a")
    infinite = math.isinf(b)
    if infinite and not (decay_rate and decay_rate > 0):
        raise ValueError("a semi-infinite interval needs a positive decay_rate")

    start = a
    sliver_val = sliver_err = 0.0
    if singular_exponent is not None:
        alpha = np.asarray(singular_exponent, dtype=float)
        if np.any(alpha <= -1):
            raise DomainError("singular_exponent must exceed -1 for integrability")
        d = singular_cutoff(float(np.min(alpha)), tol)
        fx = np.asarray(f(a + d * np.array([1.0, 2.0, 4.0])), dtype=float)
        # local model (z-a)^alpha (A + B log(z-a)); the log term covers K_0-type behaviour
        g = fx / (d * np.array([1.0, 2.0, 4.0])).reshape((3,) + (1,) * (fx.ndim - 1)) ** alpha
        B = (g[1] - g[0]) / math.log(2.0)
        A = g[0] - B * math.log(d)
        p = alpha + 1.0
        sliver_val = d**p / p * (A + B * (math.log(d) - 1.0 / p))
        # the model is only trusted for its size: charge the whole sliver as error
        sliver_err = np.abs(sliver_val)
        start = a + d

    finite_end = b
    if infinite:
        T = tail_start if tail_start is not None else a + 8.0 / decay_rate
        finite_end = max(T, start + 1.0 / decay_rate)

    if singular_exponent is not None:
        cuts = _graded_cuts(a, finite_end, d)
    else:
        cuts = list(np.linspace(start, finite_end, 5))
    pieces = [(f, cuts)]

    if infinite:
        c = float(decay_rate)

        def tail(u, _T=finite_end):
            z = _T - np.log(u) / c
            fz = np.asarray(f(z), dtype=float)
            jac = 1.0 / (c * u)
            return fz * (jac[:, None] if fz.ndim == 2 else jac)

        pieces.append((tail, [0.0, 0.5, 1.0]))

    scalar = np.ndim(f(np.array([0.5 * (cuts[0] + cuts[1])]))) == 1
    value, err, used = _gk.adaptive(pieces, rel_tol=tol, abs_tol=0.0, max_panels=max_panels)
    value = value + sliver_val
    err = err + sliver_err
    if scalar:
        return QuadResult(float(value[0]), float(err[0]), used)
    return QuadResult(value, err, used)


def kv_norm_rhs(nu: float) -> float:
    """½·πν/sin(πν), with its limit ½ at ν = 0."""
    return 0.5 / float(np.sinc(nu))


def kv_norm_integral(nu, tol: float = 1e-11) -> QuadResult:
    """Quadrature of ∫₀^∞ K_ν(z)² z dz for one order or a vector of orders."""
    nus = np.abs(np.atleast_1d(np.asarray(nu, dtype=float)))
    if np.any(nus >= 1.0):
        raise DomainError("the K_nu norm integral diverges for |nu| >= 1")

    def g(z):
        k = bessel_k(nus[None, :], z[:, None], _K_CFG)
        return k * k * z[:, None]

    res = integrate(g, 0.0, math.inf, tol, decay_rate=2.0,
                    singular_exponent=1.0 - 2.0 * nus)
    if np.ndim(nu) == 0:
        return QuadResult(float(res.value[0]), float(res.error_estimate[0]), res.panels_used)
    return res


def _kv_norm_fubini(nu: float, tol: float) -> QuadResult:
    # 2 ∫₀^∞ (∫₀^∞ K_{2ν}(2z cosh t) z dz) dt with the inner integral by quadrature
    two_nu = 2.0 * abs(nu)

    def inner(t):
        # all t-nodes of a panel at once; every integrand decays at least like e^{-2z}
        s = 2.0 * np.cosh(t)
        res = integrate(lambda z: bessel_k(two_nu, s[None, :] * z[:, None], _K_CFG) * z[:, None],
                        0.0, math.inf, 0.1 * tol, decay_rate=2.0,
                        singular_exponent=np.full(t.shape, 1.0 - two_nu))
        return 2.0 * np.asarray(res.value)

    return integrate(inner, 0.0, math.inf, tol, decay_rate=2.0)


def verify_kv_identity(nu: float, tol: float = 1e-8, mode: str = "direct") -> IdentityReport:
    """Check ∫₀^∞ K_ν(z)² z dz = ½πν/sin πν for 0 < |ν| < 1.

    ``mode="direct"`` integrates K_ν² z itself; ``mode="fubini"`` goes through
    Nicholson's formula, integrating first in z and then in t.
    """
    nu = float(nu)
    if not 0.0 < abs(nu) < 1.0:
        raise DomainError(f"norm identity needs 0 < |nu| < 1, got {nu}")
    if mode == "direct":
        res = kv_norm_integral(nu, tol=min(1e-11, 0.01 * tol))
    elif mode == "fubini":
        res = _kv_norm_fubini(nu, tol=min(1e-10, 0.1 * tol))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rhs = kv_norm_rhs(nu)
    return IdentityReport("kv_norm", res.value, rhs, relative_error(res.value, rhs), tol,
                          {"nu": nu, "mode": mode}, float(res.error_estimate))


def nicholson_rhs(nu: float, z: float, tol: float = 1e-10) -> QuadResult:
    """2∫₀^∞ K_{2ν}(2z cosh t) dt by quadrature."""
    two_nu = 2.0 * float(nu)

    def g(t):
        return 2.0 * bessel_k(two_nu, 2.0 * z * np.cosh(t), _K_CFG)

    # the integrand decays like exp(-z e^t); the declared rate only shapes the tail map
    return integrate(g, 0.0, math.inf, tol, decay_rate=1.0)


def verify_nicholson(nu: float, z: float, tol: float = 1e-6) -> IdentityReport:
    """Check K_ν(z)² = 2∫₀^∞ K_{2ν}(2z cosh t) dt, left side from :func:`bessel_k`."""
    nu, z = float(nu), float(z)
    if abs(2.0 * nu) > 5.0:
        raise DomainError("Nicholson check needs |2 nu| <= 5")
    if not z > 0:
        raise DomainError("Nicholson check needs z > 0")
    k = bessel_k(nu, z, _K_CFG)
    res = nicholson_rhs(nu, z, tol=min(1e-10, 0.01 * tol))
    lhs = k * k
    return IdentityReport("nicholson", lhs, float(res.value), relative_error(lhs, res.value), tol,
                          {"nu": nu, "z": z}, float(res.error_estimate))


def mellin_rhs(nu: float, beta: float, scale: float = 1.0) -> float:
    """scale^{-β}·2^{β-2}Γ((β+ν)/2)Γ((β-ν)/2)."""
    return scale ** (-beta) * 2.0 ** (beta - 2.0) * gamma(0.5 * (beta + nu)) * gamma(0.5 * (beta - nu))


def verify_mellin(nu: float, beta: float, tol: float = 1e-8, scale: float = 1.0) -> IdentityReport:
    """Check ∫₀^∞ K_ν(scale·z) z^{β-1} dz against the Gamma product.

    ``scale = 2 cosh t`` reproduces the inner integral of the Fubini step of
    the norm identity (at ``beta = 2``).
    """
    nu, beta, scale = float(nu), float(beta), float(scale)
    if not beta > abs(nu):
        raise DomainError(f"Mellin identity needs beta > |nu|, got beta={beta}, nu={nu}")
    if not scale > 0:
        raise DomainError("scale must be positive")

    def g(z):
        return bessel_k(nu, scale * z, _K_CFG) * z ** (beta - 1.0)

    res = integrate(g, 0.0, math.inf, min(1e-11, 0.01 * tol), decay_rate=scale,
                    singular_exponent=beta - 1.0 - abs(nu))
    rhs = mellin_rhs(nu, beta, scale)
    return IdentityReport("mellin", res.value, rhs, relative_error(res.value, rhs), tol,
                          {"nu": nu, "beta": beta, "scale": scale}, float(res.error_estimate))
