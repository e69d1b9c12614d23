"""Globally adaptive Gauss-Kronrod (7, 15) panel integration.

The integrand is evaluated on a whole panel at once and may be vector valued:
``g(x)`` receives the 15 Kronrod nodes as a 1-D array and returns an array of
shape ``(15,)`` or ``(15, m)``.  All ``m`` components share one panel
partition, so the quadrature error is a smooth function of any parameter the
components depend on.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergenceError

# QUADPACK qk15 abscissae / weights, positive half, last entry is the centre.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point node set on [-1, 1], ordered left to right.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss 7-point weights scattered onto the 15-point layout (zero at Kronrod-only nodes).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]

Integrand = Callable[[np.ndarray], np.ndarray]


def panel(g: Integrand, a: float, b: float):
    """Kronrod value, |K15 - G7| error and K15 of |g| on one panel."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(g(mid + half * NODES), dtype=float)
    if fx.ndim == 1:
        fx = fx[:, None]
    kron = half * (KRONROD_WEIGHTS @ fx)
    gauss = half * (GAUSS_WEIGHTS @ fx)
    resabs = abs(half) * (KRONROD_WEIGHTS @ np.abs(fx))
    return kron, np.abs(kron - gauss), resabs


def adaptive(
    pieces: Sequence[tuple[Integrand, Sequence[float]]],
    rel_tol: float,
    abs_tol: float = 0.0,
    max_panels: int = 500,
):
    """Integrate a sum of pieces, each with its own integrand and breakpoints.

    Returns ``(value, error, panels_used)`` with ``value`` and ``error`` of
    shape ``(m,)``.  Raises :class:`NonConvergenceError` when ``max_panels``
    is exhausted or the worst panel cannot be bisected any further.
    """
    lefts, rights, owners, vals, errs = [], [], [], [], []
    for idx, (g, cuts) in enumerate(pieces):
        cuts = list(cuts)
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b == a:
                continue
            v, e, _ = panel(g, a, b)
            lefts.append(a)
            rights.append(b)
            owners.append(idx)
            vals.append(v)
            errs.append(e)
    if not vals:
        raise ValueError("no non-empty panels to integrate")
    if len(vals) > max_panels:
        raise ValueError(f"{len(vals)} initial panels exceed max_panels={max_panels}")

    V = np.array(vals)
    E = np.array(errs)
    while True:
        total = V.sum(axis=0)
        err = E.sum(axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(err <= tol):
            return total, err, len(lefts)
        # worst panel relative to each component's own tolerance
        scale = np.where(tol > 0, tol, np.finfo(float).tiny)
        worst = int(np.argmax((E / scale).max(axis=1)))
        a, b, idx = lefts[worst], rights[worst], owners[worst]
        mid = 0.5 * (a + b)
        if len(lefts) >= max_panels or not (a < mid < b) or abs(b - a) <= 1e-13 * max(abs(a), abs(b), 1e-300):
            raise NonConvergenceError(
                f"adaptive quadrature did not converge: error {err.max():.3e} > tolerance "
                f"{tol.min():.3e} after {len(lefts)} panels",
                value=total, error_estimate=err, panels_used=len(lefts),
            )
        g = pieces[idx][0]
        v1, e1, _ = panel(g, a, mid)
        v2, e2, _ = panel(g, mid, b)
        rights[worst] = mid
        V[worst], E[worst] = v1, e1
        lefts.append(mid)
        rights.append(b)
        owners.append(idx)
        V = np.vstack([V, v2])
        E = np.vstack([E, e2])
