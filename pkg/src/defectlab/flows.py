"""Lifted translation groups acting on bump states of L^2 of a cover.

Convention: ``(U_j(t) f)(x) = f(x - t e_j)``, so supports move by ``+t e_j``.

A state is a finite list of smooth compactly supported bumps.  Translations
transport bump centres exactly along lifted paths; nothing is interpolated,
so isometry and sheet bookkeeping are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .cover import (CLEARANCE_FRACTION, TWO_PI, CoverSpec, SurfacePoint,
                    lift_translation, segment_distance, winding_of_loop)
from .errors import PunctureError
from .quad import integrate


def bump_profile(s):
    """exp(-1/(1 - s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


# ∫ profile(|u|)^2 d^2u over the unit disk
PROFILE_NORM2 = 2.0 * math.pi * integrate(lambda s: bump_profile(s) ** 2 * s, 0.0, 1.0, 1e-14).value

# polar overlap rule on the unit disk: composite Gauss-Legendre in s, trapezoid in angle
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_RAD_PANELS = 8
_RAD_S = np.concatenate([(k + 0.5 * (_GL_X + 1)) / _RAD_PANELS for k in range(_RAD_PANELS)])
_RAD_W = np.tile(_GL_W / (2 * _RAD_PANELS), _RAD_PANELS)
_N_ANG = 192
_ANG = TWO_PI * np.arange(_N_ANG) / _N_ANG


@dataclass(frozen=True)
class Bump:
    """Unit-norm (at weight 1) smooth bump of the given radius on the cover."""

    center: SurfacePoint
    radius: float
    weight: complex = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("bump radius must be positive")
        if not self.center.r > self.radius:
            raise ValueError(
                f"bump support reaches the puncture: center r={self.center.r} <= radius={self.radius}")
        object.__setattr__(self, "weight", complex(self.weight))

    def value_at(self, x1, x2):
        """Planar values of the bump on its own local branch."""
        c1, c2 = self.center.planar
        d = np.hypot(np.asarray(x1) - c1, np.asarray(x2) - c2) / self.radius
        return self.weight * bump_profile(d) / (self.radius * math.sqrt(PROFILE_NORM2))

    def moved(self, center: SurfacePoint) -> "Bump":
        return replace(self, center=center)

    def to_json(self) -> dict:
        w = self.weight
        return {"r": self.center.r, "theta_lift": self.center.theta_lift,
                "sheet": self.center.sheet, "radius": self.radius,
                "weight": [w.real, w.imag]}


@dataclass(frozen=True)
class StateFn:
    bumps: tuple[Bump, ...]
    cover: CoverSpec = field(default_factory=CoverSpec.infinite)

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        for i, b in enumerate(self.bumps):
            if b.center.cover != self.cover:
                raise ValueError(f"bump {i} lives on cover {b.center.cover}, state on {self.cover}")

    @classmethod
    def single(cls, r: float, theta_lift: float, radius: float, weight: complex = 1.0,
               cover: CoverSpec | None = None) -> "StateFn":
        cover = cover or CoverSpec.infinite()
        return cls((Bump(SurfacePoint.from_lift(r, theta_lift, cover), radius, weight),), cover)

    @property
    def sheets(self) -> list[int]:
        return [b.center.sheet for b in self.bumps]

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def to_json(self) -> dict:
        return {"cover": self.cover.to_json(), "bumps": [b.to_json() for b in self.bumps]}


def _same_local_branch(p: SurfacePoint, q: SurfacePoint) -> bool:
    """Whether overlapping planar disks around p and q are lifted to the same branch.

    For overlapping disks that avoid the origin the centre-to-centre segment
    avoids it too, so the lifted angle difference must equal the principal
    planar angle difference.
    """
    diff = q.angle - p.angle
    wrap = 0 if abs(diff) <= math.pi else (-1 if diff > 0 else 1)
    k = (q.sheet - p.sheet) - wrap
    return p.cover.reduce_sheet(k) == 0


def _overlap(a: Bump, b: Bump) -> float:
    """∫ profile_a * profile_b over the plane for unit weights."""
    if a.center.same_point(b.center) and a.radius == b.radius:
        return 1.0
    (a1, a2), (b1, b2) = a.center.planar, b.center.planar
    if math.hypot(a1 - b1, a2 - b2) >= a.radius + b.radius:
        return 0.0
    if not _same_local_branch(a.center, b.center):
        return 0.0
    small, big = (a, b) if a.radius <= b.radius else (b, a)
    (s1, s2), (g1, g2) = small.center.planar, big.center.planar
    R = small.radius
    x = s1 + R * _RAD_S[:, None] * np.cos(_ANG)[None, :]
    y = s2 + R * _RAD_S[:, None] * np.sin(_ANG)[None, :]
    f_small = bump_profile(_RAD_S)[:, None] / (R * math.sqrt(PROFILE_NORM2))
    f_big = bump_profile(np.hypot(x - g1, y - g2) / big.radius) / (big.radius * math.sqrt(PROFILE_NORM2))
    integrand = f_small * f_big * _RAD_S[:, None]
    return float(R * R * (TWO_PI / _N_ANG) * (_RAD_W @ integrand.sum(axis=1)))


def inner_product(f: StateFn, g: StateFn) -> complex:
    """<f, g> in L^2 of the cover, conjugate-linear in ``f``.

    Bump pairs whose lifted supports lie on different branches contribute
    exactly zero; overlapping same-branch pairs use a fixed polar tensor rule.
    """
    total = 0j
    for a in f.bumps:
        for b in g.bumps:
            ov = _overlap(a, b)
            if ov:
                total += a.weight.conjugate() * b.weight * ov
    return total


def swept_clearance(bump: Bump, axis: int, t: float) -> float:
    """Distance from the origin to the support disk swept along the translation."""
    c1, c2 = bump.center.planar
    q = (c1 + t, c2) if axis == 1 else (c1, c2 + t)
    return segment_distance((c1, c2), q) - bump.radius


def _translate_bump(bump: Bump, axis: int, t: float, clearance: float | None, index: int):
    if t == 0:
        return bump, 0.0
    room = swept_clearance(bump, axis, t)
    need = clearance if clearance is not None else CLEARANCE_FRACTION * max(bump.center.r, abs(t))
    if room < need:
        raise PunctureError(
            f"bump {index} (center r={bump.center.r:.6g}, theta={bump.center.theta_lift:.6g}, "
            f"radius={bump.radius:.6g}) sweeps within {room:.3g} of the puncture under "
            f"U{axis}({t:g})")
    lifted = lift_translation(bump.center, axis, t)
    return bump.moved(lifted.endpoint), lifted.delta_theta


def translate_state(f: StateFn, axis: int, t: float, clearance: float | None = None) -> StateFn:
    """Apply ``U_axis(t)``: every bump centre moves by ``+t`` along ``axis``."""
    moved = [_translate_bump(b, axis, t, clearance, i)[0] for i, b in enumerate(f.bumps)]
    return StateFn(tuple(moved), f.cover)


def commutator_legs(s: float, t: float) -> list[tuple[int, float]]:
    """Factors of U1(s) U2(t) U1(-s) U2(-t) in the order they act on a state."""
    return [(2, -t), (1, -s), (2, t), (1, s)]


def commutator_loop(point: Sequence[float], s: float, t: float) -> list[tuple[float, float]]:
    """Closed rectangle traced by the argument of (C(s,t) f)(x) as the word is unwound.

    (C f)(x) = f(x) after pulling x back through x - s e1, x - s e1 - t e2,
    x - t e2.  The support of C f sits ``-winding`` sheets away from f.
    """
    x1, x2 = float(point[0]), float(point[1])
    return [(x1, x2), (x1 - s, x2), (x1 - s, x2 - t), (x1, x2 - t), (x1, x2)]


def _bump_commutator(bump: Bump, s: float, t: float, clearance, index: int) -> Bump:
    cur = bump
    total = 0.0
    for axis, amount in commutator_legs(s, t):
        cur, dtheta = _translate_bump(cur, axis, amount, clearance, index)
        total += dtheta
    w = total / TWO_PI
    k = round(w)
    if abs(w - k) >= 1e-9:
        raise ArithmeticError(f"commutator path of bump {index} did not close: {w!r} turns")
    # planar projection is unchanged; only the sheet can move
    return bump if k == 0 else bump.moved(bump.center.shift_sheet(int(k)))


def commutator_apply(f: StateFn, s: float, t: float, clearance: float | None = None) -> StateFn:
    """C(s, t) f = U1(s) U2(t) U1(-s) U2(-t) f.

    Each bump is carried along the four legs; its centre returns to the same
    planar point, so the result keeps the original centre and changes only
    the sheet, by the number of turns the centre made about the puncture.
    """
    return StateFn(tuple(_bump_commutator(b, s, t, clearance, i) for i, b in enumerate(f.bumps)),
                   f.cover)


def _sheet_shift(cover: CoverSpec, before: SurfacePoint, after: SurfacePoint) -> int:
    return cover.reduce_sheet(after.sheet - before.sheet) if cover.is_finite else after.sheet - before.sheet


@dataclass(frozen=True)
class SheetSeparation:
    """Outcome of comparing U1(s)U2(t) f with U2(t)U1(s) f bump by bump."""

    shifts_ab: tuple[int, ...]
    shifts_ba: tuple[int, ...]
    loop_windings: tuple[int, ...]
    overlap: complex
    orthogonal: bool

    @property
    def shift_AB(self) -> int:
        return self.shifts_ab[0]

    @property
    def shift_BA(self) -> int:
        return self.shifts_ba[0]


def sheet_separation(f: StateFn, s: float, t: float, clearance: float | None = None) -> SheetSeparation:
    a = translate_state(translate_state(f, 2, t, clearance), 1, s, clearance)
    b = translate_state(translate_state(f, 1, s, clearance), 2, t, clearance)
    shifts_ab, shifts_ba, windings = [], [], []
    for b0, ba, bb in zip(f.bumps, a.bumps, b.bumps):
        shifts_ab.append(_sheet_shift(f.cover, b0.center, ba.center))
        shifts_ba.append(_sheet_shift(f.cover, b0.center, bb.center))
        c1, c2 = b0.center.planar
        loop = [(c1, c2), (c1, c2 + t), (c1 + s, c2 + t), (c1 + s, c2), (c1, c2)]
        windings.append(winding_of_loop(loop))
    ov = inner_product(a, b)
    return SheetSeparation(tuple(shifts_ab), tuple(shifts_ba), tuple(windings), ov, ov == 0)


# ---------------------------------------------------------------------------
# scenario files


def _read_weight(w) -> complex:
    if isinstance(w, (list, tuple)):
        return complex(w[0], w[1])
    if isinstance(w, dict):
        return complex(w.get("re", 0.0), w.get("im", 0.0))
    return complex(w)


def state_from_json(obj: dict) -> StateFn:
    cover = CoverSpec.from_json(obj.get("cover", "infinite"))
    bumps = []
    for b in obj["bumps"]:
        center = SurfacePoint.from_lift(float(b["r"]), float(b["theta_lift"]), cover)
        bumps.append(Bump(center, float(b["radius"]), _read_weight(b.get("weight", 1.0))))
    return StateFn(tuple(bumps), cover)


def run_program(state: StateFn, program: Iterable[dict]) -> list[dict[str, Any]]:
    """Apply a list of ``{"op": "U", axis, t}`` / ``{"op": "C", s, t}`` steps.

    Returns one record per step with the per-bump sheet indices and the norm.
    """
    records = []
    for i, step in enumerate(program):
        op = step.get("op")
        if op == "U":
            state = translate_state(state, int(step["axis"]), float(step["t"]))
        elif op == "C":
            state = commutator_apply(state, float(step["s"]), float(step["t"]))
        else:
            raise ValueError(f"step {i}: unknown op {op!r}")
        records.append({"step": i, "op": step, "sheets": state.sheets,
                        "state": state.to_json(), "norm": state.norm()})
    return records


def load_scenario(path: str | Path) -> tuple[StateFn, list[dict]]:
    obj = json.loads(Path(path).read_text())
    return state_from_json(obj), list(obj.get("program", []))
