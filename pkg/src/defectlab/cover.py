"""N-fold and infinite covers of the punctured plane.

A point of the cover is a planar point away from the origin together with a
lifted angle.  Internally the lifted angle is split as ``angle + 2*pi*sheet``
with ``angle`` in ``[0, 2*pi)`` and an integer ``sheet``, so sheet arithmetic
is exact; ``theta_lift`` is derived from the pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import OpenLoopError, PunctureError

TWO_PI = 2.0 * math.pi
# each continuation step may turn by at most this much about the origin
MAX_STEP_ANGLE = 0.5 * math.pi
# default clearance is this fraction of the segment's length scale
CLEARANCE_FRACTION = 1e-9


@dataclass(frozen=True)
class CoverSpec:
    """``N = None`` is the infinite (log z) cover, otherwise the N-fold cover."""

    N: int | None = None

    def __post_init__(self):
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise ValueError(f"cover degree must be an integer >= 1, got {self.N}")

    @classmethod
    def finite(cls, N: int) -> "CoverSpec":
        return cls(int(N))

    @classmethod
    def infinite(cls) -> "CoverSpec":
        return cls(None)

    @property
    def is_finite(self) -> bool:
        return self.N is not None

    def reduce_sheet(self, sheet: int) -> int:
        return sheet % self.N if self.N is not None else sheet

    def to_json(self):
        return "infinite" if self.N is None else {"N": self.N}

    @classmethod
    def from_json(cls, obj) -> "CoverSpec":
        if obj is None or obj == "infinite":
            return cls.infinite()
        if isinstance(obj, int):
            return cls.finite(obj)
        if isinstance(obj, dict):
            if obj.get("kind", "finite") == "infinite":
                return cls.infinite()
            return cls.finite(obj["N"])
        raise ValueError(f"cannot read cover spec from {obj!r}")

    def __str__(self):
        return "infinite" if self.N is None else f"N={self.N}"


INFINITE = CoverSpec.infinite()


def _principal(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a >= TWO_PI:  # fmod rounding can land exactly on 2*pi
        a = 0.0
    return a


@dataclass(frozen=True)
class SurfacePoint:
    r: float
    angle: float
    sheet: int = 0
    cover: CoverSpec = INFINITE

    def __post_init__(self):
        if not self.r > 0 or not math.isfinite(self.r):
            raise ValueError(f"radius must be positive and finite, got {self.r}")
        if not 0.0 <= self.angle < TWO_PI:
            raise ValueError("angle must lie in [0, 2*pi); use SurfacePoint.from_lift")
        object.__setattr__(self, "sheet", self.cover.reduce_sheet(int(self.sheet)))

    @classmethod
    def from_lift(cls, r: float, theta_lift: float, cover: CoverSpec = INFINITE) -> "SurfacePoint":
        sheet = math.floor(theta_lift / TWO_PI)
        angle = theta_lift - TWO_PI * sheet
        if angle >= TWO_PI:
            angle, sheet = 0.0, sheet + 1
        return cls(float(r), max(angle, 0.0), sheet, cover)

    @classmethod
    def from_planar(cls, x1: float, x2: float, sheet: int = 0,
                    cover: CoverSpec = INFINITE) -> "SurfacePoint":
        return cls(math.hypot(x1, x2), _principal(math.atan2(x2, x1)), sheet, cover)

    @property
    def theta_lift(self) -> float:
        return self.angle + TWO_PI * self.sheet

    @property
    def planar(self) -> tuple[float, float]:
        return self.r * math.cos(self.angle), self.r * math.sin(self.angle)

    def shift_sheet(self, k: int) -> "SurfacePoint":
        return SurfacePoint(self.r, self.angle, self.sheet + k, self.cover)

    def same_point(self, other: "SurfacePoint") -> bool:
        return (self.cover == other.cover and self.r == other.r
                and self.angle == other.angle and self.sheet == other.sheet)

    def to_json(self) -> dict:
        return {"r": self.r, "theta_lift": self.theta_lift, "cover": self.cover.to_json()}

    @classmethod
    def from_json(cls, obj: dict, cover: CoverSpec | None = None) -> "SurfacePoint":
        cov = cover if cover is not None else CoverSpec.from_json(obj.get("cover"))
        return cls.from_lift(obj["r"], obj["theta_lift"], cov)


@dataclass(frozen=True)
class LiftResult:
    endpoint: SurfacePoint
    delta_theta: float
    min_clearance: float


def segment_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Euclidean distance from the origin to the closed segment [p, q]."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0], p[1])
    s = -(p[0] * dx + p[1] * dy) / L2
    s = min(1.0, max(0.0, s))
    return math.hypot(p[0] + s * dx, p[1] + s * dy)


def segment_angle(p: Sequence[float], q: Sequence[float]) -> float:
    """Continuous change of the polar angle along the segment from p to q.

    The segment is split so that no step turns by more than a quarter turn;
    each step's angle is then unambiguous from atan2(cross, dot).
    """
    total_guess = abs(math.atan2(p[0] * q[1] - p[1] * q[0], p[0] * q[0] + p[1] * q[1]))
    n = max(1, math.ceil(total_guess / (0.5 * MAX_STEP_ANGLE)))
    acc = 0.0
    ax, ay = p
    for k in range(1, n + 1):
        s = k / n
        bx = p[0] + s * (q[0] - p[0])
        by = p[1] + s * (q[1] - p[1])
        acc += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        ax, ay = bx, by
    return acc


def default_clearance(p: Sequence[float], q: Sequence[float]) -> float:
    scale = max(math.hypot(p[0], p[1]), math.hypot(q[0] - p[0], q[1] - p[1]))
    return CLEARANCE_FRACTION * scale


def _lift_segment(p: SurfacePoint, q_planar: tuple[float, float],
                  clearance: float | None) -> LiftResult:
    start = p.planar
    if clearance is None:
        clearance = default_clearance(start, q_planar)
    dist = segment_distance(start, q_planar)
    if dist < clearance:
        raise PunctureError(
            f"segment from {start} to {q_planar} passes within {dist:.3g} of the puncture "
            f"(clearance {clearance:.3g})")
    dtheta = segment_angle(start, q_planar)
    end_angle = _principal(math.atan2(q_planar[1], q_planar[0]))
    raw = p.angle + TWO_PI * p.sheet + dtheta
    sheet = round((raw - end_angle) / TWO_PI)
    endpoint = SurfacePoint(math.hypot(*q_planar), end_angle, sheet, p.cover)
    return LiftResult(endpoint, dtheta, dist)


def lift_translation(p: SurfacePoint, axis: int, t: float,
                     clearance: float | None = None) -> LiftResult:
    """Lift the planar translation by ``t`` along coordinate ``axis`` (1 or 2).

    Raises :class:`PunctureError` if the straight segment comes within
    ``clearance`` of the origin (default: 1e-9 times the segment's length
    scale, since an exact-zero test is meaningless in floating point).
    """
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    if t == 0:
        return LiftResult(p, 0.0, p.r)
    x1, x2 = p.planar
    q = (x1 + t, x2) if axis == 1 else (x1, x2 + t)
    return _lift_segment(p, q, clearance)


def lift_path(p: SurfacePoint, vertices: Sequence[Sequence[float]],
              clearance: float | None = None) -> LiftResult:
    """Lift a polygonal path that starts at ``p``'s planar projection."""
    cur = p
    total = 0.0
    closest = math.inf
    for q in vertices[1:]:
        step = _lift_segment(cur, (float(q[0]), float(q[1])), clearance)
        cur = step.endpoint
        total += step.delta_theta
        closest = min(closest, step.min_clearance)
    return LiftResult(cur, total, closest)


def winding_of_loop(vertices: Sequence[Sequence[float]],
                    clearance: float | None = None) -> int:
    """Winding number about the origin of a closed polygon (first == last)."""
    if len(vertices) < 2:
        raise OpenLoopError("a loop needs at least two vertices")
    if tuple(vertices[0]) != tuple(vertices[-1]):
        raise OpenLoopError(f"loop is open: {tuple(vertices[0])} != {tuple(vertices[-1])}")
    total = 0.0
    for p, q in zip(vertices[:-1], vertices[1:]):
        d = segment_distance(p, q)
        if d < (default_clearance(p, q) if clearance is None else clearance):
            raise PunctureError(f"edge {tuple(p)} -> {tuple(q)} passes within {d:.3g} of the puncture")
        total += segment_angle(p, q)
    w = total / TWO_PI
    k = round(w)
    if abs(w - k) >= 1e-9:
        raise ArithmeticError(f"angle continuation gave non-integer winding {w!r}")
    return int(k)
