import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate as sci_integrate
from scipy.special import exp1

from defectlab import flows
from defectlab.cover import CoverSpec, SurfacePoint, segment_distance, winding_of_loop
from defectlab.errors import PunctureError

DATA = Path(__file__).parent / "data"


def single(r, theta, radius=0.2, weight=1.0, cover=None):
    return flows.StateFn.single(r, theta, radius, weight, cover)


def test_profile_norm_matches_exponential_integral():
    # 2 pi ∫ exp(-2/(1-s^2)) s ds = pi (e^-2 - 2 E1(2))
    assert flows.PROFILE_NORM2 == pytest.approx(math.pi * (math.exp(-2) - 2 * exp1(2.0)), rel=1e-13)


def test_unit_bump_norm():
    assert single(2.0, 1.0).norm() == 1.0


def test_translate_right():
    g = flows.translate_state(single(3.0, 0.0), 1, 1.0)
    c = g.bumps[0].center
    assert c.r == pytest.approx(4.0, rel=1e-15)
    assert c.angle == 0.0
    assert c.sheet == 0


def test_translate_zero_is_identity():
    f = single(3.0, 0.4)
    assert flows.translate_state(f, 2, 0.0) == f


def test_translate_names_offending_bump():
    f = flows.StateFn((flows.Bump(SurfacePoint.from_lift(3.0, 0.0), 0.2),
                       flows.Bump(SurfacePoint.from_lift(1.0, math.pi / 2), 0.5)))
    with pytest.raises(PunctureError, match="bump 1"):
        flows.translate_state(f, 2, -2.0)


def test_swept_support_must_clear_origin():
    # the centre path clears the origin by 0.4; a support of radius 0.45 does not
    narrow = flows.StateFn((flows.Bump(SurfacePoint.from_planar(1.0, 0.4), 0.35),))
    wide = flows.StateFn((flows.Bump(SurfacePoint.from_planar(1.0, 0.4), 0.45),))
    flows.translate_state(narrow, 1, -3.0)
    with pytest.raises(PunctureError):
        flows.translate_state(wide, 1, -3.0)


def test_bump_must_avoid_puncture():
    with pytest.raises(ValueError):
        single(0.2, 0.0, radius=0.3)


def test_disjoint_supports_orthogonal():
    f, g = single(3.0, 0.0), single(3.0, 1.0)
    assert flows.inner_product(f, g) == 0


def test_different_sheets_exactly_orthogonal():
    f = single(2.0, 0.5)
    g = single(2.0, 0.5 + 2 * math.pi)
    assert g.sheets == [1]
    assert flows.inner_product(f, g) == 0
    assert flows.inner_product(f, f) == 1


def test_overlap_across_branch_cut_same_sheet():
    # centres on either side of theta = 0 on the same lifted branch overlap
    f = single(2.0, -0.05)
    g = single(2.0, 0.05)
    assert f.sheets == [-1] and g.sheets == [0]
    assert flows.inner_product(f, g).real > 0.1


def test_overlap_against_dblquad_oracle():
    a = flows.Bump(SurfacePoint.from_lift(1.0, 0.3), 0.2)
    b = flows.Bump(SurfacePoint.from_lift(1.05, 0.32), 0.25)
    ca = a.center.planar
    ref, _ = sci_integrate.dblquad(
        lambda y, x: float((a.value_at(x, y) * b.value_at(x, y)).real),
        ca[0] - 0.2, ca[0] + 0.2, lambda x: ca[1] - 0.2, lambda x: ca[1] + 0.2,
        epsabs=1e-14, epsrel=1e-13)
    assert flows._overlap(a, b) == pytest.approx(ref, rel=1e-10)


def test_inner_product_is_sesquilinear():
    f = flows.StateFn((flows.Bump(SurfacePoint.from_lift(2.0, 0.1), 0.3, 1 + 1j),))
    g = flows.StateFn((flows.Bump(SurfacePoint.from_lift(2.1, 0.15), 0.3, 2.0),))
    ip = flows.inner_product(f, g)
    assert flows.inner_product(g, f) == pytest.approx(ip.conjugate(), abs=1e-15)
    assert f.norm() == pytest.approx(math.sqrt(2), rel=1e-15)


def test_commutator_identity_when_loop_misses_origin():
    f = single(1.0, 0.3)
    assert flows.commutator_apply(f, -2.0, -2.0) == f
    assert flows.commutator_apply(f, 0.0, 1.0) == f
    assert flows.commutator_apply(f, 1.0, 0.0) == f


def test_commutator_shift_opposes_loop_winding():
    f = single(1.0, 0.3)
    loop = flows.commutator_loop(f.bumps[0].center.planar, 2.0, 2.0)
    w = winding_of_loop(loop)
    assert w == 1
    assert flows.commutator_apply(f, 2.0, 2.0).sheets == [-1]


def test_commutator_keeps_planar_centre():
    f = single(1.0, 0.3)
    g = flows.commutator_apply(f, 2.0, 2.0)
    assert g.bumps[0].center.r == f.bumps[0].center.r
    assert g.bumps[0].center.angle == f.bumps[0].center.angle
    assert g.bumps[0].weight == f.bumps[0].weight


def test_finite_cover_returns_after_n_loops():
    for n in (1, 2, 4):
        f = single(1.0, 0.3, cover=CoverSpec.finite(n))
        g = f
        for _ in range(n):
            g = flows.commutator_apply(g, 2.0, 2.0)
        assert g == f


def test_sheet_separation_winding_one():
    sep = flows.sheet_separation(single(1.0, 0.3), -2.0, -2.0)
    assert sep.loop_windings == (-1,)
    assert sep.shift_AB - sep.shift_BA == -1
    assert sep.orthogonal and sep.overlap == 0


def test_sheet_separation_winding_zero():
    sep = flows.sheet_separation(single(1.0, 0.3), 1.0, 1.0)
    assert sep.shift_AB == sep.shift_BA
    assert not sep.orthogonal
    assert sep.overlap == pytest.approx(1.0)


def test_sheet_separation_per_bump():
    f = flows.StateFn((flows.Bump(SurfacePoint.from_lift(1.0, 0.3), 0.2),
                       flows.Bump(SurfacePoint.from_lift(5.0, 0.3), 0.2)))
    sep = flows.sheet_separation(f, -2.0, -2.0)
    assert sep.loop_windings == (-1, 0)
    assert sep.shifts_ab[0] - sep.shifts_ba[0] == -1
    assert sep.shifts_ab[1] == sep.shifts_ba[1]


def test_scenario_round_trip():
    state, program = flows.load_scenario(DATA / "scenario_loop.json")
    records = flows.run_program(state, program)
    assert [r["sheets"] for r in records] == [[0, 0], [0, 0], [2, 0], [1, 0], [0, 0]]
    assert all(r["norm"] == pytest.approx(state.norm(), abs=1e-12) for r in records)
    assert flows.state_from_json(records[-1]["state"]).sheets == state.sheets


def test_unknown_scenario_op():
    with pytest.raises(ValueError):
        flows.run_program(single(1.0, 0.0), [{"op": "X"}])


coord = st.floats(-4, 4)


@settings(max_examples=150, deadline=None)
@given(x=coord, y=coord, radius=st.floats(0.05, 0.5), axis=st.sampled_from([1, 2]),
       s=st.floats(-3, 3), t=st.floats(-3, 3))
def test_translation_group_law_and_isometry(x, y, radius, axis, s, t):
    assume(math.hypot(x, y) > radius + 0.1)
    f = flows.StateFn((flows.Bump(SurfacePoint.from_planar(x, y), radius, 0.5 - 2j),))

    def room(p, d):
        q = (p[0] + d, p[1]) if axis == 1 else (p[0], p[1] + d)
        return segment_distance(p, q) - radius, q

    r1, q1 = room((x, y), s)
    r2, _ = room(q1, t)
    r3, _ = room((x, y), s + t)
    assume(min(r1, r2, r3) > 1e-3)
    two = flows.translate_state(flows.translate_state(f, axis, s), axis, t)
    one = flows.translate_state(f, axis, s + t)
    assert two.bumps[0].center.sheet == one.bumps[0].center.sheet
    assert two.bumps[0].center.theta_lift == pytest.approx(one.bumps[0].center.theta_lift, abs=1e-12)
    assert two.norm() == f.norm()


@settings(max_examples=150, deadline=None)
@given(theta=st.floats(0, 2 * math.pi), r=st.floats(0.6, 3), s=st.floats(-3, 3), t=st.floats(-3, 3))
def test_commutator_triviality_criterion(theta, r, s, t):
    f = single(r, theta, radius=0.1)
    p = f.bumps[0].center.planar
    assume(abs(s) > 1e-3 and abs(t) > 1e-3)
    try:
        g = flows.commutator_apply(f, s, t)
    except PunctureError:
        assume(False)
    w = winding_of_loop(flows.commutator_loop(p, s, t))
    assert g.sheets[0] - f.sheets[0] == -w
    assert (g == f) == (w == 0)
