"""The ten acceptance criteria as plain functions returning check lists.

Shared by ``defectlab all`` and ``tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import flows, localexp, quad, spectral
from .cover import CoverSpec, winding_of_loop
from .errors import DomainError
from .report import Check


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check]
    elapsed_s: float
    budget_s: float | None = None

    @property
    def within_budget(self) -> bool:
        return self.budget_s is None or self.elapsed_s <= self.budget_s

    @property
    def passed(self) -> bool:
        return self.within_budget and all(c.passed for c in self.checks)

    def summary_line(self) -> str:
        worst = [c for c in self.checks if not c.passed]
        status = "PASS" if self.passed else "FAIL"
        extra = f"; failing: {', '.join(c.name for c in worst)}" if worst else ""
        budget = f" (budget {self.budget_s:g} s)" if self.budget_s else ""
        return (f"[{status}] criterion {self.number:2d}: {self.title} -- {len(self.checks)} checks, "
                f"{self.elapsed_s:.2f} s{budget}{extra}")


def kv_norm_identity() -> list[Check]:
    checks = [Check.from_identity(quad.verify_kv_identity(nu, tol=1e-8))
              for nu in (0.1, 0.3, 0.5, 0.7, 0.9)]
    half = next(c for c in checks if c.params["nu"] == 0.5)
    checks.append(Check.relative("kv_norm_half_is_pi_over_4", half.lhs, math.pi / 4, 1e-8, nu=0.5))
    return checks


def nicholson_grid() -> list[Check]:
    return [Check.from_identity(quad.verify_nicholson(nu, z, tol=1e-6))
            for nu in (0.0, 0.25, 0.45) for z in (0.5, 1.0, 2.0)]


def mellin_beta2() -> list[Check]:
    checks = [Check.from_identity(quad.verify_mellin(nu, 2.0, tol=1e-8)) for nu in (0.0, 0.3, 0.6)]
    checks.append(Check.relative("mellin_nu0_is_one", checks[0].lhs, 1.0, 1e-8, nu=0.0, beta=2.0))
    return checks


def index_count() -> list[Check]:
    checks = []
    for N in (1, 2, 3, 4):
        dim = spectral.defect_dimension(N)
        checks.append(Check.exact("defect_dimension", dim, 2 * N - 1, N=N))
        checks.append(Check.exact("basis_length", len(spectral.defect_basis_finite(N)), dim, N=N))
    checks.append(Check.exact("lplc_0.999_is_limit_circle",
                              spectral.lp_lc_classify(0.999) is spectral.Endpoint.LIMIT_CIRCLE, True,
                              nu=0.999))
    checks.append(Check.exact("lplc_1.0_is_limit_point",
                              spectral.lp_lc_classify(1.0) is spectral.Endpoint.LIMIT_POINT, True,
                              nu=1.0))
    return checks


RESIDUAL_STEPS = (2e-3, 1e-3)


def radial_convergence() -> list[Check]:
    coarse, fine = (spectral.RadialGrid.with_step(0.1, 10.0, h) for h in RESIDUAL_STEPS)
    checks = []
    for nu in (0.0, 0.25, 0.5, 0.75):
        for gauge, fn in (("log4", spectral.radial_defect_residual),
                          ("weighted", spectral.weight_transform_residual)):
            ratio = fn(nu, coarse) / fn(nu, fine)
            checks.append(Check.absolute(f"residual_ratio_{gauge}", ratio, 0.5, rhs=4.0,
                                         nu=nu, h=list(RESIDUAL_STEPS)))
    # closed form for nu = 1/2: the residual computed from K_{1/2} must equal
    # the residual of the exact profile sqrt(pi/2r) e^{-r} on the same grid
    r = fine.points
    exact = np.sqrt(0.5 * math.pi / r) * np.exp(-r)
    d1, d2 = spectral._derivatives(r, exact)
    ri = r[1:-1]
    closed = float(np.max(np.abs(d2 + d1 / ri - (0.25 / ri**2 + 1.0) * exact[1:-1])))
    checks.append(Check.relative("residual_half_closed_form",
                                 spectral.radial_defect_residual(0.5, fine), closed, 1e-6,
                                 nu=0.5, h=RESIDUAL_STEPS[1]))
    return checks


def parseval() -> list[Check]:
    rep = spectral.defect_norm_parseval(spectral.GFunction.bump(0.0, 0.5), tol=1e-6)
    return [Check.relative("parseval_bump", rep.direct, rep.weighted, 1e-6,
                           center=0.0, half_width=0.5)]


def flow_simulator() -> list[Check]:
    checks = []
    inf = CoverSpec.infinite()
    f = flows.StateFn.single(1.0, 0.3, 0.2, cover=inf)
    c = f.bumps[0].center.planar

    # (a) loop misses the origin
    for s, t in ((-2.0, -2.0), (0.0, 1.5), (0.7, 0.0)):
        g = flows.commutator_apply(f, s, t)
        w = winding_of_loop(flows.commutator_loop(c, s, t)) if s and t else 0
        checks.append(Check.exact("commutator_identity_bit_exact", g == f and w == 0, True, s=s, t=t))

    # (b) loop around the origin, both orientations
    second = flows.StateFn.single(1.0, 0.75 * math.pi, 0.2, cover=inf)
    third = flows.StateFn.single(1.0, 0.3 + math.pi, 0.2, cover=inf)
    for state, s, t in ((f, 2.0, 2.0), (second, -2.0, 2.0), (third, -2.0, -2.0)):
        p = state.bumps[0].center.planar
        w = winding_of_loop(flows.commutator_loop(p, s, t))
        shift = flows.commutator_apply(state, s, t).sheets[0] - state.sheets[0]
        checks.append(Check.exact("commutator_shift_is_minus_winding", shift, -w, s=s, t=t, winding=w))
        checks.append(Check.exact("commutator_loop_encloses_origin", abs(w), 1, s=s, t=t))

    # (c) the two orders of U1(s), U2(t)
    for s, t, expect_orth in ((-2.0, -2.0, True), (-2.0, 2.0, False)):
        sep = flows.sheet_separation(f, s, t)
        checks.append(Check.exact("separation_shift_difference",
                                  sep.shift_AB - sep.shift_BA, sep.loop_windings[0], s=s, t=t))
        checks.append(Check.exact("separation_orthogonal", sep.orthogonal, expect_orth, s=s, t=t))
        if expect_orth:
            checks.append(Check.exact("separation_inner_product_zero", sep.overlap == 0, True, s=s, t=t))

    # (d) finite covers: N windings restore the state
    for N in (2, 3, 5):
        h = flows.StateFn.single(1.0, 0.3, 0.2, cover=CoverSpec.finite(N))
        x = h
        moved = True
        for k in range(N):
            x = flows.commutator_apply(x, 2.0, 2.0)
            if k < N - 1:
                moved = moved and x != h
        checks.append(Check.exact("finite_cover_restored", x == h and moved, True, N=N))
    return checks


MATRIX_TIMES = (0.5, 2.7, -3.1)


def local_exponentiation(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_expm = worst_group = worst_sub = 0.0
    for i in range(20):
        flow = localexp.LocalFlow.of(localexp.random_skew(rng, 2 + i % 9))
        for t in MATRIX_TIMES:
            u = localexp.exponentiate_local(flow, t, check=False)
            worst_expm = max(worst_expm, localexp.opnorm(u - scipy.linalg.expm(t * flow.H)))
            worst_sub = max(worst_sub, localexp.subdivision_change(flow, t))
            for s in MATRIX_TIMES:
                worst_group = max(worst_group, localexp.verify_group_law(flow, s, t))
    params = {"seed": seed, "matrices": 20, "dims": [2, 10], "t": list(MATRIX_TIMES)}
    return [Check.absolute("max_expm_deviation", worst_expm, 1e-10, **params),
            Check.absolute("max_group_law_residual", worst_group, 1e-10, **params),
            Check.absolute("max_subdivision_change", worst_sub, 1e-12, **params)]


def witness_similarity(res: localexp.DefectIndices) -> float:
    """Best pairing of the two witnesses with {e^x, e^-x}."""
    ep, em = np.exp(res.x), np.exp(-res.x)
    wp, wm = res.witness_plus, res.witness_minus
    cs = localexp.cosine_similarity
    return max(min(cs(wp, ep), cs(wm, em)), min(cs(wp, em), cs(wm, ep)))


def index_probe() -> list[Check]:
    checks = []
    for n in (100, 200, 400):
        res = localexp.defect_indices_1d("interval", n, 2)
        checks.append(Check.exact("interval_n_plus", res.n_plus, 1, n=n, m_margin=2))
        checks.append(Check.exact("interval_n_minus", res.n_minus, 1, n=n, m_margin=2))
        if res.indices == (1, 1):
            checks.append(Check.at_least("witness_cosine_similarity", witness_similarity(res), 0.999,
                                         n=n, m_margin=2))
        per = localexp.defect_indices_1d("periodic", n, 2)
        checks.append(Check.exact("periodic_indices_zero", per.indices == (0, 0), True, n=n))
    return checks


def commuting_pair() -> tuple[localexp.Generator, localexp.Generator]:
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    z = np.zeros((2, 2))
    h1 = np.block([[1.0 * j, z], [z, 2.0 * j]])
    h2 = np.block([[3.0 * j, z], [z, 0.5 * j]])
    return localexp.Generator(h1), localexp.Generator(h2)


def resolvents() -> list[Check]:
    lam1, lam2 = 1.0 + 0.5j, 2.0 - 1.0j
    a, b = commuting_pair()
    checks = [Check.absolute("commuting_resolvent_commutator",
                             localexp.resolvent_commutation(a, b, lam1, lam2), 1e-12,
                             pair="block-rotations", lambda1=str(lam1), lambda2=str(lam2))]
    lx, ly, _ = localexp.so3_generators()
    checks.append(Check.at_least("rotation_resolvent_commutator",
                                 localexp.resolvent_commutation(lx, ly, lam1, lam2), 1e-3,
                                 pair="so3-x-y", lambda1=str(lam1), lambda2=str(lam2)))
    try:
        localexp.resolvent_commutation(a, b, 1j, lam2)
        rejected = False
    except DomainError:
        rejected = True
    checks.append(Check.exact("imaginary_lambda_rejected", rejected, True, lambda1="1j"))
    return checks


CRITERIA: list[tuple[int, str, Callable[..., list[Check]], float | None]] = [
    (1, "K_nu norm identity", kv_norm_identity, 5.0),
    (2, "Nicholson grid", nicholson_grid, None),
    (3, "Mellin identity at beta = 2", mellin_beta2, None),
    (4, "defect index count and LP/LC flip", index_count, None),
    (5, "radial residual convergence, both gauges", radial_convergence, None),
    (6, "Parseval defect norm", parseval, None),
    (7, "flow simulator sheets and commutators", flow_simulator, 1.0),
    (8, "local exponentiation on random skew matrices", local_exponentiation, None),
    (9, "1D defect index probe", index_probe, None),
    (10, "resolvent commutation", resolvents, None),
]


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    num, title, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    checks = fn(seed) if fn is local_exponentiation else fn()
    return CriterionResult(num, title, checks, time.perf_counter() - t0, budget)


def run_all(seed: int = 0, only: list[int] | None = None) -> list[CriterionResult]:
    numbers = only or [c[0] for c in CRITERIA]
    return [run_criterion(n, seed) for n in numbers]
