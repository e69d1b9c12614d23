"""Command-line driver: one subcommand per verification, each emitting a report.

Exit status is 0 when every check passes, 1 when a check fails (the report
is still written) and 2 for argument or domain errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from typing import Callable

import numpy as np
import scipy.linalg

from . import acceptance, flows, localexp, quad, spectral
from .cover import CoverSpec, winding_of_loop
from .errors import DefectLabError
from .report import Check, Report, write_columns

SEED_ENV = "DEFECTLAB_SEED"


def resolve_seed(flag: int | None) -> int:
    """Flag beats the environment, which beats the default 0."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _cover(text: str) -> CoverSpec:
    if text in ("inf", "infinite"):
        return CoverSpec.infinite()
    try:
        return CoverSpec.finite(int(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cover must be a positive integer or 'infinite': {text!r}") from None


# ---------------------------------------------------------------------------
# subcommands; each returns (checks, data)


def cmd_kv_verify(args):
    reps = [quad.verify_kv_identity(nu, tol=args.tol, mode=args.mode) for nu in args.nu]
    return [Check.from_identity(r) for r in reps], None


def cmd_nicholson(args):
    return [Check.from_identity(quad.verify_nicholson(nu, z, tol=args.tol))
            for nu in args.nu for z in args.z], None


def cmd_mellin(args):
    return [Check.from_identity(quad.verify_mellin(nu, args.beta, tol=args.tol, scale=args.scale))
            for nu in args.nu], None


def cmd_defect_basis(args):
    N = args.cover
    basis = spectral.defect_basis_finite(N)
    dim = spectral.defect_dimension(N)
    checks = [Check.exact("basis_length_matches_dimension", len(basis), dim, N=N),
              Check.exact("dimension_is_2N_minus_1", dim, 2 * N - 1, N=N)]
    if args.profile_csv:
        grid = spectral.RadialGrid(args.r_min, args.r_max, args.points, args.spacing)
        orders = sorted({b.nu for b in basis})
        r = grid.points
        cols = [r] + [spectral.radial_profile(nu, grid)[1] for nu in orders]
        write_columns(args.profile_csv, ("r",) + tuple(f"K_{nu:.6g}" for nu in orders), cols)
    return checks, {"N": N, "basis": [b.to_json() for b in basis]}


def cmd_lplc(args):
    checks, data = [], []
    for nu in args.nu:
        test = spectral.lp_lc_test(nu)
        expected = spectral.Endpoint.LIMIT_CIRCLE if nu < 1 else spectral.Endpoint.LIMIT_POINT
        checks.append(Check.exact("numeric_matches_order_rule", test.kind is expected, True, nu=nu))
        data.append({"nu": nu, "kind": str(test.kind), "chunk_ratio": test.chunk_ratio,
                     "chunk_width": test.chunk_width})
    return checks, data


def cmd_parseval(args):
    g = spectral.GFunction.bump(args.center, args.half_width, n=args.nodes)
    rep = spectral.defect_norm_parseval(g, tol=args.tol)
    check = Check.relative("parseval", rep.direct, rep.weighted, args.tol,
                           center=args.center, half_width=args.half_width, nodes=args.nodes)
    return [check], {"direct": rep.direct, "weighted": rep.weighted}


def cmd_flow_scenario(args):
    state, program = flows.load_scenario(args.scenario)
    n0 = state.norm()
    records = flows.run_program(state, program)
    checks = [Check.absolute("norm_preserved", r["norm"], 1e-12, rhs=n0, step=r["step"])
              for r in records]
    return checks, {"initial": state.to_json(), "steps": records}


def cmd_commutator(args):
    state = flows.StateFn.single(args.r, args.theta, args.radius, cover=args.cover)
    p = state.bumps[0].center.planar
    degenerate = args.s == 0 or args.t == 0
    w = 0 if degenerate else winding_of_loop(flows.commutator_loop(p, args.s, args.t))
    out = flows.commutator_apply(state, args.s, args.t)
    shift = out.sheets[0] - state.sheets[0]
    expected = args.cover.reduce_sheet(-w)
    checks = [Check.exact("sheet_shift_is_minus_winding", args.cover.reduce_sheet(shift), expected,
                          s=args.s, t=args.t, winding=w)]
    if w == 0:
        checks.append(Check.exact("identity_when_winding_zero", out == state, True, s=args.s, t=args.t))
    return checks, {"winding": w, "sheet_shift": shift, "before": state.to_json(), "after": out.to_json()}


def cmd_exponentiate(args):
    if args.demo == "rotation":
        gen = localexp.rotation_generator()
    else:
        gen = localexp.random_skew(np.random.default_rng(args.seed), args.dim)
    flow = localexp.LocalFlow.of(gen)
    u = localexp.exponentiate_local(flow, args.t, check=False)
    p = {"demo": args.demo, "t": args.t, "dim": gen.dim}
    checks = [Check.absolute("orthogonality", localexp.opnorm(u.T @ u - np.eye(gen.dim)), args.tol, **p),
              Check.absolute("expm_deviation", localexp.opnorm(u - scipy.linalg.expm(args.t * gen.matrix)),
                             args.tol, **p),
              Check.absolute("subdivision_change", localexp.subdivision_change(flow, args.t), args.tol, **p)]
    if args.demo == "rotation":
        c, s = math.cos(args.t), math.sin(args.t)
        closed = np.array([[c, s], [-s, c]])
        checks.append(Check.absolute("closed_form_rotation", localexp.opnorm(u - closed), args.tol, **p))
    return checks, {"steps": flow.steps_for(args.t), "epsilon": flow.epsilon, "U": u.tolist()}


def cmd_indices_1d(args):
    res = localexp.defect_indices_1d(args.boundary, args.n, args.margin)
    expect = (1, 1) if args.boundary == "interval" else (0, 0)
    p = {"boundary": args.boundary, "n": args.n, "m_margin": args.margin}
    checks = [Check.exact("n_plus", res.n_plus, expect[0], **p),
              Check.exact("n_minus", res.n_minus, expect[1], **p)]
    if res.indices == (1, 1):
        checks.append(Check.at_least("witness_cosine_similarity", acceptance.witness_similarity(res),
                                     0.999, **p))
        if args.witness_csv:
            idx = np.arange(res.x.size)
            write_columns(args.witness_csv, ("index", "x", "witness_plus", "witness_minus"),
                          [idx, res.x, res.witness_plus, res.witness_minus])
    return checks, {"n_plus": res.n_plus, "n_minus": res.n_minus}


def cmd_resolvent(args):
    if args.pair == "commuting":
        a, b = acceptance.commuting_pair()
    else:
        a, b, _ = localexp.so3_generators()
    val = localexp.resolvent_commutation(a, b, args.lambda1, args.lambda2)
    p = {"pair": args.pair, "lambda1": str(args.lambda1), "lambda2": str(args.lambda2)}
    if args.pair == "commuting":
        check = Check.absolute("resolvent_commutator", val, 1e-12, **p)
    else:
        check = Check.at_least("resolvent_commutator", val, 1e-3, **p)
    return [check], {"generator_commutator": localexp.generator_commutator(a, b)}


def cmd_all(args):
    results = acceptance.run_all(seed=args.seed, only=args.only)
    checks = []
    timing = {}
    for res in results:
        for c in res.checks:
            c.params = {"criterion": res.number, **c.params}
            checks.append(c)
        timing[str(res.number)] = {"elapsed_s": res.elapsed_s, "budget_s": res.budget_s,
                                   "within_budget": res.within_budget}
    for res in results:
        print(res.summary_line(), file=sys.stderr)
    return checks, None, timing


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="report path (default: stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"seed for random suites (default: ${SEED_ENV} or 0)")

    parser = argparse.ArgumentParser(prog="defectlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("kv-verify", cmd_kv_verify, "integral of K_nu^2 z against its closed form")
    p.add_argument("--nu", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--mode", choices=("direct", "fubini"), default="direct")

    p = add("nicholson", cmd_nicholson, "K_nu^2 against its Nicholson integral")
    p.add_argument("--nu", type=float, nargs="+", default=[0.0, 0.25, 0.45])
    p.add_argument("--z", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--tol", type=float, default=1e-6)

    p = add("mellin", cmd_mellin, "Mellin transform of K_nu against the Gamma product")
    p.add_argument("--nu", type=float, nargs="+", default=[0.0, 0.3, 0.6])
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("defect-basis", cmd_defect_basis, "defect basis on the N-fold cover")
    p.add_argument("--cover", type=int, required=True, metavar="N")
    p.add_argument("--profile-csv", help="write radial profiles K_nu(r) here")
    p.add_argument("--r-min", type=float, default=0.1)
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--spacing", choices=("uniform", "log"), default="log")

    p = add("lplc", cmd_lplc, "limit point / limit circle classification at r = 0")
    p.add_argument("--nu", type=float, nargs="+", default=[0.0, 0.5, 0.999, 1.0, 2.0])

    p = add("parseval", cmd_parseval, "two routes to the defect norm of a bump profile g")
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--half-width", type=float, default=0.5)
    p.add_argument("--nodes", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-6)

    p = add("flow-scenario", cmd_flow_scenario, "run a JSON scenario of translations and commutators")
    p.add_argument("scenario", help="scenario JSON file")

    p = add("commutator", cmd_commutator, "apply C(s,t) to one bump and compare with the loop winding")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.3, help="lifted angle of the bump centre")
    p.add_argument("--radius", type=float, default=0.2)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--cover", type=_cover, default=CoverSpec.infinite())

    p = add("exponentiate", cmd_exponentiate, "build U_t from the local flow and compare with expm")
    p.add_argument("--demo", choices=("rotation", "random"), default="rotation")
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--t", type=float, default=math.pi)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("indices-1d", cmd_indices_1d, "deficiency indices of discretised d/dx")
    p.add_argument("--boundary", choices=("interval", "periodic"), default="interval")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--margin", type=int, default=2)
    p.add_argument("--witness-csv", help="write witness vectors here")

    p = add("resolvent", cmd_resolvent, "commutator of resolvents for a generator pair")
    p.add_argument("--pair", choices=("commuting", "rotation"), default="commuting")
    p.add_argument("--lambda1", type=_complex, default=complex(1.0, 0.5))
    p.add_argument("--lambda2", type=_complex, default=complex(2.0, -1.0))

    p = add("all", cmd_all, "run the full acceptance suite")
    p.add_argument("--only", type=int, nargs="+", choices=range(1, 11), metavar="K")
    return parser


def _params(args) -> dict:
    skip = {"func", "format", "output", "command"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, complex):
            v = str(v)
        elif isinstance(v, CoverSpec):
            v = v.to_json()
        out[k] = v
    return out


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed = resolve_seed(args.seed)
    except ValueError as exc:
        parser.error(str(exc))

    t0 = time.perf_counter()
    try:
        result = args.func(args)
    except (DefectLabError, ValueError, OSError) as exc:
        numeric = isinstance(exc, DefectLabError) and not isinstance(exc, ValueError)
        print(f"defectlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1 if numeric else 2
    checks, data = result[0], result[1]
    timing = result[2] if len(result) > 2 else None
    report = Report(args.command, _params(args), checks,
                    round((time.perf_counter() - t0) * 1000.0, 3), data, timing)
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def main() -> None:
    sys.exit(run())
