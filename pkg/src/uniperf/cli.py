"""Command-line interface: ``uniperf <command> [options]``.

Commands
--------
julia       sample a built-in Julia set to a CSV cloud
analyze     uniform-perfectness report of a CSV cloud (JSON, optional SVG)
dimension   box-counting dimension and content check of a CSV cloud
modulus     discrete modulus of a round ring
tau         Teichmüller capacity estimates
qh          quasihyperbolic distance in a ball or half-space
verify      full acceptance pipeline

Exit codes are 0 on success, 1 when a verification stage fails and 2 on
usage or input errors.  Reports go to ``--out`` when given, otherwise to
``$UNIPERF_OUTPUT_DIR`` when set, otherwise to standard output.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .io import (
    CloudFormatError,
    cloud_svg,
    dumps_report,
    format_cloud,
    loglog_svg,
    output_path,
    read_cloud,
)

logger = logging.getLogger("uniperf")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

VERIFY_PRESETS = ("power2", "power3", "cheb3", "quad:0", "quad:-1", "quad:-2", "quad:-10", "zorich2")
PLANAR_DEPTH = 64000
ZORICH_DEPTH = 16000
ALPHA_REL_TOL = 0.10
ALPHA_MAX = 5.0
DIM_MIN = 0.3
R2_MIN = 0.98
CONTENT_SPREAD_MAX = 4.0
RING_REL_TOL = 0.05
MIN_GRID = 16
INEQUALITY_SLACK = 0.9
STAGES = ("julia", "modulus", "tau", "inequality")


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


@dataclass
class RunConfig:
    """Fully resolved parameters of one command, embedded in every report."""

    command: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        skip = ("func", "command", "verbose")
        # argparse dests such as ``from_`` are reported under the option name
        params = {k.rstrip("_"): v for k, v in sorted(vars(args).items()) if k not in skip}
        return cls(args.command, params)

    def to_dict(self) -> dict:
        return {"command": self.command, "version": __version__, **self.params}


@dataclass
class StageResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "thresholds": self.thresholds,
            "message": self.message,
        }


@dataclass
class VerificationSummary:
    """Per-stage outcomes; the run passes iff every stage passes."""

    stages: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.stages) and all(s.passed for s in self.stages)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_stages": len(self.stages),
            "n_failed": sum(not s.passed for s in self.stages),
            "stages": [s.to_dict() for s in self.stages],
        }


# --------------------------------------------------------------------- helpers


def _float_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _ring(text: str) -> tuple[float, float]:
    try:
        r, R = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r:R, got {text!r}") from None
    if not 0 < r < R:
        raise argparse.ArgumentTypeError("need 0 < r < R")
    return r, R


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _emit(text: str, explicit, default_name: str) -> None:
    path = output_path(explicit, default_name)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(path)


def _report(config: RunConfig, body: dict) -> str:
    return dumps_report({"config": config.to_dict(), **body})


def _load(path: str):
    try:
        return read_cloud(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except CloudFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _preset(name: str):
    from .dynamics import get_preset

    try:
        return get_preset(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


# -------------------------------------------------------------------- commands


def cmd_julia(args) -> int:
    from .dynamics import sample_julia

    m = _preset(args.map)
    cloud = sample_julia(m, args.budget, method=args.method, seed=args.seed)
    args.method = cloud.metadata["method"]
    cloud.metadata["config"] = RunConfig.from_args(args).to_dict()
    _emit(format_cloud(cloud), args.out, f"julia_{m.name.replace(':', '_')}_{args.seed}.csv")
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .perfectness import analyze

    cloud = _load(args.cloud)
    thin = False if args.no_thin else True
    report = analyze(cloud, epsilon=args.epsilon, metrics=args.metrics, budget=args.budget, seed=args.seed, thin=thin)
    args.epsilon = report.epsilon
    config = RunConfig.from_args(args)
    stem = Path(args.cloud).stem
    _emit(_report(config, {"perfectness": report.to_dict()}), args.out, f"analyze_{stem}.json")
    svg = output_path(args.svg, f"analyze_{stem}.svg")
    if svg is not None:
        svg.parent.mkdir(parents=True, exist_ok=True)
        title = f"best modulus {report.alpha_hat:.4g}"
        svg.write_text(cloud_svg(cloud.points, report.witnesses, title), encoding="utf-8")
    return EXIT_OK


def cmd_dimension(args) -> int:
    from .dimension import content_lower_bound_check, fit_dimension

    cloud = _load(args.cloud)
    try:
        fit = fit_dimension(cloud, epsilons=args.epsilons)
        body = {"dimension": fit.to_dict()}
        if args.content:
            beta = args.beta if args.beta is not None else min(max(fit.slope, 1e-3), cloud.n)
            body["content"] = content_lower_bound_check(cloud, beta, seed=args.seed).to_dict()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stem = Path(args.cloud).stem
    _emit(_report(RunConfig.from_args(args), body), args.out, f"dimension_{stem}.json")
    svg = output_path(args.svg, f"dimension_{stem}.svg")
    if svg is not None:
        svg.parent.mkdir(parents=True, exist_ok=True)
        inv = 1.0 / np.asarray(fit.epsilons)
        svg.write_text(
            loglog_svg(inv, fit.counts, fit.slope, fit.intercept, f"box dimension {fit.slope:.4f}"), encoding="utf-8"
        )
    return EXIT_OK


def cmd_modulus(args) -> int:
    from .modulus import spherical_ring_capacity
    from .sphere import Metric, RoundRing, ring_modulus

    r, R = args.ring
    res = args.resolution or (256 if args.n == 2 else 96)
    result = spherical_ring_capacity(r, R, n=args.n, resolution=res, tol=args.tol)
    exact = ring_modulus(RoundRing(np.zeros(args.n), r, R, Metric.EUCLIDEAN))
    body = {
        "result": result.to_dict(),
        "reference_modulus": exact,
        "relative_error": result.modulus / exact - 1.0,
    }
    args.resolution = res
    _emit(_report(RunConfig.from_args(args), body), args.out, "modulus.json")
    return EXIT_OK


def cmd_tau(args) -> int:
    from .modulus import PlatesTouchError, tau_estimate

    values = []
    for s in args.s:
        if s <= 0:
            raise UsageError("s values must be positive")
        try:
            res = tau_estimate(s, n=args.n, resolution=args.resolution, box_factor=args.box_factor, tol=args.tol)
        except PlatesTouchError as exc:
            raise UsageError(f"s={s:g}: {exc}; increase --resolution") from None
        values.append({"s": s, "capacity": res.capacity, "result": res.to_dict()})
    caps = [v["capacity"] for v in values]
    order = np.argsort(args.s)
    sorted_caps = np.asarray(caps)[order]
    body = {
        "values": values,
        "positive": bool(np.all(sorted_caps > 0)),
        "strictly_decreasing": bool(np.all(np.diff(sorted_caps) < 0)),
    }
    _emit(_report(RunConfig.from_args(args), body), args.out, "tau.json")
    return EXIT_OK


def _point(text: str, n: int) -> np.ndarray:
    v = np.asarray(_float_list(text), float)
    if len(v) == 1:
        p = np.zeros(n)
        p[0] = v[0]
        return p
    if len(v) != n:
        raise UsageError(f"point {text!r} does not have {n} coordinates")
    return v


def cmd_qh(args) -> int:
    from .modulus import BallDomain, HalfSpaceDomain, quasihyperbolic_distance

    n = args.n
    try:
        a, b = _point(args.from_, n), _point(args.to, n)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None
    if args.halfspace:
        pts = np.stack([a, b])
        span = float(np.ptp(pts, axis=0).max()) + float(pts[:, 0].max())
        lo = np.minimum(pts.min(axis=0) - 2 * span, 0.0)
        lo[0] = 0.0
        hi = pts.max(axis=0) + 2 * span
        domain = HalfSpaceDomain(0, 0.0, (lo, hi))
        reference = _halfspace_qh_reference(a, b)
    else:
        domain = BallDomain(np.zeros(n), 1.0)
        reference = _ball_qh_reference(a, b)
    try:
        d = quasihyperbolic_distance(domain, a, b, resolution=args.resolution)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    body = {"distance": d, "domain": "halfspace" if args.halfspace else "ball"}
    if reference is not None:
        body["reference"] = reference
        body["relative_error"] = d / reference - 1.0 if reference > 0 else 0.0
    _emit(_report(RunConfig.from_args(args), body), args.out, "qh.json")
    return EXIT_OK


def _ball_qh_reference(a: np.ndarray, b: np.ndarray):
    """Closed form for points on one radius of the unit ball, else ``None``."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na > 0 and nb > 0 and abs(np.dot(a, b) - na * nb) > 1e-12:
        return None
    return abs(math.log((1 - min(na, nb)) / (1 - max(na, nb))))


def _halfspace_qh_reference(a: np.ndarray, b: np.ndarray):
    """Closed form for points on one normal line of ``{x1 > 0}``, else ``None``."""
    if np.max(np.abs(a[1:] - b[1:])) > 1e-12 or min(a[0], b[0]) <= 0:
        return None
    return abs(math.log(b[0] / a[0]))


# ---------------------------------------------------------------------- verify


def _julia_stages(preset: str, depth: int | None, seed: int) -> list[StageResult]:
    from .dimension import content_lower_bound_check, fit_dimension
    from .dynamics import sample_julia
    from .perfectness import analyze

    m = _preset(preset)
    D = depth or (PLANAR_DEPTH if m.planar else ZORICH_DEPTH)
    logger.info("julia %s at depths %d and %d", preset, D, 2 * D)
    big = sample_julia(m, 2 * D, seed=seed)
    small = big.prefix(D)
    a1 = analyze(small, seed=seed).alpha_hat
    a2 = analyze(big, seed=seed).alpha_hat
    rel = abs(a2 - a1) / max(abs(a1), 1e-300)
    stages = [
        StageResult(
            f"{preset}/perfectness",
            bool(math.isfinite(a1) and rel <= ALPHA_REL_TOL and max(a1, a2) <= ALPHA_MAX),
            {"alpha_depth_D": a1, "alpha_depth_2D": a2, "relative_change": rel, "depth": D},
            {"relative_change_max": ALPHA_REL_TOL, "alpha_max": ALPHA_MAX},
        )
    ]
    fit = fit_dimension(big)
    stages.append(
        StageResult(
            f"{preset}/dimension",
            bool(fit.slope >= DIM_MIN and fit.r2 >= R2_MIN),
            {"dimension": fit.slope, "r2": fit.r2, "flags": fit.flags},
            {"dimension_min": DIM_MIN, "r2_min": R2_MIN},
        )
    )
    beta = float(min(max(fit.slope, 1e-3), big.n))
    try:
        cc = content_lower_bound_check(big, beta, seed=seed)
        ok = bool(cc.min_ratio > 0 and cc.spread <= CONTENT_SPREAD_MAX)
        stages.append(
            StageResult(
                f"{preset}/content",
                ok,
                {"beta": beta, "min_ratio": cc.min_ratio, "spread": cc.spread},
                {"min_ratio_gt": 0.0, "spread_max": CONTENT_SPREAD_MAX},
            )
        )
    except ValueError as exc:
        stages.append(StageResult(f"{preset}/content", False, {"beta": beta}, {}, str(exc)))
    return stages


def _coarse(grid: int, name: str) -> StageResult | None:
    if grid < MIN_GRID:
        return StageResult(name, False, {"grid": grid}, {"grid_min": MIN_GRID}, "grid too coarse")
    return None


def _modulus_stage(grid: int, tol: float) -> StageResult:
    from .modulus import spherical_ring_capacity

    name = "modulus/ring"
    guard = _coarse(grid, name)
    res = spherical_ring_capacity(1.0, math.e, n=2, resolution=grid, tol=tol)
    rel = abs(res.modulus - 1.0)
    if guard is not None:
        guard.measured["modulus"] = res.modulus
        return guard
    return StageResult(
        name, bool(rel <= RING_REL_TOL), {"modulus": res.modulus, "reference": 1.0, "relative_error": rel},
        {"relative_error_max": RING_REL_TOL},
    )


def _tau_stage(grid: int, tol: float, s_values) -> StageResult:
    from .modulus import PlatesTouchError, tau_estimate

    name = "modulus/teichmuller"
    guard = _coarse(grid, name)
    if guard is not None:
        return guard
    try:
        caps = [tau_estimate(s, 2, grid, 4.0, tol=tol).capacity for s in sorted(s_values)]
    except PlatesTouchError as exc:
        return StageResult(name, False, {"grid": grid}, {}, str(exc))
    ok = bool(all(c > 0 for c in caps) and np.all(np.diff(caps) < 0))
    return StageResult(
        name, ok, {"s": sorted(s_values), "capacity": caps}, {"positive": True, "strictly_decreasing": True}
    )


def _inequality_stages(grid: int, tol: float, trials: int, seed: int) -> list[StageResult]:
    from .perfectness import (
        TauTable,
        disjoint_continua_check,
        random_polyline_pair,
        random_two_plate_condenser,
        two_plate_capacity_check,
    )

    out = []
    suites = (
        ("inequality/two_plate", random_two_plate_condenser, two_plate_capacity_check, 1000),
        ("inequality/disjoint_continua", random_polyline_pair, disjoint_continua_check, 2000),
    )
    # coarse grids overestimate the Teichmüller capacity, which only tightens the check
    table = TauTable(resolution=grid, tol=tol)
    for name, make, check, offset in suites:
        guard = _coarse(grid, name)
        if guard is not None:
            out.append(guard)
            continue
        ratios, violations = [], 0
        for k in range(trials):
            rng = np.random.default_rng(seed + offset + k)
            E, F = make(rng)
            c = check(E, F, slack=INEQUALITY_SLACK, resolution=grid, tol=tol, table=table)
            ratios.append(c.lhs / c.rhs)
            violations += not c.holds
        out.append(
            StageResult(
                name, violations == 0, {"trials": trials, "violations": violations, "min_ratio": min(ratios)},
                {"slack": INEQUALITY_SLACK, "violations_max": 0},
            )
        )
    return out


def run_verify(config: RunConfig) -> VerificationSummary:
    p = config.params
    stages = []
    if "julia" in p["stages"]:
        for preset in p["preset"]:
            stages.extend(_julia_stages(preset, p["depth"], p["seed"]))
    if "modulus" in p["stages"]:
        stages.append(_modulus_stage(p["grid"], p["tol"]))
    if "tau" in p["stages"]:
        stages.append(_tau_stage(p["grid"], p["tol"], p["tau_s"]))
    if "inequality" in p["stages"] and p["trials"] > 0:
        stages.extend(_inequality_stages(p["grid"], p["tol"], p["trials"], p["seed"]))
    return VerificationSummary(stages)


def cmd_verify(args) -> int:
    args.preset = args.preset or list(VERIFY_PRESETS)
    for name in args.preset:
        _preset(name)
    unknown = set(args.stages) - set(STAGES)
    if unknown:
        raise UsageError(f"unknown stages: {', '.join(sorted(unknown))}")
    config = RunConfig.from_args(args)
    summary = run_verify(config)
    _emit(_report(config, {"verification": summary.to_dict()}), args.out, "verify.json")
    for s in summary.stages:
        logger.info("%s %s", "PASS" if s.passed else "FAIL", s.name)
    return EXIT_OK if summary.passed else EXIT_FAIL


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uniperf", description="Uniform perfectness and modulus toolkit.")
    parser.add_argument("--version", action="version", version=f"uniperf {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("julia", help="sample a Julia set")
    p.add_argument("--map", required=True, help="preset name, e.g. power2, cheb3, quad:-1, zorich2")
    p.add_argument("--budget", type=_positive_int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("inverse", "bisection"), default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_julia)

    p = sub.add_parser("analyze", help="uniform-perfectness report of a cloud")
    p.add_argument("cloud")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--metrics", type=lambda t: t.split(","), default=["euclidean", "chordal"])
    p.add_argument("--budget", type=_positive_int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-thin", action="store_true", help="analyze every point")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dimension", help="box-counting dimension of a cloud")
    p.add_argument("cloud")
    p.add_argument("--epsilons", type=_float_list, default=None)
    p.add_argument("--content", action="store_true", help="also run the content lower-bound check")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("modulus", help="discrete modulus of a round ring")
    p.add_argument("--ring", type=_ring, required=True, help="r:R")
    p.add_argument("--n", type=int, choices=(2, 3), default=2)
    p.add_argument("--resolution", type=_positive_int, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("tau", help="Teichmüller capacity estimates")
    p.add_argument("--n", type=int, choices=(2, 3), default=2)
    p.add_argument("--s", type=_float_list, required=True)
    p.add_argument("--resolution", type=_positive_int, default=64)
    p.add_argument("--box-factor", type=float, default=4.0)
    p.add_argument("--tol", type=float, default=3e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("qh", help="quasihyperbolic distance")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ball", action="store_true", default=True, help="unit ball (default)")
    g.add_argument("--halfspace", action="store_true", help="half-space {x1 > 0}")
    p.add_argument("--from", dest="from_", required=True, help="scalar (on the first axis) or comma vector")
    p.add_argument("--to", required=True)
    p.add_argument("--n", type=int, choices=(2, 3), default=2)
    p.add_argument("--resolution", type=_positive_int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_qh)

    p = sub.add_parser("verify", help="run the acceptance pipeline")
    p.add_argument("--preset", action="append", default=None, help="repeatable; default all built-in presets")
    p.add_argument("--depth", type=_positive_int, default=None, help="sample depth D (default per preset)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=_positive_int, default=64)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--tau-s", type=_float_list, default=[1.0, 2.0, 4.0, 8.0])
    p.add_argument("--trials", type=int, default=5, help="configurations per inequality suite")
    p.add_argument("--stages", type=lambda t: t.split(","), default=list(STAGES))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"uniperf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
