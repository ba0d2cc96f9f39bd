"""Experiment driver and empirical verification of the convergence theory.

Every quantitative inequality the majorant machinery promises is checked
here against concrete problems by deterministic Monte-Carlo sampling:

* ``check_majorant_condition``   the derivative-variation bound that defines
  a majorant (certifies recorded majorant hints);
* ``check_operator_bound``       inverse-derivative norm bound inside the
  invertibility ball;
* ``check_step_bound``           Newton-step length bound;
* ``check_linearization_error``  field linearization error vs the scalar
  linearization error of the majorant;
* ``check_curvature_bound``      second-derivative criterion (finite
  differences of the covariant derivative, exact sup over the first slot);
* ``check_contraction``          per-iteration Q-factor bounds on a solver
  trace, including the start-anchored variants available under a convex
  slope.

Checks are two-sided honest: they are expected to fail when fed deliberately
corrupted inputs (for instance a majorant whose constant was scaled down).
``run_experiment`` wires a problem, a majorant and a start-point sweep
together, runs the solver, executes the requested checks, and writes
machine-readable CSV/JSON reports.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InsufficientDataError, SingularOperatorError
from .fields import VectorFieldProblem, build_problem
from .geometry import Point
from .majorant import (
    MajorantFunction,
    RadiusQuery,
    RadiusReport,
    majorant_from_spec,
)
from .solver import (
    AdversarialStep,
    ExactStep,
    IterationTrace,
    SolverConfig,
    TruncatedStep,
    iterate,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class CheckReport:
    """Outcome of one verification check."""

    name: str
    passed: bool
    margin: float               # worst-case slack (negative = violation)
    witness: dict | None = None  # inputs attaining the worst margin
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "margin": self.margin,
            "witness": self.witness,
            "details": self.details,
        }


def _point_payload(p: Point) -> list:
    return np.asarray(p.coords).ravel().tolist()


def _require_singularity(problem: VectorFieldProblem) -> Point:
    if problem.singularity is None:
        raise ValueError(f"problem {problem.name} has no recorded singularity")
    return problem.singularity


def _transport_matrix(geom, a: Point, b: Point) -> np.ndarray:
    """Matrix of parallel transport T_a -> T_b in the orthonormal bases."""
    cols = [geom.coordinates(geom.transport(a, b, v))
            for v in geom.tangent_basis(a)]
    return np.column_stack(cols)


def spreading_for(problem: VectorFieldProblem, f: MajorantFunction) -> tuple[float, float]:
    """Spreading constant at the singularity, evaluated over the largest
    ball the theory can use, min(domain radius, invertibility radius,
    injectivity radius). The convergence radius never exceeds this ball and
    the constant grows with the radius, so the value is a valid
    over-estimate on the convergence ball. Returns (K, radius used)."""
    p_star = _require_singularity(problem)
    geom = problem.geometry
    radius = min(problem.domain_radius, f.invertibility_radius(),
                 0.999 * geom.injectivity_radius(p_star))
    return geom.spreading_constant(p_star, radius), radius


def radius_context(problem: VectorFieldProblem, f: MajorantFunction,
                   budget: float) -> tuple[RadiusQuery, RadiusReport, float]:
    """Assemble the radius query and report for a problem/majorant pair."""
    p_star = _require_singularity(problem)
    spreading, _ = spreading_for(problem, f)
    query = RadiusQuery(budget, spreading, problem.domain_radius,
                        problem.geometry.injectivity_radius(p_star))
    return query, f.radii(query), spreading


def _sample_points(problem, radius, samples, seed, points):
    if points is not None:
        return list(points)
    p_star = _require_singularity(problem)
    rng = np.random.default_rng(seed)
    return [problem.geometry.sample_in_ball(p_star, radius, rng)
            for _ in range(samples)]


def check_majorant_condition(problem: VectorFieldProblem, f: MajorantFunction,
                             samples: int = 500, radius: float | None = None,
                             tau_values=None, random_taus: int = 10,
                             seed: int = 0, slack: float = 1e-8,
                             points=None) -> CheckReport:
    """Verify the derivative-variation bound that makes f a majorant of the
    field: for p in the ball and every tau in [0, 1], the transported
    derivative difference along the geodesic from the singularity to p is
    bounded by f'(d) - f'(tau d) in operator norm.

    This run certifies recorded majorant hints; a constant that is too
    small must make it fail.
    """
    p_star = _require_singularity(problem)
    geom = problem.geometry
    if radius is None:
        _, report, _ = radius_context(problem, f, 0.0)
        radius = 0.9 * report.convergence_radius
    pts = _sample_points(problem, radius, samples, seed, points)

    base_taus = np.linspace(0.0, 1.0, 21) if tau_values is None \
        else np.asarray(tau_values, dtype=float)
    rng = np.random.default_rng([seed, 1])

    m_star = problem.covariant_derivative(p_star).matrix
    worst = math.inf
    witness = None
    for p in pts:
        d = geom.distance(p_star, p)
        if d <= 0.0 or d >= f.domain_end:
            continue
        u = geom.log(p_star, p)
        m_p = problem.covariant_derivative(p).matrix
        t_p_to_star = _transport_matrix(geom, p, p_star)
        taus = np.concatenate([base_taus, rng.uniform(0.0, 1.0, random_taus)])
        for tau in taus:
            q = geom.exp(p_star, float(tau) * u)
            m_q = problem.covariant_derivative(q).matrix
            t_q_to_star = _transport_matrix(geom, q, p_star)
            t_p_to_q = _transport_matrix(geom, p, q)
            diff = t_p_to_star @ m_p - t_q_to_star @ m_q @ t_p_to_q
            lhs = float(np.linalg.norm(np.linalg.solve(m_star, diff), 2))
            rhs = f.slope(d) - f.slope(float(tau) * d)
            margin = rhs - lhs
            if margin < worst:
                worst = margin
                witness = {"point": _point_payload(p), "tau": float(tau),
                           "distance": d, "lhs": lhs, "rhs": rhs}
    passed = worst >= -slack
    return CheckReport("majorant-condition", passed, worst,
                       None if passed else witness,
                       {"samples": len(pts), "radius": radius,
                        "taus": len(base_taus) + random_taus})


def check_operator_bound(problem: VectorFieldProblem, f: MajorantFunction,
                         samples: int = 500, radius: float | None = None,
                         seed: int = 0, slack: float = 1e-8,
                         points=None) -> CheckReport:
    """Inside the invertibility ball the derivative must be invertible with
    ||DX(p)^{-1} P DX(p*)|| <= 1/|f'(d)| (transport from the singularity)."""
    p_star = _require_singularity(problem)
    geom = problem.geometry
    nu = f.invertibility_radius()
    if radius is None:
        radius = 0.98 * min(problem.domain_radius, nu)
    pts = _sample_points(problem, radius, samples, seed, points)

    m_star = problem.covariant_derivative(p_star).matrix
    worst = math.inf
    witness = None
    skipped = 0
    for p in pts:
        d = geom.distance(p_star, p)
        if d >= min(nu, problem.domain_radius):
            skipped += 1
            continue
        try:
            op = problem.covariant_derivative(p)
            sv = op.singular_values()
            if sv[-1] <= 1e-12 * sv[0]:
                raise SingularOperatorError("singular derivative at sample")
            t_star_to_p = _transport_matrix(geom, p_star, p)
            lhs = float(np.linalg.norm(
                np.linalg.solve(op.matrix, t_star_to_p @ m_star), 2))
        except SingularOperatorError:
            return CheckReport(
                "operator-bound", False, -math.inf,
                {"point": _point_payload(p), "distance": d,
                 "reason": "singular derivative inside invertibility ball"},
                {"samples": len(pts), "radius": radius, "skipped": skipped})
        rhs = 1.0 / abs(f.slope(d))
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            witness = {"point": _point_payload(p), "distance": d,
                       "lhs": lhs, "rhs": rhs}
    passed = worst >= -slack
    return CheckReport("operator-bound", passed, worst,
                       None if passed else witness,
                       {"samples": len(pts), "radius": radius,
                        "skipped": skipped})


def check_step_bound(problem: VectorFieldProblem, f: MajorantFunction,
                     samples: int = 500, radius: float | None = None,
                     budget: float = 0.0, seed: int = 0, slack: float = 1e-8,
                     points=None) -> CheckReport:
    """Newton-step length bound ||DX(p)^{-1} X(p)|| <= f(d)/f'(d) inside
    the convergence ball (the right side is positive there)."""
    p_star = _require_singularity(problem)
    geom = problem.geometry
    if radius is None:
        _, report, _ = radius_context(problem, f, budget)
        radius = 0.99 * report.convergence_radius
    pts = _sample_points(problem, radius, samples, seed, points)

    nu = f.invertibility_radius()
    worst = math.inf
    witness = None
    skipped = 0
    for p in pts:
        d = geom.distance(p_star, p)
        if d >= nu:
            skipped += 1
            continue
        try:
            step = problem.covariant_derivative(p).solve(problem.evaluate(p))
        except SingularOperatorError:
            return CheckReport(
                "step-bound", False, -math.inf,
                {"point": _point_payload(p), "distance": d,
                 "reason": "singular derivative inside convergence ball"},
                {"samples": len(pts), "radius": radius, "skipped": skipped})
        lhs = geom.norm(p, step)
        rhs = f.value(d) / f.slope(d) if d > 0 else 0.0
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            witness = {"point": _point_payload(p), "distance": d,
                       "lhs": lhs, "rhs": rhs}
    passed = worst >= -slack
    return CheckReport("step-bound", passed, worst,
                       None if passed else witness,
                       {"samples": len(pts), "radius": radius,
                        "skipped": skipped})


def check_linearization_error(problem: VectorFieldProblem, f: MajorantFunction,
                              samples: int = 500, radius: float | None = None,
                              seed: int = 0, slack: float = 1e-8,
                              points=None) -> CheckReport:
    """Field linearization error at the singularity vs the scalar one:
    || DX(p*)^{-1} [X(p*) - P(X(p) + DX(p) log_p(p*))] || <= e_f(d, 0)."""
    p_star = _require_singularity(problem)
    geom = problem.geometry
    if radius is None:
        radius = min(0.999 * problem.domain_radius,
                     0.98 * f.domain_end,
                     2.0 * f.uniqueness_radius(problem.domain_radius))
    pts = _sample_points(problem, radius, samples, seed, points)

    m_star = problem.covariant_derivative(p_star).matrix
    x_star = problem.evaluate(p_star)
    worst = math.inf
    witness = None
    for p in pts:
        d = geom.distance(p_star, p)
        if d >= f.domain_end:
            continue
        back = geom.log(p, p_star)   # velocity of the geodesic p -> p*
        op = problem.covariant_derivative(p)
        linear = problem.evaluate(p) + op.apply(back)
        err = x_star - geom.transport(p, p_star, linear)
        lhs = float(np.linalg.norm(
            np.linalg.solve(m_star, geom.coordinates(err))))
        rhs = f.linearization_error(d, 0.0)
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            witness = {"point": _point_payload(p), "distance": d,
                       "lhs": lhs, "rhs": rhs}
    passed = worst >= -slack
    return CheckReport("linearization-error", passed, worst,
                       None if passed else witness,
                       {"samples": len(pts), "radius": radius})


def check_curvature_bound(problem: VectorFieldProblem, f: MajorantFunction,
                          samples: int = 100, radius: float | None = None,
                          directions: int = 8, fd_step: float = 1e-4,
                          seed: int = 0, slack: float = 1e-5,
                          points=None) -> CheckReport:
    """Second-derivative criterion: the transported second covariant
    derivative scaled by DX(p*)^{-1} is bounded by f''(d). A sufficient
    condition for the majorant bound, checked by Monte-Carlo: finite
    differences of the covariant derivative along sampled directions, with
    the exact operator norm taken over the remaining slot.
    """
    p_star = _require_singularity(problem)
    geom = problem.geometry
    if f.slope_curvature(0.0) is None:
        return CheckReport("curvature-bound", True, math.inf, None,
                           {"skipped": "majorant has no closed-form curvature"})
    if radius is None:
        _, report, _ = radius_context(problem, f, 0.0)
        radius = 0.9 * report.convergence_radius
    pts = _sample_points(problem, radius, samples, seed, points)

    m_star = problem.covariant_derivative(p_star).matrix
    rng = np.random.default_rng([seed, 2])
    dim = geom.dim
    worst = math.inf
    witness = None
    for q in pts:
        d = geom.distance(p_star, q)
        if not 0.0 < d < f.domain_end:
            continue
        t_q_to_star = _transport_matrix(geom, q, p_star)
        basis_dirs = list(np.eye(dim))
        extra = [c / np.linalg.norm(c)
                 for c in rng.standard_normal((max(directions - dim, 0), dim))]
        best = 0.0
        for w_coords in basis_dirs + extra:
            w = geom.from_coordinates(q, np.asarray(w_coords))
            qp = geom.exp(q, fd_step * w)
            qm = geom.exp(q, (-fd_step) * w)
            mp = (_transport_matrix(geom, qp, q)
                  @ problem.covariant_derivative(qp).matrix
                  @ _transport_matrix(geom, q, qp))
            mm = (_transport_matrix(geom, qm, q)
                  @ problem.covariant_derivative(qm).matrix
                  @ _transport_matrix(geom, q, qm))
            second = (mp - mm) / (2.0 * fd_step)
            g = np.linalg.solve(m_star, t_q_to_star @ second)
            best = max(best, float(np.linalg.norm(g, 2)))
        rhs = f.slope_curvature(d)
        margin = rhs - best
        if margin < worst:
            worst = margin
            witness = {"point": _point_payload(q), "distance": d,
                       "lhs": best, "rhs": rhs}
    passed = worst >= -slack
    return CheckReport("curvature-bound", passed, worst,
                       None if passed else witness,
                       {"samples": len(pts), "radius": radius,
                        "directions": directions, "fd_step": fd_step})


def check_contraction(trace: IterationTrace, f: MajorantFunction,
                      budget: float, spreading: float,
                      slack: float = 1e-10) -> CheckReport:
    """Per-iteration Q-factor bounds on a solver trace.

    Always checks the pointwise bound
        d_{k+1} <= spreading [(1+budget) |n_f(d_k)|/d_k + budget] d_k;
    when the majorant slope is convex, additionally checks the
    start-anchored per-step bound (quadratic in d_k for budget 0)
        d_{k+1} <= spreading [(1+budget) |n_f(d_0)|/d_0^2 d_k + budget] d_k
    and the global linear-rate bound with the factor frozen at d_0.
    """
    dists = trace.distances()
    if any(d is None for d in dists):
        raise ValueError("trace lacks distance-to-singularity data")
    nu = f.invertibility_radius()
    convex = f.has_convex_slope
    d0 = dists[0]
    worst = math.inf
    witness = None
    checked = 0
    anchored = convex and 0.0 < d0 < nu
    if anchored:
        ratio0 = abs(f.newton_iterate(d0)) / d0
    for k in range(len(dists) - 1):
        dk, dk1 = dists[k], dists[k + 1]
        if not 0.0 < dk < nu:
            continue
        checked += 1
        bounds = {"pointwise": f.contraction_factor(dk, budget, spreading) * dk}
        if anchored:
            bounds["anchored-step"] = spreading * (
                (1.0 + budget) * (ratio0 / d0) * dk + budget) * dk
            bounds["anchored-rate"] = spreading * (
                (1.0 + budget) * ratio0 + budget) * dk
        for label, bound in bounds.items():
            margin = bound - dk1
            if margin < worst:
                worst = margin
                witness = {"k": k, "d_k": dk, "d_k1": dk1,
                           "bound": label, "value": bound}
    if checked == 0:
        worst = math.inf
    passed = worst >= -slack
    return CheckReport("contraction", passed, worst,
                       None if passed else witness,
                       {"pairs_checked": checked, "convex_slope": convex})


def estimate_order(trace_or_distances, floor: float = 1e-14,
                   tail_points: int = 6) -> float:
    """Empirical convergence order: least-squares slope of log d_{k+1}
    against log d_k over the tail of the usable (above-floor) distances.
    Needs at least 4 usable records."""
    if isinstance(trace_or_distances, IterationTrace):
        dists = trace_or_distances.distances()
    else:
        dists = list(trace_or_distances)
    usable = []
    for d in dists:
        if d is None or not math.isfinite(d) or d <= floor:
            break
        usable.append(d)
    if len(usable) < 4:
        raise InsufficientDataError(
            f"need >= 4 records above {floor}, found {len(usable)}")
    tail = usable[-tail_points:]
    xs = np.log(tail[:-1])
    ys = np.log(tail[1:])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# experiment configuration and driver
# ---------------------------------------------------------------------------

SAMPLE_CHECKS = {
    "majorant-condition": check_majorant_condition,
    "operator-bound": check_operator_bound,
    "step-bound": check_step_bound,
    "linearization-error": check_linearization_error,
    "curvature-bound": check_curvature_bound,
}
TRACE_CHECKS = ("contraction",)
DEFAULT_CHECKS = ("majorant-condition", "operator-bound", "step-bound",
                  "linearization-error", "contraction")


def available_checks() -> list[str]:
    return sorted(list(SAMPLE_CHECKS) + list(TRACE_CHECKS))


_SCHEMA = {
    None: {"seed", "out_dir", "trace_format", "problem", "majorant", "run",
           "starts", "checks"},
    "problem": {"name", "params"},
    "majorant": {"kind", "constant", "exponent", "gamma"},
    "run": {"budget", "tolerance", "strategy", "max_inner", "inner_method",
            "direction_seed", "stop_norm", "max_iterations"},
    "starts": {"fractions", "count", "explicit", "outside_probes"},
    "checks": {"names", "samples"},
}


def _check_keys(table: dict, section):
    allowed = _SCHEMA[section]
    unknown = set(table) - allowed
    if unknown:
        where = "top level" if section is None else f"[{section}]"
        raise ConfigError(f"unknown config keys at {where}: {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    """Validated experiment description (see ``load_config`` for the file
    schema)."""

    problem_name: str
    problem_params: dict = field(default_factory=dict)
    majorant_spec: dict = field(default_factory=lambda: {"kind": "from-hint"})
    budget: float = 0.0
    tolerance: float | str = 0.0
    strategy: str = "exact"
    max_inner: int = 50
    inner_method: str = "cgnr"
    direction_seed: int = 0
    stop_norm: float = 1e-13
    max_iterations: int = 100
    fractions: tuple = (0.1, 0.5, 0.9, 0.99)
    count: int = 1
    explicit_starts: tuple = ()
    outside_probes: bool = False
    checks: tuple = DEFAULT_CHECKS
    check_samples: int = 500
    out_dir: str = "rinewton-out"
    trace_format: str = "csv"
    seed: int = 0

    def __post_init__(self):
        for fr in self.fractions:
            if not 0.0 < fr < 1.0:
                raise ConfigError(f"start fraction {fr} outside (0, 1)")
        if isinstance(self.tolerance, str):
            if self.tolerance != "max":
                raise ConfigError("tolerance must be a number or 'max'")
        elif not 0.0 <= float(self.tolerance) < 1.0:
            raise ConfigError("tolerance must lie in [0, 1)")
        if self.strategy not in ("exact", "truncated", "adversarial"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        unknown = set(self.checks) - set(available_checks())
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
        if self.trace_format not in ("csv", "json"):
            raise ConfigError("trace_format must be 'csv' or 'json'")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _check_keys(data, None)
        problem = dict(data.get("problem", {}))
        _check_keys(problem, "problem")
        if "name" not in problem:
            raise ConfigError("[problem] requires a 'name'")
        majorant = dict(data.get("majorant", {"kind": "from-hint"}))
        _check_keys(majorant, "majorant")
        run = dict(data.get("run", {}))
        _check_keys(run, "run")
        starts = dict(data.get("starts", {}))
        _check_keys(starts, "starts")
        checks = dict(data.get("checks", {}))
        _check_keys(checks, "checks")
        return cls(
            problem_name=problem["name"],
            problem_params=dict(problem.get("params", {})),
            majorant_spec=majorant,
            budget=float(run.get("budget", 0.0)),
            tolerance=run.get("tolerance", 0.0),
            strategy=run.get("strategy", "exact"),
            max_inner=int(run.get("max_inner", 50)),
            inner_method=run.get("inner_method", "cgnr"),
            direction_seed=int(run.get("direction_seed", 0)),
            stop_norm=float(run.get("stop_norm", 1e-13)),
            max_iterations=int(run.get("max_iterations", 100)),
            fractions=tuple(starts.get("fractions", (0.1, 0.5, 0.9, 0.99))),
            count=int(starts.get("count", 1)),
            explicit_starts=tuple(tuple(s) if isinstance(s, (list, tuple)) else s
                                  for s in starts.get("explicit", ())),
            outside_probes=bool(starts.get("outside_probes", False)),
            checks=tuple(checks.get("names", DEFAULT_CHECKS)),
            check_samples=int(checks.get("samples", 500)),
            out_dir=str(data.get("out_dir", "rinewton-out")),
            trace_format=str(data.get("trace_format", "csv")),
            seed=int(data.get("seed", 0)),
        )


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment configuration; unknown keys are errors."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return ExperimentConfig.from_dict(data)


def _resolve_majorant(config: ExperimentConfig,
                      problem: VectorFieldProblem) -> MajorantFunction:
    spec = dict(config.majorant_spec)
    if spec.get("kind", "from-hint") == "from-hint":
        if problem.majorant_hint is None:
            raise ConfigError(
                f"problem {problem.name} has no majorant hint; specify one")
        return problem.majorant_hint
    return majorant_from_spec(spec)


def _strategy_from_config(config: ExperimentConfig):
    if config.strategy == "exact":
        return ExactStep()
    if config.strategy == "truncated":
        return TruncatedStep(max_inner=config.max_inner,
                             method=config.inner_method)
    return AdversarialStep(direction_seed=config.direction_seed)


@dataclass
class RunResult:
    config: ExperimentConfig
    radius_report: dict
    traces: list           # (trace_id, IterationTrace, tolerance, is_probe)
    check_reports: list

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.check_reports)


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunResult:
    """Execute one experiment: radii, start sweep, solver runs, checks,
    reports. Deterministic for a fixed seed: same seed, same bytes."""
    problem = build_problem(config.problem_name, **config.problem_params)
    f = _resolve_majorant(config, problem)
    p_star = _require_singularity(problem)
    geom = problem.geometry

    query, report, spreading = radius_context(problem, f, config.budget)
    r = report.convergence_radius
    cond_star = problem.covariant_derivative(p_star).condition_number()
    strategy = _strategy_from_config(config)

    starts: list[tuple[str, Point, bool]] = []
    for i, fraction in enumerate(config.fractions):
        for j in range(config.count):
            rng = np.random.default_rng([config.seed, 1, i, j])
            p0 = geom.sample_at_distance(p_star, fraction * r, rng)
            starts.append((f"f{fraction:g}_{j}", p0, False))
    for i, coords in enumerate(config.explicit_starts):
        arr = np.asarray(coords, dtype=float)
        if geom.name.startswith("spd"):
            n = int(round(math.sqrt(arr.size)))
            arr = arr.reshape(n, n)
        starts.append((f"explicit_{i}", geom.point(arr), False))
    if config.outside_probes:
        probe_dist = min(1.5 * r, 0.999 * geom.injectivity_radius(p_star),
                         0.999 * problem.domain_radius)
        for j in range(max(config.count, 1)):
            rng = np.random.default_rng([config.seed, 2, j])
            p0 = geom.sample_at_distance(p_star, probe_dist, rng)
            starts.append((f"probe_{j}", p0, True))

    tolerance_caps: dict[str, float] = {}
    traces = []
    for trace_id, p0, is_probe in starts:
        d0 = geom.distance(p_star, p0)
        if config.tolerance == "max":
            theta = f.tolerance_cap(cond_star, config.budget, d0) \
                if d0 < f.invertibility_radius() else 0.0
        else:
            theta = float(config.tolerance)
        tolerance_caps[trace_id] = theta
        sc = SolverConfig(tolerance=theta, strategy=strategy,
                          stop_norm=config.stop_norm,
                          max_iterations=config.max_iterations,
                          seed=config.seed)
        traces.append((trace_id, iterate(problem, p0, sc), theta, is_probe))

    check_reports: list[CheckReport] = []
    for name in config.checks:
        if name in SAMPLE_CHECKS:
            check_reports.append(SAMPLE_CHECKS[name](
                problem, f, samples=config.check_samples, seed=config.seed))
        elif name == "contraction":
            for trace_id, trace, theta, is_probe in traces:
                if is_probe:
                    continue
                rep = check_contraction(trace, f, config.budget, spreading)
                rep.details["trace"] = trace_id
                rep.name = f"contraction[{trace_id}]"
                check_reports.append(rep)

    radius_report = {
        "problem": problem.name,
        "majorant": f.to_dict(),
        "query": {
            "budget": query.budget,
            "spreading": query.spreading,
            "domain_radius": query.domain_radius,
            "injectivity_radius": query.injectivity_radius,
        },
        "condition_number_at_singularity": cond_star,
        "radii": report.to_dict(),
        "tolerance_caps": tolerance_caps,
        "seed": config.seed,
    }

    result = RunResult(config, radius_report, traces, check_reports)
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for trace_id, trace, theta, is_probe in traces:
            trace.save(out, trace_id, config.trace_format)
        with open(out / "radius_report.json", "w") as fh:
            json.dump(radius_report, fh, indent=1)
        with open(out / "checks.json", "w") as fh:
            json.dump([r.to_dict() for r in check_reports], fh, indent=1)
    return result
