"""Inexact Newton iteration with a relative residual tolerance.

Each step solves the tangent-space linear system approximately: a step S at
the point p is accepted when

    ||X(p) + DX(p) S||  <=  tolerance * ||X(p)||,

and the iteration moves to exp_p(S). Three ways to produce an admissible
step are provided:

* ``ExactStep``        dense solve, residual at rounding level;
* ``TruncatedStep``    an inner iterative solver (conjugate gradient on the
  normal equations, or Richardson/Landweber) stopped as soon as the
  residual test passes, with an exact fallback;
* ``AdversarialStep``  the exact step plus a deterministic perturbation
  scaled so the residual lands at 0.999 * tolerance * ||X(p)|| — the worst
  admissible step, used to stress-test the convergence bounds.

Steps are computed in orthonormal basis coordinates at the current iterate
and mapped back to ambient tangents; no state is carried across iterates.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, GeometryError, SingularOperatorError
from .fields import TangentOperator, VectorFieldProblem
from .geometry import Point, Tangent

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"
DIVERGED = "diverged"
SINGULAR = "singular-derivative"


@dataclass(frozen=True)
class ExactStep:
    """Solve the tangent system exactly regardless of the tolerance."""

    kind = "exact"


@dataclass(frozen=True)
class TruncatedStep:
    """Run an inner iterative solver until the residual test passes.

    method: "cgnr" (conjugate gradient on the normal equations) or
    "richardson" (normal-equations Richardson with step 1/sigma_max^2).
    Falls back to the exact solve after ``max_inner`` iterations.
    """

    max_inner: int = 50
    method: str = "cgnr"
    kind = "truncated"

    def __post_init__(self):
        if self.method not in ("cgnr", "richardson"):
            raise ValueError("method must be 'cgnr' or 'richardson'")
        if self.max_inner < 1:
            raise ValueError("max_inner must be positive")


@dataclass(frozen=True)
class AdversarialStep:
    """Exact step plus a deterministic perturbation tuned so the residual
    equals 0.999 * tolerance * ||X(p)||: the worst admissible step."""

    direction_seed: int = 0
    kind = "adversarial"


StepStrategy = ExactStep | TruncatedStep | AdversarialStep


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules and step strategy for one solver run.

    tolerance:          relative residual tolerance in [0, 1)
    strategy:           how inner systems are solved
    stop_norm:          terminate once ||X(p)|| falls below this
    max_iterations:     outer iteration cap
    divergence_radius:  abort once the iterate drifts this far from the
                        start (default 10 * problem.domain_radius)
    seed:               base seed for per-iteration randomness
    """

    tolerance: float = 0.0
    strategy: StepStrategy = ExactStep()
    stop_norm: float = 1e-13
    max_iterations: int = 100
    divergence_radius: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tolerance < 1.0:
            raise ValueError("tolerance must lie in [0, 1)")
        if self.stop_norm <= 0 or self.max_iterations < 1:
            raise ValueError("stop_norm must be positive, max_iterations >= 1")

    def to_dict(self) -> dict:
        strat: dict = {"kind": self.strategy.kind}
        if isinstance(self.strategy, TruncatedStep):
            strat["max_inner"] = self.strategy.max_inner
            strat["method"] = self.strategy.method
        if isinstance(self.strategy, AdversarialStep):
            strat["direction_seed"] = self.strategy.direction_seed
        return {
            "tolerance": self.tolerance,
            "strategy": strat,
            "stop_norm": self.stop_norm,
            "max_iterations": self.max_iterations,
            "divergence_radius": self.divergence_radius,
            "seed": self.seed,
        }


@dataclass
class IterationRecord:
    """One visited point. ``step``/``residual_ratio`` are None on terminal
    records (no step was taken from there)."""

    index: int
    point: Point
    field_norm: float
    step: Tangent | None = None
    residual_ratio: float | None = None
    step_norm: float | None = None
    distance: float | None = None
    note: str = ""


@dataclass
class IterationTrace:
    records: list[IterationRecord]
    termination: str
    config: SolverConfig
    problem_name: str = ""

    def distances(self) -> list[float]:
        return [r.distance for r in self.records]

    def field_norms(self) -> list[float]:
        return [r.field_norm for r in self.records]

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def csv_rows(self):
        """Rows with the stable column set (k, field_norm, residual_ratio,
        step_norm, dist_to_pstar); floats via repr for byte-stable output."""
        def fmt(x):
            return "" if x is None else repr(float(x))
        for r in self.records:
            yield [str(r.index), fmt(r.field_norm), fmt(r.residual_ratio),
                   fmt(r.step_norm), fmt(r.distance)]

    def save(self, out_dir, trace_id: str, fmt: str = "csv") -> Path:
        """Write trace_<id>.csv (or .json) plus a JSON sidecar with the
        config and termination."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        header = ["k", "field_norm", "residual_ratio", "step_norm", "dist_to_pstar"]
        if fmt == "csv":
            path = out_dir / f"trace_{trace_id}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                writer.writerows(self.csv_rows())
        elif fmt == "json":
            path = out_dir / f"trace_{trace_id}.json"
            rows = [dict(zip(header, row)) for row in self.csv_rows()]
            with open(path, "w") as fh:
                json.dump(rows, fh, indent=1)
        else:
            raise ValueError("format must be 'csv' or 'json'")
        sidecar = {
            "problem": self.problem_name,
            "termination": self.termination,
            "config": self.config.to_dict(),
            "iterations": len(self.records) - 1,
            "final_field_norm": self.final.field_norm,
        }
        with open(out_dir / f"trace_{trace_id}.meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=1, sort_keys=True)
        return path


def residual(problem: VectorFieldProblem, p: Point, step: Tangent,
             op: TangentOperator | None = None) -> float:
    """||X(p) + DX(p) step|| in the metric at p."""
    geom = problem.geometry
    if op is None:
        op = problem.covariant_derivative(p)
    x = geom.coordinates(problem.evaluate(p))
    s = geom.coordinates(step)
    return float(np.linalg.norm(x + op.matrix @ s))


def exact_step(problem: VectorFieldProblem, p: Point) -> Tangent:
    """S = -DX(p)^{-1} X(p)."""
    op = problem.covariant_derivative(p)
    return op.solve(-1.0 * problem.evaluate(p))


def _cgnr(m: np.ndarray, b: np.ndarray, max_inner: int, target: float):
    """Conjugate gradient on the normal equations; returns (solution or
    None, inner iterations used)."""
    s = np.zeros_like(b)
    r = b.copy()                       # residual of m s = b
    z = m.T @ r
    d = z.copy()
    zz = float(z @ z)
    for it in range(1, max_inner + 1):
        md = m @ d
        denom = float(md @ md)
        if denom <= 0.0 or not math.isfinite(denom):
            return None, it
        alpha = zz / denom
        s = s + alpha * d
        r = r - alpha * md
        if np.linalg.norm(r) <= target:
            return s, it
        z = m.T @ r
        zz_new = float(z @ z)
        if zz <= 0.0:
            return None, it
        d = z + (zz_new / zz) * d
        zz = zz_new
    return None, max_inner


def _richardson(m: np.ndarray, b: np.ndarray, max_inner: int, target: float):
    """Normal-equations Richardson (Landweber) iteration."""
    omega = 1.0 / float(np.linalg.norm(m, 2)) ** 2
    s = np.zeros_like(b)
    for it in range(1, max_inner + 1):
        r = b - m @ s
        if np.linalg.norm(r) <= target:
            return s, it
        s = s + omega * (m.T @ r)
    r = b - m @ s
    if np.linalg.norm(r) <= target:
        return s, max_inner
    return None, max_inner


def inexact_step(problem: VectorFieldProblem, p: Point, tolerance: float,
                 strategy: StepStrategy, rng=None,
                 op: TangentOperator | None = None):
    """One admissible step at p.

    Returns (step, residual_ratio, note). The residual ratio is always the
    actually achieved ||X + DX S|| / ||X||.
    """
    geom = problem.geometry
    if op is None:
        op = problem.covariant_derivative(p)
    x = geom.coordinates(problem.evaluate(p))
    norm_x = float(np.linalg.norm(x))
    m = op.matrix

    def finish(s, note=""):
        ratio = float(np.linalg.norm(x + m @ s)) / norm_x if norm_x > 0 else 0.0
        return geom.from_coordinates(p, s), ratio, note

    def exact_coords():
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise SingularOperatorError("derivative numerically singular")
        return np.linalg.solve(m, -x)

    if norm_x == 0.0:
        return geom.zero_tangent(p), 0.0, "at-singularity"

    if isinstance(strategy, ExactStep):
        return finish(exact_coords())

    if isinstance(strategy, TruncatedStep):
        inner = _cgnr if strategy.method == "cgnr" else _richardson
        s, used = inner(m, -x, strategy.max_inner, tolerance * norm_x)
        if s is None:
            return finish(exact_coords(), note="inner-breakdown:exact-fallback")
        return finish(s, note=f"inner-iterations:{used}")

    if isinstance(strategy, AdversarialStep):
        s0 = exact_coords()
        if tolerance == 0.0:
            return finish(s0)
        rng = np.random.default_rng(rng if rng is not None
                                    else strategy.direction_seed)
        r0 = x + m @ s0
        # tiny shave keeps the achieved ratio below 0.999*tolerance under
        # floating-point rounding
        target = 0.999 * (1.0 - 1e-6) * tolerance * norm_x
        for _ in range(16):
            w = rng.standard_normal(len(x))
            w /= np.linalg.norm(w)
            mw = m @ w
            nmw = float(np.linalg.norm(mw))
            if nmw < 1e-14:   # direction nearly annihilated; resample
                continue
            # ||r0 + t m w||^2 = target^2 is a quadratic in t
            a = nmw ** 2
            b = 2.0 * float(r0 @ mw)
            c = float(r0 @ r0) - target ** 2
            disc = b * b - 4.0 * a * c
            if disc <= 0.0:
                continue
            t = (-b + math.sqrt(disc)) / (2.0 * a)
            return finish(s0 + t * w, note="adversarial")
        return finish(s0, note="adversarial:no-direction")

    raise TypeError(f"unknown step strategy: {strategy!r}")


def iterate(problem: VectorFieldProblem, start: Point,
            config: SolverConfig) -> IterationTrace:
    """Run the inexact Newton iteration from ``start``.

    All failure modes are encoded in the trace's termination field; every
    record of an accepted step satisfies the residual-ratio bound
    tolerance + 1e-12.
    """
    geom = problem.geometry
    p_star = problem.singularity
    div_radius = config.divergence_radius
    if div_radius is None:
        div_radius = min(10.0 * problem.domain_radius, 1e13)

    records: list[IterationRecord] = []
    termination = MAX_ITERATIONS
    p = start
    for k in range(config.max_iterations + 1):
        dist = geom.distance(p_star, p) if p_star is not None else None
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                value = problem.evaluate(p)
        except (DomainError, GeometryError):
            # left the domain ball, or the field overflowed to non-finite
            records.append(IterationRecord(k, p, math.inf, distance=dist,
                                           note="left-domain"))
            termination = DIVERGED
            break
        norm_x = geom.norm(p, value)
        if not math.isfinite(norm_x) or geom.distance(start, p) > div_radius:
            records.append(IterationRecord(k, p, norm_x, distance=dist))
            termination = DIVERGED
            break
        if norm_x <= config.stop_norm:
            records.append(IterationRecord(k, p, norm_x, distance=dist))
            termination = CONVERGED
            break
        if k == config.max_iterations:
            records.append(IterationRecord(k, p, norm_x, distance=dist))
            termination = MAX_ITERATIONS
            break
        try:
            step, ratio, note = inexact_step(
                problem, p, config.tolerance, config.strategy,
                rng=np.random.default_rng([config.seed, k]))
        except SingularOperatorError:
            records.append(IterationRecord(k, p, norm_x, distance=dist,
                                           note="singular-derivative"))
            termination = SINGULAR
            break
        if ratio > config.tolerance + 1e-12:
            raise RuntimeError(
                f"step residual ratio {ratio} exceeds tolerance "
                f"{config.tolerance} at iteration {k}")
        records.append(IterationRecord(
            k, p, norm_x, step=step, residual_ratio=ratio,
            step_norm=geom.norm(p, step), distance=dist, note=note))
        p = geom.exp(p, step)

    return IterationTrace(records, termination, config, problem.name)
