"""Empirical verification of the convergence theory.

Every bound the majorant machinery provides is checked against sampled
points: the defining derivative-variation condition, the inverse-derivative
and step-length bounds, the linearization error, the second-derivative
criterion, and the per-iteration contraction factors on real traces. The
checks are two-sided: a weakened constant must make them fail.

Also runs a configured experiment end-to-end, producing the CSV traces and
JSON reports that the command line (`rinewton run <config>`) emits.
"""

import json
import pathlib
import tempfile

import numpy as np

from rinewton import (
    ExperimentConfig,
    HolderMajorant,
    check_curvature_bound,
    check_linearization_error,
    check_majorant_condition,
    check_operator_bound,
    check_step_bound,
    rayleigh_problem,
    run_experiment,
)

rp = rayleigh_problem(np.diag([1.0, 2.0, 4.0]), -1)
hint = rp.majorant_hint
print("=" * 72)
print(f"Certifying the recorded Lipschitz hint {hint.constant} for {rp.name}")
print("=" * 72)
for check in (check_majorant_condition, check_operator_bound,
              check_step_bound, check_linearization_error,
              check_curvature_bound):
    rep = check(rp, hint, samples=200, seed=0)
    print(f"  {rep.name:22s} pass={rep.passed}  worst margin {rep.margin:+.3e}")

print("\nThe same checks against a 4x-weakened constant (must fail):")
weak = HolderMajorant(hint.constant / 4.0, 1.0)
for check in (check_majorant_condition, check_operator_bound,
              check_step_bound, check_linearization_error):
    rep = check(rp, weak, samples=200, seed=0)
    print(f"  {rep.name:22s} pass={rep.passed}  worst margin {rep.margin:+.3e}")
    if rep.witness:
        print(f"      witness: distance {rep.witness['distance']:.4f}, "
              f"lhs {rep.witness['lhs']:.4f} > rhs {rep.witness['rhs']:.4f}")

print()
print("=" * 72)
print("A full experiment: adversarial steps at the tolerance cap")
print("=" * 72)
out_dir = pathlib.Path(tempfile.mkdtemp(prefix="rinewton-demo-"))
config = ExperimentConfig(
    "rayleigh-3d",
    budget=0.5,
    tolerance="max",
    strategy="adversarial",
    fractions=(0.1, 0.5, 0.9),
    outside_probes=True,
    checks=("majorant-condition", "operator-bound", "step-bound",
            "linearization-error", "contraction"),
    check_samples=200,
    out_dir=str(out_dir),
    seed=42,
)
result = run_experiment(config)
print(f"all checks passed: {result.all_passed}")
for trace_id, trace, theta, is_probe in result.traces:
    kind = "probe" if is_probe else "run  "
    print(f"  {kind} {trace_id:12s} tolerance {theta:.4f}  {trace.termination}"
          f" in {len(trace.records) - 1} steps")

report = json.loads((out_dir / "radius_report.json").read_text())
print("\nradius report:")
for key, value in report["radii"].items():
    print(f"  {key}: {value}")
print(f"\nartifacts in {out_dir}:")
for path in sorted(out_dir.iterdir()):
    print(f"  {path.name}")
