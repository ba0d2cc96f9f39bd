"""Verification checks, experiment driver, config handling."""

import json
import math

import numpy as np
import pytest

from rinewton import (
    ConfigError,
    Euclidean,
    ExperimentConfig,
    HolderMajorant,
    InsufficientDataError,
    SmaleMajorant,
    SolverConfig,
    Tangent,
    VectorFieldProblem,
    check_contraction,
    check_curvature_bound,
    check_linearization_error,
    check_majorant_condition,
    check_operator_bound,
    check_step_bound,
    estimate_order,
    exp_minus_one_problem,
    iterate,
    karcher_mean_problem,
    load_config,
    radius_context,
    rayleigh_problem,
    run_experiment,
    spreading_for,
    x_minus_x_squared_problem,
)
from rinewton.harness import _transport_matrix


class LinearProblem(VectorFieldProblem):
    def __init__(self, b):
        self.b = np.asarray(b, dtype=float)
        n = self.b.shape[0]
        self.geometry = Euclidean(n)
        self.name = "linear"
        self.singularity = self.geometry.point(np.zeros(n))
        self.domain_radius = 1e12
        self.majorant_hint = None

    def _ambient_value(self, p):
        return self.b @ p.coords

    def _derivative_apply(self, p, v):
        return Tangent(p, self.b @ v.vector)


def rayleigh():
    return rayleigh_problem(np.diag([1.0, 2.0, 4.0]), -1)


def quarter(f):
    """The standard mutation: scale the majorant constant down 4x."""
    if isinstance(f, SmaleMajorant):
        return SmaleMajorant(f.gamma / 4.0)
    return HolderMajorant(f.constant / 4.0, f.exponent)


PAIRS = [
    (exp_minus_one_problem(), SmaleMajorant(0.5)),
    (x_minus_x_squared_problem(), HolderMajorant(2.0, 1.0)),
    (rayleigh(), rayleigh().majorant_hint),
]


# ---------------------------------------------------------------------------
# majorant condition
# ---------------------------------------------------------------------------

def test_majorant_condition_tau_one_is_exact_zero():
    em = exp_minus_one_problem()
    f = SmaleMajorant(0.5)
    rep = check_majorant_condition(em, f, samples=40, tau_values=[1.0],
                                   random_taus=0, seed=1)
    assert rep.passed
    assert abs(rep.margin) <= 1e-12   # both sides vanish at tau = 1


def test_majorant_condition_linear_field_passes_any_majorant():
    lp = LinearProblem(np.array([[2.0, 0.3], [0.0, -1.0]]))
    tiny = HolderMajorant(1e-6, 1.0)
    rep = check_majorant_condition(lp, tiny, samples=60, radius=1.0, seed=2)
    assert rep.passed     # constant derivative: the left side is always zero


@pytest.mark.parametrize("problem,f", PAIRS, ids=lambda x: getattr(x, "name", ""))
def test_majorant_condition_certifies_hints(problem, f):
    rep = check_majorant_condition(problem, f, samples=150, seed=3)
    assert rep.passed


def test_majorant_condition_fails_on_weakened_constant():
    for problem, f in PAIRS:
        rep = check_majorant_condition(problem, quarter(f), samples=150, seed=3)
        assert not rep.passed
        assert rep.witness is not None and rep.margin < 0


def test_karcher_hint_certified():
    km = karcher_mean_problem()
    rep = check_majorant_condition(km, km.majorant_hint, samples=60,
                                   random_taus=5, seed=4)
    assert rep.passed
    rep = check_majorant_condition(km, quarter(km.majorant_hint), samples=60,
                                   random_taus=5, seed=4)
    assert not rep.passed


# ---------------------------------------------------------------------------
# lemma-style bounds
# ---------------------------------------------------------------------------

def test_operator_bound_equality_at_singularity():
    em = exp_minus_one_problem()
    f = SmaleMajorant(0.5)
    rep = check_operator_bound(em, f, points=[em.singularity], samples=0)
    assert rep.passed
    assert rep.margin == pytest.approx(0.0, abs=1e-12)   # both sides are 1


def test_operator_bound_scalar_closed_form():
    """For X = x - x^2 with the exact Lipschitz model both sides have
    closed forms; the bound is tight on the positive side."""
    xq = x_minus_x_squared_problem()
    f = HolderMajorant(2.0, 1.0)
    pts = [xq.geometry.point([x]) for x in np.linspace(-0.45, 0.45, 41)]
    rep = check_operator_bound(xq, f, points=pts, samples=0)
    assert rep.passed
    for x in (0.1, 0.3, 0.44):
        lhs = 1.0 / (1.0 - 2.0 * x)
        rhs = 1.0 / (1.0 - 2.0 * x)
        assert lhs <= rhs + 1e-12


def test_operator_bound_sample_beyond_radius_is_skipped():
    em = exp_minus_one_problem()
    f = SmaleMajorant(0.5)
    nu = f.invertibility_radius()
    outside = em.geometry.point([nu * 1.05])
    rep = check_operator_bound(em, f, points=[outside], samples=0)
    assert rep.passed
    assert rep.details["skipped"] == 1


def test_step_bound_scalar_closed_form():
    xq = x_minus_x_squared_problem()
    f = HolderMajorant(2.0, 1.0)
    pts = [xq.geometry.point([x]) for x in np.linspace(-0.3, 0.3, 31)]
    rep = check_step_bound(xq, f, points=pts, samples=0)
    assert rep.passed
    for x in np.linspace(-0.3, 0.3, 31):
        if x == 0.0:
            continue
        lhs = abs(x - x * x) / abs(1.0 - 2.0 * x)
        d = abs(x)
        rhs = (d * d - d) / (2.0 * d - 1.0)
        assert lhs <= rhs + 1e-12


def test_linearization_error_linear_field_is_exact_zero():
    lp = LinearProblem(np.array([[1.5, -0.2], [0.1, 2.0]]))
    f = HolderMajorant(0.5, 1.0)
    rep = check_linearization_error(lp, f, samples=50, radius=1.0, seed=5)
    assert rep.passed
    rng = np.random.default_rng(0)
    p = lp.geometry.sample_in_ball(lp.singularity, 1.0, rng)
    back = lp.geometry.log(p, lp.singularity)
    err = lp.evaluate(lp.singularity) - lp.geometry.transport(
        p, lp.singularity, lp.evaluate(p) + lp.covariant_derivative(p).apply(back))
    assert lp.geometry.norm(lp.singularity, err) <= 1e-14


def test_linearization_error_scalar_is_tight():
    xq = x_minus_x_squared_problem()
    f = HolderMajorant(2.0, 1.0)
    pts = [xq.geometry.point([x]) for x in np.linspace(-0.8, 0.8, 33) if x != 0]
    rep = check_linearization_error(xq, f, points=pts, samples=0)
    assert rep.passed
    assert abs(rep.margin) <= 1e-12    # |E| = d^2 matches e_f(d, 0) = d^2


@pytest.mark.parametrize("problem,f", PAIRS, ids=lambda x: getattr(x, "name", ""))
def test_lemma_bounds_fail_on_weakened_constant(problem, f):
    bad = quarter(f)
    assert not check_operator_bound(problem, bad, samples=300, seed=6).passed
    assert not check_step_bound(problem, bad, samples=300, seed=6).passed
    assert not check_linearization_error(problem, bad, samples=300, seed=6).passed


# ---------------------------------------------------------------------------
# curvature bound
# ---------------------------------------------------------------------------

def test_fd_second_derivative_matches_rayleigh_closed_form():
    """Oracle for the curvature check's finite differences: compare the
    directional derivative of the covariant derivative against the
    closed-form second covariant derivative of the eigenvector field."""
    rp = rayleigh()
    geom = rp.geometry
    rng = np.random.default_rng(7)
    h = 1e-5
    for _ in range(5):
        q = geom.sample_in_ball(rp.singularity, 0.4, rng)
        w = geom.sample_tangent(q, rng, 1.0)
        qp = geom.exp(q, h * w)
        qm = geom.exp(q, (-h) * w)
        mp = (_transport_matrix(geom, qp, q)
              @ rp.covariant_derivative(qp).matrix
              @ _transport_matrix(geom, q, qp))
        mm = (_transport_matrix(geom, qm, q)
              @ rp.covariant_derivative(qm).matrix
              @ _transport_matrix(geom, q, qm))
        second = (mp - mm) / (2.0 * h)
        for _ in range(4):
            v = geom.sample_tangent(q, rng, 1.0)
            fd_vec = second @ geom.coordinates(v)
            closed = geom.coordinates(rp.second_derivative_apply(q, v, w))
            np.testing.assert_allclose(fd_vec, closed, atol=5e-7)


def test_curvature_bound_scalar():
    em = exp_minus_one_problem()
    rep = check_curvature_bound(em, SmaleMajorant(0.5), samples=60, seed=8)
    assert rep.passed
    rep = check_curvature_bound(em, SmaleMajorant(0.125), samples=60, seed=8)
    assert not rep.passed


def test_curvature_bound_rayleigh():
    rp = rayleigh()
    rep = check_curvature_bound(rp, rp.majorant_hint, samples=40,
                                directions=6, seed=9)
    assert rep.passed
    rep = check_curvature_bound(rp, quarter(rp.majorant_hint), samples=40,
                                directions=6, seed=9)
    assert not rep.passed


def test_curvature_bound_skipped_without_closed_form():
    from rinewton import wrap_generic
    em = exp_minus_one_problem()
    rep = check_curvature_bound(em, wrap_generic(SmaleMajorant(0.5)), samples=5)
    assert rep.passed
    assert "skipped" in rep.details


# ---------------------------------------------------------------------------
# contraction / order estimation
# ---------------------------------------------------------------------------

def test_contraction_check_passes_and_fails_honestly():
    rp = rayleigh()
    f = rp.majorant_hint
    budget = 0.5
    _, report, spreading = radius_context(rp, f, budget)
    p0 = rp.geometry.sample_at_distance(
        rp.singularity, 0.9 * report.convergence_radius, 3)
    d0 = rp.geometry.distance(rp.singularity, p0)
    cond = rp.covariant_derivative(rp.singularity).condition_number()
    theta = f.tolerance_cap(cond, budget, d0)
    from rinewton import AdversarialStep
    trace = iterate(rp, p0, SolverConfig(tolerance=theta,
                                         strategy=AdversarialStep(4)))
    rep = check_contraction(trace, f, budget, spreading)
    assert rep.passed and rep.details["pairs_checked"] >= 3

    # corrupt one recorded error: the check must catch it
    import dataclasses
    bad = dataclasses.replace(trace.records[1], distance=trace.records[1].distance * 10.0)
    corrupted = dataclasses.replace(trace, records=[trace.records[0], bad]
                                    + trace.records[2:])
    rep = check_contraction(corrupted, f, budget, spreading)
    assert not rep.passed


def test_contraction_vacuous_on_short_trace():
    rp = rayleigh()
    trace = iterate(rp, rp.singularity, SolverConfig())
    rep = check_contraction(trace, rp.majorant_hint, 0.0, 1.0)
    assert rep.passed and rep.details["pairs_checked"] == 0


def test_estimate_order_synthetic():
    geometric = [2.0 ** (-k) for k in range(12)]
    assert estimate_order(geometric) == pytest.approx(1.0, abs=1e-9)
    quadratic = [2.0 ** (-2 ** k) for k in range(7)]
    assert estimate_order(quadratic) == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(InsufficientDataError):
        estimate_order([0.5, 1e-3, 1e-9])


def test_estimate_order_on_exact_newton_trace():
    em = exp_minus_one_problem()
    _, report, _ = radius_context(em, em.majorant_hint, 0.0)
    p0 = em.geometry.sample_at_distance(
        em.singularity, 0.5 * report.convergence_radius, 11)
    trace = iterate(em, p0, SolverConfig())
    assert 1.9 <= estimate_order(trace) <= 2.1


# ---------------------------------------------------------------------------
# spreading choice
# ---------------------------------------------------------------------------

def test_spreading_for_problem():
    rp = rayleigh()
    k, radius = spreading_for(rp, rp.majorant_hint)
    assert k == 1.0
    km = karcher_mean_problem()
    k, radius = spreading_for(km, km.majorant_hint)
    assert k > 1.0
    _, report, _ = radius_context(km, km.majorant_hint, 0.0)
    assert report.convergence_radius <= radius   # K valid over the ball used


# ---------------------------------------------------------------------------
# config and driver
# ---------------------------------------------------------------------------

def test_load_config_and_unknown_keys(tmp_path):
    good = tmp_path / "good.toml"
    good.write_text("""
seed = 3
[problem]
name = "exp-minus-one"
[majorant]
kind = "smale"
gamma = 0.5
[run]
budget = 0.0
[starts]
fractions = [0.5]
[checks]
names = ["operator-bound"]
samples = 50
""")
    config = load_config(good)
    assert config.problem_name == "exp-minus-one"
    assert config.check_samples == 50

    bad = tmp_path / "bad.toml"
    bad.write_text("[problem]\nname = 'exp-minus-one'\ntypo_key = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad2 = tmp_path / "bad2.toml"
    bad2.write_text("unknown_top = 1\n[problem]\nname = 'exp-minus-one'\n")
    with pytest.raises(ConfigError):
        load_config(bad2)


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig("exp-minus-one", fractions=(1.5,))
    with pytest.raises(ConfigError):
        ExperimentConfig("exp-minus-one", tolerance="bogus")
    with pytest.raises(ConfigError):
        ExperimentConfig("exp-minus-one", tolerance=1.2)
    with pytest.raises(ConfigError):
        ExperimentConfig("exp-minus-one", checks=("no-such-check",))
    with pytest.raises(ConfigError):
        ExperimentConfig("exp-minus-one", strategy="sgd")


def test_run_experiment_end_to_end(tmp_path):
    config = ExperimentConfig(
        "exp-minus-one",
        majorant_spec={"kind": "smale", "gamma": 0.5},
        fractions=(0.5,),
        checks=("operator-bound", "contraction"),
        check_samples=60,
        out_dir=str(tmp_path / "out"),
        seed=5,
    )
    result = run_experiment(config)
    assert result.all_passed
    assert (tmp_path / "out" / "radius_report.json").exists()
    checks = json.loads((tmp_path / "out" / "checks.json").read_text())
    assert {c["name"] for c in checks} == {"operator-bound", "contraction[f0.5_0]"}
    report = json.loads((tmp_path / "out" / "radius_report.json").read_text())
    assert report["radii"]["convergence_radius"] == pytest.approx(
        (5 - math.sqrt(17)) / 2)
    trace = (tmp_path / "out" / "trace_f0.5_0.csv").read_bytes()

    config2 = ExperimentConfig(
        "exp-minus-one",
        majorant_spec={"kind": "smale", "gamma": 0.5},
        fractions=(0.5,),
        checks=("operator-bound", "contraction"),
        check_samples=60,
        out_dir=str(tmp_path / "out2"),
        seed=5,
    )
    run_experiment(config2)
    assert trace == (tmp_path / "out2" / "trace_f0.5_0.csv").read_bytes()


def test_run_experiment_max_tolerance_and_probes(tmp_path):
    config = ExperimentConfig(
        "rayleigh-3d",
        budget=0.5,
        tolerance="max",
        strategy="adversarial",
        fractions=(0.5,),
        outside_probes=True,
        checks=("contraction",),
        out_dir=str(tmp_path / "out"),
        seed=2,
    )
    result = run_experiment(config)
    assert result.all_passed
    probe = [t for t in result.traces if t[3]]
    assert probe                       # probes ran
    runs = [t for t in result.traces if not t[3]]
    rp = rayleigh()
    cond = rp.covariant_derivative(rp.singularity).condition_number()
    for trace_id, trace, theta, _ in runs:
        assert 0.0 < theta < 1.0       # resolved from the cap
        # "max" delegates to the tolerance cap at the actual start distance
        d0 = trace.records[0].distance
        assert theta == pytest.approx(
            rp.majorant_hint.tolerance_cap(cond, 0.5, d0), rel=1e-12)
        assert trace.termination == "converged"
    # probe outcome is reported, never asserted: no probe check reports
    assert all("probe" not in r.name for r in result.check_reports)


def test_run_experiment_from_hint(tmp_path):
    config = ExperimentConfig(
        "x-minus-x-squared",
        majorant_spec={"kind": "from-hint"},
        fractions=(0.5,),
        checks=("step-bound",),
        check_samples=40,
        out_dir=str(tmp_path / "o"),
        seed=1,
    )
    assert run_experiment(config).all_passed


def test_run_experiment_unknown_problem():
    with pytest.raises(KeyError):
        run_experiment(ExperimentConfig("nope", checks=()))
