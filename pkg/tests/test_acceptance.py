"""Acceptance suite: every top-level guarantee of the library, one criterion
per test, each printing a pass/fail line and enforcing its stated tolerance
and runtime budget.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time

import numpy as np
from rinewton import (
    AdversarialStep,
    HolderMajorant,
    InsufficientDataError,
    SmaleMajorant,
    SolverConfig,
    check_contraction,
    check_linearization_error,
    check_majorant_condition,
    check_operator_bound,
    check_step_bound,
    estimate_order,
    exp_minus_one_problem,
    iterate,
    karcher_mean_problem,
    polynomial_problem,
    radius_context,
    rayleigh_problem,
    wrap_generic,
    x_minus_x_squared_problem,
)

SQRT2 = math.sqrt(2.0)
SQRT17 = math.sqrt(17.0)


def _report(criterion: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {criterion}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{criterion}: {detail}"


def rayleigh():
    return rayleigh_problem(np.diag([1.0, 2.0, 4.0]), -1)


def quarter(f):
    if isinstance(f, SmaleMajorant):
        return SmaleMajorant(f.gamma / 4.0)
    return HolderMajorant(f.constant / 4.0, f.exponent)


# ---------------------------------------------------------------------------
# 1. closed-form radii and bisection agreement
# ---------------------------------------------------------------------------

def test_criterion_1_radii_reproduction():
    t0 = time.time()
    sm = SmaleMajorant(1.0)
    assert abs(sm.contraction_radius(0.0, 1.0) - (5.0 - SQRT17) / 4.0) <= 1e-10
    assert abs(sm.invertibility_radius() - (SQRT2 - 1.0) / SQRT2) <= 1e-12
    assert sm.uniqueness_radius(1e12) == 0.5

    ho = HolderMajorant(1.0, 1.0)
    assert abs(ho.contraction_radius(0.0, 1.0) - 2.0 / 3.0) <= 1e-12
    assert abs(ho.invertibility_radius() - 1.0) <= 1e-12
    assert abs(ho.uniqueness_radius(1e12) - 2.0) <= 1e-12

    for f in (sm, ho):
        g = wrap_generic(f)
        assert abs(g.contraction_radius(0.0, 1.0) - f.contraction_radius(0.0, 1.0)) <= 1e-8
        assert abs(g.invertibility_radius() - f.invertibility_radius()) <= 1e-8
        assert abs(g.uniqueness_radius(1e12) - f.uniqueness_radius(1e12)) <= 1e-8

    elapsed = time.time() - t0
    _report("criterion 1 (radii reproduction)", elapsed < 1.0,
            f"six closed forms + bisection agreement in {elapsed:.3f}s")


# ---------------------------------------------------------------------------
# 2. majorant-condition certification
# ---------------------------------------------------------------------------

def test_criterion_2_majorant_certification():
    t0 = time.time()
    em = exp_minus_one_problem()
    f = SmaleMajorant(0.5)
    rep = check_majorant_condition(
        em, f, samples=500, tau_values=np.linspace(0.0, 1.0, 21),
        random_taus=9, seed=0, slack=1e-8)
    elapsed = time.time() - t0
    _report("criterion 2 (majorant certification)",
            rep.passed and elapsed < 10.0,
            f"500 samples x 30 taus, worst margin {rep.margin:.2e}, {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 3. lemma suite with mutation tests
# ---------------------------------------------------------------------------

def test_criterion_3_lemma_suite():
    t0 = time.time()
    pairs = [
        (exp_minus_one_problem(), SmaleMajorant(0.5)),
        (x_minus_x_squared_problem(), HolderMajorant(2.0, 1.0)),
        (rayleigh(), rayleigh().majorant_hint),
    ]
    checks = (check_operator_bound, check_step_bound, check_linearization_error)
    for problem, f in pairs:
        for check in checks:
            rep = check(problem, f, samples=500, seed=0)
            assert rep.passed, f"{rep.name} failed on {problem.name}: {rep.margin}"
        for check in checks:
            rep = check(problem, quarter(f), samples=500, seed=0)
            assert not rep.passed, \
                f"{rep.name} survived the 4x-weakened constant on {problem.name}"
    elapsed = time.time() - t0
    _report("criterion 3 (lemma suite + mutations)", elapsed < 60.0,
            f"9 bound checks pass, 9 mutations fail, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 4. Q-linear bounds under adversarial inexact steps
# ---------------------------------------------------------------------------

def test_criterion_4_q_linear_bound():
    rp = rayleigh()
    f = rp.majorant_hint
    budget = 0.5
    query, report, spreading = radius_context(rp, f, budget)
    r = report.convergence_radius
    cond = rp.covariant_derivative(rp.singularity).condition_number()
    details = []
    for i, fraction in enumerate((0.1, 0.5, 0.9)):
        p0 = rp.geometry.sample_at_distance(rp.singularity, fraction * r, i)
        d0 = rp.geometry.distance(rp.singularity, p0)
        theta = f.tolerance_cap(cond, budget, d0)
        trace = iterate(rp, p0, SolverConfig(
            tolerance=theta, strategy=AdversarialStep(direction_seed=17 + i),
            stop_norm=1e-13, max_iterations=100))
        assert trace.termination == "converged"
        assert trace.final.field_norm <= 1e-12
        assert len(trace.records) - 1 <= 100
        rep = check_contraction(trace, f, budget, spreading, slack=1e-10)
        assert rep.passed, f"contraction bound violated: {rep.witness}"
        assert rep.details["convex_slope"]   # the anchored rate bound applied
        details.append(f"{fraction:.1f}r: {len(trace.records) - 1} its")
    _report("criterion 4 (adversarial Q-linear bounds)", True, ", ".join(details))


# ---------------------------------------------------------------------------
# 5. quadratic limit at zero tolerance
# ---------------------------------------------------------------------------

def test_criterion_5_quadratic_limit_exp_minus_one():
    em = exp_minus_one_problem()
    f = em.majorant_hint
    _, report, spreading = radius_context(em, f, 0.0)
    p0 = em.geometry.sample_at_distance(
        em.singularity, 0.5 * report.convergence_radius, 11)
    trace = iterate(em, p0, SolverConfig())
    order = estimate_order(trace)
    rep = check_contraction(trace, f, 0.0, spreading, slack=1e-10)
    _report("criterion 5a (quadratic limit, scalar analytic field)",
            1.9 <= order <= 2.1 and rep.passed,
            f"order {order:.3f}, quadratic step bound margin {rep.margin:.1e}")


def test_criterion_5_quadratic_step_bound_rayleigh():
    rp = rayleigh()
    f = rp.majorant_hint
    _, report, spreading = radius_context(rp, f, 0.0)
    p0 = rp.geometry.sample_at_distance(
        rp.singularity, 0.5 * report.convergence_radius, 12)
    trace = iterate(rp, p0, SolverConfig())
    assert trace.termination == "converged"
    rep = check_contraction(trace, f, 0.0, spreading, slack=1e-10)
    _report("criterion 5b (quadratic per-step bound, eigenvector field)",
            rep.passed, f"margin {rep.margin:.1e} over "
            f"{rep.details['pairs_checked']} pairs")


def test_criterion_5_quadratic_limit_rayleigh():
    """Expected to fail: the eigenvector field is a gradient field whose
    second covariant derivative vanishes at every eigenvector (for v, w
    tangent at a unit eigenvector p of the symmetric matrix A, the closed
    form -<v,w>X(p) - <Ap,v>w - 2<Ap,w>v is identically zero). Exact
    Newton therefore converges with cubic order, the classical behavior of
    eigenvector iterations: from 0.5r the error sequence is
    ~{1.1e-1, 1.9e-3, 9.7e-9, 0}, which leaves three records above the
    1e-14 floor (four are needed) and a log-log slope of 3, not 2. The
    quadratic upper bound itself holds (criterion 5b); the two-sided order
    window [1.9, 2.1] does not, so this test fails by construction of the
    problem. Kept red rather than weakened: an order estimate cannot land
    in a quadratic window on a cubically convergent iteration.
    """
    rp = rayleigh()
    f = rp.majorant_hint
    _, report, _ = radius_context(rp, f, 0.0)
    p0 = rp.geometry.sample_at_distance(
        rp.singularity, 0.5 * report.convergence_radius, 12)
    trace = iterate(rp, p0, SolverConfig())
    dists = [d for d in trace.distances() if d is not None]
    try:
        order = estimate_order(trace)
        detail = f"order {order:.3f} outside [1.9, 2.1]; distances {dists}"
        ok = 1.9 <= order <= 2.1
    except InsufficientDataError as exc:
        detail = (f"{exc}; distances {dists} decay cubically "
                  "(second covariant derivative vanishes at eigenvectors)")
        ok = False
    _report("criterion 5c (quadratic order window, eigenvector field)", ok, detail)


# ---------------------------------------------------------------------------
# 6. tolerance-cap specialization for analytic fields
# ---------------------------------------------------------------------------

def test_criterion_6_smale_tolerance_specialization():
    t0 = time.time()
    for gamma in (0.25, 0.5, 1.0, 2.0, 4.0):
        sm = SmaleMajorant(gamma)
        nu = sm.invertibility_radius()
        for d0 in np.linspace(0.0, 0.95 * nu, 13):
            for budget in (0.0, 0.1, 0.3, 0.5, 0.9):
                for cond in (1.0, 1.5, 3.0):
                    general = sm.tolerance_cap(cond, budget, d0)
                    closed = budget * (2.0 * (1.0 - gamma * d0) ** 2 - 1.0) / cond
                    assert abs(general - closed) <= 1e-12
    elapsed = time.time() - t0
    _report("criterion 6 (tolerance-cap specialization)", elapsed < 1.0,
            f"975 grid points, {elapsed:.3f}s")


# ---------------------------------------------------------------------------
# 7. geometry suite
# ---------------------------------------------------------------------------

def test_criterion_7_geometry_suite():
    from rinewton import fd_derivative

    t0 = time.time()
    problems = [exp_minus_one_problem(), rayleigh(), karcher_mean_problem()]
    for problem in problems:
        geom = problem.geometry
        center = problem.singularity
        rng = np.random.default_rng(100)
        max_len = (math.pi - 0.15 if geom.name.startswith("sphere") else 2.0)
        spread_radius = 0.8
        k = geom.spreading_constant(center, spread_radius)
        fd_radius = min(0.5, 0.45 * problem.domain_radius)
        for i in range(1000):
            p = geom.sample_in_ball(center, 1.0, rng)
            # exponential/logarithm round trip
            v = geom.sample_tangent(p, rng, rng.uniform(0.0, max_len))
            q = geom.exp(p, v)
            nv = geom.norm(p, v)
            assert geom.norm(p, geom.log(p, q) - v) <= 1e-9 * (1.0 + nv)
            assert abs(geom.distance(p, q) - nv) <= 1e-9 * (1.0 + nv)
            # transport isometry and inversion
            w = geom.sample_tangent(p, rng, rng.uniform(0.1, 1.0))
            q2 = geom.sample_in_ball(center, 1.0, rng)
            tw = geom.transport(p, q2, w)
            assert abs(geom.norm(q2, tw) - geom.norm(p, w)) <= 1e-10 * geom.norm(p, w)
            assert geom.norm(p, geom.transport(q2, p, tw) - w) <= 1e-9 * geom.norm(p, w)
            # geodesic-spreading bound
            qb = geom.sample_in_ball(center, spread_radius, rng)
            vb = geom.sample_tangent(qb, rng, rng.uniform(0.0, spread_radius))
            wb = geom.sample_tangent(qb, rng, rng.uniform(1e-6, spread_radius))
            lhs = geom.distance(geom.exp(qb, vb + wb), geom.exp(qb, vb))
            assert lhs <= k * geom.norm(qb, wb) + 1e-9
            # analytic vs finite-difference derivative (lighter cadence:
            # the full 1000-point sweep runs in the field tests)
            if i % 10 == 0:
                ps = geom.sample_in_ball(center, fd_radius, rng)
                analytic = problem.covariant_derivative(ps).matrix
                fd = fd_derivative(problem, ps, step=1e-6).matrix
                rel = np.linalg.norm(analytic - fd, 2) / max(1.0, np.linalg.norm(analytic, 2))
                assert rel <= 1e-5
    elapsed = time.time() - t0
    _report("criterion 7 (geometry suite)", elapsed < 30.0,
            f"3 manifolds x 1000 samples, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 8. convergence-region probe
# ---------------------------------------------------------------------------

def test_criterion_8_convergence_region():
    problems = [exp_minus_one_problem(), x_minus_x_squared_problem(),
                polynomial_problem(), rayleigh(), karcher_mean_problem()]
    summary = []
    for problem in problems:
        f = problem.majorant_hint
        _, report, _ = radius_context(problem, f, 0.0)
        r = report.convergence_radius
        geom = problem.geometry
        rng = np.random.default_rng(2024)
        failures = 0
        for _ in range(200):
            p0 = geom.sample_in_ball(problem.singularity, 0.99 * r, rng)
            trace = iterate(problem, p0, SolverConfig())
            ok = (trace.termination == "converged"
                  and geom.distance(problem.singularity, trace.final.point) <= 1e-8)
            failures += (not ok)
        assert failures == 0, f"{problem.name}: {failures}/200 starts failed"

        # outside probes: reported, never asserted
        probe_dist = min(1.5 * r, 0.999 * geom.injectivity_radius(problem.singularity),
                         0.999 * problem.domain_radius)
        outcomes = {}
        for seed in range(20):
            p0 = geom.sample_at_distance(problem.singularity, probe_dist, seed)
            trace = iterate(problem, p0, SolverConfig())
            near = geom.distance(problem.singularity, trace.final.point) <= 1e-8
            key = trace.termination + ("/at-singularity" if near else "/elsewhere")
            outcomes[key] = outcomes.get(key, 0) + 1
        summary.append(f"{problem.name}: 0/200 failures, probes {outcomes}")
    _report("criterion 8 (convergence-region probe)", True, "; ".join(summary))
