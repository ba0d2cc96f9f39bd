"""Inexact Newton methods for vector fields on Riemannian manifolds.

The package is organized in five layers:

* :mod:`rinewton.geometry`  manifold primitives (Euclidean, sphere, SPD);
* :mod:`rinewton.fields`    vector-field problems with analytic covariant
  derivatives and a finite-difference oracle;
* :mod:`rinewton.majorant`  scalar majorant functions, convergence radii and
  admissible residual tolerances;
* :mod:`rinewton.solver`    the inexact Newton iteration with exact,
  truncated-iterative and adversarial inner solvers;
* :mod:`rinewton.harness`   experiment driver and empirical verification of
  every bound the majorant theory provides.
"""

from .errors import (
    AntipodalError,
    ConfigError,
    DomainError,
    GeometryError,
    InsufficientDataError,
    InvalidQueryError,
    SingularOperatorError,
)
from .geometry import (
    INFINITE_RADIUS_CAP,
    Euclidean,
    ManifoldGeometry,
    Point,
    SPDMatrices,
    Sphere,
    Tangent,
)
from .fields import (
    KarcherMeanProblem,
    RayleighProblem,
    ScalarProblem,
    TangentOperator,
    VectorFieldProblem,
    build_problem,
    exp_minus_one_problem,
    fd_derivative,
    karcher_mean_problem,
    polynomial_problem,
    rayleigh_problem,
    x_minus_x_squared_problem,
)
from .majorant import (
    GenericMajorant,
    HolderMajorant,
    MajorantFunction,
    RadiusQuery,
    RadiusReport,
    SmaleMajorant,
    majorant_from_spec,
    wrap_generic,
)
from .solver import (
    AdversarialStep,
    ExactStep,
    IterationRecord,
    IterationTrace,
    SolverConfig,
    TruncatedStep,
    exact_step,
    inexact_step,
    iterate,
    residual,
)
from .harness import (
    CheckReport,
    ExperimentConfig,
    available_checks,
    check_contraction,
    check_curvature_bound,
    check_linearization_error,
    check_majorant_condition,
    check_operator_bound,
    check_step_bound,
    estimate_order,
    load_config,
    radius_context,
    run_experiment,
    spreading_for,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
