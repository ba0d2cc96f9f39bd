"""Scalar majorant functions and the radii they induce.

A majorant function f on [0, R) is a scalar model of how fast the covariant
derivative of a vector field can drift away from its value at the
singularity. It must satisfy

* f(0) = 0 and f'(0) = -1,
* f' strictly increasing,

and optionally f' convex. Everything the solver's convergence theory needs
is derived from f alone:

* ``invertibility_radius``  sup{t : f'(t) < 0}; inside it the field's
  derivative stays invertible,
* ``uniqueness_radius``     sup{t in (0, kappa) : f(t) < 0}; ball in which
  the singularity is the only zero,
* ``contraction_radius``    largest ball on which the per-step contraction
  factor stays below 1/spreading,
* ``convergence_radius``    min of contraction radius, domain radius and
  injectivity radius (assembled by :meth:`MajorantFunction.radii`),
* ``tolerance_cap``         largest admissible relative residual tolerance
  for a given start distance and derivative conditioning,
* ``contraction_factor``    the per-iteration Q-factor bound.

Two closed-form families are provided: a Holder/Lipschitz model
f(t) = C t^{1+mu}/(1+mu) - t and Smale's analytic model
f(t) = t/(1 - gamma t) - 2t. A ``GenericMajorant`` wraps arbitrary callables
and falls back to bracketed bisection for every radius.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidQueryError
from .geometry import INFINITE_RADIUS_CAP

_BISECT_TOL = 1e-12
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class RadiusQuery:
    """Inputs of the radius computation.

    budget:              contraction budget in [0, 1/spreading)
    spreading:           geodesic-spreading constant K >= 1
    domain_radius:       radius kappa of the ball around the singularity
                         contained in the field's domain
    injectivity_radius:  injectivity radius at the singularity
    """

    budget: float
    spreading: float
    domain_radius: float
    injectivity_radius: float

    def __post_init__(self):
        if self.spreading < 1.0:
            raise InvalidQueryError("spreading constant must be >= 1")
        if not 0.0 <= self.budget or self.budget * self.spreading >= 1.0:
            raise InvalidQueryError(
                "budget must lie in [0, 1/spreading); got "
                f"budget={self.budget}, spreading={self.spreading}")
        if self.domain_radius <= 0 or self.injectivity_radius <= 0:
            raise InvalidQueryError("radii must be positive")


@dataclass(frozen=True)
class RadiusReport:
    """All radii derived from one majorant function and one query."""

    invertibility_radius: float   # sup{t : f'(t) < 0}
    uniqueness_radius: float      # sup{t in (0, kappa) : f(t) < 0}
    contraction_radius: float
    convergence_radius: float     # min(kappa, contraction, injectivity)
    method: str                   # "closed-form" | "bisection"

    def to_dict(self) -> dict:
        return {
            "invertibility_radius": self.invertibility_radius,
            "uniqueness_radius": self.uniqueness_radius,
            "contraction_radius": self.contraction_radius,
            "convergence_radius": self.convergence_radius,
            "method": self.method,
        }


@dataclass(frozen=True)
class ConditionReport:
    """Grid-based verification of the majorant assumptions.

    ``normalized`` checks f(0) = 0 and f'(0) = -1, ``slope_increasing``
    checks that f' is strictly increasing, ``slope_convex`` checks midpoint
    convexity of f'. Each failed check comes with a witness abscissa.
    """

    normalized: bool
    slope_increasing: bool
    slope_convex: bool
    witnesses: dict

    @property
    def core_ok(self) -> bool:
        return self.normalized and self.slope_increasing


def _first_crossing(is_bad, hi_max: float, lo_start: float = 1e-12) -> float:
    """Smallest t in (0, hi_max] where ``is_bad`` flips to True, found by
    bracket growth followed by bisection; hi_max if it never flips."""
    if hi_max <= lo_start:
        return hi_max
    t = lo_start
    good = 0.0
    while t < hi_max and not is_bad(t):
        good = t
        t *= 2.0
    hi = min(t, hi_max)
    if not is_bad(hi):
        return hi_max
    lo = good
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if is_bad(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class MajorantFunction(ABC):
    """Scalar majorant f with derivative, defined on [0, domain_end)."""

    kind: str
    domain_end: float

    # -- pointwise ---------------------------------------------------------

    @abstractmethod
    def value(self, t: float) -> float:
        """f(t)."""

    @abstractmethod
    def slope(self, t: float) -> float:
        """f'(t)."""

    def slope_curvature(self, t: float) -> float | None:
        """f''(t) when a closed form exists, else None."""
        return None

    def _check_domain(self, t: float):
        if not 0.0 <= t < self.domain_end:
            raise DomainError(
                f"argument {t} outside majorant domain [0, {self.domain_end})")

    def newton_iterate(self, t: float) -> float:
        """Scalar Newton map t - f(t)/f'(t); requires f'(t) < 0."""
        self._check_domain(t)
        if t >= self._nu:
            raise DomainError(
                f"Newton map undefined at t={t}: slope is no longer negative")
        if t == 0.0:
            return 0.0
        return t - self.value(t) / self.slope(t)

    def linearization_error(self, t: float, u: float) -> float:
        """f(u) - [f(t) + f'(t)(u - t)]; nonnegative by convexity of f."""
        self._check_domain(t)
        self._check_domain(u)
        return self.value(u) - (self.value(t) + self.slope(t) * (u - t))

    # -- radii ---------------------------------------------------------------

    @property
    def _nu(self) -> float:
        """Cached invertibility radius (instances are immutable)."""
        cached = getattr(self, "_nu_cache", None)
        if cached is None:
            cached = self.invertibility_radius()
            self._nu_cache = cached
        return cached

    def invertibility_radius(self) -> float:
        """sup{t in [0, domain_end) : f'(t) < 0}, by bisection."""
        end = self.domain_end * (1.0 - 1e-15)
        return _first_crossing(lambda t: self.slope(t) >= 0.0, end)

    def uniqueness_radius(self, domain_radius: float) -> float:
        """sup{t in (0, domain_radius) : f(t) < 0}, by bisection."""
        end = min(domain_radius, self.domain_end * (1.0 - 1e-15))
        return _first_crossing(lambda t: self.value(t) >= 0.0, end)

    def contraction_radius(self, budget: float, spreading: float) -> float:
        """Largest delta such that (1+budget)|n_f(t)|/t + budget < 1/spreading
        for all t in (0, delta), by bisection."""
        if budget * spreading >= 1.0:
            raise InvalidQueryError("budget * spreading must be < 1")
        target = 1.0 / spreading

        def is_bad(t):
            ratio = abs(self.newton_iterate(t)) / t
            return (1.0 + budget) * ratio + budget >= target

        return _first_crossing(is_bad, self._nu * (1.0 - 1e-12))

    def contraction_factor(self, t: float, budget: float, spreading: float) -> float:
        """Per-iteration Q-factor bound
        spreading * [(1+budget) |n_f(t)|/t + budget]; < 1 for
        t < contraction_radius."""
        if not 0.0 < t < self._nu:
            raise DomainError(
                f"contraction factor needs 0 < t < {self._nu}")
        ratio = abs(self.newton_iterate(t)) / t
        return spreading * ((1.0 + budget) * ratio + budget)

    def tolerance_cap(self, condition_number: float, budget: float,
                      start_distance: float) -> float:
        """Largest admissible relative residual tolerance:
        budget / (cond * (2/|f'(d0)| - 1)) for start distance d0."""
        if condition_number < 1.0:
            raise DomainError("condition number must be >= 1")
        if budget < 0.0:
            raise DomainError("budget must be nonnegative")
        if start_distance >= self._nu:
            raise DomainError(
                "start distance must be below the invertibility radius")
        s = abs(self.slope(start_distance))
        return budget / (condition_number * (2.0 / s - 1.0))

    def radii(self, query: RadiusQuery) -> RadiusReport:
        """Assemble every radius for the given query."""
        nu = self.invertibility_radius()
        sigma = self.uniqueness_radius(query.domain_radius)
        rho = self.contraction_radius(query.budget, query.spreading)
        r = min(query.domain_radius, rho, query.injectivity_radius)
        return RadiusReport(nu, sigma, rho, r, self._radius_method)

    _radius_method = "bisection"

    # -- assumption checking ---------------------------------------------

    def check_conditions(self, grid_points: int = 1000) -> ConditionReport:
        """Verify the majorant assumptions on a grid (uniform plus
        log-spaced points near 0); failures come with witness abscissas."""
        end = min(self.domain_end * (1.0 - 1e-9),
                  10.0 * self.invertibility_radius())
        witnesses: dict = {}

        normalized = (abs(self.value(0.0)) <= 1e-14
                      and abs(self.slope(0.0) + 1.0) <= 1e-12)
        if not normalized:
            witnesses["normalized"] = {"value_at_0": self.value(0.0),
                                       "slope_at_0": self.slope(0.0)}

        grid = np.unique(np.concatenate([
            np.linspace(0.0, end, grid_points),
            np.geomspace(1e-12, end, 64),
        ]))
        slopes = np.array([self.slope(t) for t in grid])

        increasing = True
        rising = np.diff(slopes) > 0.0
        if not np.all(rising):
            increasing = False
            witnesses["slope_increasing"] = {"t": float(grid[1:][~rising][0])}

        convex = True
        mids = 0.5 * (grid[:-1] + grid[1:])
        mid_slopes = np.array([self.slope(t) for t in mids])
        chord = 0.5 * (slopes[:-1] + slopes[1:])
        bulge = mid_slopes - chord
        bad = bulge > 1e-12 * np.maximum(1.0, np.abs(chord))
        if np.any(bad):
            convex = False
            witnesses["slope_convex"] = {"t": float(mids[bad][0])}

        return ConditionReport(normalized, increasing, convex, witnesses)

    @property
    def has_convex_slope(self) -> bool:
        return self.check_conditions().slope_convex

    # -- serialization ------------------------------------------------------

    @abstractmethod
    def parameters(self) -> dict:
        ...

    def to_dict(self) -> dict:
        return {"kind": self.kind, "parameters": self.parameters()}

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.parameters().items())
        return f"{type(self).__name__}({params})"


class HolderMajorant(MajorantFunction):
    """f(t) = C t^{1+mu}/(1+mu) - t for a Holder constant C > 0 and exponent
    mu in (0, 1]; mu = 1 is the Lipschitz case (the only one with convex
    slope)."""

    kind = "holder"
    _radius_method = "closed-form"

    def __init__(self, constant: float, exponent: float = 1.0):
        if constant <= 0:
            raise ValueError("Holder constant must be positive")
        if not 0.0 < exponent <= 1.0:
            raise ValueError("Holder exponent must lie in (0, 1]")
        self.constant = float(constant)
        self.exponent = float(exponent)
        self.domain_end = INFINITE_RADIUS_CAP

    def value(self, t):
        self._check_domain(t)
        c, mu = self.constant, self.exponent
        return c * t ** (1.0 + mu) / (1.0 + mu) - t

    def slope(self, t):
        self._check_domain(t)
        return self.constant * t ** self.exponent - 1.0

    def slope_curvature(self, t):
        self._check_domain(t)
        c, mu = self.constant, self.exponent
        if t == 0.0:
            return c if mu == 1.0 else math.inf
        return c * mu * t ** (mu - 1.0)

    def invertibility_radius(self):
        # the defining sup ranges over [0, domain_end) only
        return min(self.domain_end,
                   (1.0 / self.constant) ** (1.0 / self.exponent))

    def uniqueness_radius(self, domain_radius):
        root = ((1.0 + self.exponent) / self.constant) ** (1.0 / self.exponent)
        return min(domain_radius, self.domain_end, root)

    def contraction_radius(self, budget, spreading):
        if budget * spreading >= 1.0:
            raise InvalidQueryError("budget * spreading must be < 1")
        c, mu = self.constant, self.exponent
        blowup = (1.0 + spreading) / (1.0 - spreading * budget)
        return min(self.domain_end,
                   ((1.0 + mu) / (c * (blowup * mu + 1.0))) ** (1.0 / mu))

    @property
    def has_convex_slope(self):
        return self.exponent == 1.0

    def parameters(self):
        return {"constant": self.constant, "exponent": self.exponent}


class SmaleMajorant(MajorantFunction):
    """f(t) = t/(1 - gamma t) - 2t on [0, 1/gamma), the majorant of an
    analytic field whose derivative scale at the singularity is gamma."""

    kind = "smale"
    _radius_method = "closed-form"

    def __init__(self, gamma: float):
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        self.gamma = float(gamma)
        self.domain_end = 1.0 / self.gamma

    def value(self, t):
        self._check_domain(t)
        return t / (1.0 - self.gamma * t) - 2.0 * t

    def slope(self, t):
        self._check_domain(t)
        return 1.0 / (1.0 - self.gamma * t) ** 2 - 2.0

    def slope_curvature(self, t):
        self._check_domain(t)
        return 2.0 * self.gamma / (1.0 - self.gamma * t) ** 3

    def invertibility_radius(self):
        return (math.sqrt(2.0) - 1.0) / (self.gamma * math.sqrt(2.0))

    def uniqueness_radius(self, domain_radius):
        return min(domain_radius, 1.0 / (2.0 * self.gamma))

    def contraction_radius(self, budget, spreading):
        if budget * spreading >= 1.0:
            raise InvalidQueryError("budget * spreading must be < 1")
        k, b = spreading, budget
        disc = k * k * (1.0 - 6.0 * b + b * b) + 8.0 * k * (1.0 - b) + 8.0
        return (k * (1.0 - 3.0 * b) + 4.0 - math.sqrt(disc)) / (
            4.0 * self.gamma * (1.0 - k * b))

    @property
    def has_convex_slope(self):
        return True

    def parameters(self):
        return {"gamma": self.gamma}


class GenericMajorant(MajorantFunction):
    """Majorant given by arbitrary callables for f and f'; every radius is
    computed by bracketed bisection."""

    kind = "generic"

    def __init__(self, value_fn, slope_fn, domain_end: float,
                 label: str = "generic"):
        if domain_end <= 0:
            raise ValueError("domain end must be positive")
        self._value_fn = value_fn
        self._slope_fn = slope_fn
        self.domain_end = float(domain_end)
        self.label = label

    def value(self, t):
        self._check_domain(t)
        return float(self._value_fn(t))

    def slope(self, t):
        self._check_domain(t)
        return float(self._slope_fn(t))

    def parameters(self):
        return {"label": self.label, "domain_end": self.domain_end}


def wrap_generic(f: MajorantFunction) -> GenericMajorant:
    """View a closed-form majorant as a generic one (bisection-only paths);
    used to cross-check closed-form radii."""
    return GenericMajorant(f.value, f.slope, f.domain_end,
                           label=f"wrapped-{f.kind}")


def majorant_from_spec(spec: dict) -> MajorantFunction:
    """Build a majorant from a configuration table.

    Accepted forms:
      {"kind": "holder", "constant": C, "exponent": mu}
      {"kind": "smale", "gamma": g}
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "holder":
        constant = spec.pop("constant")
        exponent = spec.pop("exponent", 1.0)
        if spec:
            raise ValueError(f"unknown majorant keys: {sorted(spec)}")
        return HolderMajorant(constant, exponent)
    if kind == "smale":
        gamma = spec.pop("gamma")
        if spec:
            raise ValueError(f"unknown majorant keys: {sorted(spec)}")
        return SmaleMajorant(gamma)
    raise ValueError(f"unknown majorant kind: {kind!r}")
