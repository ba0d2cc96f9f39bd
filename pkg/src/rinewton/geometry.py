"""Riemannian primitives for three concrete manifolds.

Implements exponential/logarithm maps, geodesic distance, parallel transport
along minimizing geodesics, metric inner products, injectivity radii, the
geodesic-spreading constant, orthonormal tangent bases, and ball sampling for

* Euclidean space R^n,
* the unit sphere S^{n-1} embedded in R^n,
* symmetric positive definite matrices SPD(n) with the affine-invariant
  metric  <u, v>_p = tr(p^{-1} u p^{-1} v).

Points are kept in ambient coordinates (a vector for Euclidean/Sphere, a
symmetric matrix for SPD); tangency is enforced by projection after
arithmetic. All operations are pure functions of their inputs.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import AntipodalError, GeometryError

# Stand-in for an infinite injectivity radius, so radius arithmetic
# downstream can take plain minima.
INFINITE_RADIUS_CAP = 1e12

_POINT_TOL = 1e-12


def _as_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise GeometryError("non-finite coordinates")
    return arr


@dataclass(eq=False)
class Point:
    """A point on a manifold, stored in ambient coordinates."""

    manifold: "ManifoldGeometry"
    coords: np.ndarray

    def __post_init__(self):
        self.coords = _as_array(self.coords)
        self.manifold._validate_point(self.coords)

    def close_to(self, other: "Point", tol: float = 1e-12) -> bool:
        return (self.manifold == other.manifold
                and bool(np.allclose(self.coords, other.coords, atol=tol)))

    def __repr__(self):
        return f"Point({self.manifold.name}, {np.array2string(self.coords, precision=6)})"


@dataclass(eq=False)
class Tangent:
    """A tangent vector attached to a base point."""

    base: Point
    vector: np.ndarray

    def __post_init__(self):
        self.vector = _as_array(self.vector)
        self.base.manifold._validate_tangent(self.base.coords, self.vector)

    @property
    def manifold(self) -> "ManifoldGeometry":
        return self.base.manifold

    def _check_base(self, other: "Tangent"):
        if self.manifold != other.manifold or not np.allclose(
                self.base.coords, other.base.coords, atol=1e-12):
            raise GeometryError("tangent vectors have different base points")

    def _wrap(self, vector: np.ndarray) -> "Tangent":
        # re-project: rounding can break tangency when combining vectors
        return Tangent(self.base, self.manifold.project_tangent(self.base, vector))

    def __add__(self, other: "Tangent") -> "Tangent":
        self._check_base(other)
        return self._wrap(self.vector + other.vector)

    def __sub__(self, other: "Tangent") -> "Tangent":
        self._check_base(other)
        return self._wrap(self.vector - other.vector)

    def __mul__(self, scalar: float) -> "Tangent":
        return self._wrap(float(scalar) * self.vector)

    __rmul__ = __mul__

    def __neg__(self) -> "Tangent":
        return Tangent(self.base, -self.vector)

    def __repr__(self):
        return f"Tangent({self.manifold.name}, {np.array2string(self.vector, precision=6)})"


class ManifoldGeometry(ABC):
    """Common interface of the three bundled manifolds.

    Instances are immutable and safe to share between threads; the only
    source of randomness is the explicit ``rng`` argument of the sampling
    helpers.
    """

    name: str
    dim: int

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    # -- validation ------------------------------------------------------

    @abstractmethod
    def _validate_point(self, coords: np.ndarray):
        ...

    @abstractmethod
    def _validate_tangent(self, base: np.ndarray, vector: np.ndarray):
        ...

    def _check_point(self, p: Point):
        if p.manifold != self:
            raise GeometryError(
                f"point on {p.manifold.name} passed to {self.name}")

    def _check_pair(self, p: Point, q: Point):
        self._check_point(p)
        self._check_point(q)

    def point(self, coords) -> Point:
        """Wrap ambient coordinates as a validated point."""
        return Point(self, coords)

    def tangent(self, p: Point, vector) -> Tangent:
        """Project an ambient vector onto T_p and wrap it."""
        self._check_point(p)
        return Tangent(p, self.project_tangent(p, _as_array(vector)))

    def zero_tangent(self, p: Point) -> Tangent:
        return Tangent(p, np.zeros_like(p.coords))

    # -- core maps -------------------------------------------------------

    @abstractmethod
    def project_tangent(self, p: Point, ambient: np.ndarray) -> np.ndarray:
        """Orthogonal projection of an ambient vector onto T_p."""

    @abstractmethod
    def exp(self, p: Point, v: Tangent) -> Point:
        """Endpoint of the geodesic leaving p with velocity v."""

    @abstractmethod
    def log(self, p: Point, q: Point) -> Tangent:
        """Tangent v at p with exp(p, v) = q and ||v|| = distance(p, q)."""

    @abstractmethod
    def distance(self, p: Point, q: Point) -> float:
        """Geodesic distance."""

    @abstractmethod
    def transport(self, p: Point, q: Point, v: Tangent) -> Tangent:
        """Parallel transport of v along the minimizing geodesic p -> q."""

    @abstractmethod
    def inner(self, p: Point, u: Tangent, v: Tangent) -> float:
        """Riemannian inner product at p."""

    def norm(self, p: Point, v: Tangent) -> float:
        return math.sqrt(max(self.inner(p, v, v), 0.0))

    @abstractmethod
    def injectivity_radius(self, p: Point) -> float:
        ...

    @abstractmethod
    def spreading_constant(self, p: Point, radius: float | None = None) -> float:
        """Upper bound K >= 1 on d(exp_q u, exp_q v) / ||u - v|| over the
        ball of the given radius (defaults to ``spreading_cap_radius``)."""

    # -- bases and coordinates -------------------------------------------

    @abstractmethod
    def _seed_tangents(self, p: Point) -> list[np.ndarray]:
        """Fixed ambient seed vectors spanning T_p (before orthonormalization)."""

    def tangent_basis(self, p: Point) -> list[Tangent]:
        """Deterministic orthonormal basis of T_p (Gram-Schmidt over the
        fixed ambient seed basis). Cached on the point, which is treated as
        immutable."""
        cached = getattr(p, "_basis_cache", None)
        if cached is not None:
            return cached
        self._check_point(p)
        basis: list[Tangent] = []
        for seed in self._seed_tangents(p):
            w = Tangent(p, self.project_tangent(p, seed))
            for _ in range(2):  # re-orthogonalize for stability
                for b in basis:
                    w = w - self.inner(p, w, b) * b
            n = self.norm(p, w)
            if n > 1e-10:
                basis.append((1.0 / n) * w)
        if len(basis) != self.dim:
            raise GeometryError(
                f"tangent basis has {len(basis)} vectors, expected {self.dim}")
        p._basis_cache = basis
        return basis

    def coordinates(self, v: Tangent) -> np.ndarray:
        """Coefficients of v in tangent_basis(v.base)."""
        p = v.base
        return np.array([self.inner(p, b, v) for b in self.tangent_basis(p)])

    def from_coordinates(self, p: Point, coeffs: np.ndarray) -> Tangent:
        """Tangent with the given coefficients in tangent_basis(p)."""
        coeffs = np.asarray(coeffs, dtype=float)
        basis = self.tangent_basis(p)
        if coeffs.shape != (len(basis),):
            raise GeometryError("coefficient vector has wrong length")
        vec = np.zeros_like(p.coords)
        for c, b in zip(coeffs, basis):
            vec = vec + c * b.vector
        return Tangent(p, self.project_tangent(p, vec))

    # -- sampling ---------------------------------------------------------

    def sample_tangent(self, p: Point, rng, length: float) -> Tangent:
        """Tangent of the given length in a uniformly random direction."""
        rng = np.random.default_rng(rng)
        dirs = rng.standard_normal(self.dim)
        nd = np.linalg.norm(dirs)
        while nd < 1e-12:  # essentially never
            dirs = rng.standard_normal(self.dim)
            nd = np.linalg.norm(dirs)
        return self.from_coordinates(p, (length / nd) * dirs)

    def sample_in_ball(self, p: Point, radius: float, rng) -> Point:
        """Random point of the geodesic ball B_radius(p); deterministic for
        a fixed seed."""
        self._check_point(p)
        if radius >= self.injectivity_radius(p):
            raise GeometryError("sampling radius exceeds injectivity radius")
        rng = np.random.default_rng(rng)
        length = radius * float(rng.uniform()) ** (1.0 / self.dim)
        return self.exp(p, self.sample_tangent(p, rng, length))

    def sample_at_distance(self, p: Point, dist: float, rng) -> Point:
        """Random point at exactly the given geodesic distance from p."""
        self._check_point(p)
        if dist >= self.injectivity_radius(p):
            raise GeometryError("distance exceeds injectivity radius")
        rng = np.random.default_rng(rng)
        return self.exp(p, self.sample_tangent(p, rng, dist))


class Euclidean(ManifoldGeometry):
    """Flat R^n with the standard inner product."""

    def __init__(self, n: int, injectivity_cap: float = INFINITE_RADIUS_CAP):
        if n < 1:
            raise GeometryError("dimension must be positive")
        self.name = f"euclidean({n})"
        self.ambient = n
        self.dim = n
        self.injectivity_cap = float(injectivity_cap)
        self.spreading_cap_radius = float(injectivity_cap)

    def _validate_point(self, coords):
        if coords.shape != (self.ambient,):
            raise GeometryError(f"expected shape ({self.ambient},)")

    def _validate_tangent(self, base, vector):
        if vector.shape != (self.ambient,):
            raise GeometryError(f"expected shape ({self.ambient},)")

    def project_tangent(self, p, ambient):
        return np.asarray(ambient, dtype=float)

    def exp(self, p, v):
        self._check_point(p)
        return Point(self, p.coords + v.vector)

    def log(self, p, q):
        self._check_pair(p, q)
        return Tangent(p, q.coords - p.coords)

    def distance(self, p, q):
        self._check_pair(p, q)
        return float(np.linalg.norm(q.coords - p.coords))

    def transport(self, p, q, v):
        self._check_pair(p, q)
        return Tangent(q, v.vector.copy())

    def inner(self, p, u, v):
        self._check_point(p)
        u._check_base(v)
        return float(np.dot(u.vector, v.vector))

    def injectivity_radius(self, p):
        return self.injectivity_cap

    def spreading_constant(self, p, radius=None):
        radius = self.spreading_cap_radius if radius is None else radius
        if not 0 < radius <= self.injectivity_radius(p):
            raise GeometryError("radius outside (0, injectivity radius]")
        return 1.0

    def _seed_tangents(self, p):
        return list(np.eye(self.ambient))


class Sphere(ManifoldGeometry):
    """Unit sphere S^{n-1} embedded in R^n with the induced metric."""

    def __init__(self, ambient: int):
        if ambient < 2:
            raise GeometryError("ambient dimension must be >= 2")
        self.name = f"sphere({ambient})"
        self.ambient = ambient
        self.dim = ambient - 1
        self.spreading_cap_radius = math.pi

    def _validate_point(self, coords):
        if coords.shape != (self.ambient,):
            raise GeometryError(f"expected shape ({self.ambient},)")
        if abs(np.linalg.norm(coords) - 1.0) > _POINT_TOL:
            raise GeometryError("sphere point is not a unit vector")

    def _validate_tangent(self, base, vector):
        if vector.shape != (self.ambient,):
            raise GeometryError(f"expected shape ({self.ambient},)")
        if abs(np.dot(base, vector)) > _POINT_TOL * max(1.0, np.linalg.norm(vector)):
            raise GeometryError("sphere tangent is not orthogonal to the base point")

    def project_tangent(self, p, ambient):
        return ambient - np.dot(p.coords, ambient) * p.coords

    def exp(self, p, v):
        self._check_point(p)
        nv = np.linalg.norm(v.vector)
        if nv == 0.0:
            return Point(self, p.coords.copy())
        out = math.cos(nv) * p.coords + math.sin(nv) * (v.vector / nv)
        return Point(self, out / np.linalg.norm(out))

    def distance(self, p, q):
        self._check_pair(p, q)
        # 2*atan2 form is accurate near both 0 and pi, unlike arccos(<p,q>).
        chord = np.linalg.norm(p.coords - q.coords)
        anti = np.linalg.norm(p.coords + q.coords)
        return 2.0 * math.atan2(chord / 2.0, anti / 2.0)

    def log(self, p, q):
        self._check_pair(p, q)
        cos_d = np.dot(p.coords, q.coords)
        if cos_d <= -1.0 + 1e-12:
            raise AntipodalError(
                "logarithm undefined: points are antipodal (or numerically so)")
        d = self.distance(p, q)
        w = q.coords - cos_d * p.coords
        nw = np.linalg.norm(w)
        if nw < 1e-300 or d == 0.0:
            return self.zero_tangent(p)
        return Tangent(p, (d / nw) * w)

    def transport(self, p, q, v):
        self._check_pair(p, q)
        u = self.log(p, q)   # raises on antipodal pairs
        d = np.linalg.norm(u.vector)
        if d < 1e-300:
            return Tangent(q, self.project_tangent(q, v.vector))
        e = u.vector / d
        a = np.dot(e, v.vector)
        # rotate the in-plane component by d, keep the orthogonal part
        out = v.vector + a * ((math.cos(d) - 1.0) * e - math.sin(d) * p.coords)
        return Tangent(q, self.project_tangent(q, out))

    def inner(self, p, u, v):
        self._check_point(p)
        u._check_base(v)
        return float(np.dot(u.vector, v.vector))

    def injectivity_radius(self, p):
        return math.pi

    def spreading_constant(self, p, radius=None):
        radius = self.spreading_cap_radius if radius is None else radius
        if not 0 < radius <= self.injectivity_radius(p):
            raise GeometryError("radius outside (0, injectivity radius]")
        return 1.0  # non-negative curvature: geodesics spread no faster than rays

    def _seed_tangents(self, p):
        return list(np.eye(self.ambient))


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def sym_eig_apply(fn, a: np.ndarray) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix via eigendecomposition."""
    w, vecs = np.linalg.eigh(_sym(a))
    return _sym((vecs * fn(w)) @ vecs.T)


def sym_eig_derivative(fn, dfn, a: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Frechet derivative of a symmetric matrix function at ``a`` applied to
    the symmetric perturbation ``h`` (Daleckii-Krein divided differences)."""
    w, vecs = np.linalg.eigh(_sym(a))
    ht = vecs.T @ _sym(h) @ vecs
    fw = fn(w)
    diff = w[:, None] - w[None, :]
    close = np.abs(diff) < 1e-10 * max(1.0, np.max(np.abs(w)))
    safe = np.where(close, 1.0, diff)
    phi = np.where(close,
                   dfn(0.5 * (w[:, None] + w[None, :])),
                   (fw[:, None] - fw[None, :]) / safe)
    return _sym(vecs @ (phi * ht) @ vecs.T)


class SPDMatrices(ManifoldGeometry):
    """Symmetric positive definite n x n matrices with the affine-invariant
    metric. A Hadamard manifold: the exponential map is a global
    diffeomorphism, so the injectivity radius is reported as a large cap.

    Matrix exponentials, logarithms and square roots go through symmetric
    eigendecompositions, which is unconditionally stable at desk scale.
    """

    #: curvature-scale bound: |sectional curvature| <= 1/2 for this metric
    CURVATURE_SCALE = 1.0 / math.sqrt(2.0)

    def __init__(self, n: int, injectivity_cap: float = INFINITE_RADIUS_CAP,
                 spreading_cap_radius: float = 2.0):
        if n < 1:
            raise GeometryError("matrix size must be positive")
        self.name = f"spd({n})"
        self.n = n
        self.dim = n * (n + 1) // 2
        self.injectivity_cap = float(injectivity_cap)
        self.spreading_cap_radius = float(spreading_cap_radius)

    def _validate_point(self, coords):
        if coords.shape != (self.n, self.n):
            raise GeometryError(f"expected shape ({self.n}, {self.n})")
        if not np.allclose(coords, coords.T, atol=_POINT_TOL):
            raise GeometryError("SPD point is not symmetric")
        if np.min(np.linalg.eigvalsh(coords)) <= 0.0:
            raise GeometryError("SPD point has a non-positive eigenvalue")

    def _validate_tangent(self, base, vector):
        if vector.shape != (self.n, self.n):
            raise GeometryError(f"expected shape ({self.n}, {self.n})")
        scale = max(1.0, float(np.max(np.abs(vector))))
        if not np.allclose(vector, vector.T, atol=_POINT_TOL * scale):
            raise GeometryError("SPD tangent is not symmetric")

    def project_tangent(self, p, ambient):
        return _sym(ambient)

    def _sqrt_pair(self, p: Point):
        s = sym_eig_apply(np.sqrt, p.coords)
        t = sym_eig_apply(lambda w: 1.0 / np.sqrt(w), p.coords)
        return s, t

    def exp(self, p, v):
        self._check_point(p)
        s, t = self._sqrt_pair(p)
        return Point(self, _sym(s @ sym_eig_apply(np.exp, t @ v.vector @ t) @ s))

    def log(self, p, q):
        self._check_pair(p, q)
        s, t = self._sqrt_pair(p)
        return Tangent(p, _sym(s @ sym_eig_apply(np.log, t @ q.coords @ t) @ s))

    def distance(self, p, q):
        self._check_pair(p, q)
        _, t = self._sqrt_pair(p)
        w = np.linalg.eigvalsh(_sym(t @ q.coords @ t))
        return float(np.linalg.norm(np.log(w)))

    def transport(self, p, q, v):
        self._check_pair(p, q)
        s, t = self._sqrt_pair(p)
        e = s @ sym_eig_apply(np.sqrt, t @ q.coords @ t) @ t   # (q p^{-1})^{1/2}
        return Tangent(q, _sym(e @ v.vector @ e.T))

    def inner(self, p, u, v):
        self._check_point(p)
        u._check_base(v)
        a = np.linalg.solve(p.coords, u.vector)
        b = np.linalg.solve(p.coords, v.vector)
        return float(np.sum(a * b.T))

    def injectivity_radius(self, p):
        return self.injectivity_cap

    def spreading_constant(self, p, radius=None):
        radius = self.spreading_cap_radius if radius is None else radius
        if not 0 < radius <= self.injectivity_radius(p):
            raise GeometryError("radius outside (0, injectivity radius]")
        # comparison over-estimate: geodesics from points of the ball stay
        # within arc length 2*radius, and |curvature| <= CURVATURE_SCALE^2
        x = self.CURVATURE_SCALE * 2.0 * radius
        return float(np.sinh(x) / x)

    def _seed_tangents(self, p):
        seeds = []
        for i in range(self.n):
            e = np.zeros((self.n, self.n))
            e[i, i] = 1.0
            seeds.append(e)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                e = np.zeros((self.n, self.n))
                e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
                seeds.append(e)
        return seeds
