"""Chart-based manifolds, tangent points, vector fields, and the projection map.

Everything works in a single coordinate chart: points are plain length-n
real vectors, tangent-bundle points are (base, fiber) pairs in the induced
coordinates, and a vector field is a map from chart coordinates to its
coefficient vector.  All types are immutable values and all operations are
pure functions, so concurrent read-only use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ChartDomainError

DEFAULT_DERIV_STEP = 1e-5


def _as_vector(values, dim: int, label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape != (dim,):
        raise ValueError(f"{label} must have length {dim}, got shape {np.shape(values)}")
    return arr


@dataclass(frozen=True)
class ChartManifold:
    """A single coordinate chart of dimension ``dim``.

    ``in_domain`` is a predicate on raw coordinate vectors; every
    evaluation of a point or field on this chart checks it first.
    ``sample_bounds`` is an optional (low, high) coordinate box used by
    seeded random sampling in tests and the CLI identity battery.
    """

    dim: int
    name: str
    in_domain: Callable[[np.ndarray], bool] = field(repr=False, default=lambda x: True)
    sample_bounds: Optional[tuple] = field(repr=False, default=None)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("manifold dimension must be >= 1")

    def check(self, coords) -> np.ndarray:
        """Validate a raw coordinate vector against the chart domain."""
        arr = _as_vector(coords, self.dim, "coordinates")
        if not self.in_domain(arr):
            raise ChartDomainError(
                f"coordinates {arr.tolist()} outside the domain of chart '{self.name}'",
                coords=arr,
            )
        return arr

    def point(self, coords) -> "BasePoint":
        return BasePoint(self, self.check(coords))

    def tangent_point(self, coords, fiber) -> "TangentPoint":
        return TangentPoint(self.point(coords), _as_vector(fiber, self.dim, "fiber"))

    def sample_box(self) -> tuple:
        if self.sample_bounds is not None:
            low, high = self.sample_bounds
            return np.asarray(low, float), np.asarray(high, float)
        return -np.ones(self.dim), np.ones(self.dim)


@dataclass(frozen=True)
class BasePoint:
    """A point of the base manifold in chart coordinates."""

    manifold: ChartManifold
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", self.manifold.check(self.coords))

    @property
    def dim(self) -> int:
        return self.manifold.dim


@dataclass(frozen=True)
class TangentPoint:
    """A tangent vector (x, y) in the induced coordinates on the tangent bundle."""

    base: BasePoint
    fiber: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "fiber", _as_vector(self.fiber, self.base.dim, "fiber")
        )

    @property
    def manifold(self) -> ChartManifold:
        return self.base.manifold

    @property
    def dim(self) -> int:
        return self.base.dim

    def as_vector(self) -> np.ndarray:
        """Concatenated (x, y) coordinates, length 2*dim."""
        return np.concatenate([self.base.coords, self.fiber])


@dataclass(frozen=True)
class VectorField:
    """A smooth vector field given by its coefficient map in chart coordinates.

    ``func`` maps a raw coordinate vector to the coefficient vector; the
    optional ``jac`` maps it to the dim x dim matrix of partial derivatives
    d(coeff_i)/d(x_j).  Fields built from coefficient expressions carry a
    symbolic payload in ``sym`` (a sympy column matrix over x1..xn), which
    makes Lie-bracket recursion exact; hand-built fields fall back to
    central finite differences.
    """

    manifold: ChartManifold
    func: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "X"
    sym: Optional[object] = field(default=None, repr=False)

    def at(self, point) -> np.ndarray:
        """Evaluate the coefficient vector; the point is domain-checked."""
        coords = point.coords if isinstance(point, BasePoint) else self.manifold.check(point)
        return _as_vector(self.func(coords), self.manifold.dim, f"{self.name} coefficients")

    def jacobian_at(self, point, h: float = DEFAULT_DERIV_STEP) -> np.ndarray:
        """Coefficient Jacobian, analytic when available, else central differences."""
        coords = point.coords if isinstance(point, BasePoint) else self.manifold.check(point)
        if self.jac is not None:
            mat = np.asarray(self.jac(coords), dtype=float)
            if mat.shape != (self.manifold.dim, self.manifold.dim):
                raise ValueError(f"jacobian of {self.name} has shape {mat.shape}")
            return mat
        return numeric_jacobian(self, coords, h)

    @property
    def has_analytic_jacobian(self) -> bool:
        return self.jac is not None

    def __call__(self, point) -> np.ndarray:
        return self.at(point)


def project(v: TangentPoint) -> BasePoint:
    """Canonical projection of the tangent bundle: (x, y) -> x."""
    return v.base


def dprojection(v: TangentPoint, W) -> np.ndarray:
    """Differential of the projection applied to a vector in the induced frame.

    ``W`` has length 2*dim and is read as (a, b) in the frame
    (d/dx_i, d/dy_i); the result is the ``a`` block.  Linear, exactly.
    """
    n = v.dim
    arr = np.asarray(W, dtype=float).reshape(-1)
    if arr.shape != (2 * n,):
        raise ValueError(f"expected a vector of length {2 * n}, got shape {np.shape(W)}")
    return arr[:n].copy()


def numeric_jacobian(
    X: VectorField,
    x,
    h: float = DEFAULT_DERIV_STEP,
    richardson: bool = False,
) -> np.ndarray:
    """Central-difference Jacobian of a vector field's coefficients.

    Column j is (X(x + h e_j) - X(x - h e_j)) / (2 h).  With
    ``richardson`` a single extrapolation level is applied,
    (4 D(h/2) - D(h)) / 3, trading two extra evaluations per column for
    one higher error order.  Every stencil point is domain-checked.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    coords = x.coords if isinstance(x, BasePoint) else np.asarray(x, dtype=float)
    n = X.manifold.dim

    def central(step):
        cols = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            cols[:, j] = (X.at(coords + e) - X.at(coords - e)) / (2.0 * step)
        return cols

    if not richardson:
        return central(h)
    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def numeric_gradient(f: Callable[[np.ndarray], float], coords, h: float = DEFAULT_DERIV_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar chart function."""
    x = np.asarray(coords, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def sample_tangent_points(
    manifold: ChartManifold,
    count: int,
    rng: np.random.Generator,
    fiber_scale: float = 1.0,
) -> list:
    """Draw seeded random tangent points inside the chart's sampling box."""
    low, high = manifold.sample_box()
    points = []
    for _ in range(count):
        x = rng.uniform(low, high)
        y = rng.uniform(-fiber_scale, fiber_scale, size=manifold.dim)
        points.append(manifold.tangent_point(x, y))
    return points


_S2_MARGIN = 0.01


def builtin_manifold(identifier: str) -> ChartManifold:
    """Construct one of the named built-in charts.

    "R2" is the full plane; "S2-spherical" is the spherical chart with
    polar angle restricted to (0.01, pi - 0.01) and free azimuth.
    """
    if identifier == "R2":
        return ChartManifold(
            dim=2,
            name="R2",
            in_domain=lambda x: bool(np.all(np.isfinite(x))),
            sample_bounds=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])),
        )
    if identifier == "S2-spherical":
        def in_chart(x):
            return bool(
                np.all(np.isfinite(x)) and _S2_MARGIN < x[0] < np.pi - _S2_MARGIN
            )

        return ChartManifold(
            dim=2,
            name="S2-spherical",
            in_domain=in_chart,
            sample_bounds=(np.array([0.2, -np.pi]), np.array([np.pi - 0.2, np.pi])),
        )
    raise ValueError(f"unknown manifold identifier {identifier!r}")


def field_from_callable(
    manifold: ChartManifold,
    func: Callable[[np.ndarray], Sequence[float]],
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    name: str = "X",
) -> VectorField:
    """Wrap a plain coefficient callable as a VectorField."""
    return VectorField(manifold=manifold, func=func, jac=jac, name=name)


def constant_field(manifold: ChartManifold, coefficients, name: str = "X") -> VectorField:
    """Vector field with constant coefficients (zero Jacobian)."""
    coeff = _as_vector(coefficients, manifold.dim, "coefficients")
    zero = np.zeros((manifold.dim, manifold.dim))
    return VectorField(
        manifold=manifold,
        func=lambda x: coeff.copy(),
        jac=lambda x: zero.copy(),
        name=name,
    )
