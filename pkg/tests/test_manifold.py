import numpy as np
import pytest

from tanlift import (
    ChartDomainError,
    VectorField,
    builtin_manifold,
    dprojection,
    field_from_callable,
    numeric_jacobian,
    project,
)
from tanlift.manifold import sample_tangent_points

from conftest import random_smooth_field


def test_project_discards_fiber(r2):
    v = r2.tangent_point([0.5, 1.0], [2.0, -1.0])
    assert np.array_equal(project(v).coords, [0.5, 1.0])


def test_project_zero_section(s2):
    v = s2.tangent_point([0.7, 0.2], [0.0, 0.0])
    assert np.array_equal(project(v).coords, [0.7, 0.2])


def test_project_is_fiber_translation_invariant(r2, rng):
    for _ in range(10):
        x = rng.uniform(-1, 1, 2)
        y = rng.uniform(-1, 1, 2)
        shift = rng.uniform(-5, 5, 2)
        a = r2.tangent_point(x, y)
        b = r2.tangent_point(x, y + shift)
        assert np.array_equal(project(a).coords, project(b).coords)


def test_dprojection_keeps_base_block(r2):
    v = r2.tangent_point([0.0, 0.0], [0.0, 0.0])
    assert np.array_equal(dprojection(v, [1.0, 0.0, 5.0, 7.0]), [1.0, 0.0])


def test_dprojection_kills_vertical_vectors(r2):
    v = r2.tangent_point([1.0, 2.0], [3.0, 4.0])
    assert np.array_equal(dprojection(v, [0.0, 0.0, 9.5, -3.2]), [0.0, 0.0])


def test_dprojection_is_linear(r2, rng):
    v = r2.tangent_point([0.1, 0.2], [0.3, 0.4])
    for _ in range(20):
        W1 = rng.normal(size=4)
        W2 = rng.normal(size=4)
        a, b = rng.normal(size=2)
        lhs = dprojection(v, a * W1 + b * W2)
        rhs = a * dprojection(v, W1) + b * dprojection(v, W2)
        assert np.array_equal(lhs, rhs)


def test_dprojection_length_mismatch(r2):
    v = r2.tangent_point([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        dprojection(v, [1.0, 2.0, 3.0])


def test_numeric_jacobian_identity_field(r2):
    X = field_from_callable(r2, lambda x: x, name="id")
    J = numeric_jacobian(X, r2.point([0.3, -0.7]), h=1e-5)
    assert np.max(np.abs(J - np.eye(2))) < 1e-9


def test_numeric_jacobian_constant_field(r2):
    X = field_from_callable(r2, lambda x: np.array([2.0, -3.0]))
    J = numeric_jacobian(X, r2.point([0.3, -0.7]), h=1e-5)
    assert np.max(np.abs(J)) == 0.0


def test_numeric_jacobian_quadratic_field(r2):
    # Oracle: d/dx1 of x1^2 at x1=1 is 2, every other entry 0.
    X = field_from_callable(r2, lambda x: np.array([x[0] ** 2, 0.0]))
    J = numeric_jacobian(X, r2.point([1.0, 0.0]), h=1e-5)
    assert np.max(np.abs(J - np.array([[2.0, 0.0], [0.0, 0.0]]))) < 1e-8


def test_numeric_jacobian_richardson_improves_cubic(r2):
    X = field_from_callable(r2, lambda x: np.array([x[0] ** 4, 0.0]))
    x = r2.point([1.0, 0.0])
    plain = numeric_jacobian(X, x, h=1e-2)
    extrapolated = numeric_jacobian(X, x, h=1e-2, richardson=True)
    exact = np.array([[4.0, 0.0], [0.0, 0.0]])
    assert np.max(np.abs(extrapolated - exact)) < np.max(np.abs(plain - exact))


def test_analytic_jacobian_matches_numeric_at_random_points(r2, rng):
    X = random_smooth_field(r2, rng)
    assert X.has_analytic_jacobian
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-2, 2, 2)
        diff = X.jacobian_at(x) - numeric_jacobian(X, x, h=1e-5)
        worst = max(worst, np.max(np.abs(diff)))
    assert worst <= 1e-6


def test_domain_enforced_on_points(s2):
    with pytest.raises(ChartDomainError):
        s2.point([0.0, 0.0])
    with pytest.raises(ChartDomainError):
        s2.point([np.pi, 1.0])


def test_domain_enforced_on_jacobian_stencil(s2):
    X = field_from_callable(s2, lambda x: x)
    with pytest.raises(ChartDomainError):
        numeric_jacobian(X, np.array([0.0101, 0.0]), h=1e-3)


def test_builtin_manifolds():
    r2 = builtin_manifold("R2")
    s2 = builtin_manifold("S2-spherical")
    assert r2.dim == 2 and s2.dim == 2
    assert r2.in_domain(np.array([1e6, -1e6]))
    assert s2.in_domain(np.array([0.5, 100.0]))
    assert not s2.in_domain(np.array([0.005, 0.0]))
    with pytest.raises(ValueError):
        builtin_manifold("T2")


def test_field_output_length_checked(r2):
    bad = VectorField(manifold=r2, func=lambda x: np.array([1.0]), name="bad")
    with pytest.raises(ValueError):
        bad.at(np.array([0.0, 0.0]))


def test_sampling_respects_domain(s2, rng):
    for v in sample_tangent_points(s2, 50, rng):
        assert s2.in_domain(v.base.coords)
