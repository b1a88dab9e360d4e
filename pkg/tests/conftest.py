import numpy as np
import pytest

from tanlift import builtin_manifold, field_from_expressions


@pytest.fixture
def r2():
    return builtin_manifold("R2")


@pytest.fixture
def s2():
    return builtin_manifold("S2-spherical")


@pytest.fixture
def shear_fields(r2):
    """The plane shear drift Y = x1 d/dx2 and the single control d/dx1."""
    Y = field_from_expressions(r2, ["0", "x1"], "Y")
    X1 = field_from_expressions(r2, ["1", "0"], "X1")
    return Y, X1


@pytest.fixture
def s2_fields(s2):
    """Frame fields and the rotating drift used by the sphere examples."""
    X0 = field_from_expressions(s2, ["cos(x2)", "sin(x1)"], "X0")
    X1 = field_from_expressions(s2, ["1", "0"], "X1")
    X2 = field_from_expressions(s2, ["0", "1"], "X2")
    return X0, X1, X2


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_smooth_field(manifold, rng, name="R"):
    """A bounded trigonometric field with bounded derivatives on the plane."""
    coeffs = rng.uniform(-1.0, 1.0, size=(manifold.dim, 3))
    exprs = [
        f"{c[0]:.6f} + {c[1]:.6f}*sin(x1) + {c[2]:.6f}*cos(x2)" for c in coeffs
    ]
    return field_from_expressions(manifold, exprs, name)
