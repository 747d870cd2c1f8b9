"""
Tests for the numerical infrastructure: quadrature, Chebyshev grid
functions, roots, the symmetric eigensolver, the fit and the simplex.
"""
import math

import numpy as np
import pytest

from varstring.errors import (
    ConvergenceError,
    DomainError,
    ParameterError,
    RootNotFoundError,
)
from varstring.numerics import (
    GridFunction,
    SymmetricMatrix,
    bracket_root,
    dirichlet_energy,
    eigen_symmetric,
    fit_inverse_even_powers,
    gauss_legendre_edges,
    gauss_legendre_panels,
    integrate_adaptive,
    lobatto_nodes,
    minimize_simplex,
    scan_sign_changes,
)

def test_integrate_adaptive():
    """Smooth and oscillatory integrands."""
    assert integrate_adaptive(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-13)
    value = integrate_adaptive(lambda x: math.cos(50.0 * x) ** 2, 0.0, math.pi, freq_hint=25)
    assert value == pytest.approx(math.pi / 2, abs=1e-12)

def test_integrate_adaptive_rejects_empty_interval():
    with pytest.raises(ParameterError):
        integrate_adaptive(math.sin, 1.0, 1.0)
    with pytest.raises(ParameterError):
        integrate_adaptive(math.sin, 2.0, 1.0)

def test_gauss_legendre_panels():
    """The composite rule integrates polynomials exactly."""
    x, w = gauss_legendre_panels(0.0, 1.0, 4, 8)
    assert len(x) == 32
    assert np.sum(w) == pytest.approx(1.0, abs=1e-15)
    assert np.dot(w, x ** 5) == pytest.approx(1.0 / 6.0, abs=1e-15)

def test_gauss_legendre_edges_keep_tiny_cells_accurate():
    """Cells near zero integrate x^3 to full relative accuracy."""
    edges = np.array([0.0, 1e-7, 1e-3, 1.0])
    x, w = gauss_legendre_edges(edges, 4)
    cells = (w * x ** 3).reshape(-1, 4).sum(axis=1)
    assert cells[0] == pytest.approx(0.25e-28, rel=1e-13)
    assert cells.sum() == pytest.approx(0.25, rel=1e-14)

def test_lobatto_nodes():
    nodes = lobatto_nodes(-1.0, 3.0, 8)
    assert nodes[0] == -1.0 and nodes[-1] == 3.0
    assert np.all(np.diff(nodes) > 0)

def test_grid_function_calculus():
    """Integral, derivative and antiderivative of known functions."""
    gf = GridFunction.from_function(np.sin, 0.0, math.pi, 32)
    assert gf.integral() == pytest.approx(2.0, abs=1e-13)
    assert gf(math.pi / 2) == pytest.approx(1.0, abs=1e-13)

    cube = GridFunction.from_function(lambda x: x ** 3, -1.0, 1.0, 8)
    assert cube.derivative()(0.5) == pytest.approx(0.75, abs=1e-13)
    assert cube.derivative(2)(0.5) == pytest.approx(3.0, abs=1e-12)

    cos = GridFunction.from_function(np.cos, 0.0, 1.0, 32)
    anti = cos.antiderivative()
    assert anti.values[0] == 0.0
    assert np.allclose(anti.values, np.sin(anti.nodes), atol=1e-14)

def test_grid_function_arithmetic():
    """Pointwise arithmetic on one grid; mismatched grids are rejected."""
    f = GridFunction.from_function(lambda x: x, 0.0, 1.0, 16)
    g = GridFunction.from_function(lambda x: 1.0 - x, 0.0, 1.0, 16)
    assert np.allclose((f + g).values, 1.0)
    assert (f * g).integral() == pytest.approx(1.0 / 6.0, abs=1e-14)
    assert f.inner(f) == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert (2.0 * f).integral() == pytest.approx(1.0, abs=1e-14)
    assert np.allclose((-f).values, -f.values)

    other = GridFunction.from_function(lambda x: x, 0.0, 1.0, 32)
    with pytest.raises(DomainError):
        f + other
    with pytest.raises(DomainError):
        f * GridFunction.from_function(lambda x: x, 0.0, 2.0, 16)

def test_grid_function_validation():
    with pytest.raises(ParameterError):
        GridFunction(1.0, 0.0, np.ones(5))
    with pytest.raises(ParameterError):
        GridFunction(0.0, 1.0, np.ones(1))

def test_grid_function_adaptive():
    """Degree doubling stops once the tail is resolved; kinks never resolve."""
    gf = GridFunction.adaptive(np.exp, -1.0, 1.0)
    assert gf.degree <= 64
    assert gf.integral() == pytest.approx(math.e - 1.0 / math.e, abs=1e-13)

    with pytest.raises(ConvergenceError):
        GridFunction.adaptive(np.abs, -1.0, 1.0, max_degree=64)

def test_dirichlet_energy():
    """Integral of (f')^2 for sin(pi x) on [0, 1] is pi^2/2."""
    gf = GridFunction.from_function(lambda x: np.sin(math.pi * x), 0.0, 1.0, 48)
    assert dirichlet_energy(gf) == pytest.approx(math.pi ** 2 / 2, rel=1e-12)

def test_bracket_root():
    assert bracket_root(lambda x: x * x - 2.0, 0.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert bracket_root(lambda x: x - 1.0, 1.0, 3.0) == 1.0

    with pytest.raises(RootNotFoundError) as excinfo:
        bracket_root(lambda x: x * x + 1.0, 0.0, 1.0)
    assert excinfo.value.endpoints == (0.0, 1.0)

def test_scan_sign_changes():
    values = np.array([1.0, -1.0, -2.0, 3.0, 4.0])
    assert list(scan_sign_changes(values)) == [0, 2]
    assert len(scan_sign_changes(np.ones(4))) == 0

def test_symmetric_matrix():
    """Built from the lower triangle; non-square input is rejected."""
    m = SymmetricMatrix([[2.0, 99.0], [1.0, 3.0]])
    assert np.array_equal(m.array, np.array([[2.0, 1.0], [1.0, 3.0]]))
    assert m.dimension == 2
    assert m[1, 0] == 1.0
    assert m.norm() == pytest.approx(np.max(np.linalg.eigvalsh(m.array)))

    with pytest.raises(ParameterError):
        SymmetricMatrix([[1.0, 2.0, 3.0]])

def test_eigen_symmetric():
    """Ascending eigenvalues, orthonormal vectors with a positive first component."""
    vals, vecs = eigen_symmetric(SymmetricMatrix(np.diag([3.0, 1.0, 2.0])))
    assert np.allclose(vals, [1.0, 2.0, 3.0])
    assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])
    assert np.all(vecs.sum(axis=0) > 0)

    a = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]])
    vals, vecs = eigen_symmetric(a)
    expected = [2.0 - 2.0 * math.cos(k * math.pi / 4.0) for k in (1, 2, 3)]
    assert np.allclose(vals, expected, atol=1e-14)
    assert np.allclose(vecs.T @ vecs, np.eye(3), atol=1e-14)
    for j in range(3):
        first = vecs[np.nonzero(np.abs(vecs[:, j]) > 1e-12)[0][0], j]
        assert first > 0

    vals, _ = eigen_symmetric(a, subset=(0, 1))
    assert len(vals) == 2

def test_fit_inverse_even_powers():
    """Exact data is reproduced; too few rows is an error."""
    data = [(n, 2.0 * n * n + 3.0 - 0.5 / n ** 2) for n in range(1, 31)]
    fit = fit_inverse_even_powers(data, 3)
    assert fit.rows == 30
    assert fit.coefficients[0] == pytest.approx(2.0, rel=1e-10)
    assert fit.coefficients[1] == pytest.approx(3.0, rel=1e-9)
    assert fit.coefficients[2] == pytest.approx(-0.5, rel=1e-8)
    assert fit.residual_norm < 1e-10

    with pytest.raises(ParameterError):
        fit_inverse_even_powers(data, 3, n_min=25)

def test_minimize_simplex():
    result = minimize_simplex(lambda x: (x[0] - 1.0) ** 2 + (x[1] + 2.0) ** 2, [0.0, 0.0])
    assert result.x == pytest.approx([1.0, -2.0], abs=1e-6)
    assert result.value < 1e-12
    assert result.evaluations > 0

    with pytest.raises(ParameterError):
        minimize_simplex(lambda x: math.inf, [0.0])
