import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfd_heat.errors import InvalidGridError
from bfd_heat.grid import GridFunction, build_grid_1d, build_grid_2d, norm, project


def test_too_few_blocks_rejected():
    for N in (0, 1, 2):
        with pytest.raises(InvalidGridError):
            build_grid_1d(N, 0.0, 1.0)


def test_empty_domain_rejected():
    with pytest.raises(InvalidGridError):
        build_grid_1d(8, 1.0, 1.0)


def test_first_node_and_width():
    g = build_grid_1d(4, 0.0, 2 * math.pi)
    assert g.h == pytest.approx(math.pi / 2)
    assert g.nodes[0] == pytest.approx(math.pi / 8)
    assert g.nodes[1] == pytest.approx(3 * math.pi / 8)


def test_uniform_node_spacing():
    g = build_grid_1d(16, 0.0, 1.0)
    assert g.nodes.size == 32
    np.testing.assert_allclose(np.diff(g.nodes), 1 / 32, rtol=0, atol=1e-15)
    assert g.nodes[0] == pytest.approx(1 / 64)


def test_project_pointwise():
    g = build_grid_1d(8, 0.0, 2 * math.pi)
    np.testing.assert_array_equal(project(lambda x: np.ones_like(x), g).values, np.ones(16))
    np.testing.assert_allclose(project(np.sin, g).values, np.sin(g.nodes))
    g = build_grid_1d(16, 0.0, 1.0)
    v = project(lambda x: np.exp(np.cos(2 * np.pi * x)), g).values
    assert v[0] == pytest.approx(math.exp(math.cos(2 * math.pi / 64)))


def test_norm_examples():
    g = build_grid_1d(12, 0.0, 2 * math.pi)
    assert norm(GridFunction(g, np.zeros(24))) == 0.0
    assert norm(GridFunction(g, np.ones(24))) == pytest.approx(math.sqrt(2 * math.pi))
    g = build_grid_1d(32, 0.0, 2 * math.pi)
    assert norm(project(np.sin, g)) == pytest.approx(math.sqrt(math.pi), abs=1e-6)
    assert norm(GridFunction(g, -3 * np.ones(64)), "Linf") == 3.0


def test_norm_of_bare_array_needs_h():
    with pytest.raises(InvalidGridError):
        norm(np.ones(4))
    assert norm(np.ones(4), h=0.5) == pytest.approx(1.0)


def test_grid_function_length_checked():
    g = build_grid_1d(4, 0.0, 1.0)
    with pytest.raises(InvalidGridError):
        GridFunction(g, np.zeros(7))


def test_norm_converges_to_continuum():
    # |sin|^2 integrated over a non-periodic interval: the midpoint-type rule is second order
    exact = math.sqrt(0.5 - math.sin(2.0) / 4)
    errs = [abs(norm(project(np.sin, build_grid_1d(N, 0.0, 1.0))) - exact) for N in (8, 16, 32, 64)]
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(rates) >= 1.9


@pytest.mark.parametrize("nx,ny", [(3, 3), (4, 6), (8, 5)])
def test_2d_nodes_tensor_product(nx, ny):
    g = build_grid_2d(nx, ny, 0.0, 1.0, -1.0, 2.0)
    assert g.size == 4 * nx * ny
    X, Y = g.mesh()
    pts = {(round(a, 12), round(b, 12)) for a, b in zip(X.ravel(), Y.ravel())}
    expected = {(round(a, 12), round(b, 12)) for a in g.gx.nodes for b in g.gy.nodes}
    assert pts == expected
    f = project(lambda x, y: x + 10 * y, g)
    assert f.as_2d()[1, 2] == pytest.approx(g.gx.nodes[1] + 10 * g.gy.nodes[2])


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40), st.floats(-5, 5), st.floats(0.1, 10))
def test_node_count_and_bounds(N, a, length):
    g = build_grid_1d(N, a, a + length)
    x = g.nodes
    assert x.size == 2 * N
    assert np.all(np.diff(x) > 0)
    assert a < x[0] and x[-1] < a + length
    np.testing.assert_allclose(np.diff(x), length / (2 * N), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-100), min_size=6, max_size=6))
def test_norm_is_nonnegative_and_homogeneous(vals):
    g = build_grid_1d(3, 0.0, 1.0)
    u = GridFunction(g, np.array(vals))
    n = norm(u)
    assert n >= 0
    assert (n == 0) == (not np.any(u.values))
    assert norm(GridFunction(g, -2 * u.values)) == pytest.approx(2 * n)
