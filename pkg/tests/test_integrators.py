import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from bfd_heat.errors import ConfigurationError, InstabilityError
from bfd_heat.grid import GridFunction, build_grid_1d
from bfd_heat.integrators import (
    RK4_REAL_AXIS_LIMIT, IntegratorConfig, integrate, rk4_default_dt, rk4_stable_dt, spectral_radius_bound,
    step_gl6, step_rk4,
)
from bfd_heat.operator import BlockOperator, SchemeParams, assemble_dirichlet, assemble_periodic
from bfd_heat.symbols import symbols


def scalar_op(lam, n=1):
    grid = build_grid_1d(3, 0.0, 1.0)
    return BlockOperator(sp.csr_matrix(lam * np.eye(n)), lambda t: np.zeros(np.shape(t) + (n,)),
                         "periodic", SchemeParams(0.0), grid)


def test_zero_operator_is_identity():
    op = scalar_op(0.0, 4)
    u = np.arange(4.0)
    np.testing.assert_array_equal(step_rk4(op, u, 0.0, 0.3), u)
    np.testing.assert_array_equal(step_gl6(op, u, 0.0, 0.3), u)


def test_rk4_stability_polynomial():
    out = step_rk4(scalar_op(-1.0), np.ones(1), 0.0, 0.1)[0]
    assert out == pytest.approx(1 - 0.1 + 0.005 - 0.1**3 / 6 + 0.1**4 / 24, abs=1e-15)


def test_gl6_a_stable_and_sixth_order():
    assert abs(step_gl6(scalar_op(-1e6), np.ones(1), 0.0, 0.1)[0]) < 1
    assert step_gl6(scalar_op(-2.0), np.ones(1), 0.0, 0.05)[0] == pytest.approx(math.exp(-0.1), abs=1e-9)


def test_gl6_is_pade_33():
    z = -0.7
    num = 1 + z / 2 + z * z / 10 + z**3 / 120
    den = 1 - z / 2 + z * z / 10 - z**3 / 120
    assert step_gl6(scalar_op(z), np.ones(1), 0.0, 1.0)[0] == pytest.approx(num / den, rel=1e-13)


def test_real_axis_limit():
    z = -RK4_REAL_AXIS_LIMIT
    R = lambda z: abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)
    assert R(z + 0.002) <= 1 and R(z - 0.01) > 1


@pytest.mark.parametrize("c", [-0.9, -4 / 13, 0.0, 0.9])
def test_stable_dt_bounds_spectrum(c):
    g = build_grid_1d(12, 0.0, 1.0)
    rho = np.abs(np.linalg.eigvals(assemble_periodic(c, g).dense())).max()
    # the bound is the high-mode symbol at theta = 0; for c near 1 the true
    # maximum sits elsewhere and is up to 0.4 percent larger
    assert rho <= spectral_radius_bound(c, g.h) * 1.005
    assert rk4_stable_dt(c, g.h) * rho <= RK4_REAL_AXIS_LIMIT
    assert rk4_default_dt(c, g.h) < rk4_stable_dt(c, g.h)


def test_mode_decay_matches_symbol():
    N, c = 16, -0.25
    g = build_grid_1d(N, 0.0, 2 * math.pi)
    op = assemble_periodic(c, g)
    s = symbols(1, N, c)
    psi = s.alpha1 * np.exp(1j * g.nodes) + s.beta1 * np.exp(1j * (1 - N) * g.nodes)
    errs = []
    for dt in (0.01, 0.005):
        out = integrate(op, psi, IntegratorConfig("rk4", dt, 0.1))
        errs.append(np.abs(out - np.exp(s.qhat1 * 0.1) * psi).max())
    assert errs[0] < 1e-8
    assert errs[0] / errs[1] > 2**3.5


def test_zero_data_stays_zero():
    op = assemble_periodic(0.0, build_grid_1d(8, 0.0, 1.0))
    for m in ("rk4", "gl6"):
        out = integrate(op, np.zeros(16), IntegratorConfig(m, 1e-4, 0.01))
        assert not np.any(out)


def test_grid_function_round_trip():
    g = build_grid_1d(8, 0.0, 1.0)
    op = assemble_periodic(0.0, g)
    out = integrate(op, GridFunction(g, np.ones(16)), IntegratorConfig("gl6", 0.01, 0.05))
    assert isinstance(out, GridFunction)
    np.testing.assert_allclose(out.values, 1.0, atol=1e-12)


def test_matches_matrix_exponential():
    g = build_grid_1d(8, 0.0, 2 * math.pi)
    op = assemble_periodic(-4 / 13, g)
    u0 = np.exp(np.cos(g.nodes))
    ref = sla.expm(0.2 * op.dense()) @ u0
    out = integrate(op, u0, IntegratorConfig("gl6", 0.02, 0.2))
    np.testing.assert_allclose(out, ref, atol=1e-10)


def _time_errors(method, dts, t_final=0.2):
    # non-stiff: small grid, smooth forcing through the boundary data
    g = build_grid_1d(4, 0.0, math.pi)
    from bfd_heat.operator import BoundaryData
    bd = BoundaryData(np.sin, lambda t: np.cos(t), np.cos, np.sin, lambda t: 0 * t, lambda t: 0 * t)
    op = assemble_dirichlet(0.0, g, bd)
    u0 = np.cos(g.nodes)
    ref = integrate(op, u0, IntegratorConfig("gl6", dts[-1] / 8, t_final))
    return [np.abs(integrate(op, u0, IntegratorConfig(method, dt, t_final)) - ref).max() for dt in dts]


def test_rk4_fourth_order_in_time():
    e = _time_errors("rk4", [0.01, 0.005])
    assert e[0] / e[1] >= 2**3.8


def test_gl6_high_order_in_time():
    e = _time_errors("gl6", [0.1, 0.05])
    assert e[0] / e[1] >= 2**5.5


def test_periodic_mean_preserved_gl6(rng):
    g = build_grid_1d(16, 0.0, 2 * math.pi)
    op = assemble_periodic(-4 / 13, g)
    u0 = rng.standard_normal(32)
    out = integrate(op, u0, IntegratorConfig("gl6", 0.05, 1.0))
    assert abs(out.mean() - u0.mean()) <= 1e-12


def test_last_step_is_shortened():
    op = scalar_op(-1.0)
    out = integrate(op, np.ones(1), IntegratorConfig("gl6", 0.3, 1.0))
    assert out[0] == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_deterministic():
    g = build_grid_1d(8, 0.0, 1.0)
    op = assemble_periodic(0.1, g)
    u0 = np.sin(2 * np.pi * g.nodes)
    cfg = IntegratorConfig("rk4", 1e-4, 0.01)
    np.testing.assert_array_equal(integrate(op, u0, cfg), integrate(op, u0, cfg))


def test_unstable_dt_warns_and_growth_aborts():
    g = build_grid_1d(16, 0.0, 1.0)
    op = assemble_periodic(0.0, g)
    dt = 2 * rk4_stable_dt(0.0, g.h)
    u0 = np.random.default_rng(1).standard_normal(32)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(InstabilityError):
            integrate(op, u0, IntegratorConfig("rk4", dt, 200 * dt, growth_limit=10.0))
    with pytest.warns(RuntimeWarning):
        integrate(op, u0, IntegratorConfig("rk4", dt, dt))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        IntegratorConfig("euler", 0.1, 1.0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig("rk4", 0.0, 1.0)
