"""Time stepping for ``u' = Q u + s(t)``: classical RK4 and 3-stage Gauss-Legendre."""
from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, InstabilityError, SingularSystemError
from .grid import BlockGrid2D, GridFunction
from .operator import BlockOperator

RK4_REAL_AXIS_LIMIT = 2.785

_S15 = math.sqrt(15.0)
GL6_A = np.array([
    [5 / 36, 2 / 9 - _S15 / 15, 5 / 36 - _S15 / 30],
    [5 / 36 + _S15 / 24, 2 / 9, 5 / 36 - _S15 / 24],
    [5 / 36 + _S15 / 30, 2 / 9 + _S15 / 15, 5 / 36],
])
GL6_B = np.array([5 / 18, 4 / 9, 5 / 18])
GL6_C = np.array([0.5 - _S15 / 10, 0.5, 0.5 + _S15 / 10])


@dataclass(frozen=True)
class IntegratorConfig:
    method: str
    dt: float
    t_final: float
    t0: float = 0.0
    growth_limit: float | None = None

    def __post_init__(self):
        if self.method not in ("rk4", "gl6"):
            raise ConfigurationError(f"unknown integrator {self.method!r}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")


def spectral_radius_bound(c: float, h: float, dim: int = 1) -> float:
    """``dim * 32|c-2| / (3h^2)``: the largest symbol modulus (reached by the high mode at omega=0)."""
    return dim * 32 * abs(c - 2) / (3 * h * h)


def rk4_stable_dt(c: float, h: float, dim: int = 1, safety: float = 0.9) -> float:
    """Largest RK4 step inside the real-axis stability interval (times ``safety``)."""
    return safety * RK4_REAL_AXIS_LIMIT / spectral_radius_bound(c, h, dim)


def rk4_default_dt(c: float, h: float, safety: float = 0.9) -> float:
    """Harness step ``0.25 * 3h^2 / |32(c-2)| * safety``, i.e. ``dt * |qhat2| ~ 0.23``.

    Far below the stability limit on purpose: with time-dependent boundary
    data RK4 loses order on the stiff modes and steps near the limit leave a
    temporal error comparable to the fifth-order spatial error.
    """
    return 0.25 * 3 * h * h / abs(32 * (c - 2)) * safety


def _h_dim(op: BlockOperator) -> tuple[float, int]:
    if isinstance(op.grid, BlockGrid2D):
        return min(op.grid.gx.h, op.grid.gy.h), 2
    return op.grid.h, 1


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, GridFunction) else np.asarray(u)


def _wrap(like, vals):
    return GridFunction(like.grid, vals) if isinstance(like, GridFunction) else vals


DENSE_LIMIT = 600


def _rk4_increment(Q, y, dt, S):
    k1 = Q @ y + S[0]
    k2 = Q @ (y + dt / 2 * k1) + S[1]
    k3 = Q @ (y + dt / 2 * k2) + S[1]
    k4 = Q @ (y + dt * k3) + S[2]
    return dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_rk4(op: BlockOperator, u, t: float, dt: float, source: Callable | None = None):
    src = op.source if source is None else source
    S = src(t + dt * np.array([0.0, 0.5, 1.0]))
    y = _values(u)
    return _wrap(u, y + _rk4_increment(op.matrix, y, dt, S))


class _LUCache:
    """Factorizations of ``I - dt (A kron Q)`` keyed by operator identity and ``dt``."""

    def __init__(self, size: int = 8):
        self.size = size
        self._store: OrderedDict = OrderedDict()

    def get(self, Q, dt: float):
        key = (id(Q), float(dt))
        hit = self._store.get(key)
        if hit is not None and hit[0] is Q:
            self._store.move_to_end(key)
            return hit[1]
        n = Q.shape[0]
        system = (sp.identity(3 * n, format="csc") - dt * sp.kron(sp.csr_matrix(GL6_A), sp.csr_matrix(Q))).tocsc()
        try:
            lu = spla.splu(system)
        except RuntimeError as exc:
            raise SingularSystemError(f"Gauss-Legendre stage system is singular: {exc}") from exc
        self._store[key] = (Q, lu)
        if len(self._store) > self.size:
            self._store.popitem(last=False)
        return lu


_lu_cache = _LUCache()


def _gl6_increment(Q, y, dt, S, lu):
    n = y.size
    Qy = Q @ y
    rhs = (Qy[None, :] + S).ravel()
    if np.iscomplexobj(rhs):
        K = lu.solve(np.ascontiguousarray(rhs.real)) + 1j * lu.solve(np.ascontiguousarray(rhs.imag))
    else:
        K = lu.solve(rhs)
    if not np.all(np.isfinite(K)):
        raise SingularSystemError("Gauss-Legendre stage solve produced non-finite values")
    return dt * (GL6_B @ K.reshape(3, n))


def step_gl6(op: BlockOperator, u, t: float, dt: float, source: Callable | None = None):
    """One Gauss-Legendre step; the linear stage system is solved directly."""
    src = op.source if source is None else source
    S = src(t + dt * GL6_C)
    lu = _lu_cache.get(op.matrix, dt)
    y = _values(u)
    return _wrap(u, y + _gl6_increment(op.matrix, y, dt, S, lu))


STEPPERS = {"rk4": step_rk4, "gl6": step_gl6}
_OFFSETS = {"rk4": np.array([0.0, 0.5, 1.0]), "gl6": GL6_C}


def integrate(op: BlockOperator, u0, config: IntegratorConfig, source_provider: Callable | None = None):
    """Advance from ``config.t0`` to ``config.t_final``; the last step is shortened if needed.

    Source values are requested for whole chunks of steps at once, so
    ``source_provider`` (default ``op.source``) must accept an array of times
    and return values with a trailing node axis. The state update uses
    compensated summation: with tens of thousands of explicit steps the
    rounding of ``u + increment`` otherwise accumulates to the level of the
    spatial error on fine grids.
    """
    src = op.source if source_provider is None else source_provider
    if config.method == "rk4":
        h, dim = _h_dim(op)
        limit = RK4_REAL_AXIS_LIMIT / spectral_radius_bound(op.params.c, h, dim)
        if config.dt > limit:
            warnings.warn(f"dt={config.dt:.3e} exceeds the RK4 stability estimate {limit:.3e}",
                          RuntimeWarning, stacklevel=2)
    span = config.t_final - config.t0
    nsteps = max(int(math.ceil(span / config.dt - 1e-9)), 0)
    if nsteps == 0:
        return u0
    starts = config.t0 + config.dt * np.arange(nsteps)
    dts = np.full(nsteps, config.dt)
    dts[-1] = config.t_final - starts[-1]
    Q = op.matrix.toarray() if op.size <= DENSE_LIMIT else op.matrix
    y = np.array(_values(u0))
    n = y.size
    offs = _OFFSETS[config.method]
    chunk = int(max(1, min(nsteps, 2_000_000 // (offs.size * n))))
    comp = np.zeros_like(y)
    start_norm = np.linalg.norm(y)
    # dense RK4 with a fixed step: the increment is (R - I) y plus a term linear
    # in the stage sources, which is formed for a whole chunk by one product
    fused = config.method == "rk4" and isinstance(Q, np.ndarray)
    if fused:
        R_minus_I = _rk4_increment(Q, np.eye(n), config.dt, np.zeros((3, n, 1)))
    for c0 in range(0, nsteps, chunk):
        sl = slice(c0, min(c0 + chunk, nsteps))
        # stage times as t0 + dt (k + offset) so that shared times coincide exactly
        ts = config.t0 + config.dt * (np.arange(sl.start, sl.stop)[:, None] + offs[None, :])
        if sl.stop == nsteps:
            ts[-1] = starts[-1] + dts[-1] * offs
        tu, inv = np.unique(ts, return_inverse=True)
        S = np.broadcast_to(src(tu), tu.shape + (n,))[inv.reshape(ts.shape)]
        if fused:
            G = _rk4_increment(Q, np.zeros((n, 1)), config.dt, np.transpose(S, (1, 2, 0))).T
        for i, dt in enumerate(dts[sl]):
            if fused and dt == config.dt:
                inc = R_minus_I @ y + G[i] - comp
            elif config.method == "rk4":
                inc = _rk4_increment(Q, y, dt, S[i]) - comp
            else:
                inc = _gl6_increment(Q, y, dt, S[i], _lu_cache.get(op.matrix, dt)) - comp
            y_new = y + inc
            comp = (y_new - y) - inc
            y = y_new
        if config.growth_limit is not None:
            cur = np.linalg.norm(y)
            if not np.isfinite(cur) or cur > config.growth_limit * max(start_norm, 1e-300):
                t_now = starts[sl][-1] + dts[sl][-1]
                raise InstabilityError(f"solution norm grew from {start_norm:.3e} to {cur:.3e} by t={t_now:.4g}")
    return _wrap(u0, y)
