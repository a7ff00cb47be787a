"""Manufactured exact solutions of ``u_t = Laplace(u) + F``.

Each problem is defined by a closed-form ``u``; the forcing and every boundary
derivative are obtained by symbolic differentiation and compiled to numpy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from .errors import ConfigurationError
from .operator import BoundaryData

x, y, t = sp.symbols("x y t", real=True)


def _compile(expr, args):
    f = sp.lambdify(args, expr, "numpy", cse=True)

    def wrapped(*vals):
        out = f(*vals)
        shape = np.broadcast(*vals).shape
        return np.broadcast_to(out, shape).astype(float) if shape else float(out)

    return wrapped


@dataclass(frozen=True)
class ManufacturedProblem:
    name: str
    expr: sp.Expr
    dim: int
    domain: tuple
    bc: str
    vars: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "vars", (x, t) if self.dim == 1 else (x, y, t))

    @property
    def space(self):
        return self.vars[:-1]

    def laplacian(self) -> sp.Expr:
        return sum(sp.diff(self.expr, v, 2) for v in self.space)

    def forcing_expr(self) -> sp.Expr:
        return sp.diff(self.expr, t) - self.laplacian()

    def u(self) -> Callable:
        return _compile(self.expr, self.vars)

    def forcing(self) -> Callable:
        return _compile(self.forcing_expr(), self.vars)

    def derivative(self, var, order: int) -> Callable:
        return _compile(sp.diff(self.expr, var, order), self.vars)

    def residual(self) -> Callable:
        """``u_t - Laplace(u) - F`` compiled from the stored forcing (identically zero)."""
        return _compile(sp.diff(self.expr, t) - self.laplacian() - self.forcing_expr(), self.vars)

    def _wall_functions(self, var, value, from_pde: bool):
        """g, d2 u / d var^2 and d4 u / d var^4 on the wall ``var = value``."""
        rest = tuple(v for v in self.vars if v is not var)
        u = self.expr
        if from_pde:
            F = self.forcing_expr()
            tang = [v for v in self.space if v is not var]
            d2 = sp.diff(u, t) - sum(sp.diff(u, s, 2) for s in tang) - F
            d4 = sp.diff(d2, t) - sum(sp.diff(d2, s, 2) for s in tang) - sp.diff(F, var, 2)
        else:
            d2, d4 = sp.diff(u, var, 2), sp.diff(u, var, 4)
        return tuple(_compile(e.subs(var, value), rest) for e in (u, d2, d4))

    def boundary_data(self, from_pde: bool = False):
        """Wall data: a ``BoundaryData`` in 1D, ``(bd_x, bd_y)`` in 2D.

        With ``from_pde`` the second and fourth normal derivatives are computed
        from ``u_t``, tangential derivatives and the forcing instead of
        differentiating ``u`` in the normal direction.
        """
        walls = []
        for k, var in enumerate(self.space):
            lo, hi = self.domain[k]
            gl, dl2, dl4 = self._wall_functions(var, lo, from_pde)
            gr, dr2, dr4 = self._wall_functions(var, hi, from_pde)
            walls.append(BoundaryData(gl, gr, dl2, dr2, dl4, dr4))
        return walls[0] if self.dim == 1 else tuple(walls)


def _registry():
    two_pi = 2 * sp.pi
    return {
        "expcos_2pix_t": ManufacturedProblem(
            "expcos_2pix_t", sp.exp(sp.cos(two_pi * (x - t))), 1, ((0.0, 1.0),), "periodic"),
        "expcos_x_t": ManufacturedProblem(
            "expcos_x_t", sp.exp(sp.cos(x - t)), 1, ((0.0, 1.0),), "dirichlet"),
        "expcos_2pixy_t": ManufacturedProblem(
            "expcos_2pixy_t", sp.exp(sp.cos(two_pi * (x + y - t))), 2, ((0.0, 1.0), (0.0, 1.0)), "periodic"),
        "expcos_xy_t": ManufacturedProblem(
            "expcos_xy_t", sp.exp(sp.cos(x + y - t)), 2, ((0.0, 1.0), (0.0, 1.0)), "dirichlet"),
    }


PROBLEMS = _registry()


def get_problem(name: str) -> ManufacturedProblem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ConfigurationError(f"unknown exact solution {name!r}; known: {sorted(PROBLEMS)}") from None
