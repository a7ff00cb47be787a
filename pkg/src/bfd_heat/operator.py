"""Two-point block finite-difference approximation of d^2/dx^2.

Within block ``j`` the two nodes ``x_j -+ h/4`` use the six-point stencils

    u''_{j-1/4} ~ [(-u_{j-5/4} + 16u_{j-3/4} - 30u_{j-1/4} + 16u_{j+1/4} - u_{j+3/4})
                  + c(u_{j-5/4} - 5u_{j-3/4} + 10u_{j-1/4} - 10u_{j+1/4} + 5u_{j+3/4} - u_{j+5/4})] / (3h^2)

and its mirror image with the ``c`` part negated for ``u''_{j+1/4}``. The
operator is fourth order for any ``c`` and its global error is fifth order for
``c = -4/13``. Dirichlet problems use closed stencils at the first and last
block, obtained by eliminating ghost values extrapolated by odd reflection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, InvalidGridError
from .grid import BlockGrid1D, BlockGrid2D, GridFunction, project

OPTIMAL_C = -4.0 / 13.0


@dataclass(frozen=True)
class SchemeParams:
    """Free parameter of the block scheme; ``-1 < c < 1`` is the certified range."""

    c: float = OPTIMAL_C

    @property
    def certified(self) -> bool:
        return -1.0 < self.c < 1.0


def _c_of(params) -> float:
    return params.c if isinstance(params, SchemeParams) else params


def stencil_rows(c):
    """Integer-coefficient stencil rows (before the 1/(3h^2) factor).

    Columns are ``u_{j-5/4}, u_{j-3/4}, u_{j-1/4}, u_{j+1/4}, u_{j+3/4}, u_{j+5/4}``.
    Works with floats, fractions or symbolic ``c``.
    """
    minus = [-1 + c, 16 - 5 * c, -30 + 10 * c, 16 - 10 * c, -1 + 5 * c, -c]
    plus = [-c, -1 + 5 * c, 16 - 10 * c, -30 + 10 * c, 16 - 5 * c, -1 + c]
    return minus, plus


def boundary_rows(c):
    """Closed stencils of the first block over ``u_{1-1/4} .. u_{1+5/4}`` (before 1/(3h^2))."""
    return ([-46 + 15 * c, 17 - 11 * c, -1 + 5 * c, -c],
            [17 - 15 * c, -30 + 11 * c, 16 - 5 * c, -1 + c])


def boundary_source_coefficients(c):
    """Weights of (g, (h/4)^2 u_xx, (h/4)^4 u_xxxx) for the node at h/4 and at 3h/4 from the wall."""
    near = (30 - 8 * c, 7 + 4 * c, (-65 + 76 * c) / 12)
    far = (-2 + 8 * c, -1 - 4 * c, (-1 - 76 * c) / 12)
    return near, far


@dataclass(frozen=True)
class BlockTriple:
    """Couplings of a block to its left neighbour (A), itself (B) and right neighbour (C)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.hstack([self.A, self.B, self.C])


def interior_blocks(params, h: float) -> BlockTriple:
    if not h > 0:
        raise InvalidGridError(f"block width must be positive, got {h}")
    minus, plus = stencil_rows(float(_c_of(params)))
    rows = np.array([minus, plus]) / (3.0 * h * h)
    return BlockTriple(rows[:, 0:2], rows[:, 2:4], rows[:, 4:6])


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet values and second/fourth normal derivatives at both walls.

    In 1D every callable is ``f(t)``; for 2D operators they are ``f(s, t)``
    with ``s`` the array of tangential node coordinates.
    """

    g_left: Callable | None = None
    g_right: Callable | None = None
    uxx_left: Callable | None = None
    uxx_right: Callable | None = None
    uxxxx_left: Callable | None = None
    uxxxx_right: Callable | None = None

    def require(self):
        missing = [k for k, v in vars(self).items() if v is None]
        if missing:
            raise ConfigurationError(f"boundary data missing: {', '.join(missing)}")
        return self


def _zero_source(n):
    def source(t):
        return np.zeros(np.shape(t) + (n,))
    return source


@dataclass(frozen=True)
class BlockOperator:
    """Semi-discrete operator ``u -> Q u + s(t)``.

    ``source`` accepts a scalar time or an array of times and returns values
    with a trailing node axis.
    """

    matrix: sp.csr_matrix
    source: Callable[[float], np.ndarray] = field(repr=False)
    bc: str
    params: SchemeParams
    grid: BlockGrid1D | BlockGrid2D

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply(self, u, t: float = 0.0) -> np.ndarray:
        return self.matrix @ np.asarray(u) + self.source(t)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _periodic_matrix(c: float, grid: BlockGrid1D) -> sp.csr_matrix:
    N, h = grid.N, grid.h
    blocks = interior_blocks(c, h)
    rows, cols, vals = [], [], []
    for blk, off in ((blocks.A, -1), (blocks.B, 0), (blocks.C, 1)):
        for r in range(2):
            for s in range(2):
                j = np.arange(N)
                rows.append(2 * j + r)
                cols.append(2 * ((j + off) % N) + s)
                vals.append(np.full(N, blk[r, s]))
    n = 2 * N
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _params(params) -> SchemeParams:
    return params if isinstance(params, SchemeParams) else SchemeParams(float(params))


def assemble_periodic(params, grid: BlockGrid1D) -> BlockOperator:
    p = _params(params)
    return BlockOperator(_periodic_matrix(p.c, grid), _zero_source(grid.size), "periodic", p, grid)


def _dirichlet_matrix(c: float, grid: BlockGrid1D) -> sp.csr_matrix:
    n, h = grid.size, grid.h
    Q = _periodic_matrix(c, grid).tolil()
    r0, r1 = boundary_rows(c)
    scale = 1.0 / (3.0 * h * h)
    for i in (0, 1, n - 2, n - 1):
        Q.rows[i] = []
        Q.data[i] = []
    Q[0, 0:4] = np.array(r0) * scale
    Q[1, 0:4] = np.array(r1) * scale
    # right block is the mirror image of the left one
    Q[n - 1, n - 4:] = np.array(r0[::-1]) * scale
    Q[n - 2, n - 4:] = np.array(r1[::-1]) * scale
    return Q.tocsr()


def _closure_source(c, h, g, uxx, uxxxx):
    """Source terms for (near-wall node, second node) of one wall."""
    near, far = boundary_source_coefficients(c)
    q2, q4 = (h / 4) ** 2, (h / 4) ** 4
    scale = 1.0 / (3.0 * h * h)
    s_near = (near[0] * g + near[1] * q2 * uxx + near[2] * q4 * uxxxx) * scale
    s_far = (far[0] * g + far[1] * q2 * uxx + far[2] * q4 * uxxxx) * scale
    return s_near, s_far


def assemble_dirichlet(params, grid: BlockGrid1D, bd: BoundaryData) -> BlockOperator:
    p = _params(params)
    bd = bd.require()
    c, h, n = p.c, grid.h, grid.size

    def source(t):
        tt = np.asarray(t, dtype=float)
        s = np.zeros(tt.shape + (n,))
        s[..., 0], s[..., 1] = _closure_source(c, h, bd.g_left(tt), bd.uxx_left(tt), bd.uxxxx_left(tt))
        s[..., n - 1], s[..., n - 2] = _closure_source(c, h, bd.g_right(tt), bd.uxx_right(tt),
                                                       bd.uxxxx_right(tt))
        return s

    return BlockOperator(_dirichlet_matrix(c, grid), source, "dirichlet", p, grid)


def ghost_values(grid: BlockGrid1D, u, bd: BoundaryData, t: float = 0.0):
    """Odd-reflection ghost values ``(u(a-3h/4), u(a-h/4)), (u(b+h/4), u(b+3h/4))``."""
    bd = bd.require()
    u = np.asarray(u)
    h = grid.h

    def reflect(mirror, g, uxx, uxxxx, d):
        return -mirror + 2 * g + uxx * d**2 + uxxxx * d**4 / 12

    gl, ul2, ul4 = bd.g_left(t), bd.uxx_left(t), bd.uxxxx_left(t)
    gr, ur2, ur4 = bd.g_right(t), bd.uxx_right(t), bd.uxxxx_right(t)
    left = (reflect(u[1], gl, ul2, ul4, 3 * h / 4), reflect(u[0], gl, ul2, ul4, h / 4))
    right = (reflect(u[-1], gr, ur2, ur4, h / 4), reflect(u[-2], gr, ur2, ur4, 3 * h / 4))
    return left, right


def apply_with_ghosts(params, grid: BlockGrid1D, u, bd: BoundaryData, t: float = 0.0) -> np.ndarray:
    """Interior stencil applied to ``u`` padded with extrapolated ghost values."""
    c = _c_of(params)
    left, right = ghost_values(grid, u, bd, t)
    ext = np.concatenate([left, np.asarray(u, dtype=float), right])
    minus, plus = (np.array(r) / (3 * grid.h**2) for r in stencil_rows(c))
    out = np.empty(grid.size)
    for j in range(grid.N):
        window = ext[2 * j: 2 * j + 6]
        out[2 * j] = minus @ window
        out[2 * j + 1] = plus @ window
    return out


def assemble_1d(params, grid: BlockGrid1D, bc: str, bd: BoundaryData | None = None) -> BlockOperator:
    if bc == "periodic":
        return assemble_periodic(params, grid)
    if bc == "dirichlet":
        if bd is None:
            raise ConfigurationError("dirichlet operator needs boundary data")
        return assemble_dirichlet(params, grid, bd)
    raise ConfigurationError(f"unknown boundary condition {bc!r}")


def assemble_2d(params, grid2d: BlockGrid2D, bc: str,
                bd_x: BoundaryData | None = None,
                bd_y: BoundaryData | None = None) -> BlockOperator:
    """Kronecker sum ``Qx (x) I + I (x) Qy`` with per-direction Dirichlet sources.

    ``bd_x`` holds the data on the walls ``x = ax, bx`` as functions of ``(y, t)``;
    ``bd_y`` the data on ``y = ay, by`` as functions of ``(x, t)``.
    """
    if not isinstance(grid2d, BlockGrid2D):
        raise ConfigurationError("assemble_2d needs a BlockGrid2D")
    p = _params(params)
    gx, gy = grid2d.gx, grid2d.gy
    nx, ny = gx.size, gy.size
    if bc == "periodic":
        Qx, Qy = _periodic_matrix(p.c, gx), _periodic_matrix(p.c, gy)
    elif bc == "dirichlet":
        if bd_x is None or bd_y is None:
            raise ConfigurationError("2D dirichlet operator needs bd_x and bd_y")
        bd_x.require()
        bd_y.require()
        Qx, Qy = _dirichlet_matrix(p.c, gx), _dirichlet_matrix(p.c, gy)
    else:
        raise ConfigurationError(f"unknown boundary condition {bc!r}")
    Q = (sp.kron(Qx, sp.identity(ny)) + sp.kron(sp.identity(nx), Qy)).tocsr()
    if bc == "periodic":
        return BlockOperator(Q, _zero_source(grid2d.size), bc, p, grid2d)

    xs, ys = gx.nodes, gy.nodes

    def walls(bd, tang, T):
        lo = _closure_source(p.c, gx.h if bd is bd_x else gy.h,
                             bd.g_left(tang, T), bd.uxx_left(tang, T), bd.uxxxx_left(tang, T))
        hi = _closure_source(p.c, gx.h if bd is bd_x else gy.h,
                             bd.g_right(tang, T), bd.uxx_right(tang, T), bd.uxxxx_right(tang, T))
        return lo, hi

    def source(t):
        tt = np.asarray(t, dtype=float)
        T = tt[..., None]
        s = np.zeros(tt.shape + (nx, ny))
        (near, far), (near_r, far_r) = walls(bd_x, ys, T)
        s[..., 0, :] += near
        s[..., 1, :] += far
        s[..., -1, :] += near_r
        s[..., -2, :] += far_r
        (near, far), (near_r, far_r) = walls(bd_y, xs, T)
        s[..., :, 0] += near
        s[..., :, 1] += far
        s[..., :, -1] += near_r
        s[..., :, -2] += far_r
        return s.reshape(tt.shape + (nx * ny,))

    return BlockOperator(Q, source, bc, p, grid2d)


def truncation_error(params, grid: BlockGrid1D, u: Callable, uxx: Callable,
                     bc: str = "periodic", bd: BoundaryData | None = None,
                     t: float = 0.0) -> GridFunction:
    """``T_e = u_xx - (Q u + s)`` evaluated on the projection of a smooth ``u``."""
    op = assemble_1d(params, grid, bc, bd)
    te = project(uxx, grid).values - op.apply(project(u, grid).values, t)
    return GridFunction(grid, te)


def write_matrix_market(op_or_matrix, path: str | PathLike) -> None:
    """Coordinate dump with 1-based indices, rows sorted, full double precision."""
    M = op_or_matrix.matrix if isinstance(op_or_matrix, BlockOperator) else op_or_matrix
    coo = sp.coo_matrix(M)
    order = np.lexsort((coo.col, coo.row))
    lines = ["%%MatrixMarket matrix coordinate real general",
             f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    lines += [f"{r + 1} {c + 1} {v!r}" for r, c, v in
              zip(coo.row[order], coo.col[order], coo.data[order].tolist())]
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write matrix to {path}: {exc}") from exc
