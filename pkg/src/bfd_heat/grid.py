"""Two-point block grids in one and two dimensions.

Block ``j`` (1-based) has center ``x_j = a + (j - 1/2) h`` and carries the two
nodes ``x_j - h/4`` and ``x_j + h/4``. Nodes are stored interleaved, so node
``m = 2(j-1) + k`` is the left (k=0) or right (k=1) node of block ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidGridError

MIN_BLOCKS = 3


@dataclass(frozen=True)
class BlockGrid1D:
    """Uniform two-point block grid on ``[a, b]`` with ``N`` blocks."""

    N: int
    a: float
    b: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < MIN_BLOCKS:
            raise InvalidGridError(f"need at least {MIN_BLOCKS} blocks, got N={self.N}")
        if not self.b > self.a:
            raise InvalidGridError(f"invalid domain [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def size(self) -> int:
        return 2 * self.N

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.N) + 0.5) * self.h

    @property
    def nodes(self) -> np.ndarray:
        x = np.empty(2 * self.N)
        x[0::2] = self.centers - self.h / 4
        x[1::2] = self.centers + self.h / 4
        return x


@dataclass(frozen=True)
class BlockGrid2D:
    """Tensor product of two block grids.

    The node vector is ordered row-major over (x-node, y-node) pairs, i.e. the
    value at ``(x_p, y_q)`` sits at index ``p * 2 ny + q``.
    """

    gx: BlockGrid1D
    gy: BlockGrid1D

    @property
    def size(self) -> int:
        return self.gx.size * self.gy.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.gx.size, self.gy.size)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.gx.nodes, self.gy.nodes, indexing="ij")


def build_grid_1d(N: int, a: float, b: float) -> BlockGrid1D:
    return BlockGrid1D(N, float(a), float(b))


def build_grid_2d(nx: int, ny: int, ax: float, bx: float, ay: float, by: float) -> BlockGrid2D:
    return BlockGrid2D(build_grid_1d(nx, ax, bx), build_grid_1d(ny, ay, by))


@dataclass(frozen=True)
class GridFunction:
    """Values attached to the nodes of a grid."""

    grid: BlockGrid1D | BlockGrid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1 or vals.size != self.grid.size:
            raise InvalidGridError(
                f"expected {self.grid.size} values, got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def as_2d(self) -> np.ndarray:
        if not isinstance(self.grid, BlockGrid2D):
            raise InvalidGridError("grid function is not two-dimensional")
        return self.values.reshape(self.grid.shape)


def project(f: Callable, grid: BlockGrid1D | BlockGrid2D) -> GridFunction:
    """Sample ``f`` at the grid nodes. In 2D ``f`` is called as ``f(x, y)``."""
    if isinstance(grid, BlockGrid2D):
        X, Y = grid.mesh()
        vals = np.broadcast_to(f(X, Y), X.shape).ravel()
    else:
        x = grid.nodes
        vals = np.broadcast_to(f(x), x.shape)
    return GridFunction(grid, np.array(vals))


def _cell_weight(grid) -> float:
    if isinstance(grid, BlockGrid2D):
        return (grid.gx.h / 2) * (grid.gy.h / 2)
    return grid.h / 2


def norm(u, kind: str = "L2_h", h: float | None = None) -> float:
    """Discrete norm on the node grid.

    ``L2_h`` weights each node by the node spacing ``h/2`` (its square in 2D).
    Plain arrays need ``h`` (the block width) to be given for ``L2_h``.
    """
    if isinstance(u, GridFunction):
        w = _cell_weight(u.grid)
        vals = u.values
    else:
        vals = np.asarray(u)
        w = None if h is None else h / 2
    if vals.size == 0:
        raise InvalidGridError("norm of an empty grid function")
    if kind == "Linf":
        return float(np.max(np.abs(vals)))
    if kind == "L2_h":
        if w is None:
            raise InvalidGridError("L2_h norm of a bare array needs h")
        return float(np.sqrt(w * np.sum(np.abs(vals) ** 2)))
    raise ValueError(f"unknown norm kind {kind!r}")
