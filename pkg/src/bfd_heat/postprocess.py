"""Final-time filters that strip the structured high-mode error.

The spectral filter removes all Fourier content above ``N/2`` on the 2N-node
periodic grid, where the block structure deposits its spurious modes. The
polynomial filter replaces the data in consecutive batches of 12 nodes by a
least-squares polynomial of degree 6.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from .errors import UnsupportedError
from .grid import BlockGrid1D, BlockGrid2D, GridFunction


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "spectral_highmode"
    batch_size: int = 12
    degree: int = 6
    cutoff: float = 0.5

    def __post_init__(self):
        if self.kind not in ("spectral_highmode", "poly_batch"):
            raise UnsupportedError(f"unknown filter kind {self.kind!r}")
        if self.kind == "poly_batch" and not self.degree < self.batch_size:
            raise UnsupportedError("degree must be smaller than the batch size")


SPECTRAL = FilterSpec("spectral_highmode")
POLY = FilterSpec("poly_batch")


def _spectral_1d(vals: np.ndarray, N: int, cutoff: float, axis: int = -1) -> np.ndarray:
    n = vals.shape[axis]
    if n != 2 * N:
        raise UnsupportedError(f"expected {2 * N} samples along the filtered axis, got {n}")
    k = np.fft.fftfreq(n, d=1.0 / n)
    keep = np.abs(k) <= cutoff * N
    shape = [1] * vals.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(vals, axis=axis) * keep.reshape(shape), axis=axis)
    return out.real if np.isrealobj(vals) else out


def filter_periodic(u: GridFunction, cutoff: float = 0.5) -> GridFunction:
    """Zero the discrete Fourier coefficients with ``|k| > cutoff * N``."""
    if not isinstance(u.grid, BlockGrid1D):
        raise UnsupportedError("filter_periodic needs a 1D block grid")
    return GridFunction(u.grid, _spectral_1d(u.values, u.grid.N, cutoff))


def _batch_starts(n: int, size: int) -> list[int]:
    starts = list(range(0, n - size + 1, size))
    if starts[-1] + size < n:
        starts.append(n - size)
    return starts


def _poly_matrix(size: int, degree: int) -> np.ndarray:
    """Projection ``P`` such that ``P @ v`` is the degree-``degree`` least-squares fit at the nodes."""
    s = np.linspace(-1.0, 1.0, size)
    V = legendre.legvander(s, degree)
    Qm, _ = np.linalg.qr(V)
    return Qm @ Qm.T


def _poly_1d(vals: np.ndarray, size: int, degree: int) -> np.ndarray:
    n = vals.shape[0]
    if n < size:
        raise UnsupportedError(f"need at least {size} nodes for batch fitting, got {n}")
    P = _poly_matrix(size, degree)
    out = np.empty_like(vals)
    for s in _batch_starts(n, size):
        out[s:s + size] = P @ vals[s:s + size]
    return out


def filter_poly_batches(u: GridFunction, spec: FilterSpec = POLY) -> GridFunction:
    """Batched least-squares polynomial projection.

    A trailing remainder is covered by a final batch made of the last
    ``batch_size`` nodes; on the overlap the later batch wins.
    """
    vals = np.asarray(u.values)
    return GridFunction(u.grid, _poly_1d(vals, spec.batch_size, spec.degree))


def apply_filter(u: GridFunction, spec: FilterSpec | None) -> GridFunction:
    if spec is None:
        return u
    if isinstance(u.grid, BlockGrid2D):
        return filter_2d(u, spec)
    if spec.kind == "spectral_highmode":
        return filter_periodic(u, spec.cutoff)
    return filter_poly_batches(u, spec)


def filter_2d(u: GridFunction, spec: FilterSpec) -> GridFunction:
    """Filter every x-line, then every y-line of the result."""
    if not isinstance(u.grid, BlockGrid2D):
        raise UnsupportedError("filter_2d needs a 2D grid")
    V = u.as_2d()
    gx, gy = u.grid.gx, u.grid.gy
    if spec.kind == "spectral_highmode":
        V = _spectral_1d(V, gx.N, spec.cutoff, axis=0)
        V = _spectral_1d(V, gy.N, spec.cutoff, axis=1)
    else:
        V = _poly_1d(V, spec.batch_size, spec.degree)
        V = _poly_1d(V.T, spec.batch_size, spec.degree).T
    return GridFunction(u.grid, np.ascontiguousarray(V).ravel())
