"""Discontinuous-Galerkin reading of the block scheme and its energy certificate.

Each block is a cell carrying a linear element with nodes at ``x_j -+ h/4``.
A weak form with general flux/penalty coefficients ``C1..C4`` (right interface,
tested by ``v^-``), ``D1..D4`` (left interface, ``v^+``), ``E1..E4`` and
``F1..F4`` (the same interfaces, tested by ``v_x``) reproduces the finite
difference blocks for a four-parameter family of coefficients. Stability
follows when the energy exchanged at every interface,

    Theta = H^- + H^+ - (1/2) int_{I_{j-1}} u_x^2 - (1/2) int_{I_j} u_x^2,

is a non-positive quadratic form in the four nodal values next to it.
Coefficients are stored h-free: ``C1, C2, D1, D2`` carry a hidden ``1/h`` and
``E3, E4, F3, F4`` a hidden ``h``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import sympy as sp

from .errors import BFDError, NoSolutionError, SingularSystemError
from .grid import build_grid_1d, build_grid_2d
from .operator import assemble_2d, assemble_periodic, boundary_rows, stencil_rows

NAMES = tuple(f"{L}{k}" for L in "CDEF" for k in range(1, 5))
FREE = ("C2", "C3", "E2", "E3")
H_POWER = {"C1": -1, "C2": -1, "D1": -1, "D2": -1, "E3": 1, "E4": 1, "F3": 1, "F4": 1}

c_sym = sp.Symbol("c")
_h = sp.Symbol("h", positive=True)
_coef = {n: sp.Symbol(n) for n in NAMES}


@functools.lru_cache(maxsize=None)
def element(h=_h):
    """Traces and matrices of the two-node linear element on ``[-h/2, h/2]``.

    Returns ``(left, right, deriv, mass, stiffness)`` where ``left``/``right``
    are the end values and ``deriv`` the slope as linear forms in the nodal values.
    """
    x = sp.Symbol("x")
    phi = (-2 / h * (x - h / 4), 2 / h * (x + h / 4))
    left = sp.Matrix([[p.subs(x, -h / 2) for p in phi]])
    right = sp.Matrix([[p.subs(x, h / 2) for p in phi]])
    deriv = sp.Matrix([[sp.diff(p, x) for p in phi]])
    mass = sp.Matrix(2, 2, lambda a, b: sp.integrate(phi[a] * phi[b], (x, -h / 2, h / 2)))
    stiff = sp.Matrix(2, 2, lambda a, b: sp.integrate(sp.diff(phi[a], x) * sp.diff(phi[b], x), (x, -h / 2, h / 2)))
    return left, right, deriv, sp.simplify(mass), sp.simplify(stiff)


def _scaled(co: Mapping[str, sp.Expr], h) -> dict:
    return {n: co[n] * h ** H_POWER.get(n, 0) for n in NAMES}


def weak_form_matrix(co: Mapping[str, sp.Expr], h=_h) -> sp.Matrix:
    """2x6 matrix ``K`` with ``Mass u_t = K (u_L, u_M, u_R)`` for one cell.

    ``co`` holds h-free coefficients (symbols or numbers).
    """
    left, right, deriv, _, stiff = element(h)
    k = _scaled(co, h)
    z = sp.zeros(1, 2)

    def cells(lf, mf, rf):
        return sp.Matrix.hstack(lf, mf, rf)

    # traces at x_{j+1/2}: u^+ from the right cell, u^- from this cell
    up_r, um_r = cells(z, z, left), cells(z, right, z)
    dp_r, dm_r = cells(z, z, deriv), cells(z, deriv, z)
    # traces at x_{j-1/2}
    up_l, um_l = cells(z, left, z), cells(right, z, z)
    dp_l, dm_l = cells(z, deriv, z), cells(deriv, z, z)
    Cb = k["C1"] * up_r + k["C2"] * um_r + k["C3"] * dm_r + k["C4"] * dp_r
    Eb = k["E1"] * up_r + k["E2"] * um_r + k["E3"] * dm_r + k["E4"] * dp_r
    Db = k["D1"] * up_l + k["D2"] * um_l + k["D3"] * dm_l + k["D4"] * dp_l
    Fb = k["F1"] * up_l + k["F2"] * um_l + k["F3"] * dm_l + k["F4"] * dp_l
    rows = []
    for a in range(2):
        r = -cells(z, stiff[a, :], z) + right[a] * Cb + left[a] * Db + deriv[a] * (Eb + Fb)
        rows.append(r)
    return sp.Matrix.vstack(*rows)


def bfd_target(c=c_sym, location: str = "interior", h=_h) -> sp.Matrix:
    """Exact 2x6 block rows of the finite-difference scheme for one cell."""
    if location == "interior":
        minus, plus = stencil_rows(c)
    elif location == "left_boundary":
        r0, r1 = boundary_rows(c)
        minus, plus = [0, 0] + r0, [0, 0] + r1
    else:
        raise ValueError(f"unknown location {location!r}")
    return sp.Matrix([minus, plus]) / (3 * h**2)


def dg_diffusion_target(h=_h) -> sp.Matrix:
    """Blocks of the standard symmetric-flux DG scheme with Baumann-Oden penalty."""
    A = sp.Matrix([[7, -1], [1, -7]]) / (4 * h**2)
    B = sp.Matrix([[-12, 12], [12, -12]]) / (2 * h**2)
    C = sp.Matrix([[-7, 1], [-1, 7]]) / (4 * h**2)
    return sp.Matrix.hstack(A, B, C)


@dataclass(frozen=True)
class PenaltyCoefficients:
    """Affine family of coefficients in the free parameters ``C2, C3, E2, E3``."""

    values: dict = field(repr=False)
    location: str
    c: object
    free: tuple = FREE

    def __getitem__(self, name):
        return self.values[name]

    def instantiate(self, exact: bool = False, **free) -> dict:
        sub = {sp.Symbol(k): (sp.nsimplify(v) if exact else v) for k, v in free.items()}
        out = {}
        for n in NAMES:
            e = sp.sympify(self.values[n]).subs(sub)
            out[n] = sp.simplify(e) if exact else float(e)
        return out


def solve_penalty_coefficients(c=c_sym, target=None, location: str = "interior",
                               free=FREE) -> PenaltyCoefficients:
    """Solve the 12 matching equations for the 16 weak-form coefficients.

    ``target`` is a 2x6 sympy matrix of block rows in terms of ``h``; by default
    the finite-difference blocks for ``location``. The unknowns not in ``free``
    are solved for; if the system is inconsistent a ``NoSolutionError`` reports
    the least-squares residual.
    """
    c = sp.nsimplify(c) if isinstance(c, (int, float)) else c
    T = bfd_target(c, location) if target is None else sp.Matrix(target)
    _, _, _, mass, _ = element()
    K = weak_form_matrix(_coef)
    eqs = [sp.expand((K[i, j] - (mass * T)[i, j]) * _h**2) for i in range(2) for j in range(6)]
    eqs = [sp.simplify(e) for e in eqs]
    if any(e.has(_h) for e in eqs):
        eqs = [sp.expand(e.subs(_h, 1)) for e in eqs]
    unknowns = [_coef[n] for n in NAMES]
    A, b = sp.linear_eq_to_matrix(eqs, unknowns)
    free_set = [_coef[n] for n in free]
    dep = [u for u in unknowns if u not in free_set]
    Ad = A[:, [unknowns.index(u) for u in dep]]
    Af = A[:, [unknowns.index(u) for u in free_set]]
    rhs = b - Af * sp.Matrix(free_set)
    aug = Ad.row_join(rhs)
    if Ad.rank() != aug.rank():
        # residual of the dependent subsystem at a sample point (c = 0.3, free = 1)
        at = {c_sym: 0.3, **{u: 1.0 for u in free_set}}
        An = np.array(Ad.subs(at), dtype=float)
        bn = np.array(rhs.subs(at), dtype=float).ravel()
        x, *_ = np.linalg.lstsq(An, bn, rcond=None)
        raise NoSolutionError(f"target blocks are not representable with free parameters {tuple(free)}",
                              residual=float(np.linalg.norm(An @ x - bn)))
    sol = sp.linsolve((Ad, rhs), dep)
    (vals,) = list(sol)
    values = {n: _coef[n] for n in free}
    for u, v in zip(dep, vals):
        if v.free_symbols & set(dep):
            raise SingularSystemError(f"{u} is not determined by the free parameters {free}")
        values[str(u)] = sp.simplify(v)
    return PenaltyCoefficients(values, location, c, tuple(free))


def reconstruct_blocks(coeffs: Mapping[str, float], h: float = 1.0) -> np.ndarray:
    """``Mass^{-1} K`` for numeric coefficients: the 2x6 rows ``[A | B | C]``."""
    _, _, _, mass, _ = element()
    K = weak_form_matrix({n: sp.Float(coeffs[n], 30) if not isinstance(coeffs[n], sp.Basic) else coeffs[n]
                          for n in NAMES}).subs(_h, h)
    return np.array((mass.subs(_h, h).inv() * K).evalf(), dtype=float)


@dataclass(frozen=True)
class InterfaceForm:
    """Quadratic form ``u^T M u`` of an interface energy.

    ``M`` is the actual matrix for the given ``h``; ``scaled = M / prefactor``
    is the bracket matrix without the ``1/(k h)`` factor.
    """

    location: str
    M: np.ndarray
    prefactor: float
    c: float

    @property
    def scaled(self) -> np.ndarray:
        return self.M / self.prefactor


def _energy_form(left_co, right_co, h=_h):
    """Symbolic matrix of Theta at the interface between two cells (4 unknowns)."""
    L, R, D, _, _ = element(h)
    z = sp.zeros(1, 2)
    um, up = R.row_join(z), z.row_join(L)
    dum, dup = D.row_join(z), z.row_join(D)
    kl, kr = _scaled(left_co, h), _scaled(right_co, h)

    def br(k, P):
        return k[P + "1"] * up + k[P + "2"] * um + k[P + "3"] * dum + k[P + "4"] * dup

    q = (br(kl, "C").T * um + dum.T * br(kl, "E") + br(kr, "D").T * up + dup.T * br(kr, "F"))
    q = (q + q.T) / 2 - h / 2 * (dum.T * dum + dup.T * dup)
    return q


def _wall_form(cell_co, h=_h):
    L, _, D, _, _ = element(h)
    k = _scaled(cell_co, h)
    q = (k["D1"] * L + k["D4"] * D).T * L + D.T * (k["F1"] * L + k["F4"] * D)
    return (q + q.T) / 2 - h / 2 * (D.T * D)


_free_syms = tuple(sp.Symbol(n) for n in FREE)


@functools.lru_cache(maxsize=None)
def _families():
    return (solve_penalty_coefficients(c_sym, location="interior").values,
            solve_penalty_coefficients(c_sym, location="left_boundary").values)


@functools.lru_cache(maxsize=None)
def _lambdified(which: str):
    inner, wall = _families()
    if which == "interior":
        M = _energy_form(inner, inner)
    elif which == "three_halves":
        M = _energy_form(wall, inner)
    elif which == "half":
        M = _wall_form(wall)
    else:
        raise ValueError(which)
    M = sp.simplify(M * 12 * _h)
    return sp.lambdify((c_sym, *_free_syms), M, "numpy"), M


def certificate_parameters(c: float) -> dict:
    """Free parameters used for the energy certificate.

    ``C2`` and ``C3 + E2`` are forced by requiring constants to carry no
    energy; ``E3 = (1 + c)/18`` keeps every form non-positive on ``-1 < c < 1``.
    """
    return {"C2": -7 / 3, "C3": (7 + 4 * c) / 9, "E2": 0.0, "E3": (1 + c) / 18}


PRINTED_INTERIOR_CHOICE = {
    "C2": lambda c: -7.0, "C3": lambda c: 25 / 6,
    "E2": lambda c: (8 * c + 89) / 18, "E3": lambda c: 21 * (c - 27) / 126,
}
PRINTED_BOUNDARY_CHOICE = {
    "C2": lambda c: -7.0, "C3": lambda c: 0.0, "E2": lambda c: 0.0, "E3": lambda c: 25 / 3 + c / 6,
}


def printed_choice(c: float, which: str = "interior") -> dict:
    table = PRINTED_INTERIOR_CHOICE if which == "interior" else PRINTED_BOUNDARY_CHOICE
    return {k: f(c) for k, f in table.items()}


def _form(which, location, c, free, h):
    free = certificate_parameters(c) if free is None else free
    fn, _ = _lambdified(which)
    M = np.array(fn(c, *(free[n] for n in FREE)), dtype=float) / (12 * h)
    return InterfaceForm(location, M, 1 / (12 * h), c)


def build_interior_theta(c: float, free: Mapping[str, float] | None = None, h: float = 1.0) -> InterfaceForm:
    """Theta at an interior interface over ``(u_{j-5/4}, u_{j-3/4}, u_{j-1/4}, u_{j+1/4})``."""
    return _form("interior", "interior", c, free, h)


def boundary_theta_half(c: float, free: Mapping[str, float] | None = None, h: float = 1.0) -> InterfaceForm:
    """Theta at the wall ``x = a`` over ``(u_{1-1/4}, u_{1+1/4})``."""
    return _form("half", "left_boundary", c, free, h)


def boundary_theta_three_halves(c: float, free: Mapping[str, float] | None = None,
                                h: float = 1.0) -> InterfaceForm:
    """Theta between the wall cell and the first interior cell.

    The wall cell uses the boundary family, the next cell the interior family,
    both instantiated with the same free parameters.
    """
    return _form("three_halves", "second_interface", c, free, h)


def printed_interior_theta(c: float, C2: float, C3: float, E2: float, E3: float,
                           h: float = 1.0) -> InterfaceForm:
    """Published interior matrix (upper triangle given, completed by symmetry)."""
    m = np.zeros((4, 4))
    m[0, 0] = 8 * c - 31
    m[0, 1] = (143 - 40 * c) / 3
    m[0, 2] = (40 * c - 3 * (5 * C2 + 4 * C3 + 20 * E2 + 16 * E3 - 7)) / 2
    m[0, 3] = (-88 * c + 135 * C2 + 108 * C3 + 180 * E2 + 144 * E3 + 167) / 6
    m[1, 1] = (56 * c - 277) / 3
    m[1, 2] = (-40 * c + 21 * C2 + 12 * C3 + 84 * E2 + 48 * E3 - 19) / 2
    m[1, 3] = (88 * c - 189 * C2 - 108 * C3 - 252 * E2 - 144 * E3 - 257) / 6
    m[2, 2] = (-80 * c + 9 * C2 + 36 * C3 + 36 * E2 + 144 * E3 + 10) / 3
    m[2, 3] = (80 * c - 27 * C2 - 72 * C3 - 72 * E2 - 144 * E3 + 74) / 3
    m[3, 3] = (-80 * c + 81 * C2 + 2 * (54 * C3 + 54 * E2 + 72 * E3 + 5)) / 3
    m = np.triu(m) + np.triu(m, 1).T
    return InterfaceForm("interior", m / (12 * h), 1 / (12 * h), c)


def printed_theta_half(c: float, C2: float, C3: float, E2: float, E3: float,
                       h: float = 1.0) -> InterfaceForm:
    """Published wall matrix, transcribed literally (``M12`` lists ``C3`` twice)."""
    m11 = -1 + 8 * c - 57 * C2 - 48 * C3 - 84 * E2 - 48 * E3
    m12 = (287 - 40 * c + 189 * C2 + 144 * C3 + 216 * C3 + 144 * E3) / 3
    m22 = (-319 + 56 * c - 171 * C2 - 144 * C3 - 180 * E2 - 144 * E3) / 3
    m = np.array([[m11, m12], [m12, m22]])
    return InterfaceForm("left_boundary", m / (12 * h), 1 / (12 * h), c)


def printed_theta_three_halves(c: float, h: float = 1.0) -> InterfaceForm:
    m = np.array([
        [-93 - 8 * c, 143 + 24 * c, -7 - 40 * c, -43 + 24 * c],
        [143 + 24 * c, -277 - 40 * c, 125 + 56 * c, 9 - 40 * c],
        [-7 - 40 * c, 125 + 56 * c, -373 - 40 * c, 3 * (85 + 8 * c)],
        [-43 + 24 * c, 9 - 40 * c, 3 * (85 + 8 * c), -221 - 8 * c],
    ])
    return InterfaceForm("second_interface", m / (36 * h), 1 / (36 * h), c)


@dataclass(frozen=True)
class StabilityVerdict:
    c: float
    eigenvalues: tuple
    non_positive: bool
    inertia: tuple
    location: str = ""


def ldl_inertia(M: np.ndarray, tol: float) -> tuple[int, int, int]:
    """Inertia ``(n_neg, n_zero, n_pos)`` from the congruent diagonal of a Bunch-Kaufman LDL^T."""
    import scipy.linalg as sla

    _, D, _ = sla.ldl(M)
    eig = np.linalg.eigvalsh(D)  # D is block diagonal with 1x1/2x2 blocks
    return (int(np.sum(eig < -tol)), int(np.sum(np.abs(eig) <= tol)), int(np.sum(eig > tol)))


def _threshold(M: np.ndarray) -> float:
    return 1e-10 * max(np.abs(M).sum(axis=1).max(), np.finfo(float).tiny)


def certify(form: InterfaceForm | np.ndarray, c: float | None = None) -> StabilityVerdict:
    M = form.M if isinstance(form, InterfaceForm) else np.asarray(form, dtype=float)
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise BFDError("interface form is not symmetric")
    cval = form.c if isinstance(form, InterfaceForm) and c is None else c
    ev = np.linalg.eigvalsh((M + M.T) / 2)
    tol = _threshold(M)
    inertia = (int(np.sum(ev < -tol)), int(np.sum(np.abs(ev) <= tol)), int(np.sum(ev > tol)))
    loc = form.location if isinstance(form, InterfaceForm) else ""
    return StabilityVerdict(cval, tuple(float(e) for e in ev), inertia[2] == 0, inertia, loc)


def congruence_diagonal(M: np.ndarray) -> np.ndarray:
    """Pivots of an unpivoted ``LDL^T`` (Gaussian elimination without row swaps)."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    d = np.empty(n)
    for k in range(n):
        d[k] = A[k, k]
        if d[k] == 0:
            raise SingularSystemError("zero pivot in congruence transform")
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:]) / d[k]
    return d


@dataclass(frozen=True)
class CertificationReport:
    """All checks of one ``c``: interior singular, truncated form definite, boundary forms semidefinite."""

    c: float
    interior: StabilityVerdict
    interior_det: float
    truncated: StabilityVerdict
    half: StabilityVerdict
    three_halves: StabilityVerdict

    @property
    def singular(self) -> bool:
        return abs(self.interior_det) <= 1e-10

    @property
    def passed(self) -> bool:
        return (self.singular and self.interior.non_positive
                and self.truncated.inertia[0] == len(self.truncated.eigenvalues)
                and self.half.non_positive and self.three_halves.non_positive)


def certify_c(c: float, free: Mapping[str, float] | None = None) -> CertificationReport:
    """Certify every interface form for parameter ``c`` (``h = 1``, forms in bracket scale)."""
    interior = build_interior_theta(c, free)
    Ms = interior.scaled
    det = float(np.linalg.det(Ms)) / float(np.prod(np.abs(np.diag(Ms))))
    return CertificationReport(
        c, certify(interior), det,
        certify(Ms[:3, :3], c),
        certify(boundary_theta_half(c, free)),
        certify(boundary_theta_three_halves(c, free)),
    )


def certify_2d(c: float, n: int = 6, reports: CertificationReport | None = None) -> StabilityVerdict:
    """2D verdict: the Kronecker sum of certified 1D operators is certified.

    The 1D certificate must pass; the assembled 2D periodic operator on an
    ``n x n`` block grid is then checked to have no eigenvalue with positive real part.
    """
    rep = certify_c(c) if reports is None else reports
    grid = build_grid_2d(n, n, 0.0, 2 * np.pi, 0.0, 2 * np.pi)
    ev = np.linalg.eigvals(assemble_2d(c, grid, "periodic").dense())
    ok = bool(rep.passed and ev.real.max() <= 1e-10)
    return StabilityVerdict(c, tuple(sorted(ev.real.tolist())), ok,
                            (int(np.sum(ev.real < -1e-10)), int(np.sum(np.abs(ev.real) <= 1e-10)),
                             int(np.sum(ev.real > 1e-10))), "2d")


def global_energy_matrix(c: float, N: int = 16, h: float = 1.0) -> np.ndarray:
    """Symmetric part of ``Mass Q`` for the periodic operator (the total energy rate)."""
    Q = assemble_periodic(c, build_grid_1d(N, 0.0, N * h)).dense()
    mass = np.kron(np.eye(N), h / 12 * np.array([[7.0, -1.0], [-1.0, 7.0]]))
    MQ = mass @ Q
    return (MQ + MQ.T) / 2
