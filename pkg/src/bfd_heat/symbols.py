"""Fourier analysis of the periodic block operator.

On a grid of ``N`` two-point blocks the modes ``e^{i w x}`` and ``e^{i nu x}``
with ``nu = w - N`` (``w > 0``) or ``nu = w + N`` (``w < 0``) are coupled: on
the nodes they differ only by the factors ``+-i``. Each pair spans an invariant
subspace of the operator, on which it acts as a 2x2 matrix with eigenvalues
``qhat1`` (approximating ``-w^2``) and ``qhat2`` (strongly damped, about
``32(c-2)/(3h^2)``). Mode numbers refer to the domain ``[0, L]`` scaled to
``[0, 2 pi]``; the physical wavenumber is ``2 pi w / L``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidGridError
from .grid import BlockGrid1D, build_grid_1d
from .operator import OPTIMAL_C, assemble_periodic, interior_blocks

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class FrequencyPair:
    omega: int
    nu: int
    N: int

    @property
    def sign(self) -> int:
        return -1 if self.omega < 0 else 1


def frequency_pair(omega: int, N: int) -> FrequencyPair:
    if abs(omega) > N / 2:
        raise InvalidGridError(f"|omega| must not exceed N/2, got omega={omega}, N={N}")
    nu = omega + N if omega < 0 else omega - N
    return FrequencyPair(int(omega), int(nu), int(N))


def frequencies(N: int) -> range:
    """One representative per invariant subspace: ``-N/2 < omega <= N/2``."""
    return range(-((N - 1) // 2), N // 2 + 1)


@dataclass(frozen=True)
class SymbolSet:
    omega: int
    N: int
    c: float
    h: float
    mu1: complex
    mu2: complex
    sigma1: complex
    sigma2: complex
    qhat1: complex
    qhat2: complex
    alpha1: complex
    beta1: complex
    alpha2: complex
    beta2: complex
    r1: complex
    r2: complex
    Omega: float = math.nan
    Delta: float = math.nan
    delta_tilde: float = math.nan

    @property
    def theta(self) -> float:
        return TWO_PI * self.omega / self.N

    def residuals(self) -> np.ndarray:
        """Residuals of both node equations for k=1,2, in the alpha/beta form.

        For ``omega >= 0`` and ``alpha != 0`` these are ``alpha`` times
        ``mu1 - sigma1 r - Q(1 - r)`` and ``mu2 + sigma2 r - Q(1 + r)``.
        """
        s = -1 if self.omega < 0 else 1
        out = []
        for q, a, b in ((self.qhat1, self.alpha1, self.beta1), (self.qhat2, self.alpha2, self.beta2)):
            out.append(a * self.mu1 - 1j * s * b * self.sigma1 - q * (a - 1j * s * b))
            out.append(a * self.mu2 + 1j * s * b * self.sigma2 - q * (a + 1j * s * b))
        return np.array(out)


def frequency_block(theta: float, c: float, h: float) -> np.ndarray:
    """Bloch matrix ``A e^{-i theta} + B + C e^{i theta}``."""
    blk = interior_blocks(c, h)
    return blk.A * np.exp(-1j * theta) + blk.B + blk.C * np.exp(1j * theta)


def closed_form_mu_sigma(theta: float, c: float, h: float) -> tuple[complex, ...]:
    """Action of the two stencils on the low and high mode (per-node multipliers)."""
    cs = math.cos
    s4, c4 = math.sin(theta / 4), math.cos(theta / 4)
    common = (6 * c - 2) * cs(theta) + 10 * c - 30
    lo = (32 - 15 * c) * cs(theta / 2) - c * cs(1.5 * theta) + common
    hi = (15 * c - 32) * cs(theta / 2) + c * cs(1.5 * theta) + common
    k = 1.0 / (3 * h * h)
    mu1 = (lo - 32j * c * s4**5 * c4) * k
    mu2 = (lo + 32j * c * s4**5 * c4) * k
    sigma1 = (hi + 32j * c * s4 * c4**5) * k
    sigma2 = (hi - 32j * c * s4 * c4**5) * k
    return mu1, mu2, sigma1, sigma2


def closed_form_qhat(theta: float, c: float, h: float) -> tuple[float, float, float]:
    """``(qhat1, qhat2, Delta)`` from the closed-form discriminant."""
    inner = (4 * (3 * c - 8) * (5 * c - 8) * math.cos(theta) + c * (9 * c - 16) * math.cos(2 * theta)
             + c * (59 * c - 240) + 256)
    delta = math.sqrt(2.0) * math.sqrt(max(inner, 0.0))
    base = (6 * c - 2) * math.cos(theta) + 10 * c - 30
    return (base + delta) / (3 * h * h), (base - delta) / (3 * h * h), delta


def closed_form_r(theta: float, c: float) -> tuple[float, float, float]:
    """``(Omega, Delta_tilde)`` with ``r1 = (Omega + Dt) i``, ``r2 = (Omega - Dt) i``.

    ``Dt`` is ``Delta`` divided by the same factor ``32 c sin(theta/4) cos^5(theta/4)``
    as ``Omega``. Undefined for ``c = 0`` or ``theta = 0``.
    """
    den = 32 * c * math.sin(theta / 4) * math.cos(theta / 4) ** 5
    if den == 0:
        raise ZeroDivisionError("closed-form r needs c != 0 and theta != 0")
    omega_ = 2 * math.cos(theta / 2) * (-16 + 7 * c + c * math.cos(theta)) / den
    return omega_, closed_form_qhat(theta, c, 1.0)[2] / den


def _normalize(w0: complex, w1: complex, k: int) -> tuple[complex, complex]:
    alpha = (w0 + w1) / 2
    beta = (w1 - w0) / 2j
    nrm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    alpha, beta = alpha / nrm, beta / nrm
    if k == 1 and abs(alpha) > 1e-14:
        ph = abs(alpha) / alpha
    elif abs(beta) > 1e-14:
        ph = -1j * abs(beta) / beta
    else:
        ph = abs(alpha) / alpha
    return alpha * ph, beta * ph


def symbols(omega: int, N: int, c: float, domain_length: float = TWO_PI) -> SymbolSet:
    """Symbols, eigenvalues and eigenvector coefficients of mode ``omega``.

    Eigenvalues and eigenvectors come from the 2x2 Bloch eigenproblem; the
    closed forms of ``mu``/``sigma`` are used directly (they are exact) and
    ``Omega``, ``Delta``, ``delta_tilde`` are reported where defined.
    """
    pair = frequency_pair(omega, N)
    h = domain_length / N
    if pair.omega < 0:
        pos = symbols(-pair.omega, N, c, domain_length)
        conj = np.conj
        a1, b1, a2, b2 = conj(pos.alpha1), conj(pos.beta1), conj(pos.alpha2), conj(pos.beta2)
        return SymbolSet(
            pair.omega, N, c, h, conj(pos.mu1), conj(pos.mu2), conj(pos.sigma1), conj(pos.sigma2),
            pos.qhat1, pos.qhat2, a1, b1, a2, b2, _ratio(a1, b1), _ratio(a2, b2),
            pos.Omega, pos.Delta, pos.delta_tilde,
        )
    theta = TWO_PI * pair.omega / N
    mu1, mu2, sigma1, sigma2 = closed_form_mu_sigma(theta, c, h)
    vals, vecs = np.linalg.eig(frequency_block(theta, c, h))
    order = np.argsort(-vals.real)
    vals, vecs = vals[order], vecs[:, order]
    coeffs = []
    for k in (1, 2):
        v = vecs[:, k - 1]
        coeffs.append(_normalize(v[0] * np.exp(1j * theta / 4), v[1] * np.exp(-1j * theta / 4), k))
    (a1, b1), (a2, b2) = coeffs
    delta = closed_form_qhat(theta, c, h)[2]
    Om = dt = math.nan
    if c != 0 and pair.omega != 0:
        Om, dt = closed_form_r(theta, c)
    q1, q2 = (complex(v) for v in vals)
    if pair.omega == 0:
        q1 = 0j
    return SymbolSet(pair.omega, N, c, h, mu1, mu2, sigma1, sigma2, q1, q2,
                     a1, b1, a2, b2, _ratio(a1, b1), _ratio(a2, b2), Om, delta, dt)


def _ratio(alpha: complex, beta: complex) -> complex:
    if abs(alpha) < 1e-300:
        return complex(0.0, math.inf)
    return 1j * beta / alpha


def spectrum_from_symbols(N: int, c: float, domain_length: float = TWO_PI) -> np.ndarray:
    out = []
    for w in frequencies(N):
        s = symbols(w, N, c, domain_length)
        out += [s.qhat1, s.qhat2]
    return np.array(out)


def _modes(grid: BlockGrid1D, pair: FrequencyPair) -> tuple[np.ndarray, np.ndarray]:
    x = grid.nodes - grid.a
    k = TWO_PI / grid.length
    return np.exp(1j * k * pair.omega * x), np.exp(1j * k * pair.nu * x)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1.0)


def verify_against_operator(params, grid: BlockGrid1D) -> float:
    """Largest relative gap between the symbols and the operator on each subspace.

    For every ``omega`` the periodic matrix is compressed onto
    ``span{e^{i w x}, e^{i nu x}}`` and its two eigenvalues are compared with
    ``{qhat1, qhat2}`` (Hausdorff distance, relative to ``max(|qhat|, 1)``).
    """
    c = params.c if hasattr(params, "c") else float(params)
    Q = assemble_periodic(c, grid).matrix
    worst = 0.0
    for w in frequencies(grid.N):
        pair = frequency_pair(w, grid.N)
        E = np.column_stack(_modes(grid, pair))
        sub = E.conj().T @ (Q @ E) / grid.size
        ev = np.linalg.eigvals(sub)
        s = symbols(w, grid.N, c, grid.length)
        q = [s.qhat1, s.qhat2]
        d1 = max(min(_rel(e, qq) for qq in q) for e in ev)
        d2 = max(min(_rel(e, qq) for e in ev) for qq in q)
        worst = max(worst, d1, d2)
    return worst


def eigenvector_residual(params, grid: BlockGrid1D) -> float:
    """``max ||Q psi_k - qhat_k psi_k||_inf / ||Q||_inf`` over all modes, ``k = 1, 2``."""
    c = params.c if hasattr(params, "c") else float(params)
    Q = assemble_periodic(c, grid).matrix
    qnorm = abs(Q).sum(axis=1).max()
    worst = 0.0
    for w in frequencies(grid.N):
        pair = frequency_pair(w, grid.N)
        lo, hi = _modes(grid, pair)
        s = symbols(w, grid.N, c, grid.length)
        for q, a, b in ((s.qhat1, s.alpha1, s.beta1), (s.qhat2, s.alpha2, s.beta2)):
            psi = (a * lo + b * hi) / math.sqrt(TWO_PI)
            worst = max(worst, np.abs(Q @ psi - q * psi).max() / qnorm)
    return worst


def spectrum_mismatch(params, grid: BlockGrid1D) -> float:
    """Relative gap between the dense eigenvalues of the operator and the symbol multiset."""
    c = params.c if hasattr(params, "c") else float(params)
    dense = np.sort(np.linalg.eigvals(assemble_periodic(c, grid).dense()).real)
    symb = np.sort(spectrum_from_symbols(grid.N, c, grid.length).real)
    return float(np.max(np.abs(dense - symb) / np.maximum(np.abs(symb), 1.0)))


@dataclass(frozen=True)
class OrderPrediction:
    c: float
    generic_order: int
    h4_coefficient: float


def order_prediction(c: float, tol: float = 1e-12) -> OrderPrediction:
    """Global order from the low-mode symbol: ``qhat1 h^2 = -theta^2 - k theta^6``."""
    coef = (4 + 13 * c) / (2880 * (c - 2))
    return OrderPrediction(c, 5 if abs(c - OPTIMAL_C) < tol else 4, coef)


def predict_error_evolution(omega: int, c: float, h: float, t: float) -> tuple[complex, complex]:
    """Asymptotic amplitudes of the low and high mode at time ``t``.

    Initial data ``e^{i w x}`` (unit amplitude). The low-mode factor carries the
    ``w^6 h^4`` eigenvalue error; the high-mode amplitude is the component of the
    initial data along the second eigenvector that is not damped, and decays with
    the low mode.
    """
    decay = math.exp(-omega * omega * t)
    low = decay * (1 - (4 + 13 * c) * omega**6 * t * h**4 / (2880 * (c - 2)))
    high = -c * (omega * h) ** 5 / (1024 * (c - 2)) * decay
    return complex(low), complex(high)


def printed_error_evolution(omega: int, c: float, h: float, t: float) -> tuple[complex, complex]:
    """Literal transcription of the published amplitude formulas (1024 denominator, factor i, no decay)."""
    low = math.exp(-omega * omega * t) * (1 - (4 + 13 * c) * omega**6 * t * h**4 / (1024 * (c - 2)))
    high = 1j * c * (omega * h) ** 5 / (1024 * (c - 2))
    return complex(low), complex(high)


def exact_error_evolution(omega: int, N: int, c: float, t: float,
                          domain_length: float = TWO_PI) -> tuple[complex, complex]:
    """Matrix-exponential oracle: coefficients of ``exp(tQ) e^{i w x}`` on the two modes."""
    grid = build_grid_1d(N, 0.0, domain_length)
    pair = frequency_pair(omega, N)
    lo, hi = _modes(grid, pair)
    v = sla.expm(t * assemble_periodic(c, grid).dense()) @ lo
    return complex(np.vdot(lo, v) / grid.size), complex(np.vdot(hi, v) / grid.size)
