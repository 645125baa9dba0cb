"""Time-domain LPTV capacity of the relay, used to validate the frequency model.

With ``rho = (N_ch - 1)/N_ch`` and sampling at ``1/B`` the relay is a
discrete-time system whose impulse response ``p_n(m)`` is ``N_ch``-periodic in
``n``. Stacking ``M`` input samples gives a memoryless MIMO channel

    r = sqrt(g) P x + w,   P of size (M - l_p) x M,

and the rate is ``log2 det(I + g snr P C_x P^H) / (M - l_p)``. Units are
normalized so that ``P_x = P_y = 1``; then the coupling gain equals LG and
``1/(B N0) = snr``.

Everything here is O(M^3) and meant as a test oracle, not a sweep workhorse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import linalg

from pdrelay.agc import solve_agc
from pdrelay.freqchannel import logdet2_hpd
from pdrelay.rates import Path, RateResult, Receiver
from pdrelay.scenario import DomainError, Scenario

DEFAULT_KAPPA = 300
DEFAULT_ELL_FACTOR = 5
AGC_REL_TOL = 1e-8
AGC_MAX_ITER = 500


class TdAgcConvergenceError(RuntimeError):
    def __init__(self, message: str, last_g: float, residual: float):
        super().__init__(message)
        self.last_g = last_g
        self.residual = residual


def echo_terms(n_ch: int, ell: int, theta0: float = 0.0) -> np.ndarray:
    """Per-echo responses ``l_k(m) exp(-j 2 pi k m / N_ch)`` for ``m = 0..l_p``.

    Row ``k - 1`` holds echo ``k = 1..K+1``:
    ``exp(-j k theta0) exp(j pi w (m - k ell)) w sinc(w (m - k ell))`` with
    ``w = 1 - k/N_ch`` the bandwidth fraction that survives ``k`` passes
    through the relay filter.
    """
    if n_ch < 2:
        raise DomainError(f"N_ch must be at least 2, got {n_ch}")
    if ell < 1:
        raise DomainError(f"ell must be at least 1, got {ell}")
    n_terms = n_ch - 1
    l_p = 2 * n_terms * ell
    m = np.arange(l_p + 1)
    out = np.empty((n_terms, l_p + 1), dtype=complex)
    for k in range(1, n_terms + 1):
        w = 1.0 - k / n_ch
        arg = w * (m - k * ell)
        out[k - 1] = np.exp(-1j * k * theta0) * np.exp(1j * np.pi * arg) * w * np.sinc(arg)
    return out


def build_impulse_response(n_ch: int, ell: int, alpha_g_seed: float, theta0: float = 0.0) -> np.ndarray:
    """Sampled LPTV response ``p_n(m)``, shape ``(N_ch, l_p + 1)``.

    ``p_n(m) = sum_k alpha_g^{(k-1)/2} [l_k(m) e^{-j 2 pi k m/N_ch}] e^{j 2 pi k n/N_ch}``.
    Samples outside ``0 <= m <= l_p`` are dropped.
    """
    terms = echo_terms(n_ch, ell, theta0)
    k = np.arange(1, n_ch)
    weights = np.sqrt(alpha_g_seed) ** (k - 1)
    n = np.arange(n_ch)
    rot = np.exp(2j * np.pi * np.outer(n, k) / n_ch)
    return (rot * weights) @ terms


def input_covariance(n_ch: int, size: int) -> np.ndarray:
    """Hermitian Toeplitz covariance of a flat-spectrum input on ``[0, B_u]``.

    ``C_x(m) = sinc(w m) exp(j pi w m)`` with ``w = 1 - 1/N_ch``.
    """
    w = 1.0 - 1.0 / n_ch
    m = np.arange(size)
    col = np.sinc(w * m) * np.exp(1j * np.pi * w * m)
    return linalg.toeplitz(col)


def channel_matrix(p_resp: np.ndarray, m_block: int) -> np.ndarray:
    """Banded ``(M - l_p) x M`` matrix with ``P[i, i + t] = p_{i + l_p}(l_p - t)``."""
    n_ch, width = p_resp.shape
    l_p = width - 1
    rows = m_block - l_p
    if rows <= 0:
        raise DomainError(f"block size M={m_block} must exceed l_p={l_p}")
    out = np.zeros((rows, m_block), dtype=complex)
    for i in range(rows):
        out[i, i:i + width] = p_resp[(i + l_p) % n_ch, ::-1]
    return out


def default_block_size(n_ch: int, l_p: int, kappa: int = DEFAULT_KAPPA) -> int:
    """``M = (ceil((l_p + 1)/N_ch) + kappa) N_ch``."""
    return (-(-(l_p + 1) // n_ch) + kappa) * n_ch


@dataclass
class TdModel:
    """Time-domain model for one ``(N_ch, LG)`` pair.

    ``g`` is the relay power gain; after :func:`solve_td_agc` it makes the
    relay output power equal to 1. ``p_matrix`` and ``c_x`` are built lazily
    from the current gain.
    """

    n_ch: int
    lg: float
    ell: int
    m_block: int
    theta0: float = 0.0
    g: float = 1.0
    agc_iterations: int = 0
    _c_x: np.ndarray | None = field(default=None, repr=False)

    @property
    def ell_p(self) -> int:
        return 2 * (self.n_ch - 1) * self.ell

    @property
    def rho(self) -> Fraction:
        return Fraction(self.n_ch - 1, self.n_ch)

    @property
    def c_x(self) -> np.ndarray:
        if self._c_x is None:
            self._c_x = input_covariance(self.n_ch, self.m_block)
        return self._c_x

    def impulse_response(self, g: float | None = None) -> np.ndarray:
        g = self.g if g is None else g
        return build_impulse_response(self.n_ch, self.ell, g * self.lg, self.theta0)

    @property
    def p_matrix(self) -> np.ndarray:
        return channel_matrix(self.impulse_response(), self.m_block)

    def output_power(self, g: float | None = None) -> float:
        """``g trace(P C_x P^H)/(M - l_p)`` at gain ``g``.

        Each row of ``P`` is a length ``l_p + 1`` window and ``C_x`` is
        Toeplitz, so every row sees the same covariance block; only the
        ``N_ch`` distinct rows are evaluated.
        """
        g = self.g if g is None else g
        p_resp = self.impulse_response(g)
        l_p = self.ell_p
        block = input_covariance(self.n_ch, l_p + 1)
        rev = p_resp[:, ::-1]
        per_phase = np.real(np.einsum("ni,ij,nj->n", rev, block, rev.conj()))
        rows = self.m_block - l_p
        phase_of_row = (np.arange(rows) + l_p) % self.n_ch
        return g * float(np.sum(per_phase[phase_of_row])) / rows


def build_td_model(
    n_ch: int,
    lg: float,
    ell: int | None = None,
    kappa: int = DEFAULT_KAPPA,
    ell_factor: int = DEFAULT_ELL_FACTOR,
    theta0: float = 0.0,
) -> TdModel:
    """Model with the default geometry ``ell = ell_factor*N_ch`` and ``M`` from ``kappa``."""
    if lg < 0:
        raise DomainError(f"loop gain must be non-negative, got {lg}")
    if ell is None:
        ell = ell_factor * n_ch
    l_p = 2 * (n_ch - 1) * ell
    return TdModel(n_ch, lg, ell, default_block_size(n_ch, l_p, kappa), theta0)


def solve_td_agc(model: TdModel, g0: float | None = None) -> float:
    """Damped fixed point ``g <- (g + 1/trace-power(g))/2`` until the relative step is below 1e-8.

    The starting point is the frequency-domain solution ``alpha_g/alpha``.
    Updates ``model.g`` in place and returns it.

    Raises:
        TdAgcConvergenceError: after 500 iterations without convergence.
    """
    if g0 is None:
        if model.lg == 0:
            g0 = 1.0
        else:
            g0 = solve_agc(model.rho, model.lg).alpha_g / model.lg
    g = g0
    for it in range(1, AGC_MAX_ITER + 1):
        unit_power = model.output_power(g) / g
        target = 1.0 / unit_power
        if model.lg == 0:
            # nothing depends on g: the map is exact in one step
            g_new = target
        else:
            g_new = 0.5 * (g + target)
        if abs(g_new - g) <= AGC_REL_TOL * abs(g_new):
            model.g = g_new
            model.agc_iterations = it
            return g_new
        g = g_new
    residual = model.output_power(g) - 1.0
    raise TdAgcConvergenceError(f"TD AGC did not converge in {AGC_MAX_ITER} iterations", g, residual)


def td_capacity(model: TdModel, snr: float) -> RateResult:
    """``log2 det(I + g snr P C_x P^H) / (M - l_p)`` for the resolved model."""
    p = model.p_matrix
    cov = p @ model.c_x @ p.conj().T
    cov = 0.5 * (cov + cov.conj().T)
    a = np.eye(cov.shape[0], dtype=complex) + (model.g * snr) * cov
    se = logdet2_hpd(a) / cov.shape[0]
    sc = Scenario(model.rho, snr, model.lg)
    return RateResult(Receiver.ML, se, Path.TIME_DOMAIN, sc, model.g * model.lg)


def td_spectral_efficiency(n_ch: int, snr: float, lg: float, **kwargs) -> RateResult:
    """Build, resolve AGC and evaluate in one call."""
    model = build_td_model(n_ch, lg, **kwargs)
    solve_td_agc(model)
    return td_capacity(model, snr)
