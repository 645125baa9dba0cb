"""Spectral efficiency (bps/Hz) of the relay link per receiver strategy.

Every public function takes the operating point ``(rho, snr, lg)`` and runs
the AGC solver itself, so ``alpha_g`` and ``mu`` are always consistent.
Full duplex (rho = 1) is served by closed forms; the matrix-based paths
reject it.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from pdrelay.agc import solve_agc
from pdrelay.freqchannel import build_t, inverse_diagonal_hpd, logdet_capacity
from pdrelay.scenario import DEFAULT_N, HALF, ONE, DomainError, RhoLike, Scenario, delta_fraction, echo_count, parse_rho

LN2 = math.log(2.0)
# alpha_g closer than this to 1 switches the echo-power sum to explicit form
GEOMETRIC_SWITCH = 1e-8


class Receiver(str, enum.Enum):
    ML = "ml"
    DIRECT = "direct"
    ZF = "zf"
    LMMSE = "lmmse"
    SIC = "sic"
    NOSI = "nosi"
    HD = "hd"
    FD_ML = "fd-ml"
    FD_DIRECT = "fd-direct"
    FD_DIRECT_PC = "fd-direct-pc"


class Path(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    RECURSION = "recursion"
    DENSE_MATRIX = "dense_matrix"
    TIME_DOMAIN = "time_domain"


@dataclass(frozen=True)
class RateResult:
    receiver: Receiver
    se: float
    path: Path
    scenario: Scenario
    alpha_g: float = math.nan
    mu: float = math.nan
    power_fraction: float | None = None

    def __float__(self) -> float:
        return self.se


def log2_1p(x: float) -> float:
    return math.log1p(x) / LN2


def _scenario(rho, snr, lg, theta0=0.0, phi0=1.0, n=DEFAULT_N) -> Scenario:
    return Scenario(parse_rho(rho), float(snr), float(lg), theta0, phi0, n)


def _require_partial(rho: Fraction, what: str) -> None:
    if rho == ONE:
        raise DomainError(f"{what} needs rho < 1; use the full-duplex closed forms")


def ml_log2_q(alpha_g: float, mu: float, k_max: int) -> list[float]:
    """``log2 q_k(-mu)`` for ``k = 0..k_max``.

    ``q_k(-mu) = (1 + alpha_g + mu) q_{k-1} - alpha_g q_{k-2}`` with ``q_0 = 1`` and
    ``q_1 = 1 + mu``. The ratio ``r_k = q_k/q_{k-1}`` obeys
    ``r_k = (1 + alpha_g + mu) - alpha_g / r_{k-1}`` and stays bounded, so the
    logs are accumulated from ratios and never overflow.
    """
    out = [0.0]
    if k_max == 0:
        return out
    ratio = 1.0 + mu
    acc = log2_1p(mu)
    out.append(acc)
    a = 1.0 + alpha_g + mu
    for _ in range(2, k_max + 1):
        ratio = a - alpha_g / ratio
        acc += math.log2(ratio)
        out.append(acc)
    return out


def se_ml_recursion(rho: RhoLike, snr: float, lg: float) -> RateResult:
    """Optimal (ML) decoding through the characteristic-polynomial recursion.

    ``(1 - rho) [delta log2 q_K(-mu) + (1 - delta) log2 q_{K+1}(-mu)]``.
    """
    rho = parse_rho(rho)
    _require_partial(rho, "se_ml_recursion")
    sol = solve_agc(rho, lg, snr)
    k = echo_count(rho)
    delta = delta_fraction(rho)
    logs = ml_log2_q(sol.alpha_g, sol.mu, k + 1)
    # exponents ((K+1)P - N)/L and (N - KP)/L in exact arithmetic
    w_k = float((1 - rho) * delta)
    w_k1 = float((1 - rho) * (1 - delta))
    se = w_k * logs[k] + w_k1 * logs[k + 1]
    return RateResult(Receiver.ML, se, Path.RECURSION, _scenario(rho, snr, lg), sol.alpha_g, sol.mu)


def se_ml_dense(
    rho: RhoLike, snr: float, lg: float, n: int = DEFAULT_N, theta0: float = 0.0, phi0: float = 1.0
) -> RateResult:
    """``(1/L) log2 det(I + mu T T^H)`` from the explicit matrix."""
    sc = _scenario(rho, snr, lg, theta0, phi0, n)
    _require_partial(sc.rho, "se_ml_dense")
    sol = solve_agc(sc.rho, lg, snr)
    g = sc.grid
    t = build_t(g.n, g.p_off, sol.alpha_g, theta0, phi0)
    se = logdet_capacity(t, sol.mu) / g.l_total
    return RateResult(Receiver.ML, se, Path.DENSE_MATRIX, sc, sol.alpha_g, sol.mu)


def echo_powers(alpha_g: float, count: int) -> list[float]:
    """``a_k = alpha_g (1 - alpha_g^{k-1}) / (1 - alpha_g)`` for ``k = 1..count``.

    This is the diagonal of ``(T - I)(T - I)^H`` on the k-th group of ``P``
    subcarriers, i.e. the power of the ``k - 1`` echoes landing there.
    """
    if abs(1.0 - alpha_g) < GEOMETRIC_SWITCH:
        out, acc = [], 0.0
        for _ in range(count):
            out.append(acc)
            acc = alpha_g * (1.0 + acc)
        return out
    return [alpha_g * (1.0 - alpha_g ** (k - 1)) / (1.0 - alpha_g) for k in range(1, count + 1)]


def se_direct(rho: RhoLike, snr: float, lg: float) -> RateResult:
    """Per-subcarrier decoding with the echoes treated as Gaussian noise."""
    rho = parse_rho(rho)
    if rho == ONE:
        fd = se_fd_direct(snr, lg)
        return RateResult(Receiver.DIRECT, fd.se, Path.CLOSED_FORM, fd.scenario, fd.alpha_g, fd.mu)
    sol = solve_agc(rho, lg, snr)
    k = echo_count(rho)
    delta = float(delta_fraction(rho))
    mu = sol.mu
    a = echo_powers(sol.alpha_g, k + 1)
    terms = [log2_1p(mu / (1.0 + mu * ak)) for ak in a]
    se = float(1 - rho) * (math.fsum(terms[:k]) + (1.0 - delta) * terms[k])
    return RateResult(Receiver.DIRECT, se, Path.CLOSED_FORM, _scenario(rho, snr, lg), sol.alpha_g, mu)


def se_zf(rho: RhoLike, snr: float, lg: float) -> RateResult:
    """Zero-forcing with the sparse channel inverse, then per-subcarrier decoding.

    ``rho log2(1+mu) + (2 rho - 1) log2((1+x+mu)/(1+x+(1+x)mu))`` with ``x = alpha_g``;
    the second term is a non-positive penalty.
    """
    rho = parse_rho(rho)
    sol = solve_agc(rho, lg, snr)
    x, mu = sol.alpha_g, sol.mu
    r = float(rho)
    # log2((1+x+mu)/((1+x)(1+mu))) = log2(1 - x mu/((1+x)(1+mu)))
    penalty = log2_1p(-x * mu / ((1.0 + x) * (1.0 + mu)))
    se = r * log2_1p(mu) + (2.0 * r - 1.0) * penalty
    return RateResult(Receiver.ZF, se, Path.CLOSED_FORM, _scenario(rho, snr, lg), x, mu)


def zf_penalty(rho: RhoLike, snr: float, lg: float) -> float:
    res = se_zf(rho, snr, lg)
    return res.se - float(parse_rho(rho)) * log2_1p(res.mu)


def se_lmmse(
    rho: RhoLike, snr: float, lg: float, n: int = DEFAULT_N, theta0: float = 0.0, phi0: float = 1.0
) -> RateResult:
    """Linear MMSE receiver; no closed form, evaluated on an ``N``-subcarrier grid.

    The per-subcarrier SINR is ``q_n/(1-q_n)`` with
    ``q_n = 1 - [(I + mu T^H T)^{-1}]_{nn}``.
    """
    sc = _scenario(rho, snr, lg, theta0, phi0, n)
    _require_partial(sc.rho, "se_lmmse")
    sol = solve_agc(sc.rho, lg, snr)
    g = sc.grid
    t = build_t(g.n, g.p_off, sol.alpha_g, theta0, phi0)
    a = np.eye(g.n, dtype=complex) + sol.mu * (t.conj().T @ t)
    mmse = inverse_diagonal_hpd(a)
    q = 1.0 - mmse
    bad = q >= 1.0
    if np.any(bad):
        warnings.warn(
            f"LMMSE: {int(bad.sum())} subcarriers with q_n >= 1 clamped (mu={sol.mu:g} ill-conditioned)",
            RuntimeWarning,
            stacklevel=2,
        )
        q = np.where(bad, 1.0 - np.finfo(float).eps, q)
    sinr = q / (1.0 - q)
    se = float(sc.rho) / g.n * float(np.sum(np.log1p(sinr)) / LN2)
    return RateResult(Receiver.LMMSE, se, Path.DENSE_MATRIX, sc, sol.alpha_g, sol.mu)


def se_sic(rho: RhoLike, snr: float, lg: float) -> RateResult:
    """Successive cancellation down the triangular channel: ``rho log2(1 + mu)``."""
    rho = parse_rho(rho)
    sol = solve_agc(rho, lg, snr)
    se = float(rho) * log2_1p(sol.mu)
    return RateResult(Receiver.SIC, se, Path.CLOSED_FORM, _scenario(rho, snr, lg), sol.alpha_g, sol.mu)


def se_nosi(rho: RhoLike, snr: float) -> RateResult:
    """Upper bound without coupling: ``rho log2(1 + snr/rho)``."""
    rho = parse_rho(rho)
    r = float(rho)
    return RateResult(Receiver.NOSI, r * log2_1p(snr / r), Path.CLOSED_FORM, _scenario(rho, snr, 0.0), 0.0, snr / r)


def se_hd(snr: float) -> RateResult:
    """Half duplex, ``0.5 log2(1 + 2 snr)``; no self-interference by construction."""
    return RateResult(Receiver.HD, 0.5 * log2_1p(2.0 * snr), Path.CLOSED_FORM, _scenario(HALF, snr, 0.0), 0.0, 2.0 * snr)


def _fd_ml_excess(snr: float, lg: float) -> float:
    # (1 + snr + 2LG + R)/(2(1+LG)) - 1 with R = sqrt((1+snr)^2 + 4 LG snr),
    # rearranged so that small snr keeps full relative precision
    root = math.sqrt((1.0 + snr) ** 2 + 4.0 * lg * snr)
    return (snr + 2.0 * lg * snr / (root + 1.0 + snr)) / (1.0 + lg)


def se_fd_ml(snr: float, lg: float) -> RateResult:
    """Full-duplex ML limit as rho -> 1.

    ``log2((1 + snr + 2LG + sqrt((1+snr)^2 + 4 LG snr)) / (2(1 + LG)))``
    """
    if lg < 0:
        raise DomainError(f"loop gain must be non-negative, got {lg}")
    sol = solve_agc(ONE, lg, snr)
    return RateResult(Receiver.FD_ML, log2_1p(_fd_ml_excess(snr, lg)), Path.CLOSED_FORM, _scenario(ONE, snr, lg), sol.alpha_g, sol.mu)


def se_fd_direct(snr: float, lg: float) -> RateResult:
    """Full duplex, echoes as noise: ``log2(1 + snr/(1 + LG + LG snr))``."""
    if lg < 0:
        raise DomainError(f"loop gain must be non-negative, got {lg}")
    sol = solve_agc(ONE, lg, snr)
    se = log2_1p(snr / (1.0 + lg + lg * snr))
    return RateResult(Receiver.FD_DIRECT, se, Path.CLOSED_FORM, _scenario(ONE, snr, lg), sol.alpha_g, sol.mu)


def se_fd_direct_pc(snr: float, lg: float) -> RateResult:
    """Full duplex, echoes as noise, relay power optimized.

    Scaling the relay power by ``p`` scales both snr and LG; the optimum is
    ``p* = min(1, 1/sqrt(LG snr))``. Below ``LG = 1/snr`` full power is used,
    above it the rate is ``log2(1 + snr/(LG + 2 sqrt(LG snr)))``.
    """
    if lg < 0:
        raise DomainError(f"loop gain must be non-negative, got {lg}")
    if lg <= 1.0 / snr:
        base = se_fd_direct(snr, lg)
        return RateResult(Receiver.FD_DIRECT_PC, base.se, Path.CLOSED_FORM, base.scenario, base.alpha_g, base.mu, 1.0)
    p_opt = 1.0 / math.sqrt(lg * snr)
    se = log2_1p(snr / (lg + 2.0 * math.sqrt(lg * snr)))
    sol = solve_agc(ONE, p_opt * lg, p_opt * snr)
    return RateResult(Receiver.FD_DIRECT_PC, se, Path.CLOSED_FORM, _scenario(ONE, snr, lg), sol.alpha_g, sol.mu, p_opt)


def se_ml(rho: RhoLike, snr: float, lg: float) -> RateResult:
    """ML rate for any rho: recursion below 1, closed form at full duplex."""
    rho = parse_rho(rho)
    if rho == ONE:
        fd = se_fd_ml(snr, lg)
        return RateResult(Receiver.ML, fd.se, fd.path, fd.scenario, fd.alpha_g, fd.mu)
    return se_ml_recursion(rho, snr, lg)


def se_ml_asymptote(rho: RhoLike, snr: float, lg: float) -> float:
    """High-SNR line ``rho log2 snr + rho log2(alpha_g/(rho LG))``, i.e. ``rho log2 mu``."""
    rho = parse_rho(rho)
    sol = solve_agc(rho, lg, snr)
    return float(rho) * math.log2(sol.mu)


def evaluate(receiver: Receiver | str, scenario: Scenario, dense: bool = False) -> RateResult:
    """Dispatch a receiver name onto the matching rate function."""
    rx = Receiver(receiver)
    rho, snr, lg = scenario.rho, scenario.snr, scenario.lg
    if rx is Receiver.ML:
        if dense:
            return se_ml_dense(rho, snr, lg, scenario.n_subcarriers_hint, scenario.theta0, scenario.phi0)
        return se_ml(rho, snr, lg)
    if rx is Receiver.DIRECT:
        return se_direct(rho, snr, lg)
    if rx is Receiver.ZF:
        return se_zf(rho, snr, lg)
    if rx is Receiver.LMMSE:
        return se_lmmse(rho, snr, lg, scenario.n_subcarriers_hint, scenario.theta0, scenario.phi0)
    if rx is Receiver.SIC:
        return se_sic(rho, snr, lg)
    if rx is Receiver.NOSI:
        return se_nosi(rho, snr)
    if rx is Receiver.HD:
        return se_hd(snr)
    if rx is Receiver.FD_ML:
        return se_fd_ml(snr, lg)
    if rx is Receiver.FD_DIRECT:
        return se_fd_direct(snr, lg)
    return se_fd_direct_pc(snr, lg)
