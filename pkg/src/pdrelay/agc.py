"""Automatic gain control fixed point for the normalized loop gain ``alpha*g``.

With AGC the relay gain ``g`` is whatever makes the output power nominal in
spite of the feedback through the coupling path. In normalized form the
unknown ``x = alpha*g`` is the unique non-negative root of

    sum_{k=1}^{K+1} (1 - k(1 - rho)) x^k = rho * LG.

Every coefficient is positive for rho < 1, so the left-hand side is strictly
increasing on [0, inf) and a bracketing method cannot miss the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from pdrelay.scenario import ONE, DomainError, RhoLike, echo_count, parse_rho

REL_TOL = 1e-13
MAX_BISECTIONS = 200


class AgcConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AgcSolution:
    """Resolved relay gain.

    Attributes:
        alpha_g: normalized loop gain ``alpha*g``.
        mu: effective per-subcarrier SNR ``alpha*g*snr/(rho*LG)``
            (``snr/rho`` when there is no coupling).
        residual: polynomial residual at ``alpha_g``.
    """

    alpha_g: float
    mu: float
    residual: float


def agc_coefficients(rho: Fraction, k: int) -> np.ndarray:
    """Coefficients ``c_j = 1 - j(1-rho)`` for ``j = 1..K+1`` (index 0 is ``x^1``)."""
    j = np.arange(1, k + 2, dtype=float)
    return 1.0 - j * float(1 - rho)


def agc_polynomial(x: float, coeffs: np.ndarray, target: float) -> float:
    """Evaluate ``sum_j c_j x^j - target`` by Horner's rule."""
    acc = 0.0
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc * x - target


def _derivative(x: float, coeffs: np.ndarray) -> float:
    acc = 0.0
    for j in range(len(coeffs), 0, -1):
        acc = acc * x + j * coeffs[j - 1]
    return acc


def _bisect_root(coeffs: np.ndarray, target: float) -> tuple[float, float]:
    lo, hi = 0.0, 1.0
    while agc_polynomial(hi, coeffs, target) < 0.0:
        lo, hi = hi, 2.0 * hi
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if agc_polynomial(mid, coeffs, target) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= REL_TOL * hi:
            return lo, hi
    raise AgcConvergenceError(
        f"bisection did not reach relative width {REL_TOL} in {MAX_BISECTIONS} steps"
    )


def _newton_polish(x: float, lo: float, hi: float, coeffs: np.ndarray, target: float) -> float:
    fx = agc_polynomial(x, coeffs, target)
    d = _derivative(x, coeffs)
    if d <= 0.0:
        return x
    cand = x - fx / d
    # reject steps leaving the bracket or increasing the residual
    if lo <= cand <= hi and abs(agc_polynomial(cand, coeffs, target)) <= abs(fx):
        return cand
    return x


def solve_alpha_g(rho: RhoLike, lg: float, k: int | None = None) -> tuple[float, float]:
    """Return ``(alpha_g, residual)`` for the AGC polynomial.

    Full duplex (rho = 1) has the closed form ``LG/(1+LG)`` and skips the solver.
    """
    rho = parse_rho(rho)
    if not lg >= 0:
        raise DomainError(f"loop gain must be non-negative, got {lg}")
    if lg == 0:
        return 0.0, 0.0
    if rho == ONE:
        return lg / (1.0 + lg), 0.0
    if k is None:
        k = echo_count(rho)
    elif k != echo_count(rho):
        raise DomainError(f"K={k} is inconsistent with rho={rho}")
    coeffs = agc_coefficients(rho, k)
    target = float(rho) * lg
    lo, hi = _bisect_root(coeffs, target)
    x = _newton_polish(0.5 * (lo + hi), lo, hi, coeffs, target)
    return x, agc_polynomial(x, coeffs, target)


def effective_snr(rho: RhoLike, snr: float, lg: float, alpha_g: float) -> float:
    """``mu = alpha_g*snr/(rho*LG)``; the ratio ``alpha_g/LG`` tends to 1 as LG -> 0."""
    rho = float(parse_rho(rho))
    if lg == 0:
        return snr / rho
    return alpha_g * snr / (rho * lg)


def solve_agc(rho: RhoLike, lg: float, snr: float = 1.0, k: int | None = None) -> AgcSolution:
    """Solve the AGC equation and derive the effective SNR.

    Args:
        rho: bandwidth ratio in [1/2, 1].
        lg: loop gain (linear, non-negative).
        snr: reference SNR (linear), only used for ``mu``.
        k: echo count; derived from ``rho`` when omitted.

    Raises:
        DomainError: for a negative loop gain or inconsistent ``k``.
        AgcConvergenceError: if bisection stalls (should not happen).
    """
    x, residual = solve_alpha_g(rho, lg, k)
    return AgcSolution(x, effective_snr(rho, snr, lg, x), residual)


def trace_per_subcarrier(rho: RhoLike, alpha_g: float) -> float:
    """Closed form of ``trace(T T^H)/N``: ``(1/rho) sum_{k=0}^{K} (rho - k(1-rho)) x^k``."""
    rho = parse_rho(rho)
    if rho == ONE:
        if not alpha_g < 1:
            return math.inf
        return 1.0 / (1.0 - alpha_g)
    k = echo_count(rho)
    r = float(rho)
    terms = [(r - j * (1.0 - r)) * alpha_g**j for j in range(k + 1)]
    return math.fsum(terms) / r
