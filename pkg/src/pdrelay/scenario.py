"""Operating point of the relay and the subcarrier grid it induces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Union

RhoLike = Union[Fraction, int, str, float]

HALF = Fraction(1, 2)
ONE = Fraction(1)

# denominators allowed when a decimal rho is snapped to a rational
MAX_DENOMINATOR = 1000
DEFAULT_N = 1000


class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


def db2lin(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def lin2db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def parse_rho(value: RhoLike) -> Fraction:
    """Convert a user-supplied bandwidth ratio to an exact rational.

    Accepts ``Fraction``, ints, ``"p/q"`` strings and decimals. Decimals
    (strings or floats) are snapped to the closest rational with denominator
    at most 1000, so ``"0.6667"`` becomes ``2/3``.

    Raises:
        DomainError: if the value is not in [1/2, 1].
    """
    if isinstance(value, Fraction):
        rho = value
    elif isinstance(value, int):
        rho = Fraction(value)
    elif isinstance(value, float):
        rho = Fraction(value).limit_denominator(MAX_DENOMINATOR)
    else:
        text = str(value).strip()
        try:
            if "/" in text:
                rho = Fraction(text)
            else:
                rho = Fraction(text).limit_denominator(MAX_DENOMINATOR)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse rho from {value!r}") from exc
    if not HALF <= rho <= ONE:
        raise DomainError(f"rho must lie in [1/2, 1], got {rho}")
    return rho


class Grid(NamedTuple):
    """Subcarrier counts for a given rho.

    ``n`` subcarriers carry data out of ``l_total``; ``p_off = l_total - n`` is
    the frequency offset in subcarriers and ``k`` the number of echoes. For the
    full-duplex case ``k`` is ``math.inf`` and ``delta`` is ``nan``.
    """

    n: int
    p_off: int
    l_total: int
    k: float
    delta: float

    @property
    def is_full_duplex(self) -> bool:
        return self.p_off == 0


def echo_count(rho: Fraction) -> int:
    """Number of self-interference terms, ``ceil(rho/(1-rho)) - 1``."""
    rho = parse_rho(rho)
    if rho == ONE:
        raise DomainError("echo count is unbounded for rho = 1")
    return math.ceil(rho / (1 - rho)) - 1


def delta_fraction(rho: Fraction) -> Fraction:
    """Exact ``ceil(x) - x`` with ``x = rho/(1-rho)``."""
    rho = parse_rho(rho)
    if rho == ONE:
        raise DomainError("delta is undefined for rho = 1")
    x = rho / (1 - rho)
    return math.ceil(x) - x


def derive_grid(rho: RhoLike, n_hint: int = DEFAULT_N) -> Grid:
    """Smallest subcarrier grid with exactly ``N/L = rho`` and ``N >= n_hint``.

    Args:
        rho: bandwidth ratio in [1/2, 1].
        n_hint: lower bound on the number of used subcarriers.

    Returns:
        Grid with ``N = p*m`` and ``L = q*m`` where ``rho = p/q`` in lowest terms.
    """
    rho = parse_rho(rho)
    if n_hint < 1:
        raise DomainError(f"n_hint must be positive, got {n_hint}")
    if rho == ONE:
        return Grid(n_hint, 0, n_hint, math.inf, math.nan)
    p, q = rho.numerator, rho.denominator
    m = -(-n_hint // p)
    n, l_total = p * m, q * m
    return Grid(n, l_total - n, l_total, echo_count(rho), float(delta_fraction(rho)))


@dataclass(frozen=True)
class Scenario:
    """One operating point, all quantities dimensionless and linear.

    ``snr`` is the reference SNR at the destination, ``lg`` the loop gain
    (inverse signal-to-self-interference ratio at the relay input). The two
    phases only enter the matrix constructions; rates do not depend on them.
    """

    rho: Fraction
    snr: float
    lg: float = 0.0
    theta0: float = 0.0
    phi0: float = 1.0
    n_subcarriers_hint: int = DEFAULT_N
    grid: Grid = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", parse_rho(self.rho))
        if not self.snr > 0:
            raise DomainError(f"snr must be positive, got {self.snr}")
        if not self.lg >= 0:
            raise DomainError(f"loop gain must be non-negative, got {self.lg}")
        object.__setattr__(self, "grid", derive_grid(self.rho, self.n_subcarriers_hint))

    @classmethod
    def from_db(cls, rho: RhoLike, snr_db: float, lg_db: float | None, **kwargs) -> "Scenario":
        """Build from dB values; ``lg_db=None`` or ``-inf`` means no self-interference."""
        lg = 0.0 if lg_db is None or lg_db == -math.inf else db2lin(lg_db)
        return cls(parse_rho(rho), db2lin(snr_db), lg, **kwargs)

    @property
    def snr_db(self) -> float:
        return lin2db(self.snr)

    @property
    def lg_db(self) -> float:
        return lin2db(self.lg)

    @property
    def is_full_duplex(self) -> bool:
        return self.rho == ONE
