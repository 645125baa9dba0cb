"""Structured frequency-domain channel of the partial-duplex relay.

On the ``N`` used subcarriers the destination sees ``sqrt(g) T D x + w``
where ``T`` is unit lower triangular with echoes at column offsets ``k*P``
and ``D`` is a unit-modulus diagonal. ``T`` has the sparse inverse
``I - sqrt(alpha_g) e^{-j theta0} S``, so ``Q = (T T^H)^{-1}`` only has a main
diagonal and the ``P``-th off-diagonals.

All indices are 0-based. Matrices are dense numpy arrays; they are the
reference against which the scalar recursions in :mod:`pdrelay.rates` are
checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from pdrelay.scenario import DomainError


class FactorizationError(RuntimeError):
    pass


def _check_sizes(n: int, p_off: int) -> None:
    if p_off <= 0:
        raise DomainError("P = 0 (full duplex) has no finite matrix model")
    if p_off > n:
        raise DomainError(f"P={p_off} exceeds N={n}")


def build_t(n: int, p_off: int, alpha_g: float, theta0: float = 0.0, phi0: float = 1.0) -> np.ndarray:
    """Intercarrier-interference matrix ``T_N``.

    ``[T]_{n, n-kP} = sqrt(alpha_g)^k exp(-j k theta0) exp(-j (n k - P k(k-1)/2) phi0)``
    for ``k = 0 .. floor(n/P)``; every other entry is zero.
    """
    _check_sizes(n, p_off)
    if alpha_g < 0:
        raise DomainError(f"alpha_g must be non-negative, got {alpha_g}")
    t = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    amp = np.sqrt(alpha_g)
    for k in range(0, (n - 1) // p_off + 1):
        r = rows[k * p_off:]
        phase = k * theta0 + (r * k - p_off * k * (k - 1) / 2) * phi0
        t[r, r - k * p_off] = amp**k * np.exp(-1j * phase)
    return t


def build_s(n: int, p_off: int, phi0: float = 1.0) -> np.ndarray:
    """Single sub-band matrix with ``[S]_{n, n-P} = exp(-j n phi0)`` for ``n >= P``."""
    _check_sizes(n, p_off)
    s = np.zeros((n, n), dtype=complex)
    r = np.arange(p_off, n)
    s[r, r - p_off] = np.exp(-1j * r * phi0)
    return s


def build_d(n: int, theta0: float = 0.0, phi0: float = 1.0) -> np.ndarray:
    """Diagonal of ``D_N``: ``exp(-j (n phi0 + theta0))``."""
    return np.exp(-1j * (np.arange(n) * phi0 + theta0))


def build_t_inverse(n: int, p_off: int, alpha_g: float, theta0: float = 0.0, phi0: float = 1.0) -> np.ndarray:
    """``I - sqrt(alpha_g) e^{-j theta0} S``."""
    return np.eye(n, dtype=complex) - np.sqrt(alpha_g) * np.exp(-1j * theta0) * build_s(n, p_off, phi0)


def build_q(n: int, p_off: int, alpha_g: float, theta0: float = 0.0, phi0: float = 1.0) -> np.ndarray:
    """``Q_N = (T T^H)^{-1}`` written out entrywise.

    Diagonal ``1 + alpha_g`` on the first ``N-P`` rows and ``1`` on the last
    ``P``; ``[Q]_{n,n-P} = -sqrt(alpha_g) exp(-j(theta0 + n phi0))`` and its
    conjugate mirror above the diagonal. Zeros are exact.
    """
    _check_sizes(n, p_off)
    q = np.zeros((n, n), dtype=complex)
    diag = np.ones(n)
    diag[: n - p_off] += alpha_g
    q[np.diag_indices(n)] = diag
    r = np.arange(p_off, n)
    band = -np.sqrt(alpha_g) * np.exp(-1j * (theta0 + r * phi0))
    q[r, r - p_off] = band
    q[r - p_off, r] = np.conj(band)
    return q


@dataclass(frozen=True)
class ChannelMatrices:
    t: np.ndarray
    d: np.ndarray
    s: np.ndarray
    q: np.ndarray
    n: int
    p_off: int

    @classmethod
    def build(cls, n: int, p_off: int, alpha_g: float, theta0: float = 0.0, phi0: float = 1.0) -> "ChannelMatrices":
        return cls(
            t=build_t(n, p_off, alpha_g, theta0, phi0),
            d=build_d(n, theta0, phi0),
            s=build_s(n, p_off, phi0),
            q=build_q(n, p_off, alpha_g, theta0, phi0),
            n=n,
            p_off=p_off,
        )


def _cholesky(a: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise FactorizationError("matrix has non-finite entries")
    try:
        return linalg.cholesky(a, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise FactorizationError(str(exc)) from exc


def logdet2_hpd(a: np.ndarray) -> float:
    """``log2 det(A)`` of a Hermitian positive definite matrix via Cholesky."""
    c = _cholesky(a)
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(c)))))


def logdet_capacity(t: np.ndarray, mu: float) -> float:
    """``log2 det(I + mu T T^H)`` in bits (not normalized by the block length)."""
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    n = t.shape[0]
    if mu == 0:
        return 0.0
    a = np.eye(n, dtype=complex) + mu * (t @ t.conj().T)
    return logdet2_hpd(a)


def inverse_diagonal_hpd(a: np.ndarray) -> np.ndarray:
    """Diagonal of ``A^{-1}`` for Hermitian positive definite ``A``.

    With ``A = C C^H``, ``A^{-1} = C^{-H} C^{-1}`` and the diagonal entries are
    the squared column norms of ``C^{-1}``.
    """
    c = _cholesky(a)
    cinv = linalg.solve_triangular(c, np.eye(a.shape[0], dtype=a.dtype), lower=True, check_finite=False)
    return np.sum(np.abs(cinv) ** 2, axis=0)


def dump_matrices(path: str | Path, mats: ChannelMatrices) -> None:
    """Write ``T`` and ``Q`` as plain-text complex CSV.

    Layout: a ``# N=<n> P=<p>`` header, then a ``# T`` marker followed by one
    line per row holding ``re,im`` pairs, then ``# Q`` and its rows.
    """
    lines = [f"# N={mats.n} P={mats.p_off}"]
    for name, m in (("T", mats.t), ("Q", mats.q)):
        lines.append(f"# {name}")
        for row in m:
            pairs = np.column_stack([row.real, row.imag]).ravel()
            lines.append(",".join(repr(float(v)) for v in pairs))
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrices(path: str | Path) -> dict[str, np.ndarray]:
    """Read a file written by :func:`dump_matrices`; returns ``{"T": ..., "Q": ...}``."""
    out: dict[str, list[np.ndarray]] = {}
    current = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line[1:].strip()
            if tag in ("T", "Q"):
                current = tag
                out[current] = []
            continue
        vals = np.array([float(v) for v in line.split(",")])
        out[current].append(vals[0::2] + 1j * vals[1::2])
    return {k: np.array(v) for k, v in out.items()}
