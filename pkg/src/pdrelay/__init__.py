"""Spectral efficiency of partial-duplex amplify-and-forward relays.

The relay forwards a band of width ``rho * B`` shifted by ``(1 - rho) * B``;
self-interference loops back through the relay filter and shows up at the
destination as intercarrier echoes. This package evaluates the achievable
rate under several receiver strategies along two independent routes: the
structured frequency-domain model (closed forms, recursions and dense
matrices) and a time-domain LPTV/MIMO formulation used as a cross-check.
"""

from pdrelay.agc import AgcSolution, solve_agc
from pdrelay.rates import (
    Path,
    RateResult,
    Receiver,
    evaluate,
    se_direct,
    se_fd_direct,
    se_fd_direct_pc,
    se_fd_ml,
    se_hd,
    se_lmmse,
    se_ml,
    se_ml_asymptote,
    se_ml_dense,
    se_ml_recursion,
    se_nosi,
    se_sic,
    se_zf,
)
from pdrelay.scenario import Grid, Scenario, db2lin, derive_grid, lin2db, parse_rho

__version__ = "0.1.0"

__all__ = [
    "AgcSolution",
    "Grid",
    "Path",
    "RateResult",
    "Receiver",
    "Scenario",
    "db2lin",
    "derive_grid",
    "evaluate",
    "lin2db",
    "parse_rho",
    "se_direct",
    "se_fd_direct",
    "se_fd_direct_pc",
    "se_fd_ml",
    "se_hd",
    "se_lmmse",
    "se_ml",
    "se_ml_asymptote",
    "se_ml_dense",
    "se_ml_recursion",
    "se_nosi",
    "se_sic",
    "se_zf",
    "solve_agc",
]
