"""Render sweep and boundary tables to image files with matplotlib."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from pdrelay.sweep import SweepTable  # noqa: E402

LABELS = {
    "ml": "ML",
    "direct": "Direct dec.",
    "zf": "ZF",
    "lmmse": "LMMSE",
    "sic": "SIC",
    "nosi": "No SI",
    "hd": "Half duplex",
    "fd-ml": "Full duplex (ML)",
    "fd-direct": "Full duplex (direct)",
    "fd-direct-pc": "Full duplex (direct, PC)",
    "direct_pc": "Direct dec. with PC",
}

AXIS_LABELS = {
    "rho": r"$\rho = B_u/B$",
    "snr_db": "snr (dB)",
    "lg_db": "LG (dB)",
}

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "axes.grid": True,
    "grid.alpha": 0.35,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "savefig.dpi": 150,
}


def _xvalues(table: SweepTable) -> list[float]:
    return [float(v) for v in table.values]


def plot_sweep(table: SweepTable, path: str | Path, title: str | None = None) -> Path:
    """Spectral efficiency vs the swept axis, one line per receiver."""
    x = _xvalues(table)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        markers = "os^vD<>xp*"
        for i, (name, col) in enumerate(table.columns.items()):
            ax.plot(x, col, marker=markers[i % len(markers)], markersize=3, label=LABELS.get(name, name))
        if table.k is not None:
            # the echo count changes at these points; mark them faintly
            for i in range(1, len(table.k)):
                if table.k[i] != table.k[i - 1] and not math.isinf(table.k[i]):
                    ax.axvline(x[i], color="0.6", linestyle=":", linewidth=0.8)
        ax.set_xlabel(AXIS_LABELS.get(table.axis, table.axis))
        ax.set_ylabel("Spectral efficiency (bps/Hz)")
        if title:
            ax.set_title(title, fontsize=10)
        ax.legend(loc="best")
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_boundary(table: SweepTable, path: str | Path, title: str | None = None) -> Path:
    """HD/FD boundary curves in the (snr, LG) plane; FD wins below each curve."""
    x = _xvalues(table)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, col in table.columns.items():
            ax.plot(x, col, label=LABELS.get(name, name))
        ax.set_xlabel("snr (dB)")
        ax.set_ylabel("LG (dB)")
        ax.set_title(title or "HD/FD boundary (FD better below each curve)", fontsize=10)
        ax.legend(loc="upper left")
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
        plt.close(fig)
    return path
