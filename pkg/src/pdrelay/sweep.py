"""Parameter sweeps, HD/FD boundaries and their flat-file formats.

Tables are written as CSV: ``#``-prefixed ``key = value`` lines carrying the
fixed parameters, a header row ``<axis>,<receiver>...,[K,]reason`` and one
row per axis point. Floats use 12 significant digits, NaN is ``nan`` and rho
values stay rational (``2/3``). A failing cell never aborts a sweep; it is
``nan`` and its message goes into ``reason``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from pdrelay.rates import Receiver, evaluate, se_fd_direct, se_fd_direct_pc, se_fd_ml, se_hd
from pdrelay.scenario import DEFAULT_N, DomainError, Scenario, db2lin, derive_grid, parse_rho

AXES = ("rho", "snr_db", "lg_db")
FORMATS = ("csv", "plot_data")
STRATEGIES = ("ml", "direct", "direct_pc")

BOUNDARY_LG_DB = (-40.0, 40.0)
BOUNDARY_TOL_DB = 1e-4


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def fmt_axis(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return fmt_float(float(v))


def parse_axis(axis: str, text: str):
    return parse_rho(text) if axis == "rho" else float(text)


def rho_axis(start: Fraction, stop: Fraction, count: int, max_den: int = 100) -> list[Fraction]:
    """Rational rho grid: ``count`` evenly spaced points snapped to small denominators,
    plus every ``k/(k+1)`` in range so that each change of the echo count is sampled.
    """
    start, stop = parse_rho(start), parse_rho(stop)
    if count < 2:
        raise DomainError("a sweep axis needs at least two points")
    pts = {start, stop}
    for i in range(count):
        x = start + (stop - start) * Fraction(i, count - 1)
        pts.add(parse_rho(x.limit_denominator(max_den)))
    k = 1
    while Fraction(k, k + 1) <= stop and k + 1 <= max_den:
        kink = Fraction(k, k + 1)
        if kink >= start:
            pts.add(kink)
        k += 1
    return sorted(pts)


def linear_axis(start: float, stop: float, count: int) -> list[float]:
    if count < 2:
        raise DomainError("a sweep axis needs at least two points")
    step = (stop - start) / (count - 1)
    return [start + i * step for i in range(count)]


def parse_range(text: str) -> tuple[float, float, int]:
    """``"start:stop:count"`` -> tuple."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:count, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


@dataclass
class SweepSpec:
    """What to sweep.

    ``fixed`` holds the non-swept scenario values: ``rho``, ``snr_db``,
    ``lg_db``, ``theta0``, ``phi0`` and ``n``.
    """

    axis: str
    values: list
    receivers: list[str]
    fixed: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise DomainError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        if len(self.values) < 2:
            raise DomainError("a sweep axis needs at least two points")
        if self.fmt not in FORMATS:
            raise DomainError(f"unknown format {self.fmt!r}")
        self.values = [parse_axis(self.axis, str(v)) if self.axis == "rho" else float(v) for v in self.values]
        self.receivers = [Receiver(r).value for r in self.receivers]
        defaults = {"rho": Fraction(2, 3), "snr_db": 10.0, "lg_db": 0.0, "theta0": 0.0, "phi0": 1.0, "n": DEFAULT_N}
        self.fixed = {**defaults, **self.fixed}
        self.fixed["rho"] = parse_rho(self.fixed["rho"])
        self.fixed.pop(self.axis, None)

    def scenario_at(self, value) -> Scenario:
        params = dict(self.fixed)
        params[self.axis] = value
        return Scenario.from_db(
            params["rho"], float(params["snr_db"]), float(params["lg_db"]),
            theta0=float(params["theta0"]), phi0=float(params["phi0"]),
            n_subcarriers_hint=int(params["n"]),
        )


@dataclass
class SweepTable:
    axis: str
    values: list
    columns: dict[str, list[float]]
    reasons: list[str]
    metadata: dict[str, str] = field(default_factory=dict)
    k: list[float] | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, SweepTable):
            return NotImplemented

        def same(a, b):
            return all((math.isnan(x) and math.isnan(y)) or x == y for x, y in zip(a, b)) and len(a) == len(b)

        return (
            self.axis == other.axis
            and self.values == other.values
            and self.columns.keys() == other.columns.keys()
            and all(same(self.columns[c], other.columns[c]) for c in self.columns)
            and self.reasons == other.reasons
            and self.metadata == other.metadata
            and self.k == other.k
        )

    @property
    def receivers(self) -> list[str]:
        return list(self.columns)

    def header(self) -> list[str]:
        return [self.axis, *self.columns, *(["K"] if self.k is not None else []), "reason"]

    def rows(self) -> Iterable[list[str]]:
        for i, v in enumerate(self.values):
            row = [fmt_axis(v)] + [fmt_float(self.columns[c][i]) for c in self.columns]
            if self.k is not None:
                row.append("inf" if math.isinf(self.k[i]) else str(int(self.k[i])))
            row.append(self.reasons[i])
            yield row

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.metadata.items():
            buf.write(f"# {key} = {val}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.rows())
        return buf.getvalue()

    def to_plot_data(self) -> str:
        """Two sections: ``#`` metadata, then a whitespace-separated column block."""
        lines = [f"# {k} = {v}" for k, v in self.metadata.items()]
        lines.append("")
        cols = [self.axis if self.axis != "rho" else "rho", *self.columns]
        lines.append(" ".join(cols))
        for i, v in enumerate(self.values):
            x = float(v) if isinstance(v, Fraction) else v
            lines.append(" ".join([fmt_float(x)] + [fmt_float(self.columns[c][i]) for c in self.columns]))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_plot_data()
        Path(path).write_text(text)

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        metadata: dict[str, str] = {}
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                metadata[key.strip()] = val.strip()
            elif line:
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        axis = header[0]
        has_k = "K" in header
        receivers = header[1:len(header) - (2 if has_k else 1)]
        values, reasons, ks = [], [], []
        columns = {r: [] for r in receivers}
        for row in reader:
            values.append(parse_axis(axis, row[0]))
            for j, r in enumerate(receivers, start=1):
                columns[r].append(float(row[j]))
            if has_k:
                ks.append(float(row[-2]))
            reasons.append(row[-1])
        return cls(axis, values, columns, reasons, metadata, ks if has_k else None)

    @classmethod
    def read(cls, path: str | Path) -> "SweepTable":
        return cls.from_csv(Path(path).read_text())


def _evaluate_cell(receiver: str, scenario: Scenario) -> tuple[float, str]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return evaluate(receiver, scenario).se, ""
    except (DomainError, ArithmeticError, RuntimeError) as exc:
        return math.nan, f"{receiver}: {exc}"


def _evaluate_row(args: tuple[SweepSpec, object]) -> tuple[list[float], list[str]]:
    spec, value = args
    try:
        sc = spec.scenario_at(value)
    except DomainError as exc:
        return [math.nan] * len(spec.receivers), [str(exc)]
    vals, reasons = [], []
    for r in spec.receivers:
        v, why = _evaluate_cell(r, sc)
        vals.append(v)
        if why:
            reasons.append(why)
    return vals, reasons


def sweep_metadata(spec: SweepSpec) -> dict[str, str]:
    from pdrelay import __version__

    meta = {"generator": f"pdrelay {__version__}", "axis": spec.axis}
    for key, val in spec.fixed.items():
        meta[key] = fmt_axis(val) if isinstance(val, Fraction) else str(val)
    meta["receivers"] = ",".join(spec.receivers)
    return meta


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Evaluate every receiver at every axis point.

    Rows are independent and may be farmed out to ``workers`` processes;
    output order always follows ``spec.values``. On a rho axis a ``K`` column
    records the echo count and rows where it changes are tagged in ``reason``.
    """
    jobs = [(spec, v) for v in spec.values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_row, jobs))
    else:
        results = [_evaluate_row(j) for j in jobs]

    columns = {r: [res[0][i] for res in results] for i, r in enumerate(spec.receivers)}
    reasons = [list(res[1]) for res in results]
    k_col = None
    if spec.axis == "rho":
        k_col = [float(derive_grid(v, 1).k) for v in spec.values]
        for i in range(1, len(k_col)):
            if k_col[i] != k_col[i - 1]:
                prev = "inf" if math.isinf(k_col[i - 1]) else int(k_col[i - 1])
                cur = "inf" if math.isinf(k_col[i]) else int(k_col[i])
                reasons[i].insert(0, f"K {prev}->{cur}")
    table = SweepTable(spec.axis, list(spec.values), columns, ["; ".join(r) for r in reasons], sweep_metadata(spec), k_col)
    if spec.output:
        table.write(spec.output, spec.fmt)
    return table


# HD vs FD boundary


@dataclass(frozen=True)
class BoundaryPoint:
    """Loop gain at which FD and HD rates coincide for a given SNR.

    ``lg_db`` is ``nan`` when there is no crossing inside the search interval;
    ``fd_wins_below`` then tells whether FD beats HD across the whole interval.
    """

    snr_db: float
    lg_db: float
    strategy: str
    crossing: bool = True
    fd_wins_below: bool | None = None


FD_RATE: dict[str, Callable[[float, float], float]] = {
    "ml": lambda snr, lg: se_fd_ml(snr, lg).se,
    "direct": lambda snr, lg: se_fd_direct(snr, lg).se,
    "direct_pc": lambda snr, lg: se_fd_direct_pc(snr, lg).se,
}


def fd_minus_hd(strategy: str, snr: float, lg: float) -> float:
    """FD rate minus HD rate; non-increasing in ``lg`` for every strategy."""
    return FD_RATE[strategy](snr, lg) - se_hd(snr).se


def find_boundary(
    strategy: str,
    snr_db_grid: Sequence[float],
    lg_db_range: tuple[float, float] = BOUNDARY_LG_DB,
    tol_db: float = BOUNDARY_TOL_DB,
) -> list[BoundaryPoint]:
    """Bisect over loop gain (dB) for ``SE_FD = SE_HD`` at each SNR.

    Raises:
        DomainError: for an unknown strategy.
    """
    if strategy not in FD_RATE:
        raise DomainError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    lo_db, hi_db = lg_db_range
    out = []
    for snr_db in snr_db_grid:
        snr = db2lin(snr_db)

        def f(lg_db: float) -> float:
            return fd_minus_hd(strategy, snr, db2lin(lg_db))

        f_lo, f_hi = f(lo_db), f(hi_db)
        if f_lo <= 0.0 or f_hi >= 0.0:
            # FD above HD over the whole interval, or never above it
            out.append(BoundaryPoint(snr_db, math.nan, strategy, False, f_hi > 0.0))
            continue
        a, b = lo_db, hi_db
        while b - a > tol_db:
            mid = 0.5 * (a + b)
            if f(mid) > 0.0:
                a = mid
            else:
                b = mid
        out.append(BoundaryPoint(snr_db, 0.5 * (a + b), strategy))
    return out


def boundary_table(strategies: Sequence[str], snr_db_grid: Sequence[float]) -> SweepTable:
    """One ``lg_db`` column per strategy over the SNR axis, ``nan`` without crossing."""
    columns, reasons = {}, [[] for _ in snr_db_grid]
    for s in strategies:
        pts = find_boundary(s, snr_db_grid)
        columns[s] = [p.lg_db for p in pts]
        for i, p in enumerate(pts):
            if not p.crossing:
                side = "FD above HD" if p.fd_wins_below else "FD below HD"
                reasons[i].append(f"{s}: no crossing, {side} on [{BOUNDARY_LG_DB[0]:g}, {BOUNDARY_LG_DB[1]:g}] dB")
    from pdrelay import __version__

    meta = {
        "generator": f"pdrelay {__version__}",
        "quantity": "loop gain (dB) where FD and HD spectral efficiencies coincide",
        "strategies": ",".join(strategies),
        "lg_db_range": f"{BOUNDARY_LG_DB[0]:g}:{BOUNDARY_LG_DB[1]:g}",
        "tol_db": f"{BOUNDARY_TOL_DB:g}",
    }
    return SweepTable("snr_db", [float(s) for s in snr_db_grid], columns, ["; ".join(r) for r in reasons], meta)


def load_config(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment. Dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


__all__ = [
    "AXES",
    "BoundaryPoint",
    "STRATEGIES",
    "SweepSpec",
    "SweepTable",
    "boundary_table",
    "fd_minus_hd",
    "find_boundary",
    "linear_axis",
    "load_config",
    "parse_range",
    "rho_axis",
    "run_sweep",
]
