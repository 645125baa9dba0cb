"""Command line interface.

    pdrelay agc --rho 2/3 --lg-db 0 --snr-db 10
    pdrelay rate --receiver ml --rho 3/4 --snr-db 15 --lg-db -5
    pdrelay matrices --rho 2/3 --n 12 --lg-db 0 --dump tq.csv
    pdrelay td-check --nch 3 --snr-db 10 --lg-db 5
    pdrelay sweep --axis rho --values 1/2,2/3,3/4 --snr-db 15 --lg-db -5 --receivers ml,sic --out fig5.csv --plot fig5.png
    pdrelay boundary --strategy ml,direct,direct_pc --snr-db-range -40:60:101 --out fig3.csv

Every subcommand accepts ``--config FILE`` with ``key = value`` lines using
the long option names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction

from pdrelay.agc import solve_agc
from pdrelay.freqchannel import ChannelMatrices, dump_matrices
from pdrelay.rates import Receiver, evaluate
from pdrelay.scenario import DEFAULT_N, DomainError, Scenario, parse_rho
from pdrelay.sweep import (
    STRATEGIES,
    SweepSpec,
    boundary_table,
    linear_axis,
    load_config,
    parse_range,
    rho_axis,
    run_sweep,
)


NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf)")


def _db(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("-inf", "-infinity", "off", "none"):
        return -math.inf
    return float(t)


def _rho_arg(text: str) -> Fraction:
    try:
        rho = parse_rho(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if "/" not in str(text) and Fraction(str(text).strip()) != rho:
        print(f"note: rho {text} snapped to {rho}", file=sys.stderr)
    return rho


def _add_scenario_flags(p: argparse.ArgumentParser, rho_default: str | None = "2/3") -> None:
    p.add_argument("--rho", type=_rho_arg, default=rho_default, help="bandwidth ratio, p/q or decimal")
    p.add_argument("--snr-db", type=_db, default=10.0, help="reference SNR in dB")
    p.add_argument("--lg-db", type=_db, default=-math.inf, help="loop gain in dB (-inf: no coupling)")
    p.add_argument("--theta0", type=float, default=0.0, help="filter phase shift (rad)")
    p.add_argument("--phi0", type=float, default=1.0, help="per-subcarrier phase increment (rad)")
    p.add_argument("--n", type=int, default=DEFAULT_N, help="target number of used subcarriers")


def _scenario(args) -> Scenario:
    return Scenario.from_db(args.rho, args.snr_db, args.lg_db, theta0=args.theta0, phi0=args.phi0, n_subcarriers_hint=args.n)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def cmd_agc(args) -> int:
    sc = _scenario(args)
    sol = solve_agc(sc.rho, sc.lg, sc.snr)
    print(f"alpha_g={_fmt(sol.alpha_g)} mu={_fmt(sol.mu)} residual={sol.residual:.3g}")
    return 0


def cmd_rate(args) -> int:
    sc = _scenario(args)
    res = evaluate(args.receiver, sc, dense=args.dense)
    line = f"se_bps_hz={_fmt(res.se)} path={res.path.value} alpha_g={_fmt(res.alpha_g)} mu={_fmt(res.mu)}"
    if res.power_fraction is not None:
        line += f" power_fraction={_fmt(res.power_fraction)}"
    print(line)
    return 0


def cmd_matrices(args) -> int:
    sc = _scenario(args)
    g = sc.grid
    if g.is_full_duplex:
        raise DomainError("rho = 1 has no finite matrix model")
    sol = solve_agc(sc.rho, sc.lg, sc.snr)
    mats = ChannelMatrices.build(g.n, g.p_off, sol.alpha_g, sc.theta0, sc.phi0)
    dump_matrices(args.dump, mats)
    print(f"N={g.n} P={g.p_off} L={g.l_total} K={g.k} alpha_g={_fmt(sol.alpha_g)} -> {args.dump}")
    return 0


def cmd_td_check(args) -> int:
    from pdrelay.rates import se_ml_recursion
    from pdrelay.scenario import db2lin
    from pdrelay.tdoracle import build_td_model, solve_td_agc, td_capacity

    lg = 0.0 if args.lg_db == -math.inf else db2lin(args.lg_db)
    snr = db2lin(args.snr_db)
    model = build_td_model(args.nch, lg, kappa=args.kappa, ell_factor=args.ell_factor)
    solve_td_agc(model)
    td = td_capacity(model, snr).se
    fd = se_ml_recursion(model.rho, snr, lg).se
    print(
        f"rho={model.rho} M={model.m_block} ell={model.ell} ell_p={model.ell_p} "
        f"td_se={_fmt(td)} fd_se={_fmt(fd)} gap={_fmt(td - fd)}"
    )
    return 0


def _axis_values(args) -> list:
    if args.values:
        return [v.strip() for v in str(args.values).split(",") if v.strip()]
    if not args.range:
        raise DomainError("sweep needs --values or --range")
    start, stop, count = str(args.range).split(":") if args.axis == "rho" else parse_range(args.range)
    if args.axis == "rho":
        return rho_axis(parse_rho(start), parse_rho(stop), int(count))
    return linear_axis(start, stop, count)


def cmd_sweep(args) -> int:
    fixed = {
        "rho": args.rho,
        "snr_db": args.snr_db,
        "lg_db": args.lg_db,
        "theta0": args.theta0,
        "phi0": args.phi0,
        "n": args.n,
    }
    spec = SweepSpec(
        axis=args.axis,
        values=_axis_values(args),
        receivers=[r.strip() for r in str(args.receivers).split(",")],
        fixed=fixed,
        output=args.out,
        fmt=args.format,
    )
    table = run_sweep(spec, workers=args.workers)
    if not args.out:
        sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_plot_data())
    if args.plot:
        from pdrelay.plotting import plot_sweep

        plot_sweep(table, args.plot)
    return 0


def cmd_boundary(args) -> int:
    strategies = [s.strip() for s in str(args.strategy).split(",")]
    if strategies == ["all"]:
        strategies = list(STRATEGIES)
    for s in strategies:
        if s not in STRATEGIES:
            raise DomainError(f"unknown strategy {s!r}; expected one of {', '.join(STRATEGIES)}")
    start, stop, count = parse_range(args.snr_db_range)
    table = boundary_table(strategies, linear_axis(start, stop, count))
    if args.out:
        table.write(args.out, args.format)
    else:
        sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_plot_data())
    if args.plot:
        from pdrelay.plotting import plot_boundary

        plot_boundary(table, args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdrelay", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        # let "-40:60:101" and "-inf" through as values rather than options
        p._negative_number_matcher = NEGATIVE_VALUE
        p.add_argument("--config", help="key = value file; command-line flags override it")
        p.set_defaults(func=func)
        return p

    p = add("agc", cmd_agc, "solve the AGC equation")
    _add_scenario_flags(p)

    p = add("rate", cmd_rate, "spectral efficiency of one receiver")
    _add_scenario_flags(p)
    p.add_argument("--receiver", required=True, choices=[r.value for r in Receiver])
    p.add_argument("--dense", action="store_true", help="ML via the dense log-det instead of the recursion")

    p = add("matrices", cmd_matrices, "dump T_N and Q_N as complex CSV")
    _add_scenario_flags(p)
    p.add_argument("--dump", required=True, help="output path")

    p = add("td-check", cmd_td_check, "compare the time-domain oracle with the recursion")
    p.add_argument("--nch", type=int, required=True, help="channels per period, rho = (nch-1)/nch")
    p.add_argument("--snr-db", type=_db, default=10.0)
    p.add_argument("--lg-db", type=_db, default=-math.inf)
    p.add_argument("--kappa", type=int, default=300)
    p.add_argument("--ell-factor", type=int, default=5, help="filter delay ell = factor * nch")

    p = add("sweep", cmd_sweep, "sweep one parameter for several receivers")
    _add_scenario_flags(p)
    p.add_argument("--axis", required=True, choices=["rho", "snr_db", "lg_db"])
    p.add_argument("--values", help="comma-separated axis values (rho as p/q)")
    p.add_argument("--range", help="start:stop:count")
    p.add_argument("--receivers", default="ml,sic,lmmse,zf,direct,nosi")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", default="csv", choices=["csv", "plot_data"])
    p.add_argument("--plot", help="also render a figure to this path (png, pdf, svg)")
    p.add_argument("--workers", type=int, default=1)

    p = add("boundary", cmd_boundary, "loop gain where FD and HD rates are equal")
    p.add_argument("--strategy", default="ml", help="ml, direct, direct_pc, comma list or 'all'")
    p.add_argument("--snr-db-range", default="-40:60:101", help="start:stop:count")
    p.add_argument("--out")
    p.add_argument("--format", default="csv", choices=["csv", "plot_data"])
    p.add_argument("--plot")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str] | None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    cfg = load_config(known.config)
    subparser = choices[command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    # string defaults go through each option's type conversion on re-parse
    subparser.set_defaults(**cfg)
    for action in subparser._actions:
        if action.dest in cfg:
            action.required = False
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
