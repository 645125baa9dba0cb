import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdrelay.rates import se_hd, se_nosi
from pdrelay.scenario import DomainError, db2lin
from pdrelay.sweep import (
    SweepSpec,
    SweepTable,
    boundary_table,
    fd_minus_hd,
    find_boundary,
    fmt_float,
    linear_axis,
    load_config,
    parse_range,
    rho_axis,
    run_sweep,
)

HALF_DB = 10 * math.log10(0.5)


@pytest.fixture(scope="module")
def rho_table():
    spec = SweepSpec(
        axis="rho",
        values=rho_axis(Fraction(1, 2), Fraction(1), 11),
        receivers=["ml", "sic", "lmmse", "zf", "direct", "nosi", "hd"],
        fixed={"snr_db": 15.0, "lg_db": -5.0, "n": 120},
    )
    return run_sweep(spec)


class TestAxes:
    def test_rho_axis_includes_kinks(self):
        pts = rho_axis(Fraction(1, 2), Fraction(9, 10), 5)
        for k in range(1, 10):
            assert Fraction(k, k + 1) in pts
        assert pts == sorted(pts)
        assert pts[0] == Fraction(1, 2) and pts[-1] == Fraction(9, 10)

    def test_rho_axis_too_short(self):
        with pytest.raises(DomainError):
            rho_axis(Fraction(1, 2), Fraction(1), 1)

    def test_linear_axis(self):
        assert linear_axis(-40, 60, 11) == pytest.approx([-40 + 10 * i for i in range(11)])

    def test_parse_range(self):
        assert parse_range("-40:60:101") == (-40.0, 60.0, 101)
        with pytest.raises(ValueError):
            parse_range("1:2")

    def test_fmt(self):
        assert fmt_float(math.nan) == "nan"
        assert fmt_float(1 / 3) == "0.333333333333"


class TestSpec:
    def test_bad_axis(self):
        with pytest.raises(DomainError):
            SweepSpec("gain", [1, 2], ["ml"])

    def test_bad_receiver(self):
        with pytest.raises(ValueError):
            SweepSpec("snr_db", [1, 2], ["oracle"])

    def test_swept_key_removed_from_fixed(self):
        spec = SweepSpec("snr_db", [0, 10], ["ml"], fixed={"snr_db": 3.0})
        assert "snr_db" not in spec.fixed
        assert spec.scenario_at(10.0).snr == pytest.approx(10.0)


class TestRhoSweep:
    def test_hd_column(self, rho_table):
        for v in rho_table.columns["hd"]:
            assert v == pytest.approx(se_hd(db2lin(15)).se)
        half = rho_table.values.index(Fraction(1, 2))
        assert rho_table.columns["ml"][half] == pytest.approx(rho_table.columns["hd"][half], abs=1e-12)

    def test_gain_over_half_duplex(self, rho_table):
        i = rho_table.values.index(Fraction(2, 3))
        assert rho_table.columns["ml"][i] / rho_table.columns["hd"][i] >= 1.18

    def test_below_upper_bound(self, rho_table):
        for name, col in rho_table.columns.items():
            for rho, v, ub in zip(rho_table.values, col, rho_table.columns["nosi"]):
                if not math.isnan(v) and name != "hd":
                    assert v <= ub + 1e-9, (name, rho)

    def test_full_duplex_lmmse_marked(self, rho_table):
        i = rho_table.values.index(Fraction(1))
        assert math.isnan(rho_table.columns["lmmse"][i])
        assert "lmmse" in rho_table.reasons[i]
        assert not math.isnan(rho_table.columns["ml"][i])

    def test_k_transitions(self, rho_table):
        # K steps up just past each k/(k+1), which itself keeps the lower count
        i = rho_table.values.index(Fraction(2, 3))
        assert rho_table.k[i] == 1
        assert rho_table.k[i + 1] == 2
        assert rho_table.reasons[i + 1].startswith("K 1->2")
        assert math.isinf(rho_table.k[-1])

    def test_csv_roundtrip(self, rho_table, tmp_path):
        path = tmp_path / "t.csv"
        rho_table.write(path)
        back = SweepTable.read(path)
        assert back.to_csv() == rho_table.to_csv()
        for name, col in rho_table.columns.items():
            for a, b in zip(col, back.columns[name]):
                assert (math.isnan(a) and math.isnan(b)) or b == float(f"{a:.12g}")
        assert back.values == rho_table.values
        assert back.metadata["snr_db"] == "15.0"

    def test_csv_header(self, rho_table):
        lines = rho_table.to_csv().splitlines()
        header = next(line for line in lines if not line.startswith("#"))
        assert header == "rho,ml,sic,lmmse,zf,direct,nosi,hd,K,reason"
        assert any(line.startswith("2/3,") for line in lines)

    def test_plot_data(self, rho_table):
        text = rho_table.to_plot_data()
        meta, body = text.split("\n\n", 1)
        assert all(line.startswith("#") for line in meta.splitlines())
        rows = body.strip().splitlines()
        assert rows[0].split() == ["rho", *rho_table.columns]
        assert len(rows) == len(rho_table.values) + 1
        assert float(rows[1].split()[0]) == 0.5


class TestOtherAxes:
    def test_workers_keep_order(self):
        values = [-10, 0, 10, 20, 30]
        spec = SweepSpec("snr_db", values, ["ml", "direct"], fixed={"rho": "3/4", "lg_db": 0})
        serial = run_sweep(spec)
        parallel = run_sweep(spec, workers=2)
        assert serial == parallel
        assert serial.k is None

    def test_error_cell(self):
        # LMMSE has no rho = 1 model; the sweep continues with a marker
        spec = SweepSpec("snr_db", [0, 10], ["lmmse", "ml"], fixed={"rho": "1", "lg_db": 0})
        table = run_sweep(spec)
        assert all(math.isnan(v) for v in table.columns["lmmse"])
        assert all(not math.isnan(v) for v in table.columns["ml"])
        assert all(r.startswith("lmmse:") for r in table.reasons)

    def test_lg_axis_monotone(self):
        spec = SweepSpec("lg_db", linear_axis(-20, 20, 9), ["ml", "sic"], fixed={"rho": "2/3", "snr_db": 10})
        col = run_sweep(spec).columns["ml"]
        assert all(b <= a + 1e-12 for a, b in zip(col, col[1:]))

    def test_output_written(self, tmp_path):
        out = tmp_path / "s.dat"
        spec = SweepSpec("snr_db", [0, 5], ["nosi"], fixed={"rho": "2/3"}, output=str(out), fmt="plot_data")
        run_sweep(spec)
        assert out.read_text().startswith("# generator")


class TestBoundary:
    def test_ml_low_snr(self):
        (pt,) = find_boundary("ml", [-40.0])
        assert pt.lg_db == pytest.approx(HALF_DB, abs=0.1)

    def test_ml_high_snr(self):
        (pt,) = find_boundary("ml", [40.0])
        assert pt.lg_db == pytest.approx(10 * math.log10(math.sqrt(db2lin(40) / 2)), abs=0.5)

    def test_monotone_in_snr(self):
        pts = find_boundary("ml", linear_axis(-20, 60, 9))
        lg = [p.lg_db for p in pts]
        assert all(b >= a for a, b in zip(lg, lg[1:]))

    def test_boundary_is_root(self):
        (pt,) = find_boundary("direct", [20.0])
        assert pt.crossing
        assert abs(fd_minus_hd("direct", db2lin(20), db2lin(pt.lg_db))) < 1e-3

    @given(st.floats(-20, 60))
    @settings(max_examples=60, deadline=None)
    def test_ml_fd_wins_below_minus_three(self, snr_db):
        assert fd_minus_hd("ml", db2lin(snr_db), db2lin(-3.1)) > 0

    @given(st.floats(-20, 60), st.floats(-6.83, 40))
    @settings(max_examples=200, deadline=None)
    def test_direct_pc_never_wins_above(self, snr_db, lg_db):
        assert fd_minus_hd("direct_pc", db2lin(snr_db), db2lin(lg_db)) <= 0

    def test_direct_pc_highest_boundary(self):
        # independent closed-form oracle: maximize the direct/HD crossing over snr
        from scipy.optimize import brentq, minimize_scalar

        def crossing(snr_db):
            snr = db2lin(snr_db)

            def gap(g):
                lg = db2lin(g)
                return math.log2(1 + snr / (1 + lg + lg * snr)) - 0.5 * math.log2(1 + 2 * snr)

            return brentq(gap, -40, 40, xtol=1e-12)

        best = minimize_scalar(lambda s: -crossing(s), bounds=(-10, 20), method="bounded")
        assert -best.fun == pytest.approx(-6.838, abs=1e-3)
        pts = find_boundary("direct_pc", [best.x])
        assert pts[0].lg_db == pytest.approx(-best.fun, abs=1e-3)
        # the -6.9 dB threshold is crossed just above the peak
        assert fd_minus_hd("direct_pc", db2lin(best.x), db2lin(-6.9)) > 0

    def test_no_crossing_marked(self):
        (pt,) = find_boundary("direct", [-40.0])
        assert not pt.crossing and math.isnan(pt.lg_db)
        assert pt.fd_wins_below is False

    def test_table(self):
        table = boundary_table(["ml", "direct_pc"], [-40.0, 0.0, 40.0])
        assert table.axis == "snr_db"
        assert list(table.columns) == ["ml", "direct_pc"]
        assert "direct_pc: no crossing" in table.reasons[0]
        back = SweepTable.from_csv(table.to_csv())
        assert back.to_csv() == table.to_csv()

    def test_unknown_strategy(self):
        with pytest.raises(DomainError):
            find_boundary("zf", [0.0])


def test_load_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# sweep\nsnr-db = 15  # trailing\n\nlg_db=-5\n")
    assert load_config(path) == {"snr_db": "15", "lg_db": "-5"}
    path.write_text("oops\n")
    with pytest.raises(ValueError):
        load_config(path)


def test_nosi_column_matches_formula():
    spec = SweepSpec("rho", ["1/2", "3/5", "1"], ["nosi"], fixed={"snr_db": 10})
    table = run_sweep(spec)
    for rho, v in zip(table.values, table.columns["nosi"]):
        assert v == pytest.approx(se_nosi(rho, 10.0).se, abs=1e-12)
