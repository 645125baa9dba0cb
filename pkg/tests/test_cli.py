import math

import pytest

from pdrelay.cli import main
from pdrelay.freqchannel import load_matrices
from pdrelay.sweep import SweepTable


def fields(text):
    return dict(item.split("=", 1) for item in text.split() if "=" in item)


class TestScalarCommands:
    def test_agc(self, capsys):
        assert main(["agc", "--rho", "1", "--lg-db", "0"]) == 0
        out = fields(capsys.readouterr().out)
        assert float(out["alpha_g"]) == pytest.approx(0.5)
        assert float(out["mu"]) == pytest.approx(5.0)

    def test_rate(self, capsys):
        assert main(["rate", "--receiver", "ml", "--rho", "2/3", "--snr-db", "10", "--lg-db", "0"]) == 0
        out = fields(capsys.readouterr().out)
        assert float(out["se_bps_hz"]) == pytest.approx(2.414636116077, abs=1e-11)
        assert out["path"] == "recursion"

    def test_rate_dense(self, capsys):
        main(["rate", "--receiver", "ml", "--rho", "2/3", "--lg-db", "0", "--n", "120", "--dense"])
        out = fields(capsys.readouterr().out)
        assert out["path"] == "dense_matrix"
        assert float(out["se_bps_hz"]) == pytest.approx(2.414636116077, abs=1e-9)

    def test_power_fraction(self, capsys):
        main(["rate", "--receiver", "fd-direct-pc", "--snr-db", "20", "--lg-db", "0"])
        out = fields(capsys.readouterr().out)
        assert float(out["power_fraction"]) == pytest.approx(0.1)

    def test_decimal_rho_note(self, capsys):
        main(["rate", "--receiver", "sic", "--rho", "0.6667"])
        err = capsys.readouterr().err
        assert "snapped to 2/3" in err

    def test_domain_error(self, capsys):
        assert main(["rate", "--receiver", "lmmse", "--rho", "1", "--lg-db", "0"]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_bad_rho(self):
        with pytest.raises(SystemExit):
            main(["rate", "--receiver", "ml", "--rho", "1/3"])

    def test_matrices(self, tmp_path, capsys):
        path = tmp_path / "tq.csv"
        assert main(["matrices", "--rho", "2/3", "--n", "12", "--lg-db", "0", "--dump", str(path)]) == 0
        mats = load_matrices(path)
        assert mats["T"].shape == (12, 12)
        assert "N=12 P=6" in capsys.readouterr().out

    def test_matrices_full_duplex(self, tmp_path):
        assert main(["matrices", "--rho", "1", "--dump", str(tmp_path / "x")]) == 2

    def test_td_check(self, capsys):
        assert main(["td-check", "--nch", "2", "--snr-db", "10", "--lg-db", "0", "--kappa", "60"]) == 0
        out = fields(capsys.readouterr().out)
        assert abs(float(out["gap"])) < 0.1


class TestTables:
    def test_sweep_stdout(self, capsys):
        assert main(["sweep", "--axis", "snr_db", "--range", "-10:10:3", "--receivers", "ml,hd", "--lg-db", "-5"]) == 0
        table = SweepTable.from_csv(capsys.readouterr().out)
        assert table.values == [-10.0, 0.0, 10.0]
        assert list(table.columns) == ["ml", "hd"]

    def test_sweep_rho_range_with_plot(self, tmp_path):
        out, fig = tmp_path / "s.csv", tmp_path / "s.png"
        rc = main([
            "sweep", "--axis", "rho", "--range", "1/2:1:6", "--receivers", "ml,sic,direct",
            "--snr-db", "15", "--lg-db", "-5", "--out", str(out), "--plot", str(fig),
        ])
        assert rc == 0
        table = SweepTable.read(out)
        assert table.k is not None
        assert fig.stat().st_size > 0

    def test_sweep_needs_values(self, capsys):
        assert main(["sweep", "--axis", "snr_db"]) == 2

    def test_boundary(self, tmp_path):
        out, fig = tmp_path / "b.dat", tmp_path / "b.png"
        rc = main([
            "boundary", "--strategy", "all", "--snr-db-range", "-40:40:5",
            "--out", str(out), "--format", "plot_data", "--plot", str(fig),
        ])
        assert rc == 0
        body = out.read_text().split("\n\n", 1)[1].splitlines()
        assert body[0].split() == ["snr_db", "ml", "direct", "direct_pc"]
        assert float(body[1].split()[1]) == pytest.approx(-3.01, abs=0.1)
        assert fig.exists()

    def test_boundary_unknown(self):
        assert main(["boundary", "--strategy", "zf"]) == 2


class TestConfig:
    def test_config_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("receiver = ml\nrho = 3/4\nsnr-db = 15\nlg-db = -5\n")
        assert main(["rate", "--config", str(cfg)]) == 0
        a = float(fields(capsys.readouterr().out)["se_bps_hz"])
        assert main(["rate", "--config", str(cfg), "--snr-db", "5"]) == 0
        b = float(fields(capsys.readouterr().out)["se_bps_hz"])
        assert a > b > 0
        assert a / (0.5 * math.log2(1 + 2 * 10**1.5)) >= 1.27

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = red\n")
        assert main(["agc", "--config", str(cfg)]) == 2
        assert "colour" in capsys.readouterr().err
