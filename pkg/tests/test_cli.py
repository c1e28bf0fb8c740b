import csv
import math

import pytest

from twqkd.cli import CSV_HEADER, main, read_key_values, sweep_lengths, ConfigError
from twqkd.protocols import passive_constraints


def _kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestRate:
    def test_flqkd_fifty_km(self, capsys):
        assert main(["rate", "--protocol", "fl-qkd", "--ns", "0.05", "--L", "50"]) == 0
        out = _kv(capsys.readouterr().out)
        assert out["kappa_S"] == "0.1000"
        assert float(out["SKR"]) == pytest.approx(1e10 * float(out["SKE"]))

    def test_full_destruction(self, capsys):
        assert main(["rate", "--ns", "0.05", "--L", "50", "--fe", "1", "--xi", "1"]) == 0
        assert _kv(capsys.readouterr().out)["SKE"] == "0"

    def test_missing_ns(self, capsys):
        assert main(["rate", "--L", "50"]) == 2
        assert "ns" in capsys.readouterr().err

    def test_missing_length(self, capsys):
        assert main(["rate", "--ns", "0.01"]) == 2
        assert "L" in capsys.readouterr().err

    @pytest.mark.parametrize("flag,value,field", [("--xi", "1.5", "xi"), ("--ns", "-1", "ns"),
                                                   ("--gb", "0.5", "gb"), ("--fe", "2", "fe"),
                                                   ("--L", "-3", "L"), ("--rate-hz", "0", "rate-hz")])
    def test_validation_names_field(self, capsys, flag, value, field):
        args = ["rate", "--ns", "0.01", "--L", "10"] + [flag, value]
        assert main(args) == 2
        assert field in capsys.readouterr().err

    def test_unknown_protocol_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["rate", "--protocol", "bb84", "--L", "1"])
        assert exc.value.code == 2

    def test_config_file_and_flag_priority(self, tmp_path, capsys):
        cfg = _write(tmp_path / "run.cfg", "# reference point\nprotocol=tmsv-disp\nns=100\nex=1e4\nL=1\n")
        assert main(["rate", "--config", cfg]) == 0
        first = _kv(capsys.readouterr().out)
        assert float(first["L_km"]) == 1.0
        assert main(["rate", "--config", cfg, "--L", "2"]) == 0
        second = _kv(capsys.readouterr().out)
        assert float(second["L_km"]) == 2.0
        assert float(second["SKE"]) < float(first["SKE"])

    def test_bad_config_line(self, tmp_path, capsys):
        cfg = _write(tmp_path / "bad.cfg", "ns=0.1\nthis line is broken\n")
        assert main(["rate", "--config", cfg, "--L", "1"]) == 2
        assert ":2:" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        cfg = _write(tmp_path / "bad.cfg", "colour=blue\n")
        assert main(["rate", "--config", cfg]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["rate", "--config", str(tmp_path / "nope.cfg")]) == 3


class TestChi:
    def test_intact_tmsv(self, capsys):
        args = ["chi", "--protocol", "tmsv-disp", "--ns", "1", "--kappa-bar", "1", "--fe", "0", "--ex", "0"]
        assert main(args) == 0
        assert abs(float(_kv(capsys.readouterr().out)["chi_E"])) <= 1e-6

    def test_destruction_helps_eve(self, capsys):
        base = ["chi", "--ns", "0.05", "--kappa-bar", "0.1"]
        main(base + ["--fe", "0"])
        low = float(_kv(capsys.readouterr().out)["chi_E"])
        main(base + ["--fe", "1"])
        high = float(_kv(capsys.readouterr().out)["chi_E"])
        assert high >= low

    def test_vanishing_light(self, capsys):
        assert main(["chi", "--ns", "1e-12", "--kappa-bar", "0.5"]) == 0
        assert float(_kv(capsys.readouterr().out)["chi_E"]) <= 1e-6

    def test_prints_attack(self, capsys):
        main(["chi", "--ns", "1", "--kappa-bar", "0.5", "--psi", "pure-loss", "--psi-param", "0.3"])
        out = _kv(capsys.readouterr().out)
        cx, cp = float(out["c_x"]), float(out["c_p"])
        assert (cx * cx + cp * cp) / 8 == pytest.approx(0.5 * 1 * 2, rel=1e-9)

    def test_psi_param_required(self):
        assert main(["chi", "--ns", "1", "--kappa-bar", "0.5", "--psi", "pure-loss"]) == 2

    def test_infeasible_intrusion(self):
        assert main(["chi", "--ns", "1", "--kappa-bar", "1.5", "--fe", "0"]) == 2


class TestCheck:
    def test_passive_file(self, tmp_path, capsys):
        meas = passive_constraints(0.63, 0.05, M=10**6)
        path = _write(tmp_path / "m.txt", f"M={meas.M}\ntotal_photons={meas.total_photons!r}\n"
                                          f"total_correlation={meas.total_correlation!r}\n")
        assert main(["check", path, "--ns", "0.05"]) == 0
        out = _kv(capsys.readouterr().out)
        assert out["f_E"] == "0.000000" and out["kappa_bar_S"] == "0.630000"

    def test_zero_correlation(self, tmp_path, capsys):
        path = _write(tmp_path / "m.txt", "M=100\ntotal_photons=5\ntotal_correlation=0\n")
        assert main(["check", path, "--ns", "0.1"]) == 0
        assert _kv(capsys.readouterr().out)["f_E"] == "1.000000"

    @pytest.mark.parametrize("text,line", [
        ("M=100\ntotal_photons=-5\ntotal_correlation=0\n", ":2:"),
        ("M=100\ntotal_photons=5\ntotal_correlation=abc\n", ":3:"),
        ("M=1.5\ntotal_photons=5\ntotal_correlation=0\n", ":1:"),
        ("M=100\nphotons 5\ntotal_correlation=0\n", ":2:"),
        ("M=100\ntotal_photons=5\nM=3\n", ":3:"),
    ])
    def test_malformed(self, tmp_path, capsys, text, line):
        path = _write(tmp_path / "m.txt", text)
        assert main(["check", path, "--ns", "0.1"]) == 2
        assert line in capsys.readouterr().err

    def test_missing_key(self, tmp_path):
        path = _write(tmp_path / "m.txt", "M=100\ntotal_photons=5\n")
        assert main(["check", path, "--ns", "0.1"]) == 2

    def test_inconsistent(self, tmp_path):
        path = _write(tmp_path / "m.txt", "M=1\ntotal_photons=0\ntotal_correlation=1\n")
        assert main(["check", path, "--ns", "0.1"]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "none.txt"), "--ns", "0.1"]) == 3


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


class TestSweep:
    ARGS = ["sweep", "--protocol", "tmsv-disp", "--ns", "100", "--ex", "1e4",
            "--lmin", "0", "--lmax", "50", "--lstep", "10"]

    def test_rows_header_and_identities(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(self.ARGS + ["--out", str(out)]) == 0
        header, rows = _read_csv(out)
        assert header == CSV_HEADER
        assert [r[0] for r in rows] == [0, 10, 20, 30, 40, 50]
        for r in rows:
            i_ab, i_e, s, skr = r[3], r[5], r[6], r[7]
            assert s == max(1.0 * i_ab - i_e, 0.0)
            assert skr == 1e10 * s
        text = out.read_text()
        assert "e+" in text or "e-" in text

    def test_byte_identical_and_parallel(self, tmp_path):
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        assert main(self.ARGS + ["--out", str(a)]) == 0
        assert main(self.ARGS + ["--out", str(b)]) == 0
        assert main(self.ARGS + ["--out", str(c), "--jobs", "3"]) == 0
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_round_trip_with_xi(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--ns", "0.02", "--xi", "0.9", "--lmax", "100", "--lstep", "25",
                     "--out", str(out)]) == 0
        _, rows = _read_csv(out)
        for r in rows:
            assert r[6] == max(0.9 * r[3] - r[5], 0.0)
            assert r[7] == 1e10 * r[6]
            assert r[5] == 200 * r[4]

    def test_unwritable(self, tmp_path):
        assert main(self.ARGS + ["--out", str(tmp_path / "missing" / "s.csv")]) == 3

    def test_bad_range(self, tmp_path):
        assert main(["sweep", "--ns", "1", "--lmin", "10", "--lmax", "5", "--lstep", "1",
                     "--out", str(tmp_path / "x.csv")]) == 2

    @pytest.mark.slow
    def test_optimized_brightness_varies(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--optimize-ns", "--lmin", "10", "--lmax", "50", "--lstep", "40",
                     "--jobs", "2", "--out", str(out)]) == 0
        _, rows = _read_csv(out)
        assert len({r[2] for r in rows}) == len(rows)


class TestHelpers:
    def test_sweep_lengths(self):
        assert sweep_lengths(0, 50, 10) == [0, 10, 20, 30, 40, 50]
        assert sweep_lengths(0, 0.3, 0.1) == pytest.approx([0, 0.1, 0.2, 0.3])
        assert sweep_lengths(5, 5, 1) == [5]
        with pytest.raises(ConfigError):
            sweep_lengths(0, 1, 0)

    def test_read_key_values(self, tmp_path):
        path = _write(tmp_path / "c.cfg", "a = 1 # note\n\n# skip\nb=x=y\n")
        got = read_key_values(path)
        assert got == {"a": ("1", 1), "b": ("x=y", 4)}
        assert not math.isnan(float(got["a"][0]))
