import pytest

from crod.cli import main
from crod.config import build_config, parse_config, read_config_file
from crod.errors import ConfigError
from crod.experiments import read_csv, write_csv


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigParsing:
    def test_empty_file_lists_missing_keys(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(ConfigError) as err:
            parse_config(path, "detection")
        assert "trials" in str(err.value) and "seed" in str(err.value)

    def test_minimal_config_fills_defaults(self, tmp_path):
        path = write(tmp_path, "trials = 5\nseed = 3\n")
        cfg = parse_config(path, "gaussianity")
        assert cfg.N == 1024 and cfg.gamma == 0.75
        assert cfg.snr_db == 5.0 and cfg.lam == 0.1 and cfg.rho2 == 0.1
        assert cfg.trials == 5 and cfg.seed == 3

    def test_comments_and_inline_comments(self, tmp_path):
        path = write(tmp_path, "# full line\ntrials = 4 # inline\nseed=1\n")
        cfg = parse_config(path, "dominance")
        assert cfg.trials == 4

    def test_unknown_key_named(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nbogus=3\n")
        with pytest.raises(ConfigError) as err:
            parse_config(path, "detection")
        assert "bogus" in str(err.value)

    def test_malformed_numeric_named(self, tmp_path):
        path = write(tmp_path, "trials=abc\nseed=0\n")
        with pytest.raises(ConfigError) as err:
            read_config_file(path)
        assert "trials" in str(err.value)

    def test_duplicate_key(self, tmp_path):
        path = write(tmp_path, "trials=1\ntrials=2\n")
        with pytest.raises(ConfigError) as err:
            read_config_file(path)
        assert "duplicate" in str(err.value)

    def test_m_and_gamma_conflict(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nM=128\ngamma=0.5\n")
        with pytest.raises(ConfigError):
            parse_config(path, "detection")

    def test_m_replaces_gamma(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nN=256\nM=192\n")
        cfg = parse_config(path, "detection")
        assert cfg.gamma == 0.75

    def test_snr_sigma_conflict(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nsnr_db=5\nsigma2=0.1\n")
        with pytest.raises(ConfigError):
            parse_config(path, "detection")

    def test_sigma2_overrides_suite_snr(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nsigma2=0.07\n")
        cfg = parse_config(path, "detection")
        assert cfg.sigma2 == 0.07 and cfg.snr_db is None

    def test_sweep_rules(self, tmp_path):
        path = write(tmp_path, "trials=1\nseed=0\nrho2=0.05,0.1\ngamma=0.4,0.6\n")
        with pytest.raises(ConfigError):
            parse_config(path, "detection")
        path = write(tmp_path, "trials=1\nseed=0\nrho2=0.05,0.1\n")
        cfg = parse_config(path, "variance-error")
        assert cfg.sweep_param == "rho2" and cfg.sweep_values == (0.05, 0.1)
        with pytest.raises(ConfigError):
            parse_config(path, "gaussianity")

    def test_trials_zero_rejected(self):
        with pytest.raises(ConfigError):
            build_config("variance-error", {"trials": 0, "seed": 0})

    def test_rate_validation(self):
        with pytest.raises(ConfigError):
            build_config("detection", {"trials": 1, "seed": 0, "p_fa": 1.5})
        with pytest.raises(ConfigError):
            build_config("detection", {"trials": 1, "seed": 0, "gamma": 1.5})

    def test_detector_subset(self):
        cfg = build_config("detection", {"trials": 1, "seed": 0,
                                         "detectors": ("CROD", "CAMP")})
        assert cfg.detectors == ("CROD", "CAMP")
        with pytest.raises(ConfigError):
            build_config("detection", {"trials": 1, "seed": 0,
                                       "detectors": ("XYZ",)})


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        rows = [{"a": 1, "b": 0.125, "c": "x"}, {"a": 2, "b": float("nan"), "c": "y"}]
        path = str(tmp_path / "out.csv")
        write_csv(rows, path, ["a", "b", "c"], comments=["trials=2 seed=0"])
        comments, back = read_csv(path)
        assert comments == ["trials=2 seed=0"]
        assert back[0] == {"a": "1", "b": "0.125", "c": "x"}
        assert back[1]["b"] == "nan"

    def test_written_twice_identical(self, tmp_path):
        rows = [{"a": 1.0 / 3.0}]
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        write_csv(rows, p1, ["a"])
        write_csv(rows, p2, ["a"])
        assert open(p1, "rb").read() == open(p2, "rb").read()


class TestCli:
    def test_config_error_exit_code(self, tmp_path, capsys):
        path = write(tmp_path, "bogus=1\n")
        assert main(["detection", "--config", path]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_required_exit_code(self, capsys):
        assert main(["detection"]) == 2

    def test_numeric_error_exit_code(self, monkeypatch, capsys):
        from crod import cli
        from crod.errors import NumericError

        def boom(cfg):
            raise NumericError("synthetic failure")

        monkeypatch.setitem(cli.SUITE_RUNNERS, "dominance", boom)
        code = main(["dominance", "--trials", "1", "--seed", "0"])
        assert code == 3
        assert "synthetic failure" in capsys.readouterr().err

    def test_dominance_smoke_run(self, tmp_path, capsys):
        cfg = write(tmp_path, "N = 32\ngamma = 0.5\nrho2 = 0.1\nsnr_db = 10\n")
        out = str(tmp_path / "dom.csv")
        code = main(["dominance", "--config", cfg, "--trials", "2",
                     "--seed", "1", "--out", out, "--workers", "1"])
        assert code == 0
        comments, rows = read_csv(out)
        assert any("seed=1" in c for c in comments)
        assert len(rows) == 2
        assert all(r["violations_null"] == "0" for r in rows)

    def test_cli_overrides_win(self, tmp_path):
        cfg_path = write(tmp_path, "trials = 99\nseed = 99\nN = 32\n")
        cfg = parse_config(cfg_path, "dominance",
                           {"trials": 2, "seed": 1, "output_path": None,
                            "parallelism": 1})
        assert cfg.trials == 2 and cfg.seed == 1
