"""CLI: subcommands, config merging, exit codes, deterministic outputs."""

import json

import pytest

from sphmax import cli
from sphmax.errors import DomainError


def _run(tmp_path, *argv):
    return cli.main(["--out", str(tmp_path), *argv])


class TestParseFn:
    def test_kinds(self):
        assert cli.parse_fn("ball:rho=0.5").kind == "ball"
        assert cli.parse_fn("annulus:delta=0.1,center_radius=2").params[
            "center_radius"] == 2.0
        assert cli.parse_fn("log_weight").kind == "log_weight"
        assert cli.parse_fn("constant:value=3").params["value"] == 3.0

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            cli.parse_fn("gaussian:sigma=1")


class TestSubcommands:
    def test_avg_writes_outputs(self, tmp_path):
        rc = _run(tmp_path, "avg", "--cells", "64", "--quad", "128")
        assert rc == 0
        assert (tmp_path / "avg.csv").exists()
        assert (tmp_path / "avg.raw").exists()
        summary = json.loads((tmp_path / "avg_summary.json").read_text())
        assert summary["command"] == "avg"
        assert "csv" in summary["outputs"]

    def test_maximal(self, tmp_path):
        rc = _run(tmp_path, "maximal", "--cells", "48", "--quad", "64")
        assert rc == 0
        assert (tmp_path / "maximal.csv").exists()

    def test_sparse(self, tmp_path):
        rc = _run(tmp_path, "sparse")
        assert rc == 0
        summary = json.loads((tmp_path / "sparse_summary.json").read_text())
        assert summary["sparsity_verified"] is True

    def test_weights(self, tmp_path):
        rc = _run(tmp_path, "weights", "--b", "1.0", "--levels", "2,3,4")
        assert rc == 0
        summary = json.loads((tmp_path / "weights_summary.json").read_text())
        assert summary["member"] is True

    def test_exponents(self, tmp_path):
        rc = _run(tmp_path, "exponents")
        assert rc == 0
        payload = json.loads((tmp_path / "exponents.json").read_text())
        assert payload["all_hold"] is True
        assert payload["interior"] is True

    def test_report(self, tmp_path):
        rc = _run(tmp_path, "report")
        assert rc == 0
        payload = json.loads((tmp_path / "section5.json").read_text())
        assert payload["case2"]["lacunary"]["feasible"] is False


class TestExitCodes:
    def test_invalid_parameters(self, tmp_path, capsys):
        rc = _run(tmp_path, "avg", "--fn", "ball:rho=-1")
        assert rc == 1
        assert "invalid parameters" in capsys.readouterr().err

    def test_resolution_failure(self, tmp_path, capsys):
        rc = _run(tmp_path, "knapp", "--deltas", "0.0000001")
        assert rc == 2
        assert "resolution error" in capsys.readouterr().err

    def test_io_failure(self, capsys):
        rc = cli.main(["--out", "/proc/definitely/not/writable", "avg"])
        assert rc == 3


class TestConfig:
    def test_config_supplies_defaults_flags_win(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[weights]\nb = 2.2\nlevels = 2,3\n")
        out1 = tmp_path / "a"
        rc = cli.main(["--config", str(cfg), "--out", str(out1), "weights"])
        assert rc == 0
        s1 = json.loads((out1 / "weights_summary.json").read_text())
        assert s1["member"] is False  # b = 2.2 from the config
        out2 = tmp_path / "b"
        rc = cli.main(["--config", str(cfg), "--out", str(out2), "weights",
                       "--b", "1.0"])
        assert rc == 0
        s2 = json.loads((out2 / "weights_summary.json").read_text())
        assert s2["member"] is True  # flag overrides config


class TestDeterminism:
    def test_thread_count_identical_csv(self, tmp_path):
        out1, out8 = tmp_path / "t1", tmp_path / "t8"
        for out, threads in ((out1, "1"), (out8, "8")):
            rc = cli.main(["--out", str(out), "--threads", threads,
                           "maximal", "--cells", "48", "--quad", "64"])
            assert rc == 0
        assert (out1 / "maximal.csv").read_bytes() == \
            (out8 / "maximal.csv").read_bytes()
