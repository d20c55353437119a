"""Command-line behaviour: outputs, config precedence, exit codes."""
import json
import subprocess
import sys

import numpy as np
import pytest

from renormalens import __version__
from renormalens.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSpectrum:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--top", "4")
        assert code == 0
        doc = json.loads(out)
        assert doc["version"] == __version__
        assert np.allclose(doc["result"]["eta"], 0.2 ** np.arange(1, 5), rtol=1e-6)

    def test_identity(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--channel", "identity", "--grid-n", "101", "--top", "5")
        assert code == 0
        assert np.allclose(json.loads(out)["result"]["eta"], 1.0)

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--top", "3", "--format", "csv")
        lines = out.splitlines()
        assert lines[0].startswith("# renormalens")
        assert lines[3] == "index,eta,label"
        assert len(lines) == 7

    def test_byte_identical(self, capsys):
        _, a, _ = run(capsys, "spectrum", "--top", "3")
        _, b, _ = run(capsys, "spectrum", "--top", "3")
        assert a == b

    def test_invalid_sigma(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code, _, err = run(capsys, "spectrum", "--sigma", "-1", "-o", str(target))
        assert code == 2
        assert "sigma" in err
        assert not target.exists()


class TestConfig:
    def test_flag_beats_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sigma": 1.0, "top": 2}))
        _, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--sigma", "2.0")
        doc = json.loads(out)
        assert doc["config"]["sigma"] == 2.0 and doc["config"]["top"] == 2
        assert len(doc["result"]["eta"]) == 2

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code, _, _ = run(capsys, "spectrum", "--config", str(cfg))
        assert code == 2

    def test_digest_tracks_config(self, capsys):
        _, a, _ = run(capsys, "kg", "--n-k", "3")
        _, b, _ = run(capsys, "kg", "--n-k", "4")
        assert json.loads(a)["config_digest"] != json.loads(b)["config_digest"]


class TestScenarios:
    def test_kg_uncertainty(self, capsys):
        code, _, err = run(capsys, "kg", "--y-phi", "0.5", "--y-pi", "0.5")
        assert code == 2
        assert "uncertainty" in err

    def test_kg_sector(self, capsys):
        code, out, _ = run(capsys, "kg", "--n-k", "3", "--sector", "--y-phi", "30", "--y-pi", "30")
        res = json.loads(out)["result"]
        assert code == 0
        assert np.allclose(res["sector_eta_phi"], res["eta_phi"], rtol=1e-2)

    def test_flow(self, capsys):
        code, out, _ = run(capsys, "flow")
        res = json.loads(out)["result"]
        assert code == 0
        assert res["max_deviation"] <= 1e-6
        assert [p["Lambda"] for p in res["trajectory"]] == [10.0, 20.0, 40.0]

    def test_perturb_trivial(self, capsys):
        code, out, _ = run(capsys, "perturb", "--lam", "0")
        levels = json.loads(out)["result"]["levels"]
        assert code == 0
        assert all(lv["shift"] == 0.0 for lv in levels)

    def test_check_subset(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, _, err = run(capsys, "check", "--only", "A1", "-o", str(target))
        assert code == 0
        assert "A1 PASS" in err
        res = json.loads(target.read_text())["result"]
        assert res["all_passed"] and "seconds" not in res["results"][0]

    def test_check_unknown(self, capsys):
        assert run(capsys, "check", "--only", "A9")[0] == 2


@pytest.mark.slow
def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "renormalens", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert __version__ in proc.stdout
