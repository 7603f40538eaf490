"""
Test suite for the command line interface.
"""

import json
import math

import pytest

from hypres.cli import build_parser, main


def _write_config(path, **overrides):
    document = {
        "system": {"kind": "normal_form",
                   "parameters": {"T0": 2 * math.pi, "mu_re_1": math.pi / 2, "mu_im_2": 0.3}},
        "energy": 1.0,
        "grid": {"half_width": 0.1, "points": 3},
        "orbit": {"samples": 32},
        "hypotheses": {"K": 6, "tol": 1e-6},
        "resonances": {"h": 0.01, "C": 10.0, "alpha_max": 1, "k_range": [99, 101]},
    }
    document.update(overrides)
    path.write_text(json.dumps(document))
    return str(path)


class TestCommands:
    """Subcommands on the normal form."""

    def setup_method(self):
        self.parser = build_parser()

    def test_parser_requires_config(self):
        """--config is mandatory for every subcommand."""
        with pytest.raises(SystemExit):
            self.parser.parse_args(["find-orbit"])

    def test_find_orbit(self, tmp_path, capsys):
        """find-orbit prints the orbit section and provenance."""
        config = _write_config(tmp_path / "run.json")
        status = main(["find-orbit", "--config", config, "--cache", str(tmp_path / "cache.json")])
        report = json.loads(capsys.readouterr().out)

        assert status == 0
        assert list(report) == ["schema_version", "orbit", "provenance"]
        assert report["orbit"]["period"] == pytest.approx(2 * math.pi, abs=1e-9)
        assert report["provenance"]["cache"] == {"enabled": True, "path": str(tmp_path / "cache.json")}
        assert (tmp_path / "cache.json").exists()

    def test_check_prints_table(self, tmp_path, capsys):
        """check shows the certificate table before the JSON."""
        config = _write_config(tmp_path / "run.json")
        status = main(["check", "--config", config, "--cache", str(tmp_path / "cache.json")])
        out = capsys.readouterr().out
        assert status == 0
        assert "strong non-resonance" in out
        assert '"hypotheses"' in out

    def test_no_subcommand(self, capsys):
        """Without a subcommand the help is shown and the status is 2."""
        assert main([]) == 2


class TestExitStatus:
    """Exit codes 2 and 4."""

    def test_bad_config_is_status_2(self, tmp_path, capsys):
        """An unknown system kind exits with 2 and a JSON error record."""
        config = _write_config(tmp_path / "run.json", system={"kind": "pendulum"})
        status = main(["find-orbit", "--config", config, "--json-errors"])
        record = json.loads(capsys.readouterr().out)
        assert status == 2
        assert record["code"] == "CONFIGURATION_ERROR"
        assert record["exit_status"] == 2

    def test_mismatched_seed_point_is_status_2(self, tmp_path, capsys):
        """A seed_point with x and xi of different lengths is a configuration error."""
        config = _write_config(tmp_path / "run.json", seed_point={"x": [0.0, 0.0], "xi": [0.0]})
        status = main(["find-orbit", "--config", config, "--json-errors"])
        record = json.loads(capsys.readouterr().out)
        assert status == 2
        assert record["code"] == "CONFIGURATION_ERROR"

    def test_missing_config_file(self, tmp_path, capsys):
        """A missing document is a configuration error."""
        assert main(["report", "--config", str(tmp_path / "missing.json")]) == 2
        assert "CONFIGURATION_ERROR" in capsys.readouterr().err

    def test_strict_hypothesis_failure(self, tmp_path, capsys):
        """--strict turns a failed certificate into status 4."""
        config = _write_config(
            tmp_path / "run.json",
            system={"kind": "normal_form",
                    "parameters": {"T0": 2 * math.pi, "mu_re_1": 1.0, "mu_im_2": 2 * math.pi * 0.3}},
            hypotheses={"K": 10, "tol": 1e-6},
        )
        cache = str(tmp_path / "cache.json")
        assert main(["check", "--config", config, "--cache", cache]) == 0
        assert main(["check", "--config", config, "--cache", cache, "--strict"]) == 4


@pytest.mark.slow
class TestReport:
    """Full reports and side files."""

    def test_reports_are_deterministic(self, tmp_path, capsys):
        """The first run computes and caches the orbit; every run prints the same bytes."""
        config = _write_config(tmp_path / "run.json")
        cache = str(tmp_path / "cache.json")
        outputs = []
        for _ in range(3):
            assert main(["report", "--config", config, "--cache", cache]) == 0
            outputs.append(capsys.readouterr().out)

        assert outputs[0] == outputs[1] == outputs[2]

    def test_report_sections(self, tmp_path, capsys):
        """report contains every stage in a fixed order."""
        config = _write_config(tmp_path / "run.json")
        assert main(["report", "--config", config, "--cache", str(tmp_path / "cache.json")]) == 0
        report = json.loads(capsys.readouterr().out)
        assert list(report) == ["schema_version", "orbit", "family", "floquet", "hypotheses",
                                "resonances", "provenance"]
        assert report["hypotheses"]["all_ok"] is True
        assert report["resonances"]["summary"]["total"] == 12

    def test_out_directory(self, tmp_path, capsys):
        """--out writes report.json and the CSV side files."""
        config = _write_config(tmp_path / "run.json")
        out = tmp_path / "out"
        assert main(["report", "--config", config, "--cache", str(tmp_path / "cache.json"),
                     "--out", str(out)]) == 0
        for name in ("report.json", "orbit.csv", "family.csv", "resonances.csv"):
            assert (out / name).exists()
        assert json.loads((out / "report.json").read_text()) == json.loads(capsys.readouterr().out)
