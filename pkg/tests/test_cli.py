"""Tests for the sisrec command line"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from rich.console import Console

from sisrec.cli.main import cli
from sisrec.cli.output import OutputFormatter
from sisrec.cli.validators import InputValidator
from sisrec.core.signal import SisSpec
from sisrec.schemas import (
    CheckResult,
    DetectionResult,
    EstimatePayload,
    FilterPayload,
    SignalPayload,
)
from sisrec.services.filter_oracle import verify_reproducing


@pytest.fixture
def runner(monkeypatch) -> CliRunner:
    """CLI runner with a short solver iteration cap."""
    monkeypatch.setenv("SISREC_MAX_ITER", "200")
    return CliRunner()


@pytest.fixture
def spec_file(tmp_path: Path) -> Path:
    """A single harmonic at 0.3 rad/sample."""
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"roots": [{"re": math.cos(0.3), "im": math.sin(0.3)}]}))
    return path


@pytest.fixture
def observation_file(runner, spec_file, tmp_path) -> Path:
    """Noisy observations on [-54, 54] written by synth."""
    path = tmp_path / "obs.json"
    args = ["synth", "--spec", str(spec_file), "--n", "54", "--sigma", "0.05", "--seed", "3"]
    result = runner.invoke(cli, [*args, "--normalize", "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


class TestBasics:
    """Help and version"""

    def test_help(self, runner):
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("synth", "oracle", "denoise", "detect", "bench", "check"):
            assert command in result.output

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_usage_error_exits_with_one(self, runner):
        """A missing required option is a usage error with status 1"""
        result = runner.invoke(cli, ["denoise", "--s", "1"])
        assert result.exit_code == 1


class TestSynth:
    """Observation synthesis"""

    def test_stdout_payload(self, runner, spec_file):
        """Without --out the observation JSON goes to stdout"""
        result = runner.invoke(cli, ["synth", "--spec", str(spec_file), "--n", "10"])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["n"] == 10
        assert len(payload["re"]) == 21
        assert payload["clean"]["n"] == 10

    def test_explicit_coefficients(self, runner, spec_file, tmp_path):
        """--coeffs gives x_t = c w^t exactly when sigma = 0"""
        coeffs = tmp_path / "coeffs.json"
        coeffs.write_text(json.dumps({"re": [2.0], "im": [0.0]}))
        result = runner.invoke(
            cli, ["synth", "--spec", str(spec_file), "--n", "5", "--coeffs", str(coeffs)]
        )
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        t = np.arange(-5, 6)
        np.testing.assert_allclose(payload["re"], 2.0 * np.cos(0.3 * t), atol=1e-12)
        np.testing.assert_allclose(payload["im"], 2.0 * np.sin(0.3 * t), atol=1e-12)

    def test_seeded(self, runner, spec_file):
        """Equal seeds give equal observations"""
        args = ["synth", "--spec", str(spec_file), "--n", "8", "--sigma", "0.3", "--seed", "4"]
        assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout

    def test_missing_spec(self, runner, tmp_path):
        result = runner.invoke(cli, ["synth", "--spec", str(tmp_path / "none.json"), "--n", "4"])
        assert result.exit_code == 1

    def test_invalid_spec(self, runner, tmp_path):
        """A spec without roots is rejected"""
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"roots": []}))
        result = runner.invoke(cli, ["synth", "--spec", str(bad), "--n", "4"])
        assert result.exit_code == 1


class TestOracle:
    """Hybrid filter construction"""

    def test_certificates(self, runner, spec_file):
        result = runner.invoke(cli, ["oracle", "--spec", str(spec_file), "--m", "3"])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["lo"] >= -27
        assert payload["certificates"]["passed"] is True
        assert payload["causal"] is False

    def test_emitted_filter_reproduces(self, runner, spec_file):
        """The coefficients written by oracle reproduce the subspace they were built for"""
        result = runner.invoke(cli, ["oracle", "--spec", str(spec_file), "--m", "3"])
        phi = FilterPayload.model_validate_json(result.stdout).to_sequence()
        assert phi.within(27)
        assert verify_reproducing(phi, SisSpec.from_roots([np.exp(0.3j)])) < 1e-7

    def test_causal(self, runner, spec_file, tmp_path):
        out = tmp_path / "filter.json"
        result = runner.invoke(
            cli, ["oracle", "--spec", str(spec_file), "--m", "3", "--causal", "--out", str(out)]
        )
        assert result.exit_code == 0
        payload = json.loads(out.read_text())
        assert payload["causal"] is True
        assert payload["lo"] >= 0
        phi = FilterPayload.model_validate_json(out.read_text()).to_sequence()
        assert phi.within_causal(54)
        assert verify_reproducing(phi, SisSpec.from_roots([np.exp(0.3j)])) < 1e-6

    def test_window_too_short(self, runner, tmp_path):
        """m < s - 1 is reported as an error"""
        spec = tmp_path / "spec3.json"
        spec.write_text(json.dumps({"roots": [{"re": 1.0}, {"re": -1.0}, {"re": 0.0, "im": 1.0}]}))
        result = runner.invoke(cli, ["oracle", "--spec", str(spec), "--m", "1"])
        assert result.exit_code == 1


class TestDenoise:
    """Estimation from files"""

    def test_core(self, runner, observation_file):
        result = runner.invoke(cli, ["denoise", "--input", str(observation_file), "--s", "1"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.stdout)
        assert payload["mode"] == "core"
        assert payload["lo"] == -27
        assert len(payload["re"]) == 55
        assert payload["risk_bound"] > 0

    def test_core_estimate_tracks_clean_signal(self, runner, observation_file):
        """The denoised window stays within a few noise variances of the clean signal"""
        result = runner.invoke(cli, ["denoise", "--input", str(observation_file), "--s", "1"])
        x_hat = EstimatePayload.model_validate_json(result.stdout).to_sequence()
        observed = SignalPayload.model_validate_json(observation_file.read_text())
        assert observed.clean is not None
        clean = observed.clean.to_sequence()
        y = observed.to_sequence()
        assert x_hat.support == (-27, 27)
        assert observed.sigma == pytest.approx(0.05)
        assert y.support == (-54, 54)
        est_err = np.mean(np.abs(x_hat.values - clean.window(27)) ** 2)
        assert est_err < 4 * observed.sigma**2

    def test_full(self, runner, observation_file, tmp_path):
        out = tmp_path / "est.json"
        args = ["denoise", "--input", str(observation_file), "--s", "1", "--mode", "full"]
        result = runner.invoke(cli, [*args, "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["lo"] == -54
        assert payload["fits"] == 3

    def test_causal_with_lead(self, runner, observation_file):
        """N = 54, h = 2 gives n' = 26 and output from 2"""
        args = ["denoise", "--input", str(observation_file), "--s", "1", "--mode", "causal"]
        result = runner.invoke(cli, [*args, "--lead", "2"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.stdout)
        assert payload["lo"] == 2
        assert payload["risk_bound"] is None

    def test_order_too_large(self, runner, observation_file):
        """Core fits need 2n + 1 >= 9(s - 1)"""
        result = runner.invoke(cli, ["denoise", "--input", str(observation_file), "--s", "10"])
        assert result.exit_code == 1

    def test_invalid_delta(self, runner, observation_file):
        args = ["denoise", "--input", str(observation_file), "--s", "1", "--delta", "1.5"]
        assert runner.invoke(cli, args).exit_code == 1


class TestDetect:
    """Detection from files"""

    def test_decision_json(self, runner, observation_file):
        result = runner.invoke(cli, ["detect", "--input", str(observation_file), "--s", "1"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.stdout)
        assert set(payload) == {"statistic", "threshold", "reject"}
        assert isinstance(payload["reject"], bool)

    def test_sigma_override(self, runner, observation_file):
        """A larger noise level raises the threshold"""
        base = ["detect", "--input", str(observation_file), "--s", "1"]
        low = json.loads(runner.invoke(cli, base).stdout)
        high = json.loads(runner.invoke(cli, [*base, "--sigma", "0.5"]).stdout)
        assert high["threshold"] > low["threshold"]

    def test_odd_window(self, runner, spec_file, tmp_path):
        """Detection needs observations on [-2n, 2n]"""
        path = tmp_path / "odd.json"
        synth = runner.invoke(cli, ["synth", "--spec", str(spec_file), "--n", "19"])
        path.write_text(synth.stdout)
        result = runner.invoke(cli, ["detect", "--input", str(path), "--s", "1"])
        assert result.exit_code == 1


class TestBench:
    """Monte Carlo from a config file"""

    def test_risk_run_exports(self, runner, tmp_path):
        config = tmp_path / "bench.json"
        config.write_text(json.dumps({"trials": 2, "n_list": [8], "s_list": [1], "sigma": 0.1}))
        out, report = tmp_path / "risk.csv", tmp_path / "report.json"
        args = ["bench", "--config", str(config), "--out", str(out), "--json", str(report)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        with out.open(encoding="utf-8") as handle:
            assert len(list(csv.reader(handle))) == 3
        assert len(json.loads(report.read_text())["records"]) == 2

    def test_out_path_from_config(self, runner, tmp_path):
        """The CSV path defaults to the config's out_path"""
        out = tmp_path / "from_config.csv"
        config = tmp_path / "bench.json"
        config.write_text(
            json.dumps({"trials": 1, "n_list": [8], "s_list": [1], "out_path": str(out)})
        )
        result = runner.invoke(cli, ["bench", "--config", str(config)])
        assert result.exit_code == 0, result.output
        assert out.exists()

    def test_detection_task(self, runner, tmp_path):
        config = tmp_path / "detect.json"
        config.write_text(
            json.dumps(
                {"trials": 1, "n_list": [9], "s_list": [1], "sigma": 0.01, "task": "detection"}
            )
        )
        result = runner.invoke(cli, ["bench", "--config", str(config)])
        assert result.exit_code == 0, result.output

    def test_invalid_config(self, runner, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"trials": 0, "n_list": [8], "s_list": [1]}))
        assert runner.invoke(cli, ["bench", "--config", str(config)]).exit_code == 1


class TestCheck:
    """Inequality checks"""

    @pytest.mark.slow
    def test_small_suite(self, runner):
        result = runner.invoke(cli, ["check", "--sizes", "small", "--json"])
        assert result.exit_code == 0, result.output
        results = json.loads(result.stdout)
        assert all(r["passed"] for r in results)


class TestInputValidator:
    """Argument checks returning (ok, message)"""

    def test_input_file(self, tmp_path):
        good = tmp_path / "a.json"
        good.write_text("{}")
        assert InputValidator.validate_input_file(good) == (True, "")
        assert not InputValidator.validate_input_file(tmp_path / "b.json")[0]
        assert not InputValidator.validate_input_file(tmp_path)[0]
        txt = tmp_path / "a.txt"
        txt.write_text("{}")
        assert not InputValidator.validate_input_file(txt)[0]

    def test_output_path(self, tmp_path):
        assert InputValidator.validate_output_path(tmp_path / "out.json")[0]
        assert not InputValidator.validate_output_path(tmp_path)[0]
        assert not InputValidator.validate_output_path(tmp_path / "x" / "out.json")[0]

    @pytest.mark.parametrize("delta,ok", [(0.1, True), (0.0, False), (1.0, False)])
    def test_delta(self, delta, ok):
        assert InputValidator.validate_delta(delta)[0] is ok

    @pytest.mark.parametrize(
        "mode,N,s,ok",
        [
            ("core", 40, 2, True),
            ("core", 4, 2, False),
            ("core", 1, 1, False),
            ("full", 54, 1, True),
            ("full", 53, 1, False),
            ("full", 40, 2, False),
            ("causal", 2, 1, True),
            ("causal", 1, 1, False),
            ("median", 40, 1, False),
        ],
    )
    def test_order(self, mode, N, s, ok):
        assert InputValidator.validate_order(mode, N, s)[0] is ok


class TestOutputFormatter:
    """Rich rendering to a captured console"""

    @pytest.fixture
    def captured(self) -> tuple[OutputFormatter, io.StringIO]:
        buffer = io.StringIO()
        return OutputFormatter(Console(file=buffer, width=120, color_system=None)), buffer

    def test_messages(self, captured):
        output, buffer = captured
        output.display_success("done")
        output.display_error("broken", "details here")
        output.display_warning("careful")
        output.display_info("note")
        text = buffer.getvalue()
        for fragment in ("done", "broken", "details here", "careful", "note"):
            assert fragment in text

    def test_detection_table(self, captured):
        output, buffer = captured
        output.display_detection(
            DetectionResult(statistic=12.0, threshold=5.0, r0_squared=8.0, reject=True)
        )
        assert "12" in buffer.getvalue()

    def test_checks_table(self, captured):
        output, buffer = captured
        output.display_checks(
            [CheckResult(name="parseval", passed=True, measured=0.0, bound=1e-10, slack=1e-10)]
        )
        assert "parseval" in buffer.getvalue()
