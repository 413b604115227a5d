"""Integration tests for the patrolgame CLI using Click's testing utilities."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from src.cli.main import cli

REPRO_SPECS = Path(__file__).resolve().parent.parent / "repro" / "specs"

GAME = ["--lambda", "1", "--t", "3.2", "--p", "0.5"]


@pytest.fixture
def runner():
    """Create CLI test runner"""
    return CliRunner()


def _write_config(directory, name, **fields):
    path = directory / f"{name}.json"
    path.write_text(json.dumps(fields), encoding="utf-8")
    return path


def test_value_table(runner):
    """Test the value report for lambda = 1, t = 3.2, p = 0.5"""
    result = runner.invoke(cli, ["value", *GAME])
    assert result.exit_code == 0
    assert "0.8875" in result.output
    assert "fractional" in result.output


def test_value_json_integer_branch(runner):
    """Test the JSON report on the r = 0 branch"""
    result = runner.invoke(cli, ["value", "--lambda", "2", "--t", "1.5", "--p", "0.5", "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["value"] == pytest.approx(0.875)
    assert report["branch"] == "integer"
    assert report["m"] == 3


def test_value_invalid_p(runner):
    """Test exit code 2 for p outside (0, 1]"""
    result = runner.invoke(cli, ["value", "--lambda", "1", "--t", "1", "--p", "1.5"])
    assert result.exit_code == 2


def test_value_missing_param(runner):
    """Test exit code 2 when a parameter is missing"""
    result = runner.invoke(cli, ["value", "--lambda", "1", "--t", "1"])
    assert result.exit_code == 2


def test_error_json(runner):
    """Test the machine-readable error object"""
    result = runner.invoke(cli, ["--error-json", "value", "--lambda", "1", "--t", "1", "--p", "1.5"])
    assert result.exit_code == 2
    line = next(line for line in result.output.splitlines() if line.startswith("{"))
    error = json.loads(line)
    assert error["error"] == "InvalidParamsError"
    assert error["exit_code"] == 2


def test_lemma_agree(runner):
    """Test the closed form and the oracle at c = 3.2"""
    result = runner.invoke(cli, ["lemma", "--c", "3.2", "--p", "0.5"])
    assert result.exit_code == 0
    assert "0.1125" in result.output
    assert "AGREE" in result.output
    assert "DISAGREE" not in result.output


def test_lemma_integer_json(runner):
    """Test the point mass for an integer mean"""
    result = runner.invoke(cli, ["lemma", "--c", "4", "--p", "0.2", "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["closed_form"]["pmf"] == {"4": 1.0}
    assert report["oracle"]["pmf"] == {"4": 1.0}
    assert report["agree"] is True


def test_lemma_infeasible(runner):
    """Test exit code 2 when c exceeds the support"""
    result = runner.invoke(cli, ["lemma", "--c", "11", "--max-support", "10"])
    assert result.exit_code == 2


def test_simulate_json_is_reproducible(runner, tmp_path):
    """Test the JSON payload and byte-identical reruns"""
    outputs = []
    for name in ["first.json", "second.json"]:
        out = tmp_path / name
        result = runner.invoke(cli, ["simulate", *GAME, "--replications", "2000", "--seed", "7", "-o", str(out)])
        assert result.exit_code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]

    payload = json.loads(outputs[0])
    assert payload["config"]["seed"] == 7
    assert payload["config"]["lambda"] == 1.0
    assert payload["result"]["replications"] == 2000
    assert abs(payload["result"]["estimate"] - 0.8875) <= 4 * payload["result"]["standard_error"]


def test_simulate_csv(runner, tmp_path):
    """Test the CSV payload header"""
    out = tmp_path / "result.csv"
    result = runner.invoke(cli, ["simulate", *GAME, "--generator", "poisson", "--replications", "500",
                                 "--format", "csv", "-o", str(out)])
    assert result.exit_code == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == "estimate,ci,replications,seed,generator,strategy,lambda,t,p"


def test_simulate_from_config_with_override(runner, tmp_path):
    """Test a config file whose fields are overridden by flags"""
    config = _write_config(tmp_path, "exp", **{"lambda": 2.0, "t": 1.5, "p": 1.0, "generator": "deterministic",
                                               "replications": 300, "seed": 3})
    out = tmp_path / "out.json"
    result = runner.invoke(cli, ["simulate", "-c", str(config), "--seed", "9", "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["config"]["seed"] == 9
    assert payload["result"]["estimate"] == 1.0


@pytest.mark.parametrize("args", [
    ["--strategy", "sweep"],
    ["--generator", "zigzag"],
    ["--replications", "0"],
])
def test_simulate_invalid_input(runner, args):
    """Test exit code 2 for bad strategies, generators and counts"""
    result = runner.invoke(cli, ["simulate", *GAME, *args])
    assert result.exit_code == 2


def test_simulate_unknown_config_field(runner, tmp_path):
    """Test that unknown config fields are rejected"""
    config = _write_config(tmp_path, "bad", **{"lambda": 1.0, "t": 3.2, "p": 0.5, "colour": "red"})
    result = runner.invoke(cli, ["simulate", "-c", str(config)])
    assert result.exit_code == 2


def test_best_response_uniform_offset(runner, tmp_path):
    """Test that the after-pass exploit wins against the uniform-offset schedule"""
    out = tmp_path / "best.json"
    result = runner.invoke(cli, ["best-response", *GAME, "--generator", "uniform-offset",
                                 "--family", "after-pass:1:0,stationary", "--replications", "2000", "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["winner"] == "after-pass:1:0"
    assert len(payload["candidates"]) == 2


def test_compare_default_pairs(runner, tmp_path):
    """Test the default optimal versus Poisson comparison"""
    out = tmp_path / "compare.json"
    result = runner.invoke(cli, ["compare", *GAME, "--replications", "2000", "-o", str(out)])
    assert result.exit_code == 0
    comparison = json.loads(out.read_text(encoding="utf-8"))["comparison"]
    assert [row["label"] for row in comparison["rows"]] == ["optimal+stationary", "poisson+stationary"]
    assert len(comparison["differences"]) == 1


def test_compare_bad_pair(runner):
    """Test exit code 2 for a pair without a strategy"""
    result = runner.invoke(cli, ["compare", *GAME, "--pair", "optimal"])
    assert result.exit_code == 2


def test_validate_within_cap(runner, tmp_path):
    """Test a pattern at exactly its rate cap, with a realization dump"""
    dump = tmp_path / "dispatches.csv"
    result = runner.invoke(cli, ["validate", "--spec", str(REPRO_SPECS / "alternating_pattern.json"),
                                 "--point", "0.3", "--dump", str(dump)])
    assert result.exit_code == 0
    assert "Within rate cap" in result.output
    rows = dump.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "dispatch_time,direction,tag"
    assert rows[2].endswith("counterclockwise,plain")


def test_validate_over_cap(runner):
    """Test exit code 2 and a violation report for a pattern above its cap"""
    result = runner.invoke(cli, ["validate", "--spec", str(REPRO_SPECS / "over_cap_pattern.json"), "--format", "json"])
    assert result.exit_code == 2
    report = json.loads(result.output[: result.output.rindex("}") + 1])
    assert report["violation"] is True


def test_validate_mixed_routing(runner):
    """Test the mixed-direction, random-speed schedule against its cap"""
    result = runner.invoke(cli, ["validate", "--spec", str(REPRO_SPECS / "mixed_routing.json"), "--point", "0.3"])
    assert result.exit_code == 0


def test_repro_pass_and_fail(runner, tmp_path):
    """Test PASS for a certain detection and exit code 3 for a wrong expectation"""
    common = {"lambda": 1.0, "t": 3.0, "p": 1.0, "generator": "deterministic", "replications": 200, "seed": 1}
    _write_config(tmp_path, "certain", **common)
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 0
    assert "PASS" in result.output

    _write_config(tmp_path, "wrong", expected=0.5, **common)
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 3
    assert "FAIL" in result.output


def test_repro_empty_dir(runner, tmp_path):
    """Test exit code 2 for a directory without configs"""
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 2


def test_missing_config_is_usage_error(runner, tmp_path):
    """Test Click's usage error for a config path that does not exist"""
    result = runner.invoke(cli, ["simulate", "-c", str(tmp_path / "nope.json")])
    assert result.exit_code == 2


@pytest.mark.parametrize("fields", [
    {"check": "value_forms", "samples": 500, "seed": 1},
    {"check": "lemma_oracle", "samples": 20, "seed": 2},
    {"check": "gap_ks", "lambda": 1.0, "t": 0.01, "p": 1.0, "samples": 20_000, "max_distance": 0.03, "seed": 3},
    {"check": "pass_pmf", "lambda": 1.0, "t": 3.2, "p": 0.5, "replications": 5_000, "seed": 4, "min_pvalue": 0.001},
    {"check": "rerun", "lambda": 1.0, "t": 3.2, "p": 0.5, "replications": 2_000, "seed": 5},
    {"check": "paired_gap", "lambda": 1.0, "t": 3.2, "p": 0.5, "replications": 5_000, "seed": 6,
     "pairs": ["poisson+stationary", "optimal+stationary"], "sigmas": 5},
    {"check": "rate_cap", "generator": "file", "schedule_spec": str(REPRO_SPECS / "mixed_routing.json"),
     "lambda": 1.0, "t": 3.2, "p": 0.5, "point": 0.3, "seed": 7},
])
def test_repro_checks_pass(runner, tmp_path, fields):
    """Test that every repro check kind passes on a small correct experiment"""
    _write_config(tmp_path, "check", **fields)
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 0
    assert "PASS" in result.output


def test_repro_over_time_budget(runner, tmp_path):
    """Test exit code 3 when a correct experiment exceeds its time budget"""
    _write_config(tmp_path, "slow", check="lemma_oracle", samples=20, seed=1, max_seconds=1e-9)
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 3
    assert "SLOW" in result.output


def test_repro_paired_gap_in_wrong_order_fails(runner, tmp_path):
    """Test that a paired gap listed with the better pair first fails"""
    _write_config(tmp_path, "reversed", check="paired_gap", replications=5_000, seed=8, sigmas=5,
                  pairs=["optimal+stationary", "poisson+stationary"], **{"lambda": 1.0, "t": 3.2, "p": 0.5})
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 3
    assert "FAIL" in result.output


def test_repro_rejects_unpaired_gap(runner, tmp_path):
    """Test exit code 2 for a paired_gap config with a single pair"""
    _write_config(tmp_path, "single", check="paired_gap", pairs=["optimal+stationary"],
                  **{"lambda": 1.0, "t": 3.2, "p": 0.5})
    result = runner.invoke(cli, ["repro", "--dir", str(tmp_path)])
    assert result.exit_code == 2
