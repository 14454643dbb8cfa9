import json
from pathlib import Path

import pytest

from kinex.cli import (
    EXIT_FAILURE,
    EXIT_INVALID,
    EXIT_OK,
    CliInvocation,
    dispatch,
    main,
    parse_config,
    parse_invocation,
)
from kinex.errors import ConfigParseError, ConfigurationError, UsageError
from kinex.progress import SilentProgress

SMALL = ["--n-agents", "20", "--money", "2000", "--sweeps", "6", "--burn-in", "2"]


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv("KINEX_SEED", raising=False)


# ---- parse_config ----

def test_defaults():
    config = parse_config("", {}, env={})
    assert config.n_agents == 1000
    assert config.ratio == 1.0
    assert config.seed == 42
    assert config.burn_in_sweeps == 1000
    assert config.n_sweeps == 2000
    assert config.saving == 0.5
    assert config.ratios == [0.1, 0.5, 1.0, 2.0, 10.0]
    assert (config.total_goods, config.total_money) == (3000, 3000.0)
    assert config.h_range == (0.5, 1.5)
    assert (config.fit_bins, config.window_quantiles) == (8, (0.70, 0.98))


def test_flags_override_file_override_env():
    assert parse_config('{"seed": 7}', {"seed": 9}, env={"KINEX_SEED": "3"}).seed == 9
    assert parse_config('{"seed": 7}', {}, env={"KINEX_SEED": "3"}).seed == 7
    assert parse_config(None, {}, env={"KINEX_SEED": "3"}).seed == 3


def test_bad_seed_env():
    with pytest.raises(ConfigurationError):
        parse_config(None, {}, env={"KINEX_SEED": "abc"})


def test_lambda_out_of_range_names_field():
    with pytest.raises(ConfigurationError) as info:
        parse_config('{"lambda": 1.5}', {}, env={})
    assert "lambda" in info.value.fields
    assert "[0, 1)" in str(info.value)


def test_malformed_json_reports_position():
    with pytest.raises(ConfigParseError) as info:
        parse_config('{\n  "seed": 7,\n}', {}, env={})
    assert info.value.line == 3
    assert info.value.column == 1


def test_unknown_keys_are_listed():
    with pytest.raises(ConfigurationError) as info:
        parse_config('{"seed": 1, "bogus": 2, "colour": 3}', {}, env={})
    assert set(info.value.fields) == {"bogus", "colour"}
    assert "unknown key" in str(info.value)


def test_non_object_config():
    with pytest.raises(ConfigurationError):
        parse_config("[1, 2]", {}, env={})


def test_ratio_sets_goods_at_fixed_money():
    config = parse_config('{"total_money": 500.0}', {"ratio": 2.0}, env={})
    assert config.total_goods == 1000
    assert config.total_money == 500.0
    with pytest.raises(ConfigurationError):
        parse_config(None, {"ratio": -1.0}, env={})


def test_cross_field_violation():
    with pytest.raises(ConfigurationError):
        parse_config('{"n_sweeps": 10, "burn_in_sweeps": 20}', {}, env={})


# ---- argument parsing ----

def test_parse_invocation_collects_overrides():
    invocation = parse_invocation(["sweep", "--ratios", "0.5,2", "--lambda", "0.3", "--seed", "5"])
    assert invocation.subcommand == "sweep"
    assert invocation.overrides["ratios"] == [0.5, 2.0]
    assert invocation.overrides["lambda"] == 0.3
    assert invocation.overrides["seed"] == 5


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["simulate", "--unknown-flag"],
    ["sweep", "--ratios", "1,x"],
    ["plot", "--csv", "a.csv"],
])
def test_bad_arguments_raise_usage_error(argv):
    with pytest.raises(UsageError):
        parse_invocation(argv)


# ---- dispatch / main ----

def test_simulate_succeeds(tmp_path):
    out = tmp_path / "wealth"
    status = main(["simulate", "--ratio", "1", "--seed", "42", "--out", str(out)] + SMALL)
    assert status == EXIT_OK
    assert (out / "wealth_samples.csv").is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 42
    assert manifest["config"]["total_goods"] == 2000


def test_sweep_with_one_ratio_is_invalid(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--ratios", "1", "--out", str(out)] + SMALL) == EXIT_INVALID
    assert not (out / "manifest.json").exists()


def test_unknown_subcommand_exits_with_usage(caplog):
    assert main(["bogus"]) == EXIT_INVALID
    assert "usage:" in caplog.text


def test_invalid_config_file_exits_invalid(tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"lambda": 1.5}')
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == EXIT_INVALID


def test_output_failure_exits_two(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["simulate", "--out", str(blocker)] + SMALL) == EXIT_FAILURE


def test_dispatch_routes_evolve_with_preset(tmp_path):
    invocation = CliInvocation(
        subcommand="evolve",
        overrides={"n_agents": 20, "total_money": 2000.0, "n_sweeps": 10, "burn_in_sweeps": 0,
                   "output_dir": str(tmp_path)},
        options={"preset": "100:1"},
    )
    assert dispatch(invocation, SilentProgress(), env={}) == EXIT_OK
    for sweep in (0, 1, 5, 10):
        assert (tmp_path / f"price_hist_t{sweep}.csv").is_file()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["total_goods"] == 20


def test_analyze_then_plot(tmp_path):
    run_dir = tmp_path / "run"
    assert main(["simulate", "--out", str(run_dir)] + SMALL) == EXIT_OK
    refit = tmp_path / "refit"
    assert main(["analyze", "--input", str(run_dir / "wealth_samples.csv"), "--out", str(refit)] + SMALL) == EXIT_OK
    assert (refit / "fits.json").is_file()
    plots = tmp_path / "plots"
    status = main(["plot", "--csv", str(run_dir / "wealth_ccdf.csv"), "--x", "x", "--y", "ccdf",
                   "--xscale", "log", "--yscale", "log", "--kind", "line", "--out", str(plots)])
    assert status == EXIT_OK
    assert (plots / "wealth_ccdf_ccdf_vs_x.svg").is_file()
    assert "wealth_ccdf_ccdf_vs_x.svg" in json.loads((plots / "manifest.json").read_text())["files"]


def test_plot_missing_column_is_invalid(tmp_path):
    csv = tmp_path / "data.csv"
    csv.write_text("a,b\n1,2\n")
    status = main(["plot", "--csv", str(csv), "--x", "a", "--y", "c", "--out", str(tmp_path / "p")])
    assert status == EXIT_INVALID


def test_compare_and_family(tmp_path):
    assert main(["compare", "--out", str(tmp_path / "cmp")] + SMALL) == EXIT_OK
    assert Path(tmp_path / "cmp" / "comparison.csv").is_file()
    assert main(["simulate", "--family", "--ratios", "0.5,1", "--out", str(tmp_path / "fam")] + SMALL) == EXIT_OK
    assert (tmp_path / "fam" / "wealth_ccdf_family.csv").is_file()
