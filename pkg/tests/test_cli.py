"""Tests for the command-line front end: parsing, emission, exit codes."""

import io
import json

import pytest

from qubit_bandit.cli import (
    _CSV_HEADER,
    OUTPUT_DIR_ENV,
    build_recordset,
    config_from_metadata,
    config_to_dict,
    emit,
    main,
    parse_args,
    parse_config,
    read_csv_metadata,
)
from qubit_bandit.harness import ConfigError, Scenario, run_experiment


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# argument parsing


def test_parse_single_with_defaults():
    config = parse_config(["single", "--c", "0.1"])
    assert config.scenario is Scenario.SINGLE_AGENT
    assert config.c == 0.1
    assert config.p1 == 0.5 and config.p2 == 0.5
    assert config.horizon == 1000
    assert config.trials == 1
    assert config.seed == 0
    assert config.drift_step == 0.0


def test_parse_ghz_constants_list():
    config = parse_config(["ghz", "--n", "5", "--constants", "0.1, 0.05, 0.01"])
    assert config.scenario is Scenario.GHZ
    assert config.n_users == 5
    assert config.constants == (0.1, 0.05, 0.01)


def test_parse_duo_bias_flag():
    config = parse_config(["duo-conflict", "--p-first", "0.75"])
    assert config.p_first == 0.75


def test_parse_reports_missing_required_values():
    with pytest.raises(ConfigError, match="^c: required"):
        parse_config(["single"])
    with pytest.raises(ConfigError, match="^count: required"):
        parse_config(["qrng"])
    with pytest.raises(ConfigError, match="^constants: required"):
        parse_config(["ghz", "--n", "3"])


def test_parse_rejects_malformed_constants():
    with pytest.raises(ConfigError, match="constants"):
        parse_config(["ghz", "--n", "3", "--constants", "0.1,abc"])
    with pytest.raises(ConfigError, match="^constants:"):
        parse_config(["ghz", "--n", "5", "--constants", "0.1,0.05"])


def test_parse_validates_through_experiment_config():
    with pytest.raises(ConfigError, match="^p1:"):
        parse_config(["single", "--c", "0.1", "--p1", "1.5"])


def test_parse_emit_options():
    _, options = parse_args(["single", "--c", "0.1", "--format", "json", "--output", "x.json"])
    assert options.format == "json"
    assert options.output == "x.json"
    _, options = parse_args(["single", "--c", "0.1"])
    assert options.format == "csv"
    assert options.output is None


# ---------------------------------------------------------------------------
# config files


def test_config_file_supplies_values_and_flags_win(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment line\n"
        "p1 = 0.9\n"
        "p2=0.1\n"
        "\n"
        "horizon=50  # trailing comment\n"
        "drift-step=0.01\n"
        "c=0.2\n"
    )
    config = parse_config(["single", "--config", str(path), "--p1", "0.7"])
    assert config.p1 == 0.7  # flag beats file
    assert config.p2 == 0.1  # file beats default
    assert config.horizon == 50
    assert config.drift_step == 0.01
    assert config.c == 0.2
    assert config.trials == 1  # untouched default


def test_config_file_can_satisfy_required_keys(tmp_path):
    path = tmp_path / "ghz.cfg"
    path.write_text("n=3\nconstants=0.1,0.05\n")
    config = parse_config(["ghz", "--config", str(path)])
    assert config.n_users == 3
    assert config.constants == (0.1, 0.05)


def test_config_file_unknown_key_is_an_error(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("warp_speed=9\n")
    with pytest.raises(ConfigError, match="unknown key 'warp_speed'"):
        parse_config(["single", "--c", "0.1", "--config", str(path)])


def test_config_file_malformed_line_is_an_error(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just some words\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config(["single", "--c", "0.1", "--config", str(path)])


def test_config_file_missing_is_an_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(["single", "--c", "0.1", "--config", str(tmp_path / "absent.cfg")])


def test_config_file_bad_value_type_is_an_error(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("horizon=soon\n")
    with pytest.raises(ConfigError, match="invalid value for 'horizon'"):
        parse_config(["single", "--c", "0.1", "--config", str(path)])


# ---------------------------------------------------------------------------
# exit codes and error lines


def test_main_success_exit_code(capsys):
    code, out, err = _run(capsys, ["single", "--c", "0.1", "--horizon", "5"])
    assert code == 0
    assert err == ""
    assert out.startswith("# tool=qubit-bandit")


def test_main_parse_errors_exit_2_with_single_line(capsys):
    code, out, err = _run(capsys, ["single"])
    assert code == 2
    assert out == ""
    assert err.endswith("\n") and err.count("\n") == 1
    assert err.startswith("error: c: required")


def test_main_unknown_flag_exits_2(capsys):
    code, _, err = _run(capsys, ["single", "--c", "0.1", "--warp", "9"])
    assert code == 2
    assert err.startswith("error:")
    assert err.count("\n") == 1


def test_main_unknown_command_exits_2(capsys):
    code, _, err = _run(capsys, ["teleport"])
    assert code == 2
    assert err.startswith("error:")


def test_main_runtime_failure_exits_1(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = _run(
        capsys,
        ["single", "--c", "0.1", "--horizon", "5", "--output", str(blocker / "out.csv")],
    )
    assert code == 1
    assert err.startswith("error:")
    assert err.count("\n") == 1


# ---------------------------------------------------------------------------
# csv output


def test_csv_output_shape(capsys):
    code, out, _ = _run(
        capsys,
        ["single", "--c", "0.1", "--horizon", "5", "--trials", "2", "--seed", "7"],
    )
    assert code == 0
    lines = out.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    data = [l for l in lines if not l.startswith("#")]
    assert "# tool=qubit-bandit" in meta
    assert "# scenario=single" in meta
    assert "# seed=7" in meta
    assert any(l.startswith("# version=") for l in meta)
    assert any(l.startswith("# metric:n_trials=2") for l in meta)

    assert data[0] == _CSV_HEADER
    rows = data[1:]
    assert len(rows) == 10  # 2 trials x 5 steps, trial-major
    for row in rows:
        assert len(row.split(",")) == 9
    first = rows[0].split(",")
    assert first[0] == "0" and first[1] == "0"
    assert first[2] == "0.5"
    assert first[6] in ("toward0", "toward1")
    trials_seen = [row.split(",")[0] for row in rows]
    assert trials_seen == ["0"] * 5 + ["1"] * 5


def test_csv_multi_user_fields_are_pipe_joined(capsys):
    _, out, _ = _run(capsys, ["duo-conflict", "--horizon", "3", "--seed", "1"])
    row = [l for l in out.splitlines() if not l.startswith("#")][1].split(",")
    machines, rewards = row[4], row[5]
    assert sorted(machines.split("|")) == ["0", "1"]
    assert set(rewards.split("|")) <= {"0", "1"}
    assert row[6] == "none"


def test_csv_reruns_are_byte_identical(capsys, tmp_path):
    argv = ["coop", "--c", "0.05", "--horizon", "20", "--trials", "3", "--seed", "11"]
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second

    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--output", str(out_a)]) == 0
    assert main(argv + ["--output", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    capsys.readouterr()


def test_csv_metadata_replays_the_exact_run(capsys):
    argv = [
        "ghz",
        "--n",
        "3",
        "--constants",
        "0.1,0.05",
        "--horizon",
        "4",
        "--trials",
        "2",
        "--seed",
        "13",
    ]
    _, out, _ = _run(capsys, argv)
    replayed = config_from_metadata(read_csv_metadata(out.splitlines()))
    assert replayed == parse_config(argv)


def test_csv_numbers_use_twelve_significant_digits(capsys):
    _, out, _ = _run(
        capsys,
        ["single", "--c", "0.123456789012345", "--p0", "0.1", "--horizon", "1", "--seed", "0"],
    )
    row = [l for l in out.splitlines() if not l.startswith("#")][1].split(",")
    assert row[7] == "0.123456789012"
    assert row[8] in ("0.223456789012", "0")  # shifted up or clamped down to 0


# ---------------------------------------------------------------------------
# json output


def test_json_output_round_trips(capsys):
    argv = [
        "single",
        "--c",
        "0.1",
        "--horizon",
        "5",
        "--trials",
        "2",
        "--seed",
        "7",
        "--format",
        "json",
    ]
    _, out, _ = _run(capsys, argv)
    payload = json.loads(out)
    assert payload["metadata"]["tool"] == "qubit-bandit"
    assert payload["metrics"]["n_trials"] == 2
    assert len(payload["steps"]) == 10
    step = payload["steps"][0]
    assert step["chosen_machine"] in ([0], [1])
    assert step["update_direction"] in ("toward0", "toward1")

    replayed = config_from_metadata(payload["metadata"]["config"])
    assert replayed == parse_config(argv[: -2])

    _, again, _ = _run(capsys, argv)
    assert out == again


def test_json_and_csv_agree_on_metrics(capsys):
    argv = ["single", "--c", "0.1", "--horizon", "10", "--seed", "3"]
    _, csv_text, _ = _run(capsys, argv)
    _, json_text, _ = _run(capsys, argv + ["--format", "json"])
    payload = json.loads(json_text)
    metric_lines = {
        line[len("# metric:") :].split("=", 1)[0]: line.split("=", 1)[1]
        for line in csv_text.splitlines()
        if line.startswith("# metric:")
    }
    assert metric_lines["mean_regret"] == f"{payload['metrics']['mean_regret']:.12g}"
    assert int(metric_lines["n_trials"]) == payload["metrics"]["n_trials"]


def test_emit_handles_zero_rows_and_file_objects():
    config = parse_config(["single", "--c", "0.1", "--horizon", "5"])
    recordset = build_recordset(config, (), None)
    buffer = io.StringIO()
    emit(recordset, "csv", buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[-1] == _CSV_HEADER  # metadata and header only, no rows
    buffer = io.StringIO()
    emit(recordset, "json", buffer)
    payload = json.loads(buffer.getvalue())
    assert payload["steps"] == []
    assert payload["metrics"] is None


def test_emit_rejects_unknown_format():
    config = parse_config(["single", "--c", "0.1"])
    with pytest.raises(ValueError):
        emit(build_recordset(config, (), None), "xml", io.StringIO())


def test_config_to_dict_masks_unused_fields():
    config = parse_config(["single", "--c", "0.1"])
    as_dict = config_to_dict(config)
    assert as_dict["constants"] is None
    assert as_dict["n_users"] is None
    assert as_dict["scenario"] == "single"


# ---------------------------------------------------------------------------
# qrng subcommand


def test_qrng_emits_bits_and_battery(capsys):
    code, out, err = _run(capsys, ["qrng", "--count", "2000", "--seed", "3"])
    assert code == 0
    assert err == ""
    lines = out.splitlines()
    bits = lines[0]
    assert len(bits) == 2000
    assert set(bits) <= {"0", "1"}
    assert lines[1].startswith("# bits=2000 zeros=")
    assert any(l.startswith("# frequency statistic=") and l.endswith("result=pass") for l in lines)
    assert any(l.startswith("# chi_square_pairs statistic=") for l in lines)


def test_qrng_reruns_are_identical(capsys):
    _, first, _ = _run(capsys, ["qrng", "--count", "500", "--seed", "9"])
    _, second, _ = _run(capsys, ["qrng", "--count", "500", "--seed", "9"])
    assert first == second


def test_qrng_biased_source_fails_the_frequency_test(capsys):
    _, out, _ = _run(capsys, ["qrng", "--count", "2000", "--p0", "0.9", "--seed", "3"])
    freq_line = next(l for l in out.splitlines() if l.startswith("# frequency"))
    assert freq_line.endswith("result=fail")


def test_qrng_short_streams_skip_tests_but_still_emit_bits(capsys):
    _, out, _ = _run(capsys, ["qrng", "--count", "500", "--seed", "4"])
    lines = out.splitlines()
    assert len(lines[0]) == 500
    assert any(l.startswith("# frequency") for l in lines)
    assert any("sequence too short" in l for l in lines)  # pairs test needs 1000

    _, out, _ = _run(capsys, ["qrng", "--count", "50", "--seed", "4"])
    skips = [l for l in out.splitlines() if "sequence too short" in l]
    assert len(skips) == 2


def test_qrng_writes_bits_to_file_battery_to_stdout(capsys, tmp_path):
    target = tmp_path / "bits.txt"
    code, out, _ = _run(capsys, ["qrng", "--count", "300", "--seed", "5", "--output", str(target)])
    assert code == 0
    assert target.read_text().strip() == _bits_only(capsys, ["qrng", "--count", "300", "--seed", "5"])
    assert out.splitlines()[0].startswith("# bits=300")


def _bits_only(capsys, argv):
    main(argv)
    return capsys.readouterr().out.splitlines()[0]


# ---------------------------------------------------------------------------
# output destinations


def test_relative_output_resolves_under_env_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code = main(["single", "--c", "0.1", "--horizon", "5", "--output", "runs/out.csv"])
    capsys.readouterr()
    assert code == 0
    target = tmp_path / "runs" / "out.csv"
    assert target.exists()
    assert target.read_text().startswith("# tool=qubit-bandit")


def test_absolute_output_ignores_env_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "elsewhere"))
    target = tmp_path / "direct.csv"
    code = main(["single", "--c", "0.1", "--horizon", "5", "--output", str(target)])
    capsys.readouterr()
    assert code == 0
    assert target.exists()
    assert not (tmp_path / "elsewhere").exists()


def test_output_without_env_dir_is_cwd_relative(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    code = main(["single", "--c", "0.1", "--horizon", "5", "--output", "local.csv"])
    capsys.readouterr()
    assert code == 0
    assert (tmp_path / "local.csv").exists()
