# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import json
import logging
import re
from unittest.mock import patch

import pytest
from click.testing import CliRunner

# flake8: noqa: F401
from mismatchlab import __main__
import mismatchlab
from mismatchlab.config import CONFIG_VERSION
from mismatchlab.experiments import RunSummary
from mismatchlab.models import model_to_json

from .conftest import chain_mdp

main_function = mismatchlab.__main__


@pytest.fixture(autouse=True)
def restore_logger():
    logger = logging.getLogger("mismatchlab")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers = handlers
    logger.setLevel(level)


@pytest.fixture
def runner():
    return CliRunner(env={"MISMATCHLAB_OUT": None, "MISMATCHLAB_JOBS": None})


@pytest.fixture
def gallery_config(write_config):
    return write_config(
        {
            "version": CONFIG_VERSION,
            "kind": "gallery",
            "seed": 1,
            "gallery": {"entries": ["weak_pomdp"], "n": [4]},
        },
        "gallery.json",
    )


@pytest.fixture
def strategic_config(write_config):
    return write_config(
        {
            "version": CONFIG_VERSION,
            "kind": "strategic",
            "seed": 1,
            "strategic": {"pairs": 2, "horizons": [0, 1]},
        },
        "strategic.json",
    )


def test_help(runner):
    result = runner.invoke(main_function, "--help")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "usage" in result.output


def test_version(runner):
    result = runner.invoke(main_function, "--version")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    version_regex = re.compile(r"mismatchlab v\d+\.\d+\.\d+")
    assert version_regex.match(result.output) is not None
    assert mismatchlab.__version__ in result.output


def test_no_command(runner):
    result = runner.invoke(main_function, "")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "command is required" in result.output

    result = runner.invoke(main_function, "gallery")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "subcommand is required" in result.output


def test_gallery_list(runner):
    result = runner.invoke(main_function, "gallery list")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    names = [line.split(":")[0] for line in result.output.splitlines()]
    assert names == sorted(mismatchlab.GALLERY)


def test_gallery_dump(runner):
    result = runner.invoke(main_function, "gallery dump robust_weak --n 10")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    body = json.loads(result.output)
    assert body["name"] == "robust_weak"
    assert body["n"] == 10
    assert body["closed_form_exact"]["cross"] == pytest.approx(3.0)

    result = runner.invoke(main_function, "gallery dump setwise_cont --n 3")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "even" in result.output


def test_gallery_run(runner, gallery_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        main_function, f"gallery run --config {gallery_config} --out {out}"
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "1 rows, 0 violations" in result.output
    assert (out / "gallery.csv").exists()
    assert (out / "manifest.json").exists()


def test_run_and_plotdata(runner, strategic_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        main_function, f"run --config {strategic_config} --out {out} --check"
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert f"Wrote {out / 'strategic.csv'}" in result.output

    result = runner.invoke(main_function, f"plotdata {out}")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert (out / "series" / "strategic_tv.dat").exists()


def test_run_requires_config(runner):
    result = runner.invoke(main_function, "run")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "--config is required" in result.output


def test_kind_mismatch(runner, strategic_config):
    result = runner.invoke(main_function, f"learn --config {strategic_config}")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "does not match" in result.output


def test_seed_override(runner, strategic_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        main_function,
        f"strategic --config {strategic_config} --out {out} --seed 99",
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 99


def test_out_from_environment(runner, strategic_config, tmp_path):
    out = tmp_path / "from-env"
    result = runner.invoke(
        main_function,
        f"strategic --config {strategic_config}",
        env={"MISMATCHLAB_OUT": str(out)},
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert (out / "strategic.csv").exists()


def test_jobs_from_environment(runner, strategic_config, tmp_path):
    result = runner.invoke(
        main_function,
        f"strategic --config {strategic_config} --out {tmp_path}",
        env={"MISMATCHLAB_JOBS": "many"},
    )
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "MISMATCHLAB_JOBS" in result.output


def test_verbose(runner, strategic_config, tmp_path):
    result = runner.invoke(
        main_function,
        f"-v strategic --config {strategic_config} --out {tmp_path}",
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "Running experiment" in result.output

    result = runner.invoke(
        main_function,
        f"-vv strategic --config {strategic_config} --out {tmp_path}",
    )
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "Task finished" in result.output


@patch("mismatchlab.__main__.run_experiment")
def test_check_violations(run_mock, runner, strategic_config, tmp_path):
    run_mock.return_value = RunSummary("strategic", {}, [{}], 3)
    command = f"strategic --config {strategic_config} --out {tmp_path}"

    result = runner.invoke(main_function, command)
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "3 violations" in result.output

    result = runner.invoke(main_function, command + " --check")
    assert result.exit_code == 2, f"exit: {result.exit_code}\n {result.output}"
    assert "3 check violations" in result.output


def test_invalid_config(runner, write_config):
    path = write_config(
        {"version": CONFIG_VERSION, "kind": "learn", "seed": "x"}
    )
    result = runner.invoke(main_function, f"run --config {path}")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "seed" in result.output


def test_validate(runner, write_config, tmp_path):
    path = write_config(
        {"version": CONFIG_VERSION, "kind": "learn", "seed": 1}
    )
    result = runner.invoke(main_function, f"validate {path}")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "valid learn configuration" in result.output

    model = write_config(model_to_json(chain_mdp()), "chain.json")
    result = runner.invoke(main_function, f"validate {model}")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert "valid model chain" in result.output

    body = model_to_json(chain_mdp())
    body["discount"] = 1.0
    broken = write_config(body, "broken.json")
    result = runner.invoke(main_function, f"validate {broken}")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "discount" in result.output

    text = tmp_path / "text.json"
    text.write_text("not json", encoding="utf-8")
    result = runner.invoke(main_function, f"validate {text}")
    assert result.exit_code == 1, f"exit: {result.exit_code}\n {result.output}"
    assert "is not JSON" in result.output


@patch("mismatchlab.__main__.run_experiment")
def test_default_config_seed(run_mock, runner, tmp_path):
    run_mock.return_value = RunSummary("sup-gap", {}, [], 0)

    result = runner.invoke(main_function, f"supgap --out {tmp_path}")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    cfg = run_mock.call_args[0][0]
    assert cfg.kind == "sup-gap"
    assert cfg.seed == __main__.DEFAULT_SEED

    result = runner.invoke(main_function, f"supgap --out {tmp_path} --seed 5")
    assert result.exit_code == 0, f"exit: {result.exit_code}\n {result.output}"
    assert run_mock.call_args[0][0].seed == 5
