import csv
import json
from pathlib import Path

import pytest

from core.exceptions import ConfigurationError
from core.models.run_models import SynthRunConfig
from core.models.run_models import TrainRunConfig
from dynpix.cli.cli import EXIT_CONFIG
from dynpix.cli.cli import EXIT_OK
from dynpix.cli.cli import EXIT_RUNTIME
from dynpix.cli.cli import run_cli
from dynpix.cli.cli_config import resolve_run_config
from dynpix.cli.cli_config import set_dotted
from dynpix.training.loss_log import read_loss_csv


TINY_TRAIN_ARGS = [
    "--synthetic-n", "10",
    "--synthetic-size", "40",
    "--resize-to", "36",
    "--crop-to", "32",
    "--depth", "3",
    "--base-width", "8",
    "--epochs", "1",
    "--constant-epochs", "1",
    "--batch-size", "2",
    "--train-limit", "4",
    "--no-eval",
]  # fmt: skip


def _snapshot(directory: Path) -> dict[str, bytes]:
    return {str(path.relative_to(directory)): path.read_bytes() for path in sorted(directory.rglob("*")) if path.is_file()}


def _flatten(data, prefix=""):
    if isinstance(data, dict):
        flat = {}
        for key, value in data.items():
            flat.update(_flatten(value, f"{prefix}{key}."))
        return flat
    return {prefix.rstrip("."): data}


def test_set_dotted_creates_nested_levels():
    target = {"schedule": {"batch_size": 1}}
    set_dotted(target, "schedule.lr0", 0.1)
    set_dotted(target, "data.synthetic.n", 5)
    assert target == {"schedule": {"batch_size": 1, "lr0": 0.1}, "data": {"synthetic": {"n": 5}}}


def test_precedence_flags_over_file_over_defaults(tmp_path):
    config_file = tmp_path / "synth.json"
    config_file.write_text(json.dumps({"n": 7, "size": 32, "out_dir": "from-file"}))

    config = resolve_run_config(
        SynthRunConfig,
        config_file,
        {"n": 3, "seed": None},
        defaults={"out_dir": "from-defaults", "seed": 11},
    )
    assert config.n == 3
    assert config.size == 32
    assert config.out_dir == "from-file"
    assert config.seed == 11


def test_unknown_keys_are_listed(tmp_path):
    config_file = tmp_path / "bad.json"
    config_file.write_text(json.dumps({"n": 4, "colour": "red", "out_dir": "x"}))
    with pytest.raises(ConfigurationError, match="colour"):
        resolve_run_config(SynthRunConfig, config_file, {})


def test_non_object_config_rejected(tmp_path):
    config_file = tmp_path / "list.json"
    config_file.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        resolve_run_config(SynthRunConfig, config_file, {})


def test_modes_differ_only_in_cycle_policy():
    configs = {
        mode: resolve_run_config(TrainRunConfig, None, {"policy.noise_cycle_enabled": mode == "dynamic", "out_dir": "run"})
        for mode in ("dynamic", "pix2pix")
    }
    dynamic = _flatten(configs["dynamic"].model_dump(mode="json"))
    pix2pix = _flatten(configs["pix2pix"].model_dump(mode="json"))
    differing = {key for key in dynamic if dynamic[key] != pix2pix[key]}
    assert differing == {"policy.noise_cycle_enabled"}


def test_train_defaults_follow_published_hyperparameters():
    config = resolve_run_config(TrainRunConfig, None, {"out_dir": "run"})
    assert config.schedule.lr0 == 2e-4
    assert config.weights.alpha == 10.0
    assert config.weights.beta == 1.0
    assert config.policy.noise_cycle_enabled


@pytest.mark.asyncio
async def test_synth_zero_pairs_is_usage_error(tmp_path):
    assert await run_cli(["synth", "--n", "0", "--out", str(tmp_path / "s")]) == EXIT_CONFIG


@pytest.mark.asyncio
async def test_synth_writes_pairs_and_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "synth"
    args = ["synth", "--n", "6", "--size", "32", "--seed", "7", "--out", str(out)]
    assert await run_cli(args) == EXIT_OK

    first = _snapshot(out)
    assert len([name for name in first if name.endswith("_mask.png")]) == 6
    assert "manifest.json" in first
    assert "config.json" in first

    assert await run_cli(args) == EXIT_CONFIG
    assert await run_cli(args + ["--force"]) == EXIT_OK
    second = _snapshot(out)
    assert set(second) == set(first)
    for name in first:
        if name != "config.json":
            assert second[name] == first[name], name


@pytest.mark.asyncio
async def test_config_file_with_unknown_key_exits_1(tmp_path):
    config_file = tmp_path / "synth.json"
    config_file.write_text(json.dumps({"n": 2, "bogus": 1}))
    assert await run_cli(["synth", "--config", str(config_file), "--out", str(tmp_path / "s")]) == EXIT_CONFIG


@pytest.mark.asyncio
async def test_eval_missing_checkpoint_exits_2(tmp_path):
    code = await run_cli(
        ["eval", "--checkpoint", str(tmp_path / "nope.ckpt"), "--synthetic-n", "4", "--out", str(tmp_path / "eval")]
    )
    assert code == EXIT_RUNTIME


@pytest.mark.asyncio
async def test_output_root_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("DYNPIX_OUTPUT_ROOT", str(tmp_path / "root"))
    assert await run_cli(["synth", "--n", "2", "--size", "16"]) == EXIT_OK
    assert (tmp_path / "root" / "synth" / "manifest.json").exists()


@pytest.mark.asyncio
async def test_train_pix2pix_then_eval_and_plot(tmp_path):
    run_dir = tmp_path / "p2p"
    assert await run_cli(["train", "--mode", "pix2pix", "--seed", "3", "--out", str(run_dir)] + TINY_TRAIN_ARGS) == EXIT_OK

    history = read_loss_csv(run_dir / "losses.csv")
    assert len(history) == 2
    assert all(record.d_noise == 0.0 and record.g_adv_noise == 0.0 for record in history)
    saved = json.loads((run_dir / "config.json").read_text())
    assert saved["policy"]["noise_cycle_enabled"] is False
    assert not (run_dir / "eval").exists()

    checkpoint = run_dir / "checkpoints" / "epoch_1.ckpt"
    assert checkpoint.exists()
    eval_dir = tmp_path / "eval"
    code = await run_cli(
        [
            "eval",
            "--checkpoint", str(checkpoint),
            "--synthetic-n", "10",
            "--synthetic-size", "40",
            "--model-tag", "pix2pix",
            "--out", str(eval_dir),
        ]
    )  # fmt: skip
    assert code == EXIT_OK
    assert (eval_dir / "summary.csv").exists()
    assert "pix2pix" in (eval_dir / "table.md").read_text()

    curves = tmp_path / "curves.png"
    assert await run_cli(["plot", "--losses", str(run_dir / "losses.csv"), "--out", str(curves)]) == EXIT_OK
    assert curves.stat().st_size > 0


@pytest.mark.asyncio
async def test_train_crop_larger_than_resize_exits_1(tmp_path):
    args = ["train", "--out", str(tmp_path / "bad")] + TINY_TRAIN_ARGS + ["--crop-to", "64"]
    assert await run_cli(args) == EXIT_CONFIG


@pytest.mark.asyncio
async def test_vae_zero_latent_is_reported_not_fatal(tmp_path):
    out = tmp_path / "vae"
    code = await run_cli(
        ["vae", "--sizes", "0,2", "--epochs", "1", "--input-size", "16", "--synthetic-n", "4", "--out", str(out)]
    )
    assert code == EXIT_OK
    with open(out / "capacity.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["latent_size", "dice", "error"]
    assert rows[1][:2] == ["0", ""] and rows[1][2]
    assert rows[2][0] == "2" and float(rows[2][1]) >= 0.0 and rows[2][2] == ""
