import asyncio
import sys
from pathlib import Path

import asyncclick as click
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from core.exceptions import ConfigurationError
from core.exceptions import DynPixError
from core.log import get_logger
from core.models.config_models import SplitName
from core.models.run_models import EvalRunConfig
from core.models.run_models import PlotRunConfig
from core.models.run_models import ScenarioRunConfig
from core.models.run_models import SynthRunConfig
from core.models.run_models import TrainRunConfig
from core.models.run_models import VAERunConfig
from dynpix.cli.cli_config import default_out_dir
from dynpix.cli.cli_config import load_env_config
from dynpix.cli.cli_config import resolve_run_config
from dynpix.cli.commands import run_eval
from dynpix.cli.commands import run_scenarios
from dynpix.cli.commands import run_synth
from dynpix.cli.commands import run_vae
from dynpix.training.loss_log import read_loss_csv
from dynpix.training.plots import plot_training_curves
from dynpix.training.run import run_training
from dynpix.utils.generic.generic_utils import format_optional


load_dotenv()
logger = get_logger(__name__)
console = Console()

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _parse_int_list(value: str | None) -> list[int] | None:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'") from e


def _parse_named_paths(values: tuple[str, ...]) -> dict[str, str] | None:
    if not values:
        return None
    named = {}
    for value in values:
        name, sep, path = value.partition("=")
        if not sep or not name or not path:
            raise click.BadParameter(f"expected name=path, got '{value}'")
        named[name] = path
    return named


@click.group()
def cli():
    """Dynamic-Pix2Pix: dual-cycle conditional GAN training, scenario lab, evaluation and VAE probe."""
    pass


@cli.command()
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--n", type=click.IntRange(min=1), default=None, help="Number of pairs.")
@click.option("--size", type=click.IntRange(min=16), default=None, help="Image side in pixels.")
@click.option("--noise-level", type=float, default=None, help="Speckle/texture strength; 0 gives clean renderings.")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None, help="Output directory.")
@click.option("--force", is_flag=True, default=False, help="Write into a non-empty directory.")
async def synth(config_path, n, size, noise_level, seed, out, force):
    """Write a synthetic ellipse dataset as PNG pairs + manifest.json"""
    env = load_env_config()
    config = resolve_run_config(
        SynthRunConfig,
        config_path,
        {"n": n, "size": size, "noise_level": noise_level, "seed": seed, "out_dir": out, "force": force or None},
        defaults={"out_dir": default_out_dir(env, "synth")},
    )
    out_dir = run_synth(config)

    table = Table(show_header=True, header_style="bold magenta")
    for column in ("pairs", "size", "noise level", "seed", "directory"):
        table.add_column(column)
    table.add_row(str(config.n), str(config.size), str(config.noise_level), str(config.seed), str(out_dir))
    console.print(table)


@cli.command()
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--mode", type=click.Choice(["dynamic", "pix2pix"]), default=None, help="pix2pix disables the noise cycle.")
@click.option("--data-dir", default=None, help="Directory of <stem>.png / <stem>_mask.png pairs.")
@click.option("--manifest", default=None)
@click.option("--synthetic-n", type=click.IntRange(min=1), default=None, help="Synthetic pairs when no --data-dir.")
@click.option("--synthetic-size", type=click.IntRange(min=16), default=None)
@click.option("--splits-file", default=None, help="Reuse a splits.json from an earlier run.")
@click.option("--train-limit", type=click.IntRange(min=1), default=None, help="Keep only the first k training pairs.")
@click.option("--epochs", type=click.IntRange(min=1), default=None)
@click.option("--constant-epochs", type=click.IntRange(min=1), default=None)
@click.option("--batch-size", type=click.IntRange(min=1), default=None)
@click.option("--lr", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--resize-to", type=click.IntRange(min=1), default=None)
@click.option("--crop-to", type=click.IntRange(min=1), default=None)
@click.option("--depth", type=click.IntRange(min=1), default=None, help="Generator down/up stages.")
@click.option("--base-width", type=click.IntRange(min=1), default=None)
@click.option("--checkpoint-every", type=click.IntRange(min=1), default=None)
@click.option("--sample-every", type=click.IntRange(min=1), default=None)
@click.option("--num-workers", type=click.IntRange(min=0), default=None)
@click.option("--resume", default=None, help="Checkpoint to continue from.")
@click.option("--no-eval", is_flag=True, default=False, help="Skip the val/test evaluation after training.")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None, help="Run directory.")
async def train(
    config_path,
    mode,
    data_dir,
    manifest,
    synthetic_n,
    synthetic_size,
    splits_file,
    train_limit,
    epochs,
    constant_epochs,
    batch_size,
    lr,
    alpha,
    beta,
    resize_to,
    crop_to,
    depth,
    base_width,
    checkpoint_every,
    sample_every,
    num_workers,
    resume,
    no_eval,
    seed,
    out,
):
    """Train a dynamic (dual-cycle) or plain pix2pix model"""
    env = load_env_config()
    noise_cycle = None if mode is None else mode == "dynamic"
    config = resolve_run_config(
        TrainRunConfig,
        config_path,
        {
            "policy.noise_cycle_enabled": noise_cycle,
            "data.data_dir": data_dir,
            "data.manifest": manifest,
            "data.synthetic.n": synthetic_n,
            "data.synthetic.size": synthetic_size,
            "data.num_workers": num_workers,
            "splits_file": splits_file,
            "train_limit": train_limit,
            "schedule.total_epochs": epochs,
            "schedule.constant_epochs": constant_epochs,
            "schedule.batch_size": batch_size,
            "schedule.lr0": lr,
            "weights.alpha": alpha,
            "weights.beta": beta,
            "resize_to": resize_to,
            "crop_to": crop_to,
            "generator.depth": depth,
            "generator.base_width": base_width,
            "checkpoint_every": checkpoint_every,
            "sample_every": sample_every,
            "resume_from": resume,
            "evaluate_after": False if no_eval else None,
            "seed": seed,
            "out_dir": out,
        },
        defaults={"out_dir": default_out_dir(env, f"train-{mode or 'dynamic'}", seed or 0)},
    )
    run_dir = run_training(config)
    console.print(f"[bold green]Run directory:[/bold green] {run_dir}")


@cli.command(name="eval")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--checkpoint", default=None, help="Checkpoint file written by train.")
@click.option("--data-dir", default=None)
@click.option("--manifest", default=None)
@click.option("--synthetic-n", type=click.IntRange(min=1), default=None)
@click.option("--synthetic-size", type=click.IntRange(min=16), default=None)
@click.option("--splits-file", default=None, help="Defaults to splits.json next to the checkpoints directory.")
@click.option("--split", type=click.Choice([s.value for s in SplitName] + ["all"]), default=None)
@click.option("--extra-test", multiple=True, help="Out-of-domain test set as name=path; repeatable.")
@click.option("--threshold", type=float, default=None)
@click.option("--resize-to", type=click.IntRange(min=1), default=None)
@click.option("--model-tag", default=None)
@click.option("--noise-samples", type=click.IntRange(min=0), default=None, help="Also sample N noise-path outputs.")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None)
async def evaluate(
    config_path,
    checkpoint,
    data_dir,
    manifest,
    synthetic_n,
    synthetic_size,
    splits_file,
    split,
    extra_test,
    threshold,
    resize_to,
    model_tag,
    noise_samples,
    seed,
    out,
):
    """Score a checkpoint with Dice / Jaccard"""
    env = load_env_config()
    config = resolve_run_config(
        EvalRunConfig,
        config_path,
        {
            "checkpoint": checkpoint,
            "data.data_dir": data_dir,
            "data.manifest": manifest,
            "data.synthetic.n": synthetic_n,
            "data.synthetic.size": synthetic_size,
            "splits_file": splits_file,
            "split": split,
            "extra_test": _parse_named_paths(extra_test),
            "threshold": threshold,
            "resize_to": resize_to,
            "model_tag": model_tag,
            "noise_samples": noise_samples,
            "seed": seed,
            "out_dir": out,
        },
        defaults={"out_dir": default_out_dir(env, "eval")},
    )
    reports = run_eval(config)

    table = Table(show_header=True, header_style="bold magenta")
    for column in ("model", "split", "n", "dice", "jaccard", "noise residual"):
        table.add_column(column)
    for report in reports:
        residual = "-" if report.noise_path_residual is None else f"{report.noise_path_residual:.4f}"
        table.add_row(
            report.model_tag,
            report.split_tag,
            str(report.count),
            f"{report.mean_dice:.4f} ± {report.std_dice:.4f}",
            f"{report.mean_jaccard:.4f} ± {report.std_jaccard:.4f}",
            residual,
        )
    console.print(table)


@cli.command()
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--scenarios", "scenario_ids", default=None, help="Comma-separated ids or letters, e.g. A,E.")
@click.option("--budget", type=click.IntRange(min=0), default=None, help="Training epochs per scenario.")
@click.option("--n-samples", type=click.IntRange(min=1), default=None)
@click.option("--base-width", type=click.IntRange(min=1), default=None)
@click.option("--batch-size", type=click.IntRange(min=1), default=None)
@click.option("--data-dir", default=None)
@click.option("--synthetic-n", type=click.IntRange(min=1), default=None)
@click.option("--size", type=click.IntRange(min=16), default=None, help="Mask side the lab trains at.")
@click.option("--b-modes", default=None, help="Comma-separated noise upsampling modes for scenario B.")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None)
async def scenarios(
    config_path, scenario_ids, budget, n_samples, base_width, batch_size, data_dir, synthetic_n, size, b_modes, seed, out
):
    """Run the noise-injection scenario lab"""
    env = load_env_config()
    config = resolve_run_config(
        ScenarioRunConfig,
        config_path,
        {
            "scenarios": scenario_ids,
            "budget": budget,
            "n_samples": n_samples,
            "base_width": base_width,
            "batch_size": batch_size,
            "data.data_dir": data_dir,
            "data.synthetic.n": synthetic_n,
            "data.synthetic.size": size,
            "size": size,
            "b_upsample_modes": None if b_modes is None else [m.strip() for m in b_modes.split(",")],
            "seed": seed,
            "out_dir": out,
        },
        defaults={"out_dir": default_out_dir(env, "scenarios")},
    )
    reports = run_scenarios(config)

    table = Table(show_header=True, header_style="bold magenta")
    for column in ("scenario", "epochs", "mean residual", "degenerate", "components", "status"):
        table.add_column(column)
    for report in reports:
        table.add_row(
            report.scenario,
            str(report.epochs_trained),
            format_optional(report.mean_residual, ".4f"),
            format_optional(report.degenerate_fraction, ".3f"),
            format_optional(report.mean_components, ".2f"),
            "failed" if report.failed else "ok",
        )
    console.print(table)


@cli.command()
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--sizes", default=None, help="Comma-separated latent sizes.")
@click.option("--epochs", type=click.IntRange(min=0), default=None)
@click.option("--kl-weight", type=float, default=None)
@click.option("--input-size", type=click.IntRange(min=1), default=None)
@click.option("--data-dir", default=None)
@click.option("--synthetic-n", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None)
async def vae(config_path, sizes, epochs, kl_weight, input_size, data_dir, synthetic_n, seed, out):
    """Sweep VAE latent sizes on the masks and report reconstruction Dice"""
    env = load_env_config()
    config = resolve_run_config(
        VAERunConfig,
        config_path,
        {
            "sizes": _parse_int_list(sizes),
            "vae.epochs": epochs,
            "vae.kl_weight": kl_weight,
            "vae.input_size": input_size,
            "data.data_dir": data_dir,
            "data.synthetic.n": synthetic_n,
            "seed": seed,
            "out_dir": out,
        },
        defaults={"out_dir": default_out_dir(env, "vae")},
    )
    capacity = run_vae(config)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("latent size")
    table.add_column("dice")
    for row in capacity.rows:
        table.add_row(str(row.latent_size), f"{row.dice:.4f}" if row.dice is not None else f"failed: {row.error}")
    console.print(table)


@cli.command()
@click.option("--losses", "losses_csv", required=True, help="losses.csv of a training run.")
@click.option("--out", default=None, help="PNG path; defaults to training_curves.png next to the CSV.")
async def plot(losses_csv, out):
    """Re-render the training-curve figure from losses.csv"""
    config = PlotRunConfig(losses_csv=losses_csv, out=out or str(Path(losses_csv).with_name("training_curves.png")))
    path = plot_training_curves(read_loss_csv(config.losses_csv), config.out)
    console.print(f"[bold green]Wrote[/bold green] {path}")


async def run_cli(args: list[str]) -> int:
    """Invoke the group and map failures onto exit codes: 1 usage/config, 2 runtime."""
    try:
        result = await cli.main(args=args, prog_name="dynpix", standalone_mode=False)
    except (click.UsageError, ConfigurationError, ValidationError) as e:
        console.print(f"[bold red]Configuration error:[/bold red] {e}")
        return EXIT_CONFIG
    except click.Abort:
        return EXIT_CONFIG
    except (DynPixError, OSError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        console.print(f"[bold red]Failed:[/bold red] {e}")
        return EXIT_RUNTIME
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(asyncio.run(run_cli(sys.argv[1:])))


if __name__ == "__main__":
    main()
