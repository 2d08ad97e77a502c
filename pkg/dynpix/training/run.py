from pathlib import Path

import numpy as np
import torch

from core.log import add_file_handler
from core.log import get_logger
from core.log import remove_file_handler
from core.models.config_models import SplitName
from core.models.run_models import TrainRunConfig
from core.models.utility_models import SamplePair
from core.utils import derive_seed
from dynpix.data import data_constants as dcst
from dynpix.data.dataset import PairDataset
from dynpix.data.dataset import make_loader
from dynpix.data.preprocessing import preprocess
from dynpix.data.sources import load_samples
from dynpix.data.splits import load_splits
from dynpix.data.splits import save_splits
from dynpix.data.splits import split_dataset
from dynpix.evaluation.evaluate import evaluate_split
from dynpix.evaluation.export import export_report
from dynpix.evaluation.metrics import binarize
from dynpix.scenarios.ellipse_fit import distribution_fit_report
from dynpix.scenarios.sampling import generate_from_noise
from dynpix.training.checkpoint import load_checkpoint
from dynpix.training.checkpoint import save_checkpoint
from dynpix.training.loss_log import LossCsvWriter
from dynpix.training.plots import plot_training_curves
from dynpix.training.schedule import apply_lr
from dynpix.training.schedule import lr_at
from dynpix.training.trainer import TrainState
from dynpix.training.trainer import init_train_state
from dynpix.training.trainer import train_iteration
from dynpix.utils.generic.generic_utils import log_time
from dynpix.utils.generic.generic_utils import write_json
from dynpix.utils.image.image_utils import save_contact_sheet


logger = get_logger(__name__)

CONFIG_FILE = "config.json"
LOSSES_FILE = "losses.csv"
CURVES_FILE = "training_curves.png"
LOG_FILE = "train.log"


def checkpoint_path(run_dir: Path, epoch: int) -> Path:
    return run_dir / "checkpoints" / f"epoch_{epoch}.ckpt"


def resolve_splits(
    config: TrainRunConfig, samples: list[SamplePair]
) -> tuple[list[SamplePair], list[SamplePair], list[SamplePair]]:
    if config.splits_file is not None:
        return load_splits(config.splits_file, samples)
    return split_dataset(samples, config.split_ratios, config.seed)


def _eval_ready(samples: list[SamplePair], config: TrainRunConfig) -> list[SamplePair]:
    return [preprocess(sample, config.resize_to, config.crop_to, training=False) for sample in samples]


def write_sample_grids(state: TrainState, preview: list[SamplePair], run_dir: Path, epoch: int, config: TrainRunConfig) -> None:
    """Image path: rows of (image, ground truth, output). Noise path: outputs from a fixed preview noise stream."""
    generator = state.generator
    was_training = generator.training
    generator.eval()
    tiles: list[np.ndarray] = []
    try:
        with torch.no_grad():
            for sample in preview:
                output = generator.forward_image(torch.from_numpy(sample.image)[None, ...])[0].numpy()
                tiles += [sample.image, sample.mask, output]
    finally:
        generator.train(was_training)
    save_contact_sheet(tiles, run_dir / "samples" / f"epoch_{epoch}_imagepath.png", columns=3)

    noise_outputs = generate_from_noise(generator, state.noise_spec, config.n_preview * 4, derive_seed(config.seed, "preview"))
    save_contact_sheet(noise_outputs, run_dir / "samples" / f"epoch_{epoch}_noisepath.png", columns=config.n_preview)


def _evaluate_after(state: TrainState, config: TrainRunConfig, run_dir: Path, splits) -> None:
    _, val, test = splits
    model_tag = "dynamic" if config.policy.noise_cycle_enabled else "pix2pix"
    residual = None
    if config.policy.noise_cycle_enabled:
        outputs = generate_from_noise(state.generator, state.noise_spec, 64, derive_seed(config.seed, "eval_noise"))
        residual = distribution_fit_report([binarize(o) for o in outputs], "noise_path", state.epoch).mean_residual

    reports = []
    for split_tag, split in ((SplitName.VAL.value, val), (SplitName.TEST.value, test)):
        report = evaluate_split(state.generator, _eval_ready(split, config), config.threshold, model_tag, split_tag)
        reports.append(report.model_copy(update={"noise_path_residual": residual}))
    export_report(reports, run_dir / "eval")


def run_training(config: TrainRunConfig, samples: list[SamplePair] | None = None) -> Path:
    """
    Full training run into `config.out_dir`.

    Writes config.json, splits.json, losses.csv (one row per iteration), checkpoints/epoch_{k}.ckpt,
    samples/epoch_{k}_{imagepath,noisepath}.png, training_curves.png, train.log and, when
    `evaluate_after` is set, eval/. Resuming rewrites losses.csv from the checkpoint history first.
    """
    config.check()
    run_dir = config.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / CONFIG_FILE, config)
    handler = add_file_handler(run_dir / LOG_FILE)
    torch.use_deterministic_algorithms(True, warn_only=True)

    try:
        samples = samples if samples is not None else load_samples(config.data)
        splits = resolve_splits(config, samples)
        save_splits(run_dir / dcst.SPLITS_FILE, splits)
        train = splits[0][: config.train_limit] if config.train_limit else splits[0]
        if not train:
            raise ValueError("Training split is empty")
        logger.info(f"Splits: train={len(train)} val={len(splits[1])} test={len(splits[2])}")

        if config.resume_from is not None:
            state = load_checkpoint(config.resume_from, config.generator, config.discriminator)
        else:
            state = init_train_state(config.generator, config.discriminator, config.noise, config.schedule, config.seed)

        dataset = PairDataset(train, config.resize_to, config.crop_to, training=True, seed=config.seed)
        preview = _eval_ready((splits[1] or train)[: config.n_preview], config)
        total_epochs = config.schedule.total_epochs

        with LossCsvWriter(run_dir / LOSSES_FILE, history=state.loss_history) as losses:
            for epoch in range(state.epoch, total_epochs):
                lr = lr_at(epoch, config.schedule)
                apply_lr(state.optimizer_g, lr)
                apply_lr(state.optimizer_d, lr)
                state.epoch = epoch

                records = []
                with log_time(f"epoch {epoch + 1}/{total_epochs}", logger):
                    loader = make_loader(dataset, config.schedule.batch_size, config.seed, epoch, config.data.num_workers)
                    for images, masks in loader:
                        record = train_iteration(state, (images, masks), config.policy, config.weights)
                        losses.write(record)
                        records.append(record)

                state.epoch = epoch + 1
                mean_l1 = sum(r.l1 for r in records) / len(records)
                mean_total = sum(r.g_total for r in records) / len(records)
                logger.info(f"Epoch {state.epoch}/{total_epochs} lr={lr:.2e} l1={mean_l1:.4f} g_total={mean_total:.4f}")

                last_epoch = state.epoch == total_epochs
                if state.epoch % config.checkpoint_every == 0 or last_epoch:
                    save_checkpoint(state, checkpoint_path(run_dir, state.epoch))
                if state.epoch % config.sample_every == 0 or last_epoch:
                    write_sample_grids(state, preview, run_dir, state.epoch, config)

        plot_training_curves(state.loss_history, run_dir / CURVES_FILE)
        if config.evaluate_after:
            _evaluate_after(state, config, run_dir, splits)
    finally:
        remove_file_handler(handler)

    logger.info(f"Run finished: {run_dir}")
    return run_dir
