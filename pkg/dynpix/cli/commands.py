from pathlib import Path

from core.exceptions import CheckpointError
from core.exceptions import ConfigurationError
from core.log import get_logger
from core.models.config_models import ScenarioId
from core.models.config_models import SplitName
from core.models.run_models import EvalRunConfig
from core.models.run_models import ScenarioRunConfig
from core.models.run_models import SynthRunConfig
from core.models.run_models import VAERunConfig
from core.models.utility_models import CapacityTable
from core.models.utility_models import DistributionFitReport
from core.models.utility_models import EvalReport
from core.models.utility_models import SamplePair
from core.utils import derive_seed
from dynpix.data import data_constants as dcst
from dynpix.data.loading import load_dataset
from dynpix.data.loading import write_dataset
from dynpix.data.preprocessing import preprocess
from dynpix.data.sources import load_samples
from dynpix.data.splits import load_splits
from dynpix.data.splits import split_dataset
from dynpix.data.synthetic import synthesize_ellipse_dataset
from dynpix.evaluation.evaluate import evaluate_split
from dynpix.evaluation.export import export_report
from dynpix.evaluation.metrics import binarize
from dynpix.scenarios.ellipse_fit import distribution_fit_report
from dynpix.scenarios.run_scenario import run_scenario
from dynpix.scenarios.sampling import generate_from_noise
from dynpix.scenarios.scenario_config import default_scenario_base
from dynpix.training.checkpoint import load_checkpoint
from dynpix.utils.generic.generic_utils import is_non_empty_dir
from dynpix.utils.generic.generic_utils import write_json
from dynpix.utils.image.image_utils import save_contact_sheet
from dynpix.vae_probe.probe import export_capacity_table
from dynpix.vae_probe.probe import fit_masks_to_size
from dynpix.vae_probe.probe import sweep_latents


logger = get_logger(__name__)

CONFIG_FILE = "config.json"


def run_synth(config: SynthRunConfig) -> Path:
    out_dir = Path(config.out_dir)
    if is_non_empty_dir(out_dir) and not config.force:
        raise ConfigurationError(f"Output directory {out_dir} is not empty; pass --force to overwrite")
    samples = synthesize_ellipse_dataset(config.n, config.size, config.noise_level, config.seed)
    write_dataset(samples, out_dir, force=True)
    write_json(out_dir / CONFIG_FILE, config)
    return out_dir


def _eval_splits(config: EvalRunConfig, samples: list[SamplePair]) -> dict[str, list[SamplePair]]:
    splits_file = config.splits_file
    if splits_file is None:
        sibling = Path(config.checkpoint).resolve().parent.parent / dcst.SPLITS_FILE
        splits_file = str(sibling) if sibling.exists() else None
    if splits_file is not None:
        logger.info(f"Using splits from {splits_file}")
        parts = load_splits(splits_file, samples)
    else:
        parts = split_dataset(samples, config.split_ratios, config.split_seed)
    by_name = {name.value: part for name, part in zip((SplitName.TRAIN, SplitName.VAL, SplitName.TEST), parts)}
    if config.split == "all":
        return by_name
    return {config.split.value: by_name[config.split.value]}


def run_eval(config: EvalRunConfig) -> list[EvalReport]:
    """Evaluate a checkpoint's image path on in-domain split(s) and every extra test set."""
    if not Path(config.checkpoint).exists():
        raise CheckpointError(f"Checkpoint {config.checkpoint} does not exist", field="path")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / CONFIG_FILE, config)

    state = load_checkpoint(config.checkpoint, restore_rng=False)
    crop_to = state.generator.spec.input_size
    resize_to = config.resize_to or round(crop_to * 288 / 256)

    def prepared(samples: list[SamplePair]) -> list[SamplePair]:
        return [preprocess(sample, resize_to, crop_to, training=False) for sample in samples]

    evaluation_sets = _eval_splits(config, load_samples(config.data))
    for name, path in config.extra_test.items():
        evaluation_sets[name] = load_dataset(path)

    residual = None
    if config.noise_samples > 0:
        outputs = generate_from_noise(
            state.generator, state.noise_spec, config.noise_samples, derive_seed(config.seed, "eval_noise")
        )
        masks = [binarize(output) for output in outputs]
        residual = distribution_fit_report(masks, "noise_path", state.epoch).mean_residual
        save_contact_sheet(outputs, out_dir / "noise_samples.png")

    reports = []
    for split_tag, samples in evaluation_sets.items():
        report = evaluate_split(state.generator, prepared(samples), config.threshold, config.model_tag, split_tag)
        reports.append(report.model_copy(update={"noise_path_residual": residual}))
    export_report(reports, out_dir)
    return reports


def run_scenarios(config: ScenarioRunConfig) -> list[DistributionFitReport]:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / CONFIG_FILE, config)

    size = config.size
    samples = load_samples(config.data)
    masks = list(fit_masks_to_size([sample.mask for sample in samples], size).numpy())
    base = default_scenario_base(size, base_width=config.base_width)

    reports = []
    for scenario in config.scenarios:
        modes = config.b_upsample_modes if scenario == ScenarioId.B_UPSAMPLED_LOW_DIM else [None]
        for mode in modes:
            kwargs = {} if mode is None else {"upsample_mode": mode}
            reports.append(
                run_scenario(
                    scenario,
                    masks,
                    config.budget,
                    config.seed,
                    n_samples=config.n_samples,
                    out_dir=out_dir,
                    base=base,
                    batch_size=config.batch_size,
                    lr=config.lr,
                    **kwargs,
                )
            )
    write_json(out_dir / "summary.json", [report.model_dump(mode="json") for report in reports])
    return reports


def run_vae(config: VAERunConfig) -> CapacityTable:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / CONFIG_FILE, config)

    samples = load_samples(config.data)
    masks = [sample.mask for sample in samples]
    table = sweep_latents(masks, config.sizes, config.vae, config.seed)
    export_capacity_table(table, out_dir)
    write_json(out_dir / "capacity.json", table)
    return table
