from pathlib import Path

import numpy as np
import torch

from core import constants as ccst
from core.exceptions import NonFiniteLossError
from core.log import get_logger
from core.models.config_models import DiscriminatorSpec
from core.models.config_models import GeneratorSpec
from core.models.config_models import ParameterGroupName
from core.models.config_models import ScenarioId
from core.models.config_models import UpsampleMode
from core.models.utility_models import DistributionFitReport
from core.utils import derive_seed
from dynpix.data.noise import sample_noise_batch
from dynpix.evaluation.metrics import binarize
from dynpix.losses.adversarial import discriminator_loss
from dynpix.losses.adversarial import generator_adversarial_loss
from dynpix.models.discriminator import build_discriminator
from dynpix.models.generator import build_generator
from dynpix.models.generator import set_trainable
from dynpix.scenarios.ellipse_fit import distribution_fit_report
from dynpix.scenarios.sampling import generate_from_noise
from dynpix.scenarios.scenario_config import configure_scenario
from dynpix.scenarios.scenario_config import default_scenario_base
from dynpix.utils.generic.generic_utils import format_optional
from dynpix.utils.generic.generic_utils import log_time
from dynpix.utils.generic.generic_utils import write_json
from dynpix.utils.image.image_utils import save_contact_sheet


logger = get_logger(__name__)


def scenario_tag(scenario: ScenarioId, upsample_mode: UpsampleMode | None = None) -> str:
    return scenario.value if upsample_mode is None else f"{scenario.value}_{upsample_mode.value}"


def _unconditional_discriminator_spec(size: int, base_width: int) -> DiscriminatorSpec:
    depth = 3
    while depth > 1 and size // 2**depth - 2 < 1:
        depth -= 1
    return DiscriminatorSpec(input_size=size, input_channels=1, base_width=base_width, max_width=8 * base_width, depth=depth)


def run_scenario(
    scenario: ScenarioId | str,
    masks: list[np.ndarray],
    budget: int,
    seed: int,
    n_samples: int = 64,
    out_dir: Path | str | None = None,
    base: GeneratorSpec | None = None,
    upsample_mode: UpsampleMode = UpsampleMode.BILINEAR,
    batch_size: int = 8,
    lr: float = ccst.INITIAL_LEARNING_RATE,
) -> DistributionFitReport:
    """
    Train one noise -> mask GAN preset against `masks`, then score `n_samples` noise outputs.

    The discriminator sees the mask alone. A non-finite loss ends training and is reported as a
    failed scenario instead of raising.
    """
    scenario = ScenarioId.parse(scenario)
    if not masks:
        raise ValueError("run_scenario needs at least one mask")
    size = int(masks[0].shape[-1])
    base = base or default_scenario_base(size)
    preset = configure_scenario(scenario, base, upsample_mode)
    tag = scenario_tag(scenario, upsample_mode if scenario == ScenarioId.B_UPSAMPLED_LOW_DIM else None)

    generator = build_generator(preset.generator_spec, derive_seed(seed, scenario.value, "generator"))
    discriminator = build_discriminator(
        _unconditional_discriminator_spec(size, base.base_width), derive_seed(seed, scenario.value, "discriminator")
    )
    if preset.freeze_encoder:
        set_trainable(generator, ParameterGroupName.ENCODER, False)
    optimizer_g = torch.optim.Adam(generator.parameters(), lr=lr, betas=ccst.ADAM_BETAS)
    optimizer_d = torch.optim.Adam(discriminator.parameters(), lr=lr, betas=ccst.ADAM_BETAS)
    noise_generator = torch.Generator().manual_seed(derive_seed(seed, scenario.value, "noise"))
    torch.manual_seed(derive_seed(seed, scenario.value, "dropout"))

    real_masks = torch.from_numpy(np.stack(masks).astype(np.float32))
    failure: str | None = None
    epochs_trained = 0
    with log_time(f"scenario {tag} ({budget} epochs)", logger):
        try:
            for epoch in range(budget):
                order = np.random.default_rng(derive_seed(seed, scenario.value, "order", epoch)).permutation(len(masks))
                generator.train()
                discriminator.train()
                for start in range(0, len(order), batch_size):
                    real = real_masks[order[start : start + batch_size]]
                    noise = sample_noise_batch(preset.noise_spec, real.shape[0], noise_generator)
                    fake = generator(noise, preset.path_mode)

                    optimizer_d.zero_grad(set_to_none=True)
                    loss_d = discriminator_loss(discriminator(real), discriminator(fake.detach()), from_logits=True)
                    if not torch.isfinite(loss_d):
                        raise NonFiniteLossError("d_noise", loss_d.detach().item())
                    loss_d.backward()
                    optimizer_d.step()

                    optimizer_g.zero_grad(set_to_none=True)
                    loss_g = generator_adversarial_loss(discriminator(fake), from_logits=True)
                    if not torch.isfinite(loss_g):
                        raise NonFiniteLossError("g_adv_noise", loss_g.detach().item())
                    loss_g.backward()
                    optimizer_g.step()
                epochs_trained = epoch + 1
                logger.debug(
                    f"scenario {tag} epoch {epochs_trained}: d={loss_d.detach().item():.4f} g={loss_g.detach().item():.4f}"
                )
        except NonFiniteLossError as e:
            failure = str(e)
            logger.error(f"Scenario {tag} diverged after {epochs_trained} epochs: {failure}")

    samples = [
        binarize(output)
        for output in generate_from_noise(
            generator, preset.noise_spec, n_samples, derive_seed(seed, scenario.value, "samples"), preset.path_mode
        )
    ]
    report = distribution_fit_report(samples, tag, epochs_trained)
    if failure is not None:
        report = report.model_copy(update={"failed": True, "failure": failure})
    logger.info(
        f"Scenario {tag}: mean residual={format_optional(report.mean_residual, '.4f')} "
        f"degenerate={format_optional(report.degenerate_fraction, '.3f')} "
        f"components={format_optional(report.mean_components, '.2f')}"
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        write_json(out_dir / f"{tag}.json", report)
        save_contact_sheet(samples, out_dir / f"{tag}.png")
    return report
