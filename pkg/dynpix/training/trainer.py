import math
from dataclasses import dataclass
from dataclasses import field
from typing import Sequence

import torch
import torch.nn as nn

from core import constants as ccst
from core.exceptions import NonFiniteLossError
from core.log import get_logger
from core.models.config_models import CyclePolicy
from core.models.config_models import DiscriminatorSpec
from core.models.config_models import GeneratorSpec
from core.models.config_models import LossWeights
from core.models.config_models import NoiseRealPairSource
from core.models.config_models import NoiseSpec
from core.models.config_models import ParameterGroupName
from core.models.config_models import TrainSchedule
from core.models.utility_models import LossRecord
from core.models.utility_models import SamplePair
from core.utils import derive_seed
from dynpix.data.dataset import collate_samples
from dynpix.data.noise import sample_noise_batch
from dynpix.losses.adversarial import discriminator_loss
from dynpix.losses.adversarial import generator_adversarial_loss
from dynpix.losses.adversarial import l1_loss
from dynpix.losses.adversarial import total_generator_objective
from dynpix.models.discriminator import PatchDiscriminator
from dynpix.models.discriminator import build_discriminator
from dynpix.models.generator import DynamicUNetGenerator
from dynpix.models.generator import build_generator
from dynpix.models.generator import group_trainable
from dynpix.models.generator import set_trainable


logger = get_logger(__name__)

Batch = tuple[torch.Tensor, torch.Tensor] | Sequence[SamplePair]


@dataclass
class TrainState:
    generator: DynamicUNetGenerator
    discriminator: PatchDiscriminator
    optimizer_g: torch.optim.Adam
    optimizer_d: torch.optim.Adam
    noise_spec: NoiseSpec
    noise_generator: torch.Generator
    epoch: int = 0
    iteration: int = 0
    loss_history: list[LossRecord] = field(default_factory=list)


def make_optimizers(
    generator: nn.Module, discriminator: nn.Module, lr: float
) -> tuple[torch.optim.Adam, torch.optim.Adam]:
    optimizer_g = torch.optim.Adam(generator.parameters(), lr=lr, betas=ccst.ADAM_BETAS)
    optimizer_d = torch.optim.Adam(discriminator.parameters(), lr=lr, betas=ccst.ADAM_BETAS)
    return optimizer_g, optimizer_d


def init_train_state(
    generator_spec: GeneratorSpec,
    discriminator_spec: DiscriminatorSpec,
    noise_spec: NoiseSpec,
    schedule: TrainSchedule,
    seed: int,
) -> TrainState:
    generator = build_generator(generator_spec, derive_seed(seed, "generator"))
    discriminator = build_discriminator(discriminator_spec, derive_seed(seed, "discriminator"))
    optimizer_g, optimizer_d = make_optimizers(generator, discriminator, schedule.lr0)
    # dropout draws from the global stream
    torch.manual_seed(derive_seed(seed, "dropout"))
    return TrainState(
        generator=generator,
        discriminator=discriminator,
        optimizer_g=optimizer_g,
        optimizer_d=optimizer_d,
        noise_spec=noise_spec.check(),
        noise_generator=torch.Generator().manual_seed(derive_seed(seed, "noise")),
    )


def _requires_grad(module: nn.Module, flag: bool) -> None:
    for parameter in module.parameters():
        parameter.requires_grad_(flag)


def _checked(value: torch.Tensor, term: str) -> float:
    number = float(value.detach())
    if not math.isfinite(number):
        raise NonFiniteLossError(term, number)
    return number


def _as_tensors(batch: Batch) -> tuple[torch.Tensor, torch.Tensor]:
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], torch.Tensor):
        return batch
    return collate_samples(list(batch))


def _discriminator_step(
    state: TrainState, real: tuple[torch.Tensor, ...], fake: tuple[torch.Tensor, ...], term: str
) -> float:
    _requires_grad(state.discriminator, True)
    state.optimizer_d.zero_grad(set_to_none=True)
    loss = discriminator_loss(state.discriminator(*real), state.discriminator(*fake), from_logits=True)
    value = _checked(loss, term)
    loss.backward()
    state.optimizer_d.step()
    _requires_grad(state.discriminator, False)
    return value


def _generator_step(state: TrainState, objective: torch.Tensor) -> None:
    state.optimizer_g.zero_grad(set_to_none=True)
    objective.backward()
    state.optimizer_g.step()


def image_cycle(state: TrainState, images: torch.Tensor, masks: torch.Tensor, weights: LossWeights) -> tuple[float, float, float]:
    """Discriminator on (image, mask) vs (image, G(image)), then G on alpha*L1 + beta*adversarial."""
    generator = state.generator
    fake = generator.forward_image(images)
    d_image = _discriminator_step(state, (images, masks), (images, fake.detach()), "d_image")

    g_adv = generator_adversarial_loss(state.discriminator(images, fake), from_logits=True)
    l1 = l1_loss(fake, masks)
    g_adv_image = _checked(g_adv, "g_adv_image")
    l1_value = _checked(l1, "l1")
    _generator_step(state, weights.alpha * l1 + weights.beta * g_adv)
    return d_image, g_adv_image, l1_value


def noise_cycle(
    state: TrainState, images: torch.Tensor, masks: torch.Tensor, policy: CyclePolicy, weights: LossWeights
) -> tuple[float, float]:
    """Discriminator on the real pair vs (noise, G_noise(noise)), then decoder + noise bottleneck on beta*adversarial."""
    generator = state.generator
    noise = sample_noise_batch(state.noise_spec, images.shape[0], state.noise_generator)

    encoder_trainable = group_trainable(generator, ParameterGroupName.ENCODER)
    set_trainable(generator, ParameterGroupName.ENCODER, False)
    try:
        fake = generator.forward_noise(noise)
        conditioning = images if policy.noise_real_pair_source == NoiseRealPairSource.IMAGE_GT_PAIR else noise
        d_noise = _discriminator_step(state, (conditioning, masks), (noise, fake.detach()), "d_noise")

        g_adv = generator_adversarial_loss(state.discriminator(noise, fake), from_logits=True)
        g_adv_noise = _checked(g_adv, "g_adv_noise")
        _generator_step(state, weights.beta * g_adv)
    finally:
        set_trainable(generator, ParameterGroupName.ENCODER, encoder_trainable)
    return d_noise, g_adv_noise


def train_iteration(state: TrainState, batch: Batch, policy: CyclePolicy, weights: LossWeights) -> LossRecord:
    """
    One dual-cycle step: image cycle first, then noise cycle; disabled cycles report 0.

    Generator parameters only move on optimizer_g steps and discriminator parameters only on
    optimizer_d steps; the discriminator is frozen (no grads) while the generator backpropagates.
    """
    policy.check()
    images, masks = _as_tensors(batch)
    if images.shape[0] == 0:
        raise ValueError("train_iteration needs a non-empty batch")

    state.generator.train()
    state.discriminator.train()

    d_image = g_adv_image = l1 = d_noise = g_adv_noise = 0.0
    if policy.image_cycle_enabled:
        d_image, g_adv_image, l1 = image_cycle(state, images, masks, weights)
    if policy.noise_cycle_enabled:
        d_noise, g_adv_noise = noise_cycle(state, images, masks, policy, weights)
    _requires_grad(state.discriminator, True)

    record = LossRecord(
        iteration=state.iteration,
        epoch=state.epoch,
        d_image=d_image,
        g_adv_image=g_adv_image,
        l1=l1,
        d_noise=d_noise,
        g_adv_noise=g_adv_noise,
        g_total=total_generator_objective(l1, g_adv_image, g_adv_noise, weights),
    )
    state.iteration += 1
    state.loss_history.append(record)
    logger.debug(
        f"iter {record.iteration}: d_image={d_image:.4f} g_adv_image={g_adv_image:.4f} l1={l1:.4f} "
        f"d_noise={d_noise:.4f} g_adv_noise={g_adv_noise:.4f} g_total={record.g_total:.4f}"
    )
    return record
