"""
Adversarial and reconstruction objectives.

Adversarial terms are binary cross-entropy: label 1 for real pairs and for the generator's
attempt to pass as real, label 0 for fakes. Probabilities are clamped to
[PROBABILITY_FLOOR, 1 - PROBABILITY_FLOOR] before the log.
"""

import numpy as np
import torch

from core import constants as ccst
from core.exceptions import NonFiniteLossError
from core.models.config_models import LossWeights


TensorLike = torch.Tensor | np.ndarray | float | list


def _as_tensor(values: TensorLike) -> torch.Tensor:
    if isinstance(values, torch.Tensor):
        return values
    return torch.as_tensor(np.asarray(values, dtype=np.float64))


def _require_finite(values: torch.Tensor, term: str) -> None:
    if not bool(torch.isfinite(values.detach()).all()):
        raise NonFiniteLossError(term)


def _probabilities(scores: TensorLike, from_logits: bool, term: str) -> torch.Tensor:
    scores = _as_tensor(scores)
    _require_finite(scores, term)
    probabilities = torch.sigmoid(scores) if from_logits else scores
    return probabilities.clamp(ccst.PROBABILITY_FLOOR, 1.0 - ccst.PROBABILITY_FLOOR)


def discriminator_loss(real_scores: TensorLike, fake_scores: TensorLike, from_logits: bool = False) -> torch.Tensor:
    """-1/2 mean log D(real) - 1/2 mean log(1 - D(fake))."""
    real = _probabilities(real_scores, from_logits, "discriminator_real")
    fake = _probabilities(fake_scores, from_logits, "discriminator_fake")
    return -0.5 * torch.log(real).mean() - 0.5 * torch.log1p(-fake).mean()


def generator_adversarial_loss(fake_scores: TensorLike, from_logits: bool = False) -> torch.Tensor:
    """Non-saturating form, -mean log D(fake)."""
    fake = _probabilities(fake_scores, from_logits, "generator_adversarial")
    return -torch.log(fake).mean()


def l1_loss(prediction: TensorLike, target: TensorLike) -> torch.Tensor:
    prediction = _as_tensor(prediction)
    target = _as_tensor(target)
    if prediction.shape != target.shape:
        raise ValueError(f"l1_loss shape mismatch: {tuple(prediction.shape)} vs {tuple(target.shape)}")
    _require_finite(prediction, "l1_prediction")
    _require_finite(target, "l1_target")
    return (prediction - target).abs().mean()


def total_generator_objective(l1: float, g_adv_image: float, g_adv_noise: float, w: LossWeights) -> float:
    return w.alpha * l1 + w.beta * g_adv_image + w.beta * g_adv_noise
