import numpy as np
import torch
import torch.nn.functional as F

from core.models.config_models import NoiseSpec
from core.models.config_models import UpsampleMode


def upsample_noise(raw: torch.Tensor, spec: NoiseSpec) -> torch.Tensor:
    """(B, C, grid, grid) -> (B, C, target, target); identity when grid == target."""
    if spec.grid == spec.target_size:
        return raw
    size = (spec.target_size, spec.target_size)
    if spec.upsample_mode == UpsampleMode.BILINEAR:
        upsampled = F.interpolate(raw, size=size, mode="bilinear", align_corners=False)
    else:
        upsampled = F.interpolate(raw, size=size, mode="nearest")
    # convex combinations already stay in range; clamp guards float rounding
    return upsampled.clamp(spec.low, spec.high)


def sample_noise_batch(spec: NoiseSpec, batch_size: int, generator: torch.Generator) -> torch.Tensor:
    """One independent Uniform[low, high] grid per batch element, upsampled to the target size."""
    spec.check()
    raw = torch.rand((batch_size, spec.channels, spec.grid, spec.grid), generator=generator)
    raw = raw * (spec.high - spec.low) + spec.low
    return upsample_noise(raw, spec)


def sample_noise(spec: NoiseSpec, seed: int) -> np.ndarray:
    generator = torch.Generator().manual_seed(seed)
    return sample_noise_batch(spec, 1, generator)[0].numpy()
