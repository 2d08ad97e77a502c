import numpy as np
import torch

from core.models.config_models import NoiseSpec
from core.models.config_models import PathMode
from dynpix.data.noise import sample_noise_batch
from dynpix.models.generator import DynamicUNetGenerator


def generate_from_noise(
    generator: DynamicUNetGenerator,
    noise_spec: NoiseSpec,
    n: int,
    seed: int,
    path_mode: PathMode = PathMode.NOISE,
    batch_size: int = 16,
) -> list[np.ndarray]:
    """`n` eval-mode outputs from fresh noise drawn with a private generator seeded by `seed`."""
    noise_generator = torch.Generator().manual_seed(seed)
    was_training = generator.training
    generator.eval()
    outputs: list[np.ndarray] = []
    try:
        with torch.no_grad():
            for start in range(0, n, batch_size):
                noise = sample_noise_batch(noise_spec, min(batch_size, n - start), noise_generator)
                outputs.extend(generator(noise, path_mode).cpu().numpy())
    finally:
        generator.train(was_training)
    return outputs
