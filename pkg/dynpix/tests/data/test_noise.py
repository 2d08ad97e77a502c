import numpy as np
import pytest
import torch

from core.exceptions import ConfigurationError
from core.models.config_models import NoiseSpec
from core.models.config_models import UpsampleMode
from dynpix.data.noise import sample_noise
from dynpix.data.noise import sample_noise_batch
from dynpix.data.noise import upsample_noise


def test_sampled_noise_shape_and_range():
    spec = NoiseSpec(target_size=64)
    noise = sample_noise(spec, seed=0)

    assert noise.shape == (1, 64, 64)
    assert noise.min() >= -1.0 and noise.max() <= 1.0


def test_full_size_noise_is_not_resampled():
    spec = NoiseSpec(grid=16, target_size=16)
    generator = torch.Generator().manual_seed(5)
    batch = sample_noise_batch(spec, 3, generator)

    assert batch.shape == (3, 1, 16, 16)
    # every pixel drawn independently
    assert bool((batch[..., 1:] != batch[..., :-1]).all())


def test_each_batch_element_gets_its_own_grid():
    batch = sample_noise_batch(NoiseSpec(target_size=8), 4, torch.Generator().manual_seed(0))
    assert not torch.equal(batch[0], batch[1])


def test_same_seed_same_noise():
    spec = NoiseSpec(target_size=32)
    np.testing.assert_array_equal(sample_noise(spec, 11), sample_noise(spec, 11))
    assert not np.array_equal(sample_noise(spec, 11), sample_noise(spec, 12))


def test_bilinear_upsampling_matches_hand_computation():
    spec = NoiseSpec(grid=2, target_size=4, upsample_mode=UpsampleMode.BILINEAR)
    a, b, c, d = 0.8, -0.4, 0.2, -1.0
    raw = torch.tensor([[[[a, b], [c, d]]]], dtype=torch.float64)

    out = upsample_noise(raw, spec)[0, 0].numpy()

    weights = np.array([[1.0, 0.0], [0.75, 0.25], [0.25, 0.75], [0.0, 1.0]])
    expected = weights @ np.array([[a, b], [c, d]]) @ weights.T
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_nearest_upsampling_repeats_cells():
    spec = NoiseSpec(grid=2, target_size=4, upsample_mode=UpsampleMode.NEAREST)
    raw = torch.tensor([[[[1.0, 2.0], [3.0, 4.0]]]])

    out = upsample_noise(raw, spec)
    # clamped into [-1, 1]
    assert out[0, 0].tolist() == [[1.0, 1.0, 1.0, 1.0]] * 4

    spec = NoiseSpec(grid=2, target_size=4, upsample_mode=UpsampleMode.NEAREST, low=-10.0, high=10.0)
    out = upsample_noise(raw, spec)
    assert out[0, 0].tolist() == [[1.0, 1.0, 2.0, 2.0], [1.0, 1.0, 2.0, 2.0], [3.0, 3.0, 4.0, 4.0], [3.0, 3.0, 4.0, 4.0]]


def test_empty_range_is_rejected():
    with pytest.raises(ConfigurationError):
        sample_noise(NoiseSpec(low=1.0, high=1.0, target_size=8), seed=0)


def test_grid_larger_than_target_is_rejected():
    with pytest.raises(ConfigurationError):
        sample_noise(NoiseSpec(grid=16, target_size=8), seed=0)
