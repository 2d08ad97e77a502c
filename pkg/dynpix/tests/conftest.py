import pytest

from core.models.config_models import DiscriminatorSpec
from core.models.config_models import GeneratorSpec
from core.models.config_models import NoiseSpec
from core.models.config_models import TrainSchedule
from dynpix.data.synthetic import synthesize_ellipse_dataset


@pytest.fixture
def tiny_generator_spec() -> GeneratorSpec:
    return GeneratorSpec(input_size=32, base_width=8, max_width=32, depth=3)


@pytest.fixture
def tiny_discriminator_spec() -> DiscriminatorSpec:
    return DiscriminatorSpec(input_size=32, input_channels=2, base_width=8, max_width=32, depth=2)


@pytest.fixture
def tiny_noise_spec() -> NoiseSpec:
    return NoiseSpec(target_size=32)


@pytest.fixture
def tiny_schedule() -> TrainSchedule:
    return TrainSchedule(total_epochs=4, constant_epochs=2, batch_size=2)


@pytest.fixture
def ellipse_samples():
    return synthesize_ellipse_dataset(12, 32, 0.3, seed=3)
