from enum import Enum
from typing import Literal

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from core import constants as ccst
from core.exceptions import ConfigurationError


class PathMode(str, Enum):
    IMAGE = "image_path"
    NOISE = "noise_path"


class SkipMode(str, Enum):
    """What the decoder receives where encoder skips would go on the noise path."""

    INJECT_CODE = "inject_code"
    ZEROS = "zeros"
    LIVE = "live"


class UpsampleMode(str, Enum):
    BILINEAR = "bilinear"
    NEAREST = "nearest"


class ParameterGroupName(str, Enum):
    ENCODER = "encoder"
    BOTTLENECK = "bottleneck"
    DECODER = "decoder"
    NOISE_BOTTLENECK = "noise_bottleneck"
    DISCRIMINATOR = "discriminator"


class NoiseRealPairSource(str, Enum):
    IMAGE_GT_PAIR = "image_gt_pair"
    NOISE_GT_PAIR = "noise_gt_pair"


class SplitName(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class ScenarioId(str, Enum):
    A_RAW_NOISE_INPUT = "A_raw_noise_input"
    B_UPSAMPLED_LOW_DIM = "B_upsampled_low_dim"
    C_HIGHDIM_PLUS_BOTTLENECK = "C_highdim_plus_bottleneck"
    D_LOWDIM_PLUS_BOTTLENECK = "D_lowdim_plus_bottleneck"
    E_FROZEN_ENCODER_PLUS_D = "E_frozen_encoder_plus_D"

    @classmethod
    def parse(cls, value: "str | ScenarioId") -> "ScenarioId":
        """Accepts the full id or its leading letter (case-insensitive)."""
        if isinstance(value, cls):
            return value
        for member in cls:
            if value == member.value or value.upper() == member.value[0]:
                return member
        raise ValueError(f"Unknown scenario '{value}'")


class SpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NoiseSpec(SpecModel):
    grid: int = Field(ccst.NOISE_GRID, ge=1)
    low: float = ccst.NOISE_LOW
    high: float = ccst.NOISE_HIGH
    upsample_mode: UpsampleMode = UpsampleMode.BILINEAR
    target_size: int = Field(ccst.CROP_TO, ge=1)
    channels: int = Field(1, ge=1)

    def check(self) -> "NoiseSpec":
        if not self.low < self.high:
            raise ConfigurationError(f"Noise range is empty: low={self.low} must be < high={self.high}")
        if self.grid > self.target_size:
            raise ConfigurationError(f"Noise grid {self.grid} is larger than the target size {self.target_size}")
        return self


class SplitRatios(SpecModel):
    train: float = Field(ccst.TRAIN_FRACTION, gt=0)
    val: float = Field(ccst.VAL_FRACTION, gt=0)
    test: float = Field(ccst.TEST_FRACTION, gt=0)

    def check(self) -> "SplitRatios":
        total = self.train + self.val + self.test
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"Split ratios must sum to 1, got {total}")
        return self


class GeneratorSpec(SpecModel):
    input_size: int = Field(ccst.CROP_TO, ge=1)
    input_channels: int = Field(1, ge=1)
    base_width: int = Field(64, ge=1)
    max_width: int = Field(512, ge=1)
    depth: int = Field(6, ge=1)
    noise_code_shape: tuple[int, int, int] = ccst.NOISE_CODE_SHAPE
    skip_mode_noise_path: SkipMode = SkipMode.INJECT_CODE
    stop_encoder_gradient_on_noise_path: bool = True
    decoder_dropout: float = Field(0.5, ge=0.0, lt=1.0)
    dropout_stages: int = Field(3, ge=0)
    final_activation: Literal["tanh"] = "tanh"

    def check(self) -> "GeneratorSpec":
        if self.input_size % (2**self.depth) != 0:
            raise ConfigurationError(
                f"input_size={self.input_size} is not divisible by 2^depth={2**self.depth}"
            )
        code_channels, code_h, code_w = self.noise_code_shape
        if min(code_channels, code_h, code_w) < 1:
            raise ConfigurationError(f"Invalid noise code shape {self.noise_code_shape}")
        deepest = self.deepest_size
        if deepest < max(code_h, code_w):
            raise ConfigurationError(
                f"Deepest encoder features are {deepest}x{deepest}, too small to pool to a {code_h}x{code_w} code"
            )
        return self

    @property
    def deepest_size(self) -> int:
        return self.input_size // (2**self.depth)

    def stage_widths(self) -> list[int]:
        return [min(self.base_width * 2**i, self.max_width) for i in range(self.depth)]

    def encoder_sizes(self) -> list[int]:
        return [self.input_size // 2 ** (i + 1) for i in range(self.depth)]


class DiscriminatorSpec(SpecModel):
    input_size: int = Field(ccst.CROP_TO, ge=1)
    input_channels: int = Field(2, ge=1)
    base_width: int = Field(64, ge=1)
    max_width: int = Field(512, ge=1)
    depth: int = Field(3, ge=1)

    def check(self) -> "DiscriminatorSpec":
        if self.input_size % (2**self.depth) != 0:
            raise ConfigurationError(
                f"Discriminator input_size={self.input_size} is not divisible by 2^depth={2**self.depth}"
            )
        if self.output_size < 1:
            raise ConfigurationError(
                f"Discriminator with depth={self.depth} on {self.input_size}px input has an empty logit grid"
            )
        return self

    @property
    def output_size(self) -> int:
        # stride-2 stages halve, the stride-1 feature stage and the logit conv each remove one pixel
        return self.input_size // (2**self.depth) - 2


class LossWeights(SpecModel):
    alpha: float = Field(ccst.L1_WEIGHT_ALPHA, ge=0)
    beta: float = Field(ccst.ADVERSARIAL_WEIGHT_BETA, ge=0)


class TrainSchedule(SpecModel):
    lr0: float = Field(ccst.INITIAL_LEARNING_RATE, gt=0)
    total_epochs: int = Field(ccst.HC18_TOTAL_EPOCHS, ge=1)
    constant_epochs: int = Field(ccst.HC18_CONSTANT_EPOCHS, ge=1)
    batch_size: int = Field(ccst.DEFAULT_BATCH_SIZE, ge=1)

    def check(self) -> "TrainSchedule":
        if self.constant_epochs > self.total_epochs:
            raise ConfigurationError(
                f"constant_epochs={self.constant_epochs} exceeds total_epochs={self.total_epochs}"
            )
        return self


class CyclePolicy(SpecModel):
    image_cycle_enabled: bool = True
    noise_cycle_enabled: bool = True
    noise_real_pair_source: NoiseRealPairSource = NoiseRealPairSource.IMAGE_GT_PAIR

    def check(self) -> "CyclePolicy":
        if not (self.image_cycle_enabled or self.noise_cycle_enabled):
            raise ConfigurationError("At least one of the image and noise cycles must be enabled")
        return self


class VAEConfig(SpecModel):
    latent_size: int = Field(4, ge=1)
    input_size: int = Field(64, ge=1)
    depth: int = Field(4, ge=1)
    base_width: int = Field(16, ge=1)
    epochs: int = Field(50, ge=0)
    lr: float = Field(1e-3, gt=0)
    kl_weight: float = Field(1.0, ge=0)
    batch_size: int = Field(16, ge=1)

    def check(self) -> "VAEConfig":
        if self.input_size % (2**self.depth) != 0:
            raise ConfigurationError(
                f"VAE input_size={self.input_size} is not divisible by 2^depth={2**self.depth}"
            )
        return self
