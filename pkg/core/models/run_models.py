from pathlib import Path
from typing import Literal

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.models.config_models import CyclePolicy
from core.models.config_models import DiscriminatorSpec
from core.models.config_models import GeneratorSpec
from core.models.config_models import LossWeights
from core.models.config_models import NoiseSpec
from core.models.config_models import ScenarioId
from core.models.config_models import SplitName
from core.models.config_models import SplitRatios
from core.models.config_models import TrainSchedule
from core.models.config_models import UpsampleMode
from core.models.config_models import VAEConfig


class RunConfigBase(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticDataConfig(RunConfigBase):
    n: int = Field(110, ge=1)
    size: int = Field(64, ge=16)
    noise_level: float = Field(0.3, ge=0)
    seed: int = 0


class DataSourceConfig(RunConfigBase):
    """Either a PNG-pair directory (optionally with a manifest) or an in-memory synthetic ellipse set."""

    data_dir: str | None = None
    manifest: str | None = None
    synthetic: SyntheticDataConfig = Field(default_factory=SyntheticDataConfig)
    num_workers: int = Field(0, ge=0)


class SynthRunConfig(RunConfigBase):
    n: int = Field(100, ge=1)
    size: int = Field(64, ge=16)
    noise_level: float = Field(0.3, ge=0)
    seed: int = 0
    out_dir: str
    force: bool = False


class TrainRunConfig(RunConfigBase):
    """
    Full training configuration.

    Model input sizes follow `crop_to`, the discriminator sees generator channels + 1 mask channel,
    and the noise grid is sampled with the generator's input channel count.
    """

    data: DataSourceConfig = Field(default_factory=DataSourceConfig)
    splits_file: str | None = None
    split_ratios: SplitRatios = Field(default_factory=SplitRatios)
    train_limit: int | None = Field(None, ge=1)
    resize_to: int = Field(ccst.RESIZE_TO, ge=1)
    crop_to: int = Field(ccst.CROP_TO, ge=1)
    generator: GeneratorSpec = Field(default_factory=GeneratorSpec)
    discriminator: DiscriminatorSpec = Field(default_factory=DiscriminatorSpec)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    schedule: TrainSchedule = Field(default_factory=TrainSchedule)
    weights: LossWeights = Field(default_factory=LossWeights)
    policy: CyclePolicy = Field(default_factory=CyclePolicy)
    seed: int = 0
    out_dir: str
    checkpoint_every: int = Field(10, ge=1)
    sample_every: int = Field(10, ge=1)
    n_preview: int = Field(4, ge=1)
    resume_from: str | None = None
    evaluate_after: bool = True
    threshold: float = ccst.BINARIZE_THRESHOLD

    @model_validator(mode="after")
    def _derive_sizes(self) -> "TrainRunConfig":
        self.generator.input_size = self.crop_to
        self.discriminator.input_size = self.crop_to
        self.discriminator.input_channels = self.generator.input_channels + 1
        self.noise.target_size = self.crop_to
        self.noise.channels = self.generator.input_channels
        return self

    def check(self) -> "TrainRunConfig":
        if self.crop_to > self.resize_to:
            raise ConfigurationError(f"crop_to={self.crop_to} is larger than resize_to={self.resize_to}")
        self.split_ratios.check()
        self.generator.check()
        self.discriminator.check()
        self.noise.check()
        self.schedule.check()
        self.policy.check()
        return self

    @property
    def run_dir(self) -> Path:
        return Path(self.out_dir)


class EvalRunConfig(RunConfigBase):
    checkpoint: str
    data: DataSourceConfig = Field(default_factory=DataSourceConfig)
    splits_file: str | None = None
    split_ratios: SplitRatios = Field(default_factory=SplitRatios)
    split_seed: int = 0
    split: SplitName | Literal["all"] = SplitName.TEST
    extra_test: dict[str, str] = Field(default_factory=dict)
    resize_to: int | None = Field(None, ge=1)
    threshold: float = ccst.BINARIZE_THRESHOLD
    model_tag: str = "dynamic"
    noise_samples: int = Field(0, ge=0)
    seed: int = 0
    out_dir: str


class ScenarioRunConfig(RunConfigBase):
    scenarios: list[ScenarioId] = Field(default_factory=lambda: list(ScenarioId), min_length=1)
    data: DataSourceConfig = Field(default_factory=DataSourceConfig)
    size: int = Field(64, ge=16)
    budget: int = Field(30, ge=0)
    n_samples: int = Field(64, ge=1)
    base_width: int = Field(32, ge=1)
    batch_size: int = Field(8, ge=1)
    lr: float = Field(ccst.INITIAL_LEARNING_RATE, gt=0)
    b_upsample_modes: list[UpsampleMode] = Field(default_factory=lambda: [UpsampleMode.BILINEAR, UpsampleMode.NEAREST])
    seed: int = 0
    out_dir: str

    @field_validator("scenarios", mode="before")
    @classmethod
    def _parse_scenarios(cls, value):
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return [ScenarioId.parse(item.strip() if isinstance(item, str) else item) for item in value]


class VAERunConfig(RunConfigBase):
    sizes: list[int] = Field(default_factory=lambda: list(ccst.VAE_LATENT_SIZES), min_length=1)
    data: DataSourceConfig = Field(default_factory=DataSourceConfig)
    vae: VAEConfig = Field(default_factory=VAEConfig)
    seed: int = 0
    out_dir: str


class PlotRunConfig(RunConfigBase):
    losses_csv: str
    out: str
