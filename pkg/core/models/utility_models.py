from dataclasses import dataclass
from datetime import datetime

import numpy as np
from pydantic import BaseModel
from pydantic import Field

from core.exceptions import DatasetLoadError
from core.models.config_models import SplitName


@dataclass
class SamplePair:
    """One (image, mask) example. Arrays are float32 (C, H, W); the mask has one channel."""

    id: str
    image: np.ndarray
    mask: np.ndarray
    split: SplitName | None = None

    def __post_init__(self):
        if self.image.ndim != 3 or self.mask.ndim != 3:
            raise DatasetLoadError(f"Sample '{self.id}' must hold (C, H, W) arrays")
        if self.mask.shape[0] != 1:
            raise DatasetLoadError(f"Sample '{self.id}' mask has {self.mask.shape[0]} channels, expected 1")
        if self.image.shape[1:] != self.mask.shape[1:]:
            raise DatasetLoadError(
                f"Sample '{self.id}' image {self.image.shape[1:]} and mask {self.mask.shape[1:]} differ in size"
            )
        if min(self.image.shape[1:]) < 1:
            raise DatasetLoadError(f"Sample '{self.id}' is empty")

    @property
    def size(self) -> tuple[int, int]:
        return int(self.image.shape[1]), int(self.image.shape[2])


LOSS_CSV_COLUMNS = ["iteration", "d_image", "g_adv_image", "l1", "d_noise", "g_adv_noise", "g_total", "epoch"]


class LossRecord(BaseModel):
    iteration: int
    epoch: int = 0
    d_image: float
    g_adv_image: float
    l1: float
    d_noise: float
    g_adv_noise: float
    g_total: float

    def csv_row(self) -> list[str]:
        return [repr(getattr(self, column)) for column in LOSS_CSV_COLUMNS]

    @classmethod
    def from_csv_row(cls, row: dict[str, str]) -> "LossRecord":
        return cls(
            iteration=int(row["iteration"]),
            epoch=int(row.get("epoch") or 0),
            **{column: float(row[column]) for column in LOSS_CSV_COLUMNS if column not in ("iteration", "epoch")},
        )


class SampleScore(BaseModel):
    id: str
    dice: float = Field(..., ge=0.0, le=1.0)
    jaccard: float = Field(..., ge=0.0, le=1.0)


class EvalReport(BaseModel):
    model_tag: str
    split_tag: str
    samples: list[SampleScore]
    count: int
    mean_dice: float
    std_dice: float
    mean_jaccard: float
    std_jaccard: float
    noise_path_residual: float | None = None
    created_at: datetime = Field(default_factory=datetime.now)

    @classmethod
    def from_scores(cls, model_tag: str, split_tag: str, samples: list[SampleScore]) -> "EvalReport":
        dices = np.array([s.dice for s in samples], dtype=np.float64)
        jaccards = np.array([s.jaccard for s in samples], dtype=np.float64)
        return cls(
            model_tag=model_tag,
            split_tag=split_tag,
            samples=samples,
            count=len(samples),
            mean_dice=float(dices.mean()) if len(samples) else 0.0,
            std_dice=float(dices.std()) if len(samples) else 0.0,
            mean_jaccard=float(jaccards.mean()) if len(samples) else 0.0,
            std_jaccard=float(jaccards.std()) if len(samples) else 0.0,
        )


class DistributionFitReport(BaseModel):
    scenario: str
    epochs_trained: int
    n_samples: int
    residuals: list[float] = Field(default_factory=list)
    mean_residual: float | None = None
    foreground_area_mean: float | None = None
    foreground_area_std: float | None = None
    mean_components: float | None = None
    degenerate_fraction: float | None = Field(None, ge=0.0, le=1.0)
    failed: bool = False
    failure: str | None = None


class CapacityRow(BaseModel):
    latent_size: int
    dice: float | None = None
    error: str | None = None


class CapacityTable(BaseModel):
    rows: list[CapacityRow] = Field(default_factory=list)

    def dice_for(self, latent_size: int) -> float | None:
        for row in self.rows:
            if row.latent_size == latent_size:
                return row.dice
        return None
