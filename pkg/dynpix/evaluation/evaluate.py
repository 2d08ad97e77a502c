from typing import Callable

import numpy as np
import torch
import torch.nn as nn

from core import constants as ccst
from core.exceptions import EvaluationError
from core.log import get_logger
from core.models.utility_models import EvalReport
from core.models.utility_models import SamplePair
from core.models.utility_models import SampleScore
from dynpix.evaluation.metrics import binarize
from dynpix.evaluation.metrics import dice
from dynpix.evaluation.metrics import jaccard
from dynpix.models.generator import DynamicUNetGenerator


logger = get_logger(__name__)

SegmentationModel = DynamicUNetGenerator | Callable[[torch.Tensor], torch.Tensor]


def _predict(model: SegmentationModel, image: np.ndarray) -> np.ndarray:
    batch = torch.from_numpy(np.ascontiguousarray(image))[None, ...]
    with torch.no_grad():
        if isinstance(model, DynamicUNetGenerator):
            output = model.forward_image(batch)
        else:
            output = model(batch)
    return output[0].detach().cpu().numpy()


def evaluate_split(
    model: SegmentationModel,
    split: list[SamplePair],
    threshold: float = ccst.BINARIZE_THRESHOLD,
    model_tag: str = "model",
    split_tag: str = "test",
) -> EvalReport:
    """
    Image-path prediction, binarisation and Dice/Jaccard per sample, in split order.

    Samples must already be preprocessed to the model's input size. Dice is averaged per image.
    """
    if isinstance(model, nn.Module):
        model.eval()
    scores = []
    for sample in split:
        try:
            output = _predict(model, sample.image)
        except Exception as e:
            raise EvaluationError(sample.id, e) from e
        predicted = binarize(output, threshold)
        scores.append(SampleScore(id=sample.id, dice=dice(predicted, sample.mask), jaccard=jaccard(predicted, sample.mask)))

    report = EvalReport.from_scores(model_tag, split_tag, scores)
    logger.info(
        f"{model_tag}/{split_tag}: n={report.count} dice={report.mean_dice:.4f}±{report.std_dice:.4f} "
        f"jaccard={report.mean_jaccard:.4f}±{report.std_jaccard:.4f}"
    )
    return report
