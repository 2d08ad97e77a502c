import numpy as np

from core import constants as ccst
from core.exceptions import ConfigurationError


def binarize(output: np.ndarray, threshold: float = ccst.BINARIZE_THRESHOLD) -> np.ndarray:
    """Values >= threshold become foreground (+1), the rest background (-1)."""
    return np.where(np.asarray(output) >= threshold, ccst.MASK_FOREGROUND, ccst.MASK_BACKGROUND).astype(np.float32)


def _overlap_counts(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int]:
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ConfigurationError(f"Mask shapes differ: {pred.shape} vs {gt.shape}")
    pred_fg = pred > 0
    gt_fg = gt > 0
    return int(np.count_nonzero(pred_fg & gt_fg)), int(np.count_nonzero(pred_fg)), int(np.count_nonzero(gt_fg))


def dice(pred: np.ndarray, gt: np.ndarray) -> float:
    """2|P & G| / (|P| + |G|); two empty masks agree perfectly."""
    intersection, pred_count, gt_count = _overlap_counts(pred, gt)
    if pred_count + gt_count == 0:
        return 1.0
    return 2 * intersection / (pred_count + gt_count)


def jaccard(pred: np.ndarray, gt: np.ndarray) -> float:
    intersection, pred_count, gt_count = _overlap_counts(pred, gt)
    union = pred_count + gt_count - intersection
    if union == 0:
        return 1.0
    return intersection / union
