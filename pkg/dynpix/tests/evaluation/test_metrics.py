import itertools

import numpy as np
import pytest

from core.exceptions import ConfigurationError
from dynpix.evaluation.metrics import binarize
from dynpix.evaluation.metrics import dice
from dynpix.evaluation.metrics import jaccard


def _brute_force(pred: np.ndarray, gt: np.ndarray) -> tuple[float, float]:
    both = pred_only = gt_only = 0
    for p, g in zip(pred.ravel(), gt.ravel()):
        if p > 0 and g > 0:
            both += 1
        elif p > 0:
            pred_only += 1
        elif g > 0:
            gt_only += 1
    if both + pred_only + gt_only == 0:
        return 1.0, 1.0
    return 2 * both / (2 * both + pred_only + gt_only), both / (both + pred_only + gt_only)


def test_exhaustive_three_by_three_pairs():
    masks = [np.array(bits, dtype=np.float32).reshape(3, 3) * 2 - 1 for bits in itertools.product((0, 1), repeat=9)]
    for pred in masks:
        for gt in masks:
            expected_dice, expected_jaccard = _brute_force(pred, gt)
            assert dice(pred, gt) == expected_dice
            assert jaccard(pred, gt) == expected_jaccard


def test_jaccard_follows_from_dice():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pred = np.where(rng.uniform(size=(1, 8, 8)) > rng.uniform(), 1.0, -1.0)
        gt = np.where(rng.uniform(size=(1, 8, 8)) > rng.uniform(), 1.0, -1.0)
        d = dice(pred, gt)
        assert jaccard(pred, gt) == pytest.approx(d / (2 - d), abs=1e-12)


def test_identity_and_disjoint():
    mask = -np.ones((1, 4, 4))
    mask[0, 1:3, 1:3] = 1
    assert dice(mask, mask) == 1.0 and jaccard(mask, mask) == 1.0
    assert dice(mask, -mask) == 0.0 and jaccard(mask, -mask) == 0.0


def test_both_empty_masks_agree():
    empty = -np.ones((1, 4, 4))
    assert dice(empty, empty) == 1.0
    assert jaccard(empty, empty) == 1.0


def test_shape_mismatch():
    with pytest.raises(ConfigurationError):
        dice(np.ones((1, 4, 4)), np.ones((1, 4, 5)))
    with pytest.raises(ConfigurationError):
        jaccard(np.ones((1, 4, 4)), np.ones((1, 5, 4)))


def test_binarize_threshold():
    output = np.array([-0.7, -0.01, 0.0, 0.4])
    assert binarize(output).tolist() == [-1.0, -1.0, 1.0, 1.0]
    assert binarize(output, threshold=0.5).tolist() == [-1.0, -1.0, -1.0, -1.0]
    assert binarize(output, threshold=-0.5).tolist() == [-1.0, 1.0, 1.0, 1.0]
