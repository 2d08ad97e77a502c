import cv2
import numpy as np

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.models.utility_models import SamplePair


def binarize_mask(mask: np.ndarray, threshold: float = ccst.BINARIZE_THRESHOLD) -> np.ndarray:
    return np.where(mask >= threshold, ccst.MASK_FOREGROUND, ccst.MASK_BACKGROUND).astype(np.float32)


def resize_grid(grid: np.ndarray, size: int) -> np.ndarray:
    channels = [cv2.resize(channel, (size, size), interpolation=cv2.INTER_LINEAR) for channel in grid]
    return np.stack(channels).astype(np.float32)


def crop_offsets(resize_to: int, crop_to: int, training: bool, seed: int) -> tuple[int, int]:
    if not training:
        offset = (resize_to - crop_to) // 2
        return offset, offset
    rng = np.random.default_rng(seed)
    top, left = rng.integers(0, resize_to - crop_to + 1, size=2)
    return int(top), int(left)


def preprocess(
    sample: SamplePair,
    resize_to: int = ccst.RESIZE_TO,
    crop_to: int = ccst.CROP_TO,
    training: bool = False,
    seed: int = 0,
) -> SamplePair:
    """
    Resize to resize_to x resize_to, then crop crop_to x crop_to (random when training, centred otherwise).

    The same transform hits image and mask; the mask is re-binarised at 0 afterwards.
    Inputs already at crop_to are passed through untouched (mask re-binarised) when not training.
    """
    if crop_to > resize_to:
        raise ConfigurationError(f"crop_to={crop_to} is larger than resize_to={resize_to}")

    if not training and sample.size == (crop_to, crop_to):
        return SamplePair(id=sample.id, image=sample.image.copy(), mask=binarize_mask(sample.mask), split=sample.split)

    image = np.clip(resize_grid(sample.image, resize_to), ccst.MASK_BACKGROUND, ccst.MASK_FOREGROUND)
    mask = binarize_mask(resize_grid(sample.mask, resize_to))
    top, left = crop_offsets(resize_to, crop_to, training, seed)
    return SamplePair(
        id=sample.id,
        image=np.ascontiguousarray(image[:, top : top + crop_to, left : left + crop_to]),
        mask=np.ascontiguousarray(mask[:, top : top + crop_to, left : left + crop_to]),
        split=sample.split,
    )
