import math

import cv2
import numpy as np

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.log import get_logger
from core.models.utility_models import SamplePair
from dynpix.data import data_constants as dcst


logger = get_logger(__name__)


def render_ellipse(size: int, center: tuple[float, float], axes: tuple[float, float], angle: float) -> np.ndarray:
    """Boolean (size, size) filled ellipse; `angle` rotates the first axis counter-clockwise from x, in radians."""
    center_y, center_x = center
    semi_a, semi_b = axes
    y, x = np.ogrid[:size, :size]
    dx = x - center_x
    dy = y - center_y
    cos, sin = math.cos(angle), math.sin(angle)
    along = dx * cos + dy * sin
    across = -dx * sin + dy * cos
    return (along / semi_a) ** 2 + (across / semi_b) ** 2 <= 1.0


def render_clean_image(foreground: np.ndarray) -> np.ndarray:
    """Fixed noise-free rendering of a boolean mask, as a (1, H, W) grid in [-1, 1]."""
    intensity = np.where(foreground, dcst.ELLIPSE_FOREGROUND_INTENSITY, dcst.ELLIPSE_BACKGROUND_INTENSITY)
    return (2.0 * intensity - 1.0).astype(np.float32)[None, ...]


def _random_ellipse(rng: np.random.Generator, size: int) -> np.ndarray:
    semi_a = rng.uniform(size / 8, size / 3)
    semi_b = rng.uniform(size / 8, size / 3)
    angle = rng.uniform(0.0, math.pi)
    margin = max(semi_a, semi_b)
    center_y = rng.uniform(margin, size - 1 - margin)
    center_x = rng.uniform(margin, size - 1 - margin)
    return render_ellipse(size, (center_y, center_x), (semi_a, semi_b), angle)


def _corrupt(foreground: np.ndarray, rng: np.random.Generator, noise_level: float) -> np.ndarray:
    # draws happen for every noise level so masks do not depend on it
    speckle = rng.standard_normal(foreground.shape)
    texture = cv2.GaussianBlur(rng.standard_normal(foreground.shape), (0, 0), dcst.TEXTURE_BLUR_SIGMA)
    intensity = np.where(foreground, dcst.ELLIPSE_FOREGROUND_INTENSITY, dcst.ELLIPSE_BACKGROUND_INTENSITY)
    if noise_level == 0:
        return render_clean_image(foreground)
    noisy = intensity * (1.0 + noise_level * speckle) + 0.5 * noise_level * texture
    return (2.0 * np.clip(noisy, 0.0, 1.0) - 1.0).astype(np.float32)[None, ...]


def synthesize_ellipse_dataset(n: int, size: int, noise_level: float, seed: int) -> list[SamplePair]:
    """
    `n` pairs of a filled random ellipse mask and a speckled, textured rendering of it.

    Axes are drawn in [size/8, size/3] and the centre keeps the whole ellipse inside the frame.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if size < 16:
        raise ConfigurationError(f"size must be >= 16, got {size}")
    if noise_level < 0:
        raise ConfigurationError(f"noise_level must be >= 0, got {noise_level}")

    rng = np.random.default_rng(seed)
    samples = []
    for index in range(n):
        foreground = _random_ellipse(rng, size)
        image = _corrupt(foreground, rng, noise_level)
        mask = np.where(foreground, ccst.MASK_FOREGROUND, ccst.MASK_BACKGROUND).astype(np.float32)[None, ...]
        samples.append(SamplePair(id=f"ellipse_{index:04d}", image=image, mask=mask))

    logger.debug(f"Synthesized {n} ellipse pairs at {size}px (noise_level={noise_level}, seed={seed})")
    return samples
