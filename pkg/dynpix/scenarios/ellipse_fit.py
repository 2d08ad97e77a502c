import cv2
import numpy as np

from core.models.utility_models import DistributionFitReport


# pixel centres with squared Mahalanobis distance <= 4 lie inside the moment ellipse of a uniform filled ellipse
MAHALANOBIS_RADIUS_SQUARED = 4.0


def _foreground(mask: np.ndarray) -> np.ndarray:
    array = np.asarray(mask)
    if array.ndim == 3:
        array = array[0]
    return array > 0


def fit_ellipse_moments(foreground: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centroid and covariance of the foreground pixel coordinates (row, column)."""
    coordinates = np.argwhere(foreground).astype(np.float64)
    center = coordinates.mean(axis=0)
    centered = coordinates - center
    covariance = centered.T @ centered / len(coordinates)
    return center, covariance


def render_fitted_ellipse(shape: tuple[int, int], center: np.ndarray, covariance: np.ndarray) -> np.ndarray:
    rows, columns = np.indices(shape, dtype=np.float64)
    offsets = np.stack([rows - center[0], columns - center[1]], axis=-1)
    inverse = np.linalg.pinv(covariance)
    distance = np.einsum("...i,ij,...j->...", offsets, inverse, offsets)
    return distance <= MAHALANOBIS_RADIUS_SQUARED


def ellipse_fit_residual(mask: np.ndarray) -> float:
    """
    |mask XOR fitted ellipse| / |mask| for the moment-matched ellipse.

    Empty masks score 1.0.
    """
    foreground = _foreground(mask)
    area = int(np.count_nonzero(foreground))
    if area == 0:
        return 1.0
    center, covariance = fit_ellipse_moments(foreground)
    fitted = render_fitted_ellipse(foreground.shape, center, covariance)
    return float(np.count_nonzero(foreground ^ fitted) / area)


def count_components(mask: np.ndarray) -> int:
    foreground = _foreground(mask).astype(np.uint8)
    count, _ = cv2.connectedComponents(foreground, connectivity=8)
    return int(count) - 1


def is_degenerate(mask: np.ndarray) -> bool:
    foreground = _foreground(mask)
    return not foreground.any() or bool(foreground.all())


def distribution_fit_report(masks: list[np.ndarray], scenario: str, epochs_trained: int) -> DistributionFitReport:
    residuals = [ellipse_fit_residual(mask) for mask in masks]
    areas = np.array([np.count_nonzero(_foreground(mask)) / _foreground(mask).size for mask in masks], dtype=np.float64)
    components = [count_components(mask) for mask in masks]
    degenerate = [is_degenerate(mask) for mask in masks]
    return DistributionFitReport(
        scenario=scenario,
        epochs_trained=epochs_trained,
        n_samples=len(masks),
        residuals=residuals,
        mean_residual=float(np.mean(residuals)) if residuals else None,
        foreground_area_mean=float(areas.mean()) if len(areas) else None,
        foreground_area_std=float(areas.std()) if len(areas) else None,
        mean_components=float(np.mean(components)) if components else None,
        degenerate_fraction=float(np.mean(degenerate)) if degenerate else None,
    )
