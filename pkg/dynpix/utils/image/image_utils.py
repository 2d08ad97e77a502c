from pathlib import Path

import numpy as np
from PIL import Image

from core import constants as ccst


def grid_to_uint8(grid: np.ndarray) -> np.ndarray:
    """(C, H, W) or (H, W) values in [-1, 1] -> (H, W) uint8 of the first channel."""
    array = np.asarray(grid, dtype=np.float32)
    if array.ndim == 3:
        array = array[0]
    scaled = np.rint((np.clip(array, ccst.MASK_BACKGROUND, ccst.MASK_FOREGROUND) + 1.0) * 127.5)
    return scaled.astype(np.uint8)


def uint8_to_grid(array: np.ndarray) -> np.ndarray:
    return (np.asarray(array, dtype=np.float32) / 127.5 - 1.0)[None, ...]


def save_grid_png(grid: np.ndarray, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(grid_to_uint8(grid)).save(path)
    return path


def make_contact_sheet(grids: list[np.ndarray], columns: int, padding: int = 2) -> np.ndarray:
    """Tile equally sized grids row-major into one uint8 sheet; empty cells stay black."""
    if not grids:
        return np.zeros((1, 1), dtype=np.uint8)
    tiles = [grid_to_uint8(grid) for grid in grids]
    height, width = tiles[0].shape
    columns = max(1, min(columns, len(tiles)))
    rows = -(-len(tiles) // columns)
    sheet = np.zeros((rows * (height + padding) + padding, columns * (width + padding) + padding), dtype=np.uint8)
    for index, tile in enumerate(tiles):
        row, column = divmod(index, columns)
        top = padding + row * (height + padding)
        left = padding + column * (width + padding)
        sheet[top : top + height, left : left + width] = tile
    return sheet


def save_contact_sheet(grids: list[np.ndarray], path: Path | str, columns: int = 8) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(make_contact_sheet(grids, columns)).save(path)
    return path
