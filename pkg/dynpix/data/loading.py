from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.exceptions import DatasetLoadError
from core.log import get_logger
from core.models.utility_models import SamplePair
from dynpix.data import data_constants as dcst
from dynpix.utils.generic.generic_utils import is_non_empty_dir
from dynpix.utils.generic.generic_utils import read_json
from dynpix.utils.generic.generic_utils import write_json
from dynpix.utils.image.image_utils import save_grid_png
from dynpix.utils.image.image_utils import uint8_to_grid


logger = get_logger(__name__)


def read_grayscale(path: Path) -> np.ndarray:
    with Image.open(path) as image:
        return np.array(image.convert("L"), dtype=np.uint8)


def mask_from_uint8(array: np.ndarray) -> np.ndarray:
    foreground = np.asarray(array) > 127
    return np.where(foreground, ccst.MASK_FOREGROUND, ccst.MASK_BACKGROUND).astype(np.float32)[None, ...]


def _scan_directory(root: Path) -> list[tuple[str, Path, Path]]:
    triples = []
    for image_path in sorted(root.glob(f"*{dcst.IMAGE_SUFFIX}")):
        stem = image_path.stem
        if stem.endswith(dcst.MASK_STEM_SUFFIX):
            continue
        mask_path = image_path.with_name(f"{stem}{dcst.MASK_STEM_SUFFIX}{dcst.IMAGE_SUFFIX}")
        if not mask_path.exists():
            raise DatasetLoadError(f"Image '{stem}' has no mask (expected {mask_path.name})")
        triples.append((stem, image_path, mask_path))
    return triples


def _read_manifest(root: Path, manifest: Path) -> list[tuple[str, Path, Path]]:
    payload = read_json(manifest)
    entries = payload.get(dcst.SAMPLES) if isinstance(payload, dict) else payload
    if not isinstance(entries, list):
        raise DatasetLoadError(f"Manifest {manifest} has no '{dcst.SAMPLES}' list")
    triples = []
    for position, entry in enumerate(entries):
        try:
            triples.append((str(entry[dcst.ID]), root / entry[dcst.IMAGE], root / entry[dcst.MASK]))
        except (KeyError, TypeError) as e:
            raise DatasetLoadError(f"Manifest entry {position} in {manifest} is malformed: {e}") from e
    for sample_id, image_path, mask_path in triples:
        if not mask_path.exists():
            raise DatasetLoadError(f"Image '{sample_id}' has no mask (expected {mask_path.name})")
    return triples


def _load_pair(triple: tuple[str, Path, Path]) -> SamplePair:
    sample_id, image_path, mask_path = triple
    image = read_grayscale(image_path)
    mask = read_grayscale(mask_path)
    if image.shape != mask.shape:
        raise DatasetLoadError(f"Sample '{sample_id}' image {image.shape} and mask {mask.shape} differ in size")
    return SamplePair(id=sample_id, image=uint8_to_grid(image), mask=mask_from_uint8(mask))


def load_dataset(root: Path | str, manifest: Path | str | None = None, num_workers: int = 0) -> list[SamplePair]:
    """
    Load 8-bit grayscale PNG pairs (`<stem>.png` + `<stem>_mask.png`), or the triples listed in a manifest.

    Output is sorted by id whatever the worker count.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetLoadError(f"Dataset directory {root} does not exist")

    manifest_path = Path(manifest) if manifest is not None else None
    if manifest_path is not None and not manifest_path.is_absolute() and not manifest_path.exists():
        manifest_path = root / manifest_path
    triples = _read_manifest(root, manifest_path) if manifest_path is not None else _scan_directory(root)
    triples.sort(key=lambda triple: triple[0])

    if num_workers > 1:
        with ThreadPoolExecutor(max_workers=num_workers) as pool:
            samples = list(pool.map(_load_pair, triples))
    else:
        samples = [_load_pair(triple) for triple in triples]

    logger.info(f"Loaded {len(samples)} pairs from {root}")
    return samples


def write_dataset(samples: list[SamplePair], out_dir: Path | str, force: bool = False) -> Path:
    """Write pairs as PNGs plus manifest.json. Refuses a non-empty directory unless `force`."""
    out_dir = Path(out_dir)
    if is_non_empty_dir(out_dir) and not force:
        raise ConfigurationError(f"Output directory {out_dir} is not empty; pass --force to overwrite")
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for sample in samples:
        image_name = f"{sample.id}{dcst.IMAGE_SUFFIX}"
        mask_name = f"{sample.id}{dcst.MASK_STEM_SUFFIX}{dcst.IMAGE_SUFFIX}"
        save_grid_png(sample.image, out_dir / image_name)
        save_grid_png(sample.mask, out_dir / mask_name)
        entries.append({dcst.ID: sample.id, dcst.IMAGE: image_name, dcst.MASK: mask_name})

    write_json(out_dir / dcst.MANIFEST_FILE, {dcst.SAMPLES: entries})
    logger.info(f"Wrote {len(entries)} pairs to {out_dir}")
    return out_dir
