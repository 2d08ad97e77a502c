import dataclasses
import math
from pathlib import Path

import numpy as np

from core.exceptions import DatasetLoadError
from core.models.config_models import SplitName
from core.models.config_models import SplitRatios
from core.models.utility_models import SamplePair
from dynpix.utils.generic.generic_utils import read_json
from dynpix.utils.generic.generic_utils import write_json


SPLIT_ORDER = (SplitName.TRAIN, SplitName.VAL, SplitName.TEST)


def compute_split_sizes(n: int, ratios: SplitRatios) -> tuple[int, int, int]:
    """floor(n * ratio) per split; the remainder goes round-robin starting with train."""
    fractions = (ratios.train, ratios.val, ratios.test)
    sizes = [math.floor(n * fraction + 1e-9) for fraction in fractions]
    remainder = n - sum(sizes)
    for i in range(remainder):
        sizes[i % 3] += 1
    return sizes[0], sizes[1], sizes[2]


def split_dataset(
    data: list[SamplePair], ratios: SplitRatios, seed: int
) -> tuple[list[SamplePair], list[SamplePair], list[SamplePair]]:
    ratios.check()
    sizes = compute_split_sizes(len(data), ratios)
    order = np.random.default_rng(seed).permutation(len(data))

    parts: list[list[SamplePair]] = []
    start = 0
    for name, size in zip(SPLIT_ORDER, sizes):
        chosen = [data[int(i)] for i in order[start : start + size]]
        chosen.sort(key=lambda sample: sample.id)
        parts.append([dataclasses.replace(sample, split=name) for sample in chosen])
        start += size
    return parts[0], parts[1], parts[2]


def save_splits(
    path: Path | str, splits: tuple[list[SamplePair], list[SamplePair], list[SamplePair]]
) -> Path:
    return write_json(path, {name.value: [sample.id for sample in part] for name, part in zip(SPLIT_ORDER, splits)})


def load_splits(
    path: Path | str, data: list[SamplePair]
) -> tuple[list[SamplePair], list[SamplePair], list[SamplePair]]:
    """Rebuild a persisted partition over `data`; every listed id must exist."""
    payload = read_json(path)
    by_id = {sample.id: sample for sample in data}
    parts: list[list[SamplePair]] = []
    for name in SPLIT_ORDER:
        ids = payload.get(name.value, [])
        missing = [sample_id for sample_id in ids if sample_id not in by_id]
        if missing:
            raise DatasetLoadError(f"Split file {path} lists unknown ids for {name.value}: {missing[:5]}")
        parts.append([dataclasses.replace(by_id[sample_id], split=name) for sample_id in ids])
    return parts[0], parts[1], parts[2]
