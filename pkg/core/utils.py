import hashlib
from typing import Iterable

import torch

from core.log import get_logger


logger = get_logger(__name__)

MAX_SEED = 2**31 - 1


def derive_seed(seed: int, *tags: object) -> int:
    """
    Stable child seed for (seed, tags...). Independent of PYTHONHASHSEED and of worker count,
    so per-epoch / per-sample / per-sweep-entry randomness is a pure function of its coordinates.
    """
    key = ":".join([str(seed)] + [str(tag) for tag in tags]).encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little") % MAX_SEED


def parameter_checksum(parameters: Iterable[torch.Tensor]) -> str:
    """sha256 over the raw bytes of every tensor, in iteration order."""
    hasher = hashlib.sha256()
    for tensor in parameters:
        hasher.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return hasher.hexdigest()


def module_checksum(module: torch.nn.Module) -> str:
    return parameter_checksum(module.state_dict().values())