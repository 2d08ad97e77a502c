from typing import Callable
from typing import TypeVar

import torch
import torch.nn as nn


ModuleT = TypeVar("ModuleT", bound=nn.Module)

INIT_STD = 0.02


def init_weights(module: nn.Module) -> None:
    """N(0, 0.02) convolutions, N(1, 0.02) norm scales, zero biases."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, INIT_STD)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, (nn.InstanceNorm2d, nn.BatchNorm2d)) and module.affine:
        nn.init.normal_(module.weight, 1.0, INIT_STD)
        nn.init.zeros_(module.bias)


def seeded_build(factory: Callable[[], ModuleT], seed: int) -> ModuleT:
    """Construct and initialise under a forked RNG so the global torch stream is left as it was."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        module = factory()
        module.apply(init_weights)
    return module
