import torch
import torch.nn as nn

from core.log import get_logger
from core.models.config_models import DiscriminatorSpec
from core.models.config_models import ParameterGroupName
from dynpix.models.init_utils import seeded_build


logger = get_logger(__name__)


class PatchDiscriminator(nn.Module):
    """
    Patch classifier over channel-concatenated inputs, emitting a grid of real/fake logits.

    `depth` stride-2 stages, one stride-1 stage, then a 1-channel logit convolution.
    """

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        spec.check()
        self.spec = spec
        widths = [min(spec.base_width * 2**i, spec.max_width) for i in range(spec.depth + 1)]

        layers: list[nn.Module] = [nn.Conv2d(spec.input_channels, widths[0], 4, stride=2, padding=1), nn.LeakyReLU(0.2)]
        for i in range(1, spec.depth):
            layers += [
                nn.Conv2d(widths[i - 1], widths[i], 4, stride=2, padding=1, bias=False),
                nn.InstanceNorm2d(widths[i], affine=True),
                nn.LeakyReLU(0.2),
            ]
        layers += [
            nn.Conv2d(widths[spec.depth - 1], widths[spec.depth], 4, stride=1, padding=1, bias=False),
            nn.InstanceNorm2d(widths[spec.depth], affine=True),
            nn.LeakyReLU(0.2),
            nn.Conv2d(widths[spec.depth], 1, 4, stride=1, padding=1),
        ]
        self.layers = nn.Sequential(*layers)

    def forward(self, *inputs: torch.Tensor) -> torch.Tensor:
        """`inputs` are concatenated along channels in the given order: (conditioning, candidate) or (candidate,)."""
        x = torch.cat(inputs, dim=1) if len(inputs) > 1 else inputs[0]
        if x.ndim != 4 or x.shape[1] != self.spec.input_channels:
            raise ValueError(f"Discriminator expects {self.spec.input_channels} input channels, got {tuple(x.shape)}")
        return self.layers(x)

    def parameter_groups(self) -> dict[ParameterGroupName, list[nn.Parameter]]:
        return {ParameterGroupName.DISCRIMINATOR: list(self.parameters())}


def build_discriminator(spec: DiscriminatorSpec, seed: int) -> PatchDiscriminator:
    spec.check()
    discriminator = seeded_build(lambda: PatchDiscriminator(spec), seed)
    logger.debug(f"Built discriminator depth={spec.depth} output={spec.output_size}x{spec.output_size}")
    return discriminator
