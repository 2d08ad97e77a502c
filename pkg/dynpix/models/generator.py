import torch
import torch.nn as nn
import torch.nn.functional as F

from core.exceptions import ConfigurationError
from core.log import get_logger
from core.models.config_models import GeneratorSpec
from core.models.config_models import ParameterGroupName
from core.models.config_models import PathMode
from core.models.config_models import SkipMode
from dynpix.models.init_utils import seeded_build


logger = get_logger(__name__)

GENERATOR_GROUPS = (
    ParameterGroupName.ENCODER,
    ParameterGroupName.BOTTLENECK,
    ParameterGroupName.DECODER,
    ParameterGroupName.NOISE_BOTTLENECK,
)


def _down_stage(in_channels: int, out_channels: int, normalize: bool) -> nn.Sequential:
    layers: list[nn.Module] = [nn.Conv2d(in_channels, out_channels, 4, stride=2, padding=1, bias=not normalize)]
    if normalize:
        layers.append(nn.InstanceNorm2d(out_channels, affine=True))
    layers.append(nn.LeakyReLU(0.2))
    return nn.Sequential(*layers)


def _up_stage(in_channels: int, out_channels: int, dropout: float) -> nn.Sequential:
    layers: list[nn.Module] = [
        nn.ConvTranspose2d(in_channels, out_channels, 4, stride=2, padding=1, bias=False),
        nn.InstanceNorm2d(out_channels, affine=True),
    ]
    if dropout > 0:
        layers.append(nn.Dropout(dropout))
    layers.append(nn.ReLU())
    return nn.Sequential(*layers)


class DynamicUNetGenerator(nn.Module):
    """
    U-Net with two routings over shared encoder/decoder weights.

    Image path: encoder -> bottleneck -> decoder, live skip connections.
    Noise path: encoder -> noise_bottleneck (1x1 collapse + max-pool to the code shape) -> decoder,
    with the code resized and channel-broadcast into the decoder input and, under `inject_code`,
    into every skip slot.

    Top-level attributes are the parameter groups: encoder, bottleneck, decoder, noise_bottleneck.
    """

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        spec.check()
        self.spec = spec
        widths = spec.stage_widths()
        code_channels, code_h, code_w = spec.noise_code_shape

        self.encoder = nn.ModuleList(
            _down_stage(spec.input_channels if i == 0 else widths[i - 1], widths[i], normalize=i > 0)
            for i in range(spec.depth)
        )
        self.bottleneck = nn.Sequential(
            nn.Conv2d(widths[-1], widths[-1], 3, stride=1, padding=1, bias=False),
            nn.InstanceNorm2d(widths[-1], affine=True),
            nn.LeakyReLU(0.2),
        )

        # up stage k (deepest first) maps size S/2^(k+1) -> S/2^k and is followed by skip k-1
        up_stages = []
        for position, k in enumerate(range(spec.depth - 1, 0, -1)):
            in_channels = widths[k] if k == spec.depth - 1 else 2 * widths[k]
            dropout = spec.decoder_dropout if position < spec.dropout_stages else 0.0
            up_stages.append(_up_stage(in_channels, widths[k - 1], dropout))
        final_in = 2 * widths[0] if spec.depth > 1 else widths[0]
        final = nn.Sequential(nn.ConvTranspose2d(final_in, 1, 4, stride=2, padding=1), nn.Tanh())
        self.decoder = nn.ModuleList([*up_stages, final])

        self.noise_bottleneck = nn.Sequential(
            nn.Conv2d(widths[-1], code_channels, 1),
            nn.AdaptiveMaxPool2d((code_h, code_w)),
        )

    def check_input(self, x: torch.Tensor) -> None:
        expected = (self.spec.input_channels, self.spec.input_size, self.spec.input_size)
        if x.ndim != 4 or tuple(x.shape[1:]) != expected:
            raise ValueError(f"Generator expects (B, {expected[0]}, {expected[1]}, {expected[2]}), got {tuple(x.shape)}")

    def encode(self, x: torch.Tensor) -> list[torch.Tensor]:
        features = []
        h = x
        for stage in self.encoder:
            h = stage(h)
            features.append(h)
        return features

    def decode(self, h: torch.Tensor, skips: list[torch.Tensor]) -> torch.Tensor:
        """`skips` are ordered shallow to deep, one per up stage (depth - 1 entries)."""
        for position, stage in enumerate(self.decoder[:-1]):
            h = stage(h)
            h = torch.cat([h, skips[-(position + 1)]], dim=1)
        return self.decoder[-1](h)

    def noise_code(self, deepest: torch.Tensor) -> torch.Tensor:
        return self.noise_bottleneck(deepest)

    def broadcast_code(self, code: torch.Tensor, channels: int, size: int) -> torch.Tensor:
        resized = F.interpolate(code, size=(size, size), mode="nearest")
        repeats = -(-channels // code.shape[1])
        return resized.repeat(1, repeats, 1, 1)[:, :channels]

    def decode_noise(self, code: torch.Tensor, skips: list[torch.Tensor]) -> torch.Tensor:
        """Decoder pass driven by the code; `skips` only contribute their shapes unless skip mode is live."""
        deepest_channels = self.spec.stage_widths()[-1]
        h = self.broadcast_code(code, deepest_channels, self.spec.deepest_size)
        mode = self.spec.skip_mode_noise_path
        if mode == SkipMode.LIVE:
            routed = skips
        elif mode == SkipMode.ZEROS:
            routed = [torch.zeros_like(skip) for skip in skips]
        else:
            routed = [self.broadcast_code(code, skip.shape[1], skip.shape[-1]) for skip in skips]
        return self.decode(h, routed)

    def forward_image(self, x: torch.Tensor) -> torch.Tensor:
        self.check_input(x)
        features = self.encode(x)
        return self.decode(self.bottleneck(features[-1]), features[:-1])

    def forward_noise(self, noise_image: torch.Tensor) -> torch.Tensor:
        self.check_input(noise_image)
        if self.spec.stop_encoder_gradient_on_noise_path:
            with torch.no_grad():
                features = self.encode(noise_image)
        else:
            features = self.encode(noise_image)
        return self.decode_noise(self.noise_code(features[-1]), features[:-1])

    def forward(self, x: torch.Tensor, mode: PathMode = PathMode.IMAGE) -> torch.Tensor:
        if mode == PathMode.NOISE:
            return self.forward_noise(x)
        return self.forward_image(x)

    def parameter_groups(self) -> dict[ParameterGroupName, list[nn.Parameter]]:
        return {group: list(getattr(self, group.value).parameters()) for group in GENERATOR_GROUPS}


def build_generator(spec: GeneratorSpec, seed: int) -> DynamicUNetGenerator:
    spec.check()
    generator = seeded_build(lambda: DynamicUNetGenerator(spec), seed)
    logger.debug(
        f"Built generator depth={spec.depth} widths={spec.stage_widths()} "
        f"params={sum(p.numel() for p in generator.parameters())}"
    )
    return generator


def set_trainable(model: nn.Module, group: ParameterGroupName | str, flag: bool) -> None:
    """Toggle requires_grad on one parameter group; a frozen group gets no gradient and Adam skips it."""
    try:
        name = ParameterGroupName(group)
    except ValueError as e:
        raise ConfigurationError(f"Unknown parameter group '{group}'") from e
    groups = model.parameter_groups()
    if name not in groups:
        raise ConfigurationError(f"{type(model).__name__} has no parameter group '{name.value}'")
    for parameter in groups[name]:
        parameter.requires_grad_(flag)


def group_trainable(model: nn.Module, group: ParameterGroupName) -> bool:
    return all(parameter.requires_grad for parameter in model.parameter_groups()[group])
