from pydantic import BaseModel

from core.models.config_models import CyclePolicy
from core.models.config_models import GeneratorSpec
from core.models.config_models import NoiseSpec
from core.models.config_models import PathMode
from core.models.config_models import ScenarioId
from core.models.config_models import SkipMode
from core.models.config_models import UpsampleMode


class ScenarioPreset(BaseModel):
    scenario: ScenarioId
    generator_spec: GeneratorSpec
    policy: CyclePolicy
    path_mode: PathMode
    noise_spec: NoiseSpec
    freeze_encoder: bool = False


# every scenario is a pure noise -> mask GAN: no image cycle, no L1
NOISE_ONLY_POLICY = CyclePolicy(image_cycle_enabled=False, noise_cycle_enabled=True)


def scenario_presets_factory(
    base: GeneratorSpec, upsample_mode: UpsampleMode = UpsampleMode.BILINEAR
) -> dict[ScenarioId, ScenarioPreset]:
    size = base.input_size
    code_grid = base.noise_code_shape[1]
    full_noise = NoiseSpec(grid=size, target_size=size, channels=base.input_channels, upsample_mode=upsample_mode)
    low_dim_noise = NoiseSpec(
        grid=code_grid, target_size=size, channels=base.input_channels, upsample_mode=upsample_mode
    )
    bottleneck_unstopped = base.model_copy(update={"stop_encoder_gradient_on_noise_path": False})

    return {
        ScenarioId.A_RAW_NOISE_INPUT: ScenarioPreset(
            scenario=ScenarioId.A_RAW_NOISE_INPUT,
            generator_spec=base.model_copy(),
            policy=NOISE_ONLY_POLICY.model_copy(),
            path_mode=PathMode.IMAGE,
            noise_spec=full_noise,
        ),
        ScenarioId.B_UPSAMPLED_LOW_DIM: ScenarioPreset(
            scenario=ScenarioId.B_UPSAMPLED_LOW_DIM,
            generator_spec=base.model_copy(),
            policy=NOISE_ONLY_POLICY.model_copy(),
            path_mode=PathMode.IMAGE,
            noise_spec=low_dim_noise,
        ),
        ScenarioId.C_HIGHDIM_PLUS_BOTTLENECK: ScenarioPreset(
            scenario=ScenarioId.C_HIGHDIM_PLUS_BOTTLENECK,
            generator_spec=bottleneck_unstopped.model_copy(update={"skip_mode_noise_path": SkipMode.LIVE}),
            policy=NOISE_ONLY_POLICY.model_copy(),
            path_mode=PathMode.NOISE,
            noise_spec=full_noise,
        ),
        ScenarioId.D_LOWDIM_PLUS_BOTTLENECK: ScenarioPreset(
            scenario=ScenarioId.D_LOWDIM_PLUS_BOTTLENECK,
            generator_spec=bottleneck_unstopped.model_copy(update={"skip_mode_noise_path": SkipMode.INJECT_CODE}),
            policy=NOISE_ONLY_POLICY.model_copy(),
            path_mode=PathMode.NOISE,
            noise_spec=low_dim_noise,
        ),
        ScenarioId.E_FROZEN_ENCODER_PLUS_D: ScenarioPreset(
            scenario=ScenarioId.E_FROZEN_ENCODER_PLUS_D,
            generator_spec=base.model_copy(
                update={"skip_mode_noise_path": SkipMode.INJECT_CODE, "stop_encoder_gradient_on_noise_path": True}
            ),
            policy=NOISE_ONLY_POLICY.model_copy(),
            path_mode=PathMode.NOISE,
            noise_spec=low_dim_noise,
            freeze_encoder=True,
        ),
    }


def configure_scenario(
    scenario: ScenarioId | str, base: GeneratorSpec, upsample_mode: UpsampleMode = UpsampleMode.BILINEAR
) -> ScenarioPreset:
    base.check()
    return scenario_presets_factory(base, upsample_mode)[ScenarioId.parse(scenario)]


def default_scenario_base(size: int, base_width: int = 32, input_channels: int = 1) -> GeneratorSpec:
    """Deepest features land on the 4x4 code grid: depth = log2(size / 4)."""
    depth = max(1, (size // 4).bit_length() - 1)
    return GeneratorSpec(
        input_size=size,
        input_channels=input_channels,
        base_width=base_width,
        max_width=8 * base_width,
        depth=depth,
    ).check()
