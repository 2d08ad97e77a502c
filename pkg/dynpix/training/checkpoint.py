import os
from collections import defaultdict
from pathlib import Path
from typing import Any

import torch
import torch.nn as nn
from pydantic import BaseModel
from pydantic import ValidationError

from core import constants as ccst
from core.exceptions import CheckpointError
from core.exceptions import SpecMismatchError
from core.log import get_logger
from core.models.config_models import DiscriminatorSpec
from core.models.config_models import GeneratorSpec
from core.models.config_models import NoiseSpec
from core.models.config_models import ParameterGroupName
from core.models.utility_models import LossRecord
from dynpix.models.discriminator import PatchDiscriminator
from dynpix.models.generator import DynamicUNetGenerator
from dynpix.training.trainer import TrainState
from dynpix.training.trainer import make_optimizers


logger = get_logger(__name__)

CHECKPOINT_FORMAT_VERSION = 1
REQUIRED_FIELDS = (
    "format_version",
    "generator_spec",
    "discriminator_spec",
    "noise_spec",
    "parameters",
    "optimizers",
    "epoch",
    "iteration",
    "rng",
    "loss_history",
)


def _grouped_state(module: nn.Module, single_group: ParameterGroupName | None = None) -> dict[str, dict[str, torch.Tensor]]:
    """state_dict split by parameter group: {group: {layer key: tensor}}."""
    groups: dict[str, dict[str, torch.Tensor]] = defaultdict(dict)
    for key, tensor in module.state_dict().items():
        if single_group is not None:
            groups[single_group.value][key] = tensor.clone()
        else:
            group, _, rest = key.partition(".")
            groups[group][rest] = tensor.clone()
    return dict(groups)


def _flatten_state(grouped: dict[str, dict[str, torch.Tensor]], single_group: ParameterGroupName | None = None) -> dict[str, torch.Tensor]:
    if single_group is not None:
        return dict(grouped[single_group.value])
    return {f"{group}.{key}": tensor for group, entries in grouped.items() for key, tensor in entries.items()}


def save_checkpoint(state: TrainState, path: Path | str) -> Path:
    """Write every TrainState field to one torch archive; the write is atomic (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload: dict[str, Any] = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "generator_spec": state.generator.spec.model_dump_json(),
        "discriminator_spec": state.discriminator.spec.model_dump_json(),
        "noise_spec": state.noise_spec.model_dump_json(),
        "parameters": {
            "generator": _grouped_state(state.generator),
            "discriminator": _grouped_state(state.discriminator, ParameterGroupName.DISCRIMINATOR),
        },
        "optimizers": {
            "generator": state.optimizer_g.state_dict(),
            "discriminator": state.optimizer_d.state_dict(),
        },
        "epoch": state.epoch,
        "iteration": state.iteration,
        "rng": {"torch": torch.get_rng_state(), "noise": state.noise_generator.get_state()},
        "loss_history": [record.model_dump(mode="json") for record in state.loss_history],
    }
    tmp_path = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp_path)
    os.replace(tmp_path, path)
    logger.info(f"Saved checkpoint {path} (epoch {state.epoch}, iteration {state.iteration})")
    return path


def _parse_spec(payload: dict[str, Any], key: str, model: type[BaseModel]) -> BaseModel:
    try:
        return model.model_validate_json(payload[key])
    except (ValidationError, TypeError, ValueError) as e:
        raise CheckpointError(f"Checkpoint field '{key}' is invalid: {e}", field=key) from e


def read_checkpoint_specs(path: Path | str) -> tuple[GeneratorSpec, DiscriminatorSpec, NoiseSpec]:
    payload = _read_payload(Path(path))
    return (
        _parse_spec(payload, "generator_spec", GeneratorSpec),
        _parse_spec(payload, "discriminator_spec", DiscriminatorSpec),
        _parse_spec(payload, "noise_spec", NoiseSpec),
    )


def _read_payload(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise CheckpointError(f"Checkpoint {path} does not exist", field="path")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointError(f"Could not read checkpoint {path}: {e}", field="payload") from e
    if not isinstance(payload, dict):
        raise CheckpointError(f"Checkpoint {path} does not hold a mapping", field="payload")
    for key in REQUIRED_FIELDS:
        if key not in payload:
            raise CheckpointError(f"Checkpoint {path} is missing field '{key}'", field=key)
    if payload["format_version"] != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"Checkpoint {path} has format_version {payload['format_version']}, expected {CHECKPOINT_FORMAT_VERSION}",
            field="format_version",
        )
    return payload


def load_checkpoint(
    path: Path | str,
    expected_generator_spec: GeneratorSpec | None = None,
    expected_discriminator_spec: DiscriminatorSpec | None = None,
    restore_rng: bool = True,
) -> TrainState:
    """
    Rebuild a TrainState from `save_checkpoint` output.

    Everything is validated before the state is assembled; the global torch RNG is only
    touched once the whole payload has loaded.
    """
    path = Path(path)
    payload = _read_payload(path)
    generator_spec = _parse_spec(payload, "generator_spec", GeneratorSpec)
    discriminator_spec = _parse_spec(payload, "discriminator_spec", DiscriminatorSpec)
    noise_spec = _parse_spec(payload, "noise_spec", NoiseSpec)

    if expected_generator_spec is not None and expected_generator_spec != generator_spec:
        raise SpecMismatchError(
            f"Checkpoint generator spec {generator_spec.model_dump()} != expected {expected_generator_spec.model_dump()}",
            field="generator_spec",
        )
    if expected_discriminator_spec is not None and expected_discriminator_spec != discriminator_spec:
        raise SpecMismatchError(
            f"Checkpoint discriminator spec {discriminator_spec.model_dump()} != expected "
            f"{expected_discriminator_spec.model_dump()}",
            field="discriminator_spec",
        )

    try:
        with torch.random.fork_rng(devices=[]):
            generator = DynamicUNetGenerator(generator_spec)
            discriminator = PatchDiscriminator(discriminator_spec)
        generator.load_state_dict(_flatten_state(payload["parameters"]["generator"]))
        discriminator.load_state_dict(
            _flatten_state(payload["parameters"]["discriminator"], ParameterGroupName.DISCRIMINATOR)
        )
    except (KeyError, RuntimeError, TypeError) as e:
        raise CheckpointError(f"Checkpoint field 'parameters' is invalid: {e}", field="parameters") from e

    optimizer_g, optimizer_d = make_optimizers(generator, discriminator, ccst.INITIAL_LEARNING_RATE)
    try:
        optimizer_g.load_state_dict(payload["optimizers"]["generator"])
        optimizer_d.load_state_dict(payload["optimizers"]["discriminator"])
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointError(f"Checkpoint field 'optimizers' is invalid: {e}", field="optimizers") from e

    try:
        loss_history = [LossRecord.model_validate(entry) for entry in payload["loss_history"]]
    except (ValidationError, TypeError) as e:
        raise CheckpointError(f"Checkpoint field 'loss_history' is invalid: {e}", field="loss_history") from e

    noise_generator = torch.Generator()
    try:
        noise_generator.set_state(payload["rng"]["noise"])
        torch_rng = payload["rng"]["torch"]
    except (KeyError, RuntimeError, TypeError) as e:
        raise CheckpointError(f"Checkpoint field 'rng' is invalid: {e}", field="rng") from e

    if restore_rng:
        torch.set_rng_state(torch_rng)

    logger.info(f"Loaded checkpoint {path} (epoch {payload['epoch']}, iteration {payload['iteration']})")
    return TrainState(
        generator=generator,
        discriminator=discriminator,
        optimizer_g=optimizer_g,
        optimizer_d=optimizer_d,
        noise_spec=noise_spec,
        noise_generator=noise_generator,
        epoch=int(payload["epoch"]),
        iteration=int(payload["iteration"]),
        loss_history=loss_history,
    )
