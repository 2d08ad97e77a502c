import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import TypeVar

from pydantic import BaseModel
from pydantic import ValidationError

from core import constants as ccst
from core.exceptions import ConfigurationError
from core.log import get_logger
from dynpix.utils.generic.generic_utils import read_json


logger = get_logger(__name__)

RunConfigT = TypeVar("RunConfigT", bound=BaseModel)


@dataclass
class EnvConfig:
    output_root: Path


def load_env_config() -> EnvConfig:
    output_root = Path(os.getenv(ccst.OUTPUT_ROOT_ENV_VAR, "runs"))
    logger.debug(f"Output root: {output_root}")
    return EnvConfig(output_root=output_root)


def set_dotted(target: dict[str, Any], dotted_key: str, value: Any) -> None:
    node = target
    *parents, leaf = dotted_key.split(".")
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[leaf] = value


def resolve_run_config(
    model: type[RunConfigT],
    config_path: str | Path | None,
    overrides: dict[str, Any],
    defaults: dict[str, Any] | None = None,
) -> RunConfigT:
    """
    Model defaults < `defaults` < JSON config file < CLI overrides (dotted keys, None means "not given").

    Schema problems raise ConfigurationError naming every offending key.
    """
    data: dict[str, Any] = dict(defaults or {})
    if config_path is not None:
        loaded = read_json(config_path)
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"Config file {config_path} must hold a JSON object")
        data.update(loaded)
    for dotted_key, value in overrides.items():
        if value is not None:
            set_dotted(data, dotted_key, value)

    try:
        return model.model_validate(data)
    except ValidationError as e:
        offending = sorted({".".join(str(part) for part in error["loc"]) for error in e.errors()})
        details = "; ".join(f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors())
        raise ConfigurationError(f"Invalid {model.__name__} (offending keys: {', '.join(offending)}): {details}") from e


def default_out_dir(env: EnvConfig, command: str, seed: int | None = None) -> str:
    name = command if seed is None else f"{command}-seed{seed}"
    return str(env.output_root / name)
