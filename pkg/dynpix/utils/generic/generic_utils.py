import contextlib
import json
import logging
import time
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from core.log import get_logger


logger = get_logger(__name__)


@contextlib.contextmanager
def log_time(description: str, logger: logging.Logger):
    start_time = time.time()
    try:
        yield
    finally:
        end_time = time.time()
        elapsed_time = end_time - start_time
        logger.debug(f"{description} took {elapsed_time:.4f} seconds")


def write_json(path: Path | str, payload: BaseModel | dict[str, Any] | list[Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path: Path | str) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def is_non_empty_dir(path: Path | str) -> bool:
    path = Path(path)
    return path.is_dir() and any(path.iterdir())


def format_optional(value: float | None, spec: str, missing: str = "n/a") -> str:
    return missing if value is None else format(value, spec)
