import json
import logging
import os
from typing import Any, Sequence

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import ConfigError

logger = logging.getLogger(__name__)


class AppSettings(BaseSettings):
    """Runtime knobs, overridable through TWOAXIS_* environment variables or .env."""
    model_config = SettingsConfigDict(env_prefix="TWOAXIS_", env_file=".env", extra="ignore")

    log_level: str = "WARNING"
    log_to_file: bool = False
    log_file: str = "log.txt"
    workers: int = 4
    quad_epsabs: float = 1e-10
    quad_epsrel: float = 1e-6
    quad_limit: int = 200
    tail_lobes: int = 64
    mc_model_tol: float = 0.02
    omega_low_hz: float = 1.0
    omega_uv_rad_ns: float = 1e4
    t2_max_doublings: int = 12


def locate_line(text: str, loc: Sequence[Any]) -> int | None:
    """
    Best-effort line number of a pydantic error location inside a JSON document:
    walks the string keys of `loc` in order, each search starting where the
    previous key was found.
    """
    pos = 0
    found = None
    for key in loc:
        if not isinstance(key, str):
            continue
        idx = text.find(f'"{key}"', pos)
        if idx < 0:
            break
        found = idx
        pos = idx + 1
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def read_json(path: str) -> tuple[dict, str]:
    """Read a JSON document, mapping syntax errors to ConfigError with the line."""
    if not os.path.exists(path):
        raise ConfigError("file not found", path=path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path=path, line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", path=path, line=1)
    return data, text


def validation_to_config_error(exc: ValidationError, path: str, text: str) -> ConfigError:
    """First pydantic error, pinned to the line of the offending key."""
    err = exc.errors()[0]
    loc = err.get("loc", ())
    dotted = ".".join(str(p) for p in loc)
    message = f"{dotted}: {err.get('msg')}" if dotted else err.get("msg", "invalid value")
    return ConfigError(message, path=path, line=locate_line(text, loc))


def write_json(data: dict, path: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=4)
        f.write("\n")


# Singleton instance
settings = AppSettings()
