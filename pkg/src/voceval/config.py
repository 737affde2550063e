"""Single JSON configuration document for the command-line tools.

Every numeric default equals the reference analysis settings baked into
SpectralConfig, so an absent config file and an empty one mean the same
thing. Unknown keys are rejected to catch typos early.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .errors import ConfigError
from .spectral import SpectralConfig

PathLike = Union[str, Path]

DEFAULT_PROVIDER = "melstat-v1"
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ToolConfig:
    spectral: SpectralConfig
    provider: str = DEFAULT_PROVIDER
    seed: int = DEFAULT_SEED


def default_config() -> ToolConfig:
    return ToolConfig(spectral=SpectralConfig())


def load_config(path: PathLike) -> ToolConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be an object")

    known_top = {"spectral", "provider", "seed"}
    unknown = set(doc) - known_top
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")

    spec_doc = doc.get("spectral", {})
    if not isinstance(spec_doc, dict):
        raise ConfigError(f"{path}: 'spectral' must be an object")
    field_names = {f.name for f in dataclasses.fields(SpectralConfig)}
    unknown = set(spec_doc) - field_names
    if unknown:
        raise ConfigError(f"{path}: unknown spectral keys {sorted(unknown)}")

    try:
        spectral = SpectralConfig(**spec_doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: bad spectral settings ({exc})") from exc
    return ToolConfig(
        spectral=spectral,
        provider=doc.get("provider", DEFAULT_PROVIDER),
        seed=int(doc.get("seed", DEFAULT_SEED)),
    )


def save_config(cfg: ToolConfig, path: PathLike) -> None:
    doc = {
        "spectral": dataclasses.asdict(cfg.spectral),
        "provider": cfg.provider,
        "seed": cfg.seed,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
