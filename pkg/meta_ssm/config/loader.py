"""Experiment configuration loading and override resolution.

Precedence: command-line flag > `--set section.key=value` > YAML file >
dataclass default.
"""

from __future__ import annotations

import copy
import logging
import os
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import yaml

from ..const import DEFAULT_OUTPUT_ROOT, ENV_OUTPUT_ROOT
from ..exceptions import ConfigurationError, MissingArtifactError
from .schemas import ExperimentConfig

_LOGGER = logging.getLogger(__name__)


def read_config_file(path: Path) -> dict[str, Any]:
    """Parse a YAML experiment document.

    Raises:
        MissingArtifactError: if the file does not exist
        ConfigurationError: if the YAML is invalid or not a mapping
    """
    if not path.is_file():
        raise MissingArtifactError(f"Config file not found: {path}", path=str(path))
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as err:
        raise ConfigurationError(
            f"Invalid YAML in {path}: {err}", config_key="<file>", config_value=str(path)
        ) from err
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigurationError(
            "Config file must contain a mapping of sections",
            config_key="<file>",
            config_value=str(path),
        )
    return document


def parse_override(text: str) -> tuple[str, str, Any]:
    """Split `section.key=value`; the value is parsed as YAML.

    Raises:
        ConfigurationError: if the override is malformed
    """
    target, sep, raw = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not section or not key:
        raise ConfigurationError(
            "Overrides must look like section.key=value",
            config_key="--set",
            config_value=text,
        )
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as err:
        raise ConfigurationError(
            f"Cannot parse override value: {raw}",
            config_key=target,
            config_value=raw,
        ) from err
    return section, key, value


def apply_overrides(
    document: Mapping[str, Any], overrides: Iterable[tuple[str, str, Any]]
) -> dict[str, Any]:
    """Return a copy of `document` with every override applied in order."""
    merged = copy.deepcopy(dict(document))
    for section, key, value in overrides:
        target = merged.setdefault(section, {})
        if not isinstance(target, dict):
            raise ConfigurationError(
                f"Section {section} must be a mapping",
                config_key=section,
                config_value=target,
            )
        target[key] = value
    return merged


def default_output_root() -> Path:
    """Output root from the environment, else the package default."""
    return Path(os.environ.get(ENV_OUTPUT_ROOT) or DEFAULT_OUTPUT_ROOT)


def load_config(
    path: Path | None = None,
    overrides: Iterable[str] = (),
    flags: Iterable[tuple[str, str, Any]] = (),
) -> ExperimentConfig:
    """Resolve an experiment config from file, `--set` overrides and flags.

    `flags` are (section, key, value) triples from dedicated command-line
    options; None values mean the flag was not given.
    """
    document = read_config_file(path) if path is not None else {}
    document = apply_overrides(document, (parse_override(o) for o in overrides))
    document = apply_overrides(document, (f for f in flags if f[2] is not None))
    config = ExperimentConfig.from_dict(document)
    _LOGGER.debug("Resolved config %s from %s", config.digest(), path or "defaults")
    return config


def dump_config(config: ExperimentConfig, path: Path) -> None:
    """Write the canonical YAML form of `config`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        yaml.safe_dump(config.to_dict(), sort_keys=False), encoding="utf-8"
    )
