"""Preset registry: tuned hyperparameters keyed by (optimizer, scale tag).

The registry ships as a plain-text file in the same flat grammar as run
configs, with keys of the form ``<optimizer>.<tag>.<config-key>``. A preset
expands into ordinary config entries that sit between the built-in defaults
and the user's config file in precedence.
"""

from __future__ import annotations

from importlib import resources

from .config import parse_config_text
from .errors import ConfigurationError

_REGISTRY: dict[tuple[str, str], dict] | None = None


def _load_registry() -> dict[tuple[str, str], dict]:
    global _REGISTRY
    if _REGISTRY is None:
        from .optimizers import OPTIMIZER_NAMES

        text = resources.files("optlab").joinpath("presets.txt").read_text(encoding="utf-8")
        flat = parse_config_text(text, source="presets.txt")
        registry: dict[tuple[str, str], dict] = {}
        for key, value in flat.items():
            name = next((n for n in OPTIMIZER_NAMES if key.startswith(n + ".")), None)
            if name is None:
                raise ConfigurationError(f"presets.txt: key {key!r} does not start with an optimizer name")
            rest = key[len(name) + 1 :]
            tag, _, config_key = rest.partition(".")
            if not tag or not config_key:
                raise ConfigurationError(f"presets.txt: malformed preset key {key!r}")
            registry.setdefault((name, tag), {})[config_key] = value
        _REGISTRY = registry
    return _REGISTRY


def preset_tags(optimizer: str) -> list[str]:
    return sorted(tag for (name, tag) in _load_registry() if name == optimizer)


def list_presets() -> list[tuple[str, str]]:
    return sorted(_load_registry().keys())


def get_preset(optimizer: str, tag: str) -> dict:
    """Config-key/value entries for one preset (e.g. optimizer.lr, run.clip)."""
    registry = _load_registry()
    try:
        return dict(registry[(optimizer, tag)])
    except KeyError:
        tags = preset_tags(optimizer)
        hint = f"available tags for {optimizer!r}: {', '.join(tags)}" if tags else f"no presets for {optimizer!r}"
        raise ConfigurationError(f"unknown preset {tag!r} for optimizer {optimizer!r}; {hint}") from None
