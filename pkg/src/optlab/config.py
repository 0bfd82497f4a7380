"""Flat key-value run configuration.

Grammar (one setting per line, UTF-8):

    # full-line comments and blank lines are ignored
    section.key = value

Keys are lowercase dotted identifiers. Values are parsed as int, float,
bool (``true``/``false``), ``none``, or a bare string; there is no quoting
and no nesting. The same grammar is used for run configs, bench suites, and
the preset registry, so everything stays human-diffable.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from .errors import ConfigurationError

_KEY_RE = re.compile(r"^[a-z0-9_]+(?:[.-][a-z0-9_]+)*$")

#: Hyperparameter names accepted under ``optimizer.``; which ones an engine
#: actually understands is checked at construction time.
OPTIMIZER_KEYS = (
    "lr",
    "lr_1d",
    "weight_decay",
    "weight_decay_1d",
    "eps",
    "beta1",
    "beta2",
    "beta3",
    "alpha",
    "beta_start",
    "t_alpha",
    "t_beta3",
    "momentum",
    "nesterov",
    "dampening",
    "ns_iters",
    "ns_a",
    "ns_b",
    "ns_c",
    "precond_freq",
    "precond_max_dim",
    "bias_correction",
    "identity_init",
    "rho",
    "estimator_freq",
    "sf_warmup",
    "eta",
    "beta1_1d",
    "beta2_1d",
    "rms_factor",
    "d0",
)

KNOWN_KEYS = frozenset(
    [
        "problem.kind",
        "problem.dim",
        "problem.condition",
        "problem.noise",
        "problem.batch_size",
        "problem.in_dim",
        "problem.hidden",
        "problem.classes",
        "problem.samples",
        "optimizer.name",
        "optimizer.preset",
        "schedule.family",
        "schedule.warmup_steps",
        "schedule.final_lr_factor",
        "schedule.wsd_cooldown_fraction",
        "run.steps",
        "run.seed",
        "run.clip",
        "run.log_every",
        "run.coupled_wd_demo",
        "plot.window",
    ]
    + [f"optimizer.{k}" for k in OPTIMIZER_KEYS]
)

DEFAULTS = {
    "problem.kind": "quadratic",
    "problem.dim": 20,
    "problem.condition": 10.0,
    "problem.noise": 0.0,
    "problem.batch_size": 1,
    "problem.in_dim": 8,
    "problem.hidden": 16,
    "problem.classes": 3,
    "problem.samples": 512,
    "optimizer.name": "adamw",
    "schedule.family": "cosine",
    "schedule.warmup_steps": 0,
    "schedule.final_lr_factor": None,
    "schedule.wsd_cooldown_fraction": 0.2,
    "run.steps": 100,
    "run.seed": 1,
    "run.clip": None,
    "run.log_every": 1,
    "run.coupled_wd_demo": False,
}


def parse_value(text: str):
    s = text.strip()
    low = s.lower()
    if low == "none":
        return None
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def value_to_str(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse the flat grammar, reporting the offending line on failure."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigurationError(f"{source}:{lineno}: malformed key {key!r}")
        if key in out:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def load_config_file(path: str | Path) -> dict:
    """Load a flat config file, or the resolved config embedded in a run summary."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON summary: {exc}") from exc
        if not isinstance(doc, dict) or "config" not in doc:
            raise ConfigurationError(f"{path}: JSON file has no 'config' object")
        return dict(doc["config"])
    return parse_config_text(text, source=str(path))


def parse_overrides(pairs) -> dict:
    """Parse repeatable --set KEY=VALUE flags."""
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {pair!r}")
        key, _, value = pair.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigurationError(f"--set: malformed key {key!r}")
        out[key] = parse_value(value)
    return out


def validate_keys(cfg: dict, *, source: str = "config") -> None:
    unknown = sorted(k for k in cfg if k not in KNOWN_KEYS)
    if unknown:
        raise ConfigurationError(f"{source}: unknown keys: {', '.join(unknown)}")


def resolve(file_cfg: dict | None = None, preset_cfg: dict | None = None, overrides: dict | None = None) -> dict:
    """defaults < preset < config file < --set overrides."""
    cfg = dict(DEFAULTS)
    for layer in (preset_cfg, file_cfg, overrides):
        if layer:
            cfg.update(layer)
    validate_keys(cfg)
    return cfg


def format_config(cfg: dict) -> str:
    """Canonical text form: sorted 'key = value' lines."""
    return "\n".join(f"{k} = {value_to_str(cfg[k])}" for k in sorted(cfg)) + "\n"


def config_hash(cfg: dict) -> str:
    material = format_config({k: v for k, v in cfg.items() if k != "run.seed"})
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:12]
