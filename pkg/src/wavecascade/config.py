"""Plain-text run configuration (INI sections) and run manifests.

A config file has a ``[simulation]`` section whose keys are the fields of
``SimulationConfig``; other sections are ignored.  ``--set`` style overrides
use ``key=value`` with the bare field name.  A manifest is the same
format with an extra ``[run]`` section, so ``load_config(manifest)``
reproduces the run.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import fields
from pathlib import Path

from . import __version__
from .integrator import SimulationConfig


class ConfigError(ValueError):
    pass


_FIELD_TYPES = {f.name: f.type for f in fields(SimulationConfig)}

PRESETS: dict[str, dict] = {
    # Full-scale runs: 100 samples every 10^3 steps.
    "d1": dict(d=1, N=1024, nu=1e-8, H=1 / 3, c=1.0, dt=5e-3, n_samples=100, sample_stride=1000),
    "d2": dict(d=2, N=512, nu=1e-7, H=1 / 3, c=1.0, dt=5e-3, n_samples=100, sample_stride=1000),
    "d3": dict(d=3, N=512, nu=1e-7, H=1 / 3, c=1.0, dt=5e-3, n_samples=100, sample_stride=1000),
    # Desk-scale variants: same physics, 50 samples every 200 steps.
    "d1-desk": dict(d=1, N=1024, nu=1e-8, H=1 / 3, c=1.0, dt=5e-3, n_samples=50, sample_stride=200),
    "d2-desk": dict(d=2, N=128, nu=1e-5, H=1 / 3, c=1.0, dt=5e-3, n_samples=50, sample_stride=200),
    "d3-desk": dict(d=3, N=32, nu=1e-3, H=1 / 3, c=1.0, dt=5e-3, n_samples=20, sample_stride=200),
}


def _parse_value(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    kind = str(_FIELD_TYPES[key])
    text = text.strip()
    if "None" in kind and text.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_overrides(items) -> dict:
    """``["N=256", "nu=0"]`` -> ``{"N": 256, "nu": 0.0}``."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        out[key] = _parse_value(key, value)
    return out


def build_config(preset: str | None = None, path=None, overrides=None, seed: int | None = None
                 ) -> SimulationConfig:
    """Resolve defaults <- preset <- config file <- overrides <- seed."""
    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    if path is not None:
        values.update(read_config_file(path))
    values.update(overrides or {})
    if seed is not None:
        values["seed"] = seed
    try:
        return SimulationConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if "simulation" not in parser:
        raise ConfigError(f"{path}: missing [simulation] section")
    return {k: _parse_value(k, v) for k, v in parser["simulation"].items()}


def load_config(path) -> SimulationConfig:
    return build_config(path=path)


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_text(cfg: SimulationConfig) -> str:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["simulation"] = {k: _format(v) for k, v in cfg.as_dict().items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_hash(cfg: SimulationConfig) -> str:
    return hashlib.sha256(config_text(cfg).encode()).hexdigest()


def write_manifest(path, cfg: SimulationConfig, outputs=(), timings=None, extra=None) -> Path:
    """Config echo plus a ``[run]`` section with seed, version, hash, outputs and timings."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(config_text(cfg))
    run = {"seed": str(cfg.seed), "code_version": __version__, "config_sha256": config_hash(cfg),
           "outputs": ",".join(str(o) for o in outputs)}
    for k, v in (timings or {}).items():
        run[f"time_{k}"] = f"{v:.6g}"
    for k, v in (extra or {}).items():
        run[k] = str(v)
    parser["run"] = run
    path = Path(path)
    with open(path, "w") as fh:
        parser.write(fh)
    return path


def read_manifest(path) -> tuple[SimulationConfig, dict]:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read(path)
    return load_config(path), dict(parser["run"]) if "run" in parser else {}
