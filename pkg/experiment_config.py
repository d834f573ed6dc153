"""
Experiment configuration: flat `key = value` files plus CLI overrides.

    # comment
    schemes = layered1d, layered2d, bpsk
    ratios = 2, 3, 4
    sigma2_min = 1e-4

Lists are comma-separated. Flags override the file; LAYERED_BPSK_CONFIG names
the file when --config is not given. See experiment.example.conf.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from awgn_channel import NOISE_CONVENTIONS, PER_DIMENSION
from info_rates import MC_MIN_SAMPLES, QuadratureSettings
from layered_bpsk_model import InvalidParameterError
from link_metrics import BER_MIN_BLOCKS, BER_MODES

CONFIG_ENV = "LAYERED_BPSK_CONFIG"

BASELINE_SCHEMES = ("gaussian", "bpsk", "qpsk", "8psk", "16qam")
LAYERED_SCHEMES = ("layered1d", "layered2d")
ALL_SCHEMES = BASELINE_SCHEMES + LAYERED_SCHEMES

DEFAULT_SIGMA2_MIN = 1e-4
DEFAULT_SIGMA2_MAX = 10 ** 3.5
DEFAULT_SIGMA2_POINTS = 60


def log_grid(lo: float, hi: float, points: int) -> Tuple[float, ...]:
    if not (0 < lo <= hi):
        raise ValueError(f"sigma2 grid bounds must satisfy 0 < min <= max (got {lo!r}, {hi!r})")
    if points < 1:
        raise ValueError("sigma2_points must be >= 1")
    if points == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), points))


DEFAULT_BER_SIGMA2 = log_grid(0.01, 1.0, 6)


@dataclass(frozen=True)
class ExperimentConfig:
    schemes: Tuple[str, ...] = ALL_SCHEMES
    ratios: Tuple[float, ...] = (2.0, 3.0, 4.0)
    sigma2_grid: Tuple[float, ...] = ()
    seed: int = 20240601
    mc_samples: int = 1_000_000
    abs_tol: float = 1e-9
    rel_tol: float = 1e-10
    range_sigmas: float = 10.0
    max_subdivisions: int = 200
    hermite_order: int = 64
    noise_convention: str = PER_DIMENSION
    workers: int = 1
    ber_blocks: int = 100_000
    ber_sigma2_grid: Tuple[float, ...] = DEFAULT_BER_SIGMA2
    ber_modes: Tuple[str, ...] = BER_MODES
    alpha: Optional[float] = None
    beta: Optional[float] = None
    alpha_q: Optional[float] = None
    beta_q: Optional[float] = None
    sigma2: Optional[float] = None

    def quad_settings(self) -> QuadratureSettings:
        return QuadratureSettings(
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            range_sigmas=self.range_sigmas,
            max_subdivisions=self.max_subdivisions,
            hermite_order=self.hermite_order,
        )

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _str_list(text: str) -> Tuple[str, ...]:
    return tuple(part.strip().lower() for part in text.split(",") if part.strip())


def _int(text: str) -> int:
    # accept 1e6 style counts
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


_CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "schemes": _str_list,
    "ratios": _float_list,
    "sigma2_grid": _float_list,
    "sigma2_min": float,
    "sigma2_max": float,
    "sigma2_points": _int,
    "seed": _int,
    "mc_samples": _int,
    "abs_tol": float,
    "rel_tol": float,
    "range_sigmas": float,
    "max_subdivisions": _int,
    "hermite_order": _int,
    "noise_convention": lambda s: s.strip().lower(),
    "workers": _int,
    "ber_blocks": _int,
    "ber_sigma2_grid": _float_list,
    "ber_modes": _str_list,
    "alpha": float,
    "beta": float,
    "alpha_q": float,
    "beta_q": float,
    "sigma2": float,
}
CONFIG_KEYS = tuple(_CONVERTERS)


def option_type(key: str) -> Callable[[str], Any]:
    """Text converter for one key; config files and CLI flags share it."""
    return _CONVERTERS[key]


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """Typed values for every key present; errors name the offending line."""
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def parse_config_file(path: Path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def config_path_from_env(explicit: Optional[Path]) -> Optional[Path]:
    if explicit is not None:
        return explicit
    env = os.environ.get(CONFIG_ENV, "").strip()
    return Path(env) if env else None


def resolve_experiment_config(
    file_values: Mapping[str, Any],
    overrides: Mapping[str, Any],
) -> ExperimentConfig:
    """
    Merge file values with CLI overrides (None means "not given") and validate.
    Raises ValueError with a one-line message.
    """
    merged: Dict[str, Any] = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(merged) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")

    # grid bounds given as overrides replace a grid listed in the file
    if overrides.get("sigma2_grid") is None and any(
        overrides.get(key) is not None for key in ("sigma2_min", "sigma2_max", "sigma2_points")
    ):
        merged.pop("sigma2_grid", None)

    if "sigma2_grid" in merged:
        grid = tuple(float(v) for v in merged.pop("sigma2_grid"))
        for key in ("sigma2_min", "sigma2_max", "sigma2_points"):
            merged.pop(key, None)
    else:
        grid = log_grid(
            float(merged.pop("sigma2_min", DEFAULT_SIGMA2_MIN)),
            float(merged.pop("sigma2_max", DEFAULT_SIGMA2_MAX)),
            int(merged.pop("sigma2_points", DEFAULT_SIGMA2_POINTS)),
        )
    merged["sigma2_grid"] = grid
    for key in ("schemes", "ratios", "ber_sigma2_grid", "ber_modes"):
        if key in merged:
            merged[key] = tuple(merged[key])

    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ValueError(str(exc)) from exc
    validate_experiment_config(cfg)
    return cfg


def validate_experiment_config(cfg: ExperimentConfig) -> None:
    if not cfg.schemes:
        raise ValueError("schemes must not be empty")
    bad = [s for s in cfg.schemes if s not in ALL_SCHEMES]
    if bad:
        raise ValueError(f"unknown scheme(s) {', '.join(bad)} (use {', '.join(ALL_SCHEMES)})")
    if not cfg.ratios:
        raise ValueError("ratios must not be empty")
    if any(not (r > 1) for r in cfg.ratios):
        raise ValueError(f"every alpha/beta ratio must be > 1 (got {list(cfg.ratios)})")
    if not cfg.sigma2_grid:
        raise ValueError("sigma2 grid must not be empty")
    if any(not (math.isfinite(v) and v > 0) for v in cfg.sigma2_grid):
        raise ValueError("sigma2 grid values must be finite and > 0")
    if not cfg.ber_sigma2_grid:
        raise ValueError("ber_sigma2_grid must not be empty")
    if any(not (math.isfinite(v) and v >= 0) for v in cfg.ber_sigma2_grid):
        raise ValueError("ber_sigma2_grid values must be finite and >= 0")
    if not cfg.ber_modes or any(m not in BER_MODES for m in cfg.ber_modes):
        raise ValueError(f"ber_modes must be drawn from {', '.join(BER_MODES)}")
    if cfg.noise_convention not in NOISE_CONVENTIONS:
        raise ValueError(f"noise_convention must be one of {', '.join(NOISE_CONVENTIONS)}")
    if not (0 <= cfg.seed < 2**64):
        raise ValueError("seed must be a 64-bit unsigned integer")
    if cfg.mc_samples < MC_MIN_SAMPLES:
        raise ValueError(f"mc_samples must be >= {MC_MIN_SAMPLES}")
    if cfg.ber_blocks < BER_MIN_BLOCKS:
        raise ValueError(f"ber_blocks must be >= {BER_MIN_BLOCKS}")
    if cfg.workers < 1:
        raise ValueError("workers must be >= 1")
    try:
        cfg.quad_settings()
    except InvalidParameterError as exc:
        raise ValueError(str(exc)) from exc
