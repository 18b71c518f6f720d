"""
Experiment configuration: an INI-style file with four sections.

    [scenario]  rician_factor_db, scatter_decay, antenna_spacing, speed,
                wavelength, aoa_width, aoa_mean, heading
    [layout]    num_pilots, deltas, l_max
    [budget]    snr_db, symbol_energy
    [run]       mode, num_trials, base_seed, output, workers, angle_nodes,
                semi_nodes, log_base, detector_csi, frames_per_block

List values are comma separated; ``start:stop:step`` expands to an inclusive
range. Unknown sections or keys are rejected.
"""

import configparser
import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

from .correlation import ScenarioParams
from .errors import ConfigError

MODES = ("analyze", "mc", "tradeoff")

# free-choice defaults; echoed with a NONPAPER tag
NONPAPER = {
    "antenna_spacing", "speed", "wavelength", "aoa_width", "aoa_mean", "heading",
    "snr_db", "num_pilots", "num_trials", "base_seed", "l_max", "symbol_energy",
}

SECTIONS = {
    "scenario": ("rician_factor_db", "scatter_decay", "antenna_spacing", "speed", "wavelength",
                 "aoa_width", "aoa_mean", "heading"),
    "layout": ("num_pilots", "deltas", "l_max"),
    "budget": ("snr_db", "symbol_energy"),
    "run": ("mode", "num_trials", "base_seed", "output", "workers", "angle_nodes", "semi_nodes",
            "log_base", "detector_csi", "frames_per_block"),
}


def _frange(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range {text!r} must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"bad range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + i * step for i in range(n + 1)]


def _float_list(text: str):
    text = text.strip()
    if ":" in text:
        return tuple(_frange(text))
    vals = tuple(float(v) for v in text.split(",") if v.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    rician_factor_db: Tuple[float, ...] = (0.0,)
    scatter_decay: float = 0.1
    antenna_spacing: float = 0.5
    speed: float = 100.0
    wavelength: float = 0.1
    aoa_width: float = 0.0
    aoa_mean: float = 0.0
    heading: float = 0.0
    num_pilots: int = 64
    deltas: Tuple[float, ...] = (0.02, 0.1, 0.5)
    l_max: int = 50
    snr_db: Tuple[float, ...] = tuple(float(x) for x in range(0, 41, 2))
    symbol_energy: float = 1.0
    mode: Optional[str] = None
    num_trials: int = 200
    base_seed: int = 0
    output: str = "-"
    workers: int = 1
    angle_nodes: int = 256
    semi_nodes: int = 512
    log_base: float = 2.0
    detector_csi: str = "estimated"
    frames_per_block: int = 1

    def scenario(self, k_db: float) -> ScenarioParams:
        return ScenarioParams(
            rician_factor=10.0 ** (k_db / 10.0),
            scatter_decay=self.scatter_decay,
            antenna_spacing=self.antenna_spacing,
            speed=self.speed,
            wavelength=self.wavelength,
            aoa_width=self.aoa_width,
            aoa_mean=self.aoa_mean,
            heading=self.heading,
        )

    def validate(self) -> "ExperimentConfig":
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(msg, key)

        need(self.mode is None or self.mode in MODES, "mode", f"must be one of {', '.join(MODES)}")
        for key in ("scatter_decay", "antenna_spacing", "speed", "wavelength", "symbol_energy"):
            need(getattr(self, key) > 0, key, "must be positive")
        need(self.aoa_width >= 0, "aoa_width", "must be >= 0")
        need(-math.pi <= self.aoa_mean < math.pi, "aoa_mean", "must lie in [-pi, pi)")
        need(self.num_pilots >= 1, "num_pilots", "must be >= 1")
        need(self.l_max >= 1, "l_max", "must be >= 1")
        need(self.num_trials >= 1, "num_trials", "must be >= 1")
        need(self.workers >= 1, "workers", "must be >= 1")
        need(self.angle_nodes >= 2 and self.semi_nodes >= 2, "angle_nodes", "node counts must be >= 2")
        need(self.log_base > 0 and self.log_base != 1.0, "log_base", "must be positive and != 1")
        need(self.detector_csi in ("estimated", "genie"), "detector_csi", "must be estimated or genie")
        need(self.frames_per_block >= 1, "frames_per_block", "must be >= 1")
        for d in self.deltas:
            l_ratio = round(1.0 / d - 1.0) if d > 0 else 0
            need(l_ratio >= 1 and abs(1.0 / (l_ratio + 1) - d) <= 1e-9, "deltas",
                 f"{d!r} is not 1/(L+1) for an integer L >= 1")
        return self

    def to_text(self) -> str:
        """Resolved configuration in the input format; parses back to an equal config."""
        lines = []
        for section, keys in SECTIONS.items():
            lines.append(f"[{section}]")
            for key in keys:
                if getattr(self, key) is None:
                    continue
                tag = "  # NONPAPER" if key in NONPAPER else ""
                lines.append(f"{key} = {_fmt(getattr(self, key))}{tag}")
            lines.append("")
        return "\n".join(lines)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key, raw):
    kind = _TYPES[key]
    try:
        if kind == Tuple[float, ...]:
            return _float_list(raw)
        if kind is int:
            return int(raw)
        if kind == Optional[str]:
            return raw.strip()
        if kind is float:
            if raw.strip().lower() == "e":
                return math.e
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(str(exc), key) from None


def parse_config(text: str, **overrides) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError("unknown section", section)
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key in [{section}]", key)
            values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values).validate()


def load_config(path=None, **overrides) -> ExperimentConfig:
    if path is None:
        return parse_config("", **overrides)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from None
    return parse_config(text, **overrides)


def with_mode(cfg: ExperimentConfig, mode: str) -> ExperimentConfig:
    """Apply the subcommand's mode; a conflicting ``mode`` key in the file is an error."""
    if cfg.mode is not None and cfg.mode != mode:
        raise ConfigError(f"config says {cfg.mode!r} but subcommand is {mode!r}", "mode")
    return replace(cfg, mode=mode)
