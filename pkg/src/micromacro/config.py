"""INI run configuration: parsing, validation and the shipped presets.

Every section and key is optional except where noted in ``presets/schema.ini``;
unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .channels import DetectorParams, LossParams, NoiseParams, PhaseConvention
from .experiment.pipeline import ExperimentParams
from .experiment.source import SourceParams
from .fock import ComplexAmplitude

PRESETS = ("paper", "ideal")


class ConfigError(ValueError):
    pass


_SCHEMA: dict[str, dict[str, type]] = {
    "source": {"pair_prob": float, "signal_coupling": float, "herald_efficiency": float,
               "herald_dark_prob": float, "max_pairs": int},
    "displacement": {"alpha_sq": float, "alpha_phase": float},
    "noise": {"epsilon": float, "convention": str, "quadrature_order": int},
    "transmission": {"mode_a_pre": float, "mode_a": float, "mode_b": float},
    "detectors": {"efficiency_a": float, "dark_prob_a": float,
                  "efficiency_b": float, "dark_prob_b": float},
    "analysis": {"phase_scan_points": int},
    "sweep": {"start": float, "stop": float, "step": float, "values": str},
    "hom": {"hsp_pair_prob": float, "hsp_coupling": float, "herald_efficiency": float,
            "lo_mean": float, "splitter_r2": float, "hsp_transmission": float,
            "p20": float, "p02": float},
    "distinguish": {"alpha_sq": str, "interval": str},
    "run": {"seed": int, "mc_samples": int, "out_dir": str},
}


@dataclass(frozen=True)
class HomSettings:
    hsp_pair_prob: float = 0.01
    hsp_coupling: float = 0.5
    herald_efficiency: float = 0.20
    lo_mean: float = 0.05
    splitter_r2: float = 0.5
    hsp_transmission: float = 1.0
    p20: float | None = None
    p02: float | None = None


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentParams = field(default_factory=ExperimentParams)
    grid: tuple[float, ...] = (0.0,)
    hom: HomSettings = field(default_factory=HomSettings)
    distinguish_alpha_sq: tuple[float, ...] = (1000.0,)
    distinguish_full_range: bool = False
    seed: int | None = None
    mc_samples: int = 2000
    out_dir: str = "."


def _parse_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _typed(section: configparser.SectionProxy, key: str, kind: type):
    raw = section[key]
    try:
        return kind(raw) if kind is not str else raw.strip()
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a valid {kind.__name__}") from exc


def _read(path: str | Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    text = _preset_text(str(path)) if str(path) in PRESETS else None
    try:
        if text is None:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        else:
            parser.read_string(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parser


def _preset_text(name: str) -> str:
    return resources.files("micromacro.presets").joinpath(f"{name}.ini").read_text(encoding="utf-8")


def load_config(path: str | Path) -> RunConfig:
    """Parse an INI file (or a preset name such as ``paper``) into a RunConfig."""
    parser = _read(path)
    values: dict[str, dict[str, object]] = {}
    for name in parser.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        sec = parser[name]
        for key in sec:
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
        values[name] = {key: _typed(sec, key, _SCHEMA[name][key]) for key in sec}
    try:
        return _build(values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _build(v: dict[str, dict[str, object]]) -> RunConfig:
    src = v.get("source", {})
    base = SourceParams()
    source = SourceParams(
        pair_prob=src.get("pair_prob", base.pair_prob),
        signal_coupling=src.get("signal_coupling", base.signal_coupling),
        herald_det=DetectorParams(src.get("herald_efficiency", base.herald_det.efficiency),
                                  src.get("herald_dark_prob", base.herald_det.dark_prob)),
        max_pairs=src.get("max_pairs", base.max_pairs),
    )
    disp = v.get("displacement", {})
    alpha = ComplexAmplitude.from_mean_photons(disp.get("alpha_sq", 0.0), disp.get("alpha_phase", 0.0))
    nz = v.get("noise", {})
    try:
        convention = PhaseConvention(nz.get("convention", PhaseConvention.TWO_EPSILON.value))
    except ValueError as exc:
        raise ConfigError(f"[noise] convention must be one of "
                          f"{[c.value for c in PhaseConvention]}") from exc
    noise = NoiseParams(nz.get("epsilon", 0.0), convention, nz.get("quadrature_order", 21))
    tr = v.get("transmission", {})
    det = v.get("detectors", {})
    defaults = ExperimentParams()
    experiment = ExperimentParams(
        source=source,
        alpha=alpha,
        noise=noise,
        loss_A=LossParams(tr.get("mode_a", defaults.loss_A.transmission)),
        loss_A_pre=LossParams(tr.get("mode_a_pre", defaults.loss_A_pre.transmission)),
        loss_B=LossParams(tr.get("mode_b", defaults.loss_B.transmission)),
        analysis_det_A=DetectorParams(det.get("efficiency_a", defaults.analysis_det_A.efficiency),
                                      det.get("dark_prob_a", defaults.analysis_det_A.dark_prob)),
        analysis_det_B=DetectorParams(det.get("efficiency_b", defaults.analysis_det_B.efficiency),
                                      det.get("dark_prob_b", defaults.analysis_det_B.dark_prob)),
        phase_scan_points=v.get("analysis", {}).get("phase_scan_points", defaults.phase_scan_points),
    )

    grid = _grid(v.get("sweep", {}))
    hom = replace(HomSettings(), **v.get("hom", {}))
    if not 0.0 < hom.splitter_r2 < 1.0:
        raise ConfigError("[hom] splitter_r2 must lie strictly between 0 and 1")
    dist = v.get("distinguish", {})
    dist_grid = _parse_list(dist["alpha_sq"]) if "alpha_sq" in dist else (1000.0,)
    if not dist_grid or min(dist_grid) <= 0:
        raise ConfigError("[distinguish] alpha_sq must be a non-empty list of positive values")
    interval = dist.get("interval", "default")
    if interval not in ("default", "full"):
        raise ConfigError("[distinguish] interval must be 'default' or 'full'")
    run = v.get("run", {})
    if run.get("mc_samples", 1) < 1:
        raise ConfigError("[run] mc_samples must be >= 1")
    return RunConfig(experiment=experiment, grid=grid, hom=hom, distinguish_alpha_sq=dist_grid,
                     distinguish_full_range=interval == "full", seed=run.get("seed"),
                     mc_samples=run.get("mc_samples", 2000), out_dir=run.get("out_dir", "."))


def _grid(sweep: dict[str, object]) -> tuple[float, ...]:
    if "values" in sweep:
        if {"start", "stop", "step"} & sweep.keys():
            raise ConfigError("[sweep] give either values or start/stop/step, not both")
        grid = _parse_list(sweep["values"])
    elif sweep:
        try:
            start, stop, step = sweep["start"], sweep["stop"], sweep["step"]
        except KeyError as exc:
            raise ConfigError(f"[sweep] missing {exc.args[0]}") from exc
        if step <= 0 or stop < start:
            raise ConfigError("[sweep] needs step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        grid = tuple(float(start + i * step) for i in range(count))
    else:
        grid = (0.0,)
    if not grid:
        raise ConfigError("[sweep] grid is empty")
    if any(x < 0 for x in grid) or list(grid) != sorted(grid):
        raise ConfigError("[sweep] grid must be non-negative and sorted")
    return grid
