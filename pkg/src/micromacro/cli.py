"""Command-line front end.

    micromacro baseline --config paper
    micromacro sweep --config paper --out results --plot
    micromacro hom --config paper
    micromacro distinguish --config my.ini

Each command writes ``<command>.csv`` plus a ``<command>.meta.txt`` key-value
sidecar into the output directory.  Exit codes: 0 success, 2 configuration
error, 3 numerical non-convergence or truncation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .errors import ConvergenceError, TruncationError, UndefinedValueError
from .experiment.coarse import coarse_grained_distinguishability
from .experiment.hom import HomInputs, hom_inputs_from_sources, hom_visibility
from .experiment.pipeline import analysed_state, record_from_state, sweep_alpha
from .experiment.source import SourceParams, heralded_source_state
from .channels import DetectorParams
from .svgplot import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

SWEEP_COLUMNS = ("alpha_sq", "V", "p00", "p01", "p10", "p11", "concurrence")
SWEEP_UNITS = {"alpha_sq": "mean photon number", "V": "dimensionless",
               "p00": "probability", "p01": "probability", "p10": "probability",
               "p11": "probability", "concurrence": "dimensionless (lower bound)",
               "concurrence_mc": "dimensionless (Monte-Carlo phase average)"}
HOM_COLUMNS = ("r2", "hsp_transmission", "P11", "P20", "P02", "V_max")
HOM_UNITS = {"r2": "intensity reflectance", "hsp_transmission": "intensity transmission",
             "P11": "probability", "P20": "probability", "P02": "probability",
             "V_max": "dimensionless"}
DIST_COLUMNS = ("alpha_sq", "guess_probability")
DIST_UNITS = {"alpha_sq": "mean photon number", "guess_probability": "probability"}

# (r2, hsp_transmission): 50:50 with the heralded photon injected directly, and
# 90:10 with the heralded photon arriving through one arm of a balanced splitter.
HOM_REFERENCE_ROWS = ((0.5, 1.0), (0.1, 0.5))


@dataclass
class CsvTable:
    columns: tuple[str, ...]
    rows: list[tuple[float, ...]]
    units: dict[str, str]
    meta: dict[str, str]

    def __post_init__(self):
        if any(len(r) != len(self.columns) for r in self.rows):
            raise ValueError("table is not rectangular")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([f"{v:.9g}" for v in row])
        return buf.getvalue()

    def meta_text(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.meta.items()]
        lines += [f"unit.{c} = {self.units.get(c, '')}" for c in self.columns]
        return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "none" if value is None else f"{value:.9g}"


def cmd_baseline(cfg: RunConfig, mc_validate: bool = False) -> CsvTable:
    table = cmd_sweep(replace(cfg, grid=(0.0,)), mc_validate=mc_validate)
    table.meta["command"] = "baseline"
    return table


def cmd_sweep(cfg: RunConfig, mc_validate: bool = False) -> CsvTable:
    result = sweep_alpha(cfg.experiment, cfg.grid)
    columns = SWEEP_COLUMNS
    rows = [(x, r.V, r.p00, r.p01, r.p10, r.p11, r.concurrence_bound) for x, r in result.points]
    meta = {"command": "sweep", "points": str(len(rows)), "zero_crossing": _fmt(result.zero_crossing)}
    if mc_validate:
        seeds = np.random.SeedSequence(cfg.seed).spawn(len(rows))
        mc = []
        for x, ss in zip(cfg.grid, seeds):
            params = cfg.experiment.with_alpha_sq(x)
            state = analysed_state(params, mc_samples=cfg.mc_samples,
                                   seed=int(ss.generate_state(1)[0]))
            mc.append(record_from_state(state, params).concurrence_bound)
        rows = [row + (c,) for row, c in zip(rows, mc)]
        columns = columns + ("concurrence_mc",)
        dev = max(abs(row[6] - c) for row, c in zip(rows, mc))
        meta.update(seed=str(cfg.seed), mc_samples=str(cfg.mc_samples),
                    mc_max_abs_deviation=_fmt(dev))
    return CsvTable(columns, rows, SWEEP_UNITS, meta)


def hom_row(cfg: RunConfig, r2: float, hsp_transmission: float) -> tuple[float, ...]:
    h = cfg.hom
    src = SourceParams(pair_prob=h.hsp_pair_prob, signal_coupling=h.hsp_coupling,
                       herald_det=DetectorParams(h.herald_efficiency, 0.0))
    _, hsp = heralded_source_state(src)
    inp = hom_inputs_from_sources(hsp, h.lo_mean, r2, hsp_transmission)
    if h.p20 is not None or h.p02 is not None:
        inp = replace(inp, P20=inp.P20 if h.p20 is None else h.p20,
                      P02=inp.P02 if h.p02 is None else h.p02)
    return (r2, hsp_transmission, inp.P11, inp.P20, inp.P02, hom_visibility(inp))


def cmd_hom(cfg: RunConfig) -> CsvTable:
    # validate the configured splitter before computing anything
    HomInputs(0.0, 0.0, 0.0, cfg.hom.splitter_r2, 1.0 - cfg.hom.splitter_r2)
    settings = ((cfg.hom.splitter_r2, cfg.hom.hsp_transmission),) + HOM_REFERENCE_ROWS
    rows = [hom_row(cfg, r2, t) for r2, t in settings]
    meta = {"command": "hom", "row.0": "configured splitter", "row.1": "reference 50:50",
            "row.2": "reference 90:10"}
    return CsvTable(HOM_COLUMNS, rows, HOM_UNITS, meta)


def cmd_distinguish(cfg: RunConfig) -> CsvTable:
    rows = []
    for mu in cfg.distinguish_alpha_sq:
        interval = (0.0, mu + 40.0 * mu**0.5 + 50.0) if cfg.distinguish_full_range else None
        rows.append((mu, coarse_grained_distinguishability(mu, interval)))
    meta = {"command": "distinguish",
            "interval": "full" if cfg.distinguish_full_range else "|alpha|^2 +- |alpha|"}
    return CsvTable(DIST_COLUMNS, rows, DIST_UNITS, meta)


def write_outputs(table: CsvTable, out_dir: Path, name: str, plot: bool) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"{name}.csv", out_dir / f"{name}.meta.txt"]
    paths[0].write_bytes(table.to_csv().encode("utf-8"))
    paths[1].write_bytes(table.meta_text().encode("utf-8"))
    if plot:
        svg = _plot(table)
        if svg is not None:
            paths.append(out_dir / f"{name}.svg")
            paths[-1].write_bytes(svg.encode("utf-8"))
    return paths


def _plot(table: CsvTable) -> str | None:
    data = np.array(table.rows, dtype=float)
    if data.shape[0] < 2:
        return None
    col = {c: data[:, i] for i, c in enumerate(table.columns)}
    if "concurrence" in col:
        series = {"concurrence bound": col["concurrence"]}
        if "concurrence_mc" in col:
            series["Monte-Carlo"] = col["concurrence_mc"]
        return line_plot(col["alpha_sq"], series, "|alpha|^2", "concurrence lower bound")
    if "guess_probability" in col:
        return line_plot(col["alpha_sq"], {"guess probability": col["guess_probability"]},
                         "|alpha|^2", "guess probability", zero_line=False)
    return None


def _summary(table: CsvTable) -> str:
    lines = []
    for row in table.rows:
        lines.append("  ".join(f"{c}={v:.6g}" for c, v in zip(table.columns, row)))
    extra = {k: v for k, v in table.meta.items() if k == "zero_crossing"}
    lines += [f"{k}={v}" for k, v in extra.items()]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="micromacro", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("baseline", "tomography record without displacement"),
                            ("sweep", "concurrence bound against |alpha|^2"),
                            ("hom", "maximal two-photon interference visibility"),
                            ("distinguish", "coarse-grained single-shot discrimination")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True,
                       help="INI file, or a shipped preset name (paper, ideal)")
        p.add_argument("--out", default=None, help="output directory (overrides [run] out_dir)")
        p.add_argument("--seed", type=int, default=None, help="seed for Monte-Carlo validation")
        p.add_argument("--plot", action="store_true", help="also write an SVG line plot")
        p.add_argument("--mc-validate", action="store_true",
                       help="repeat each point with Monte-Carlo phase averaging")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must fit in an unsigned 64-bit integer")
            cfg = replace(cfg, seed=args.seed)
        if args.mc_validate and cfg.seed is None:
            raise ConfigError("--mc-validate needs a seed (--seed or [run] seed)")
        if args.mc_validate and args.command not in ("baseline", "sweep"):
            raise ConfigError("--mc-validate applies to baseline and sweep only")
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "baseline":
            table = cmd_baseline(cfg, args.mc_validate)
        elif args.command == "sweep":
            table = cmd_sweep(cfg, args.mc_validate)
        elif args.command == "hom":
            table = cmd_hom(cfg)
        else:
            table = cmd_distinguish(cfg)
    except (ConvergenceError, TruncationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, UndefinedValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out if args.out is not None else cfg.out_dir)
    write_outputs(table, out_dir, args.command, args.plot)
    print(_summary(table))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
