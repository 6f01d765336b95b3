"""Concurrence with losses removed stage by stage, next to the lossy curve."""

import argparse

from micromacro.config import load_config
from micromacro.experiment.pipeline import LossStage, factor_out_loss, sweep_alpha


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="paper")
    parser.add_argument("--alpha-sq", type=float, nargs="+", default=[0, 100, 300, 600, 1000])
    args = parser.parse_args()

    params = load_config(args.config).experiment
    grid = sorted(args.alpha_sq)
    curves = {
        "as configured": sweep_alpha(params, grid),
        "no detection/transmission loss": factor_out_loss(params, LossStage.DETECTION_AND_TRANSMISSION, grid),
        "also no coupling loss": factor_out_loss(params, LossStage.ALSO_PRE_DISPLACEMENT, grid),
    }
    print(f"{'|alpha|^2':>10}" + "".join(f"{name:>34}" for name in curves))
    for i, x in enumerate(grid):
        row = [c.column("concurrence_bound")[i] for c in curves.values()]
        print(f"{x:>10g}" + "".join(f"{v:>34.5f}" for v in row))
    for name, c in curves.items():
        zc = c.zero_crossing
        print(f"{name}: zero crossing {'none in range' if zc is None else f'{zc:.1f}'}")


if __name__ == "__main__":
    main()
