"""Maximal HOM dip visibility against local-oscillator mean photon number."""

import argparse

import numpy as np

from micromacro.experiment.hom import hom_inputs_from_sources, hom_visibility
from micromacro.experiment.source import SourceParams, heralded_source_state


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pair-prob", type=float, default=0.01)
    parser.add_argument("--coupling", type=float, default=0.5)
    args = parser.parse_args()

    _, hsp = heralded_source_state(SourceParams(pair_prob=args.pair_prob, signal_coupling=args.coupling))
    print(f"{'lo_mean':>8} {'50:50':>8} {'90:10':>8}")
    for lo in np.geomspace(1e-3, 0.5, 12):
        v50 = hom_visibility(hom_inputs_from_sources(hsp, lo, 0.5))
        v90 = hom_visibility(hom_inputs_from_sources(hsp, lo, 0.1, hsp_transmission=0.5))
        print(f"{lo:8.4f} {v50:8.4f} {v90:8.4f}")


if __name__ == "__main__":
    main()
