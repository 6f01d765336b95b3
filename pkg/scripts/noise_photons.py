"""Photons added to vacuum by an imperfect re-displacement, both phase conventions."""

import math

from micromacro.channels import NoiseParams, PhaseConvention, expected_noise_photons, noisy_redisplacement
from micromacro.fock import mean_and_variance, photon_pmf, vacuum

EPSILON = 1.5e-4

if __name__ == "__main__":
    print(f"{'|alpha|^2':>10} {'var=eps':>10} {'var=2eps':>10}")
    for mu in (500, 1000, 2000, 3333, 5000, 6600, 10000):
        gains = []
        for conv in (PhaseConvention.ONE_EPSILON, PhaseConvention.TWO_EPSILON):
            noise = NoiseParams(EPSILON, conv)
            out = noisy_redisplacement(vacuum(1).to_density(), math.sqrt(mu), noise)
            gain = mean_and_variance(photon_pmf(out)).mean
            assert abs(gain - expected_noise_photons(math.sqrt(mu), noise)) < 1e-8 * max(gain, 1)
            gains.append(gain)
        print(f"{mu:>10} {gains[0]:>10.4f} {gains[1]:>10.4f}")
