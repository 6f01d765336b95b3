"""Single-shot discrimination of |alpha> from D(alpha)|1> with a binned detector."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def displaced_single_photon_pmf(n: np.ndarray, mu: float) -> np.ndarray:
    """Photon-number pmf of ``D(alpha)|1>``: ``e^-mu mu^(n-1) (n - mu)^2 / n!`` with ``mu = |alpha|^2``."""
    n = np.asarray(n)
    with np.errstate(divide="ignore"):
        log = -mu + (n - 1) * math.log(mu) - gammaln(n + 1)
    return np.exp(log) * (n - mu) ** 2


def coarse_grained_distinguishability(alpha_sq: float,
                                      interval: tuple[float, float] | None = None) -> float:
    """Guessing probability of a detector that fires only inside ``interval``.

    A click is read as "coherent", no click as "displaced single photon"; the
    two are equally likely a priori.  The default interval is
    ``[|alpha|^2 - |alpha|, |alpha|^2 + |alpha|]`` with endpoints rounded to the
    nearest integer.
    """
    if not alpha_sq > 0:
        raise ValueError("alpha_sq must be > 0")
    mu = float(alpha_sq)
    if interval is None:
        interval = (mu - math.sqrt(mu), mu + math.sqrt(mu))
    lo, hi = _round_half_up(interval[0]), _round_half_up(interval[1])
    n_max = int(mu + 40.0 * math.sqrt(mu) + 50)
    n = np.arange(n_max + 1)
    inside = (n >= lo) & (n <= hi)
    p_coh = poisson.pmf(n, mu)
    p_one = displaced_single_photon_pmf(n, mu)
    return float(0.5 * p_coh[inside].sum() + 0.5 * (1.0 - p_one[inside].sum()))
