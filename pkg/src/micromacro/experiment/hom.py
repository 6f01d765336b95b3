"""Maximal Hong-Ou-Mandel dip visibility between two independent sources."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from ..channels import LossParams, loss_channel
from ..errors import UndefinedValueError
from ..fock import DensityOperator, photon_pmf

HOM_R2_TOL = 1e-12


@dataclass(frozen=True)
class HomInputs:
    """Input-port photon statistics and the splitter's intensity coefficients.

    ``P11`` is the probability of one photon in each input, ``P20`` (``P02``) of
    two photons in the first (second) input.  ``r2`` and ``t2`` are the intensity
    reflectance and transmittance.
    """

    P11: float
    P20: float
    P02: float
    r2: float
    t2: float

    def __post_init__(self):
        if min(self.P11, self.P20, self.P02) < 0:
            raise ValueError("probabilities must be >= 0")
        if not (0.0 < self.r2 < 1.0 and 0.0 < self.t2 < 1.0):
            raise ValueError("r2 and t2 must lie strictly between 0 and 1")
        if abs(self.r2 + self.t2 - 1.0) > HOM_R2_TOL:
            raise ValueError(f"r2 + t2 must equal 1, got {self.r2 + self.t2}")


def hom_visibility(inp: HomInputs) -> float:
    """``P11 / (P20 + P02 + (R^2 + T^2) / (2 R T) * P11)`` with intensity coefficients R, T.

    Leading-order dip visibility: a |1,1> input gives coincidences
    ``(T - R)^2`` against ``T^2 + R^2`` for distinguishable photons, while
    |2,0> and |0,2> give ``2 R T`` either way.
    """
    if inp.P11 == 0 and inp.P20 == 0 and inp.P02 == 0:
        raise UndefinedValueError("HOM visibility is undefined when all input probabilities vanish")
    R, T = inp.r2, inp.t2
    denom = inp.P20 + inp.P02 + (R * R + T * T) / (2.0 * R * T) * inp.P11
    return inp.P11 / denom


def hom_inputs_from_sources(hsp: DensityOperator, lo_mean: float, r2: float,
                            hsp_transmission: float = 1.0) -> HomInputs:
    """Leading-order ``P_ij`` for a heralded photon against a weak coherent state.

    ``P11 = p_hsp(1) p_lo(1)``; ``P20`` and ``P02`` are the two-photon
    probabilities of each source on its own, since a pair from either input
    produces accidental coincidences whatever the other input holds.
    ``hsp_transmission`` is extra loss on the heralded photon before the
    splitter (0.5 when it arrives through one arm of a balanced splitter).
    """
    p_h = photon_pmf(loss_channel(hsp, LossParams(hsp_transmission)))
    p_h = np.pad(p_h, (0, max(0, 3 - p_h.size)))
    p_c = poisson.pmf(np.arange(3), lo_mean)
    return HomInputs(P11=float(p_h[1] * p_c[1]), P20=float(p_h[2]), P02=float(p_c[2]),
                     r2=r2, t2=1.0 - r2)

