"""Heralded single photons from a two-mode squeezed vacuum."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..channels import DetectorParams, LossParams, loss_channel, no_click_weights
from ..errors import TruncationError, UndefinedValueError
from ..fock import LEAKAGE_TOL, DensityOperator, JointState, partial_trace, photon_pmf

PAIR_PROB_WARN = 0.1


@dataclass(frozen=True)
class SourceParams:
    """Pair source plus the heralding detector.

    ``pair_prob`` is the mean number of pairs per pulse.  ``signal_coupling``
    is the intensity transmission of the signal photon into the fibre.
    """

    pair_prob: float = 0.01
    signal_coupling: float = 0.5
    herald_det: DetectorParams = field(default_factory=lambda: DetectorParams(0.20, 0.0))
    max_pairs: int = 4
    truncation_tol: float = LEAKAGE_TOL

    def __post_init__(self):
        if not self.pair_prob > 0:
            raise ValueError("pair_prob must be > 0")
        if not 0.0 <= self.signal_coupling <= 1.0:
            raise ValueError("signal_coupling must be in [0, 1]")
        if self.max_pairs < 2:
            raise ValueError("max_pairs must be >= 2")
        if self.pair_prob > PAIR_PROB_WARN:
            warnings.warn(f"pair_prob={self.pair_prob} is outside the weak-pumping regime",
                          RuntimeWarning, stacklevel=3)

    @property
    def squeezing_lambda2(self) -> float:
        """``lambda^2`` of ``sum_n lambda^n |n, n>``, fixed by the mean pair number."""
        return self.pair_prob / (1.0 + self.pair_prob)


def pair_number_pmf(src: SourceParams) -> np.ndarray:
    """Thermal pair-number distribution truncated at ``max_pairs``."""
    lam2 = src.squeezing_lambda2
    neglected = lam2 ** (src.max_pairs + 1)
    if neglected > src.truncation_tol:
        raise TruncationError(
            f"max_pairs={src.max_pairs} drops weight {neglected:.3g} at pair_prob={src.pair_prob}")
    n = np.arange(src.max_pairs + 1)
    return (1.0 - lam2) * lam2**n


def tmsv_state(src: SourceParams) -> JointState:
    """Truncated two-mode squeezed vacuum; mode A is the signal, B the idler."""
    amps = np.sqrt(pair_number_pmf(src))
    dim = src.max_pairs + 1
    psi = np.zeros((dim, dim), dtype=np.complex128)
    psi[np.arange(dim), np.arange(dim)] = amps
    flat = psi.reshape(-1)
    leak = 1.0 - float(np.vdot(flat, flat).real)
    return JointState(np.outer(flat, flat.conj()), dim, dim, leakage=max(leak, 0.0))


def unheralded_signal(src: SourceParams) -> DensityOperator:
    return partial_trace(tmsv_state(src), keep="A")


def heralded_source_state(src: SourceParams) -> tuple[float, DensityOperator]:
    """Signal state conditioned on an idler click, after fibre coupling.

    Returns ``(herald_prob, signal)`` with ``signal`` normalised to unit trace.
    """
    tmsv = tmsv_state(src)
    click = 1.0 - no_click_weights(tmsv.dim_b, src.herald_det)
    t = tmsv.tensor()
    conditioned = np.einsum("ibjb,b->ij", t, click)
    herald_prob = float(np.trace(conditioned).real)
    if herald_prob <= 0:
        raise UndefinedValueError("the herald never fires")
    signal = DensityOperator(conditioned / herald_prob, leakage=tmsv.leakage)
    signal = loss_channel(signal, LossParams(src.signal_coupling))
    return herald_prob, signal


def g2_zero(state: DensityOperator) -> float:
    """Normalised second-order autocorrelation ``<n(n-1)> / <n>^2``."""
    pmf = photon_pmf(state)
    pmf = pmf / pmf.sum()
    n = np.arange(pmf.size)
    mean = float(n @ pmf)
    if mean <= 0:
        raise UndefinedValueError("g2(0) is undefined for a state with zero mean photon number")
    return float((n * (n - 1)) @ pmf) / mean**2
