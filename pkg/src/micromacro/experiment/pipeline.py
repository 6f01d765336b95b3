"""End-to-end model: herald, split, displace, undo, lose, detect.

Mode A carries the displacement; mode B is left alone.  Probabilities are
conditioned on the herald click.  ``p_mn`` are click-pattern probabilities of
threshold detectors (``m`` for A, ``n`` for B), not photon-number probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from ..channels import (
    DetectorParams,
    LossParams,
    NoiseParams,
    loss_channel,
    mc_redisplacement,
    no_click_weights,
    noisy_redisplacement,
)
from ..fock import ComplexAmplitude, JointState, beamsplitter_apply, beamsplitter_block, product_state, vacuum
from .source import SourceParams, heralded_source_state

NORMALIZATION_TOL = 1e-9


class AnalyzerSetting(str, Enum):
    SEPARATE = "separate"
    INTERFERE = "interfere"


@dataclass(frozen=True)
class ExperimentParams:
    source: SourceParams = field(default_factory=SourceParams)
    alpha: ComplexAmplitude = field(default_factory=lambda: ComplexAmplitude(0.0))
    noise: NoiseParams = field(default_factory=NoiseParams)
    loss_A: LossParams = field(default_factory=lambda: LossParams(0.8))
    # mode-A transmission between the entangling splitter and the re-displacement
    loss_A_pre: LossParams = field(default_factory=lambda: LossParams(1.0))
    loss_B: LossParams = field(default_factory=lambda: LossParams(0.8))
    analysis_det_A: DetectorParams = field(default_factory=lambda: DetectorParams(0.25, 0.0))
    analysis_det_B: DetectorParams = field(default_factory=lambda: DetectorParams(0.25, 0.0))
    analyzer_setting: AnalyzerSetting = AnalyzerSetting.INTERFERE
    phase_scan_points: int = 32

    def __post_init__(self):
        object.__setattr__(self, "analyzer_setting", AnalyzerSetting(self.analyzer_setting))
        if self.analyzer_setting is AnalyzerSetting.INTERFERE and self.phase_scan_points < 8:
            raise ValueError("phase_scan_points must be >= 8 for an interference scan")

    def with_alpha_sq(self, alpha_sq: float) -> "ExperimentParams":
        return replace(self, alpha=ComplexAmplitude.from_mean_photons(alpha_sq, self.alpha.phase))


def concurrence_lower_bound(V: float, p00: float, p01: float, p10: float, p11: float) -> float:
    """``V (p01 + p10) - 2 sqrt(p00 p11)``; negative means no certified entanglement."""
    return V * (p01 + p10) - 2.0 * math.sqrt(p00 * p11)


@dataclass(frozen=True)
class TomographyRecord:
    V: float
    p00: float
    p01: float
    p10: float
    p11: float
    concurrence_bound: float
    visibility_coherence: float | None = None

    @classmethod
    def from_measurements(cls, V: float, p00: float, p01: float, p10: float, p11: float,
                          visibility_coherence: float | None = None) -> "TomographyRecord":
        return cls(V, p00, p01, p10, p11, concurrence_lower_bound(V, p00, p01, p10, p11),
                   visibility_coherence)


# -- measurement models ---------------------------------------------------


def click_patterns(state: JointState, det_a: DetectorParams, det_b: DetectorParams) -> tuple[float, ...]:
    """``(p00, p01, p10, p11)`` for threshold detectors on A and B."""
    pmf = state.joint_pmf()
    pmf = pmf / pmf.sum()
    wa = no_click_weights(state.dim_a, det_a)
    wb = no_click_weights(state.dim_b, det_b)
    p00 = float(wa @ pmf @ wb)
    no_a = float(wa @ pmf.sum(axis=1))
    no_b = float(pmf.sum(axis=0) @ wb)
    p01 = no_a - p00
    p10 = no_b - p00
    p11 = 1.0 - p00 - p01 - p10
    return p00, p01, p10, p11


def _recombined_blocks(state: JointState, det: DetectorParams):
    """Per total photon number: ``(a_values, rho_block, povm_block)``.

    ``povm_block`` is the no-click element of ``det`` on the first output of a
    balanced beamsplitter, pulled back to the A/B input basis.  The scanned
    phase only multiplies ``rho_block[a, a']`` by ``exp(i theta (a' - a))``.
    """
    da, db = state.dim_a, state.dim_b
    rho = state.entries
    out = []
    for n in range(da + db - 1):
        a_vals = np.arange(max(0, n - db + 1), min(n, da - 1) + 1)
        flat = a_vals * db + (n - a_vals)
        block = rho[np.ix_(flat, flat)]
        if not np.any(np.abs(np.diagonal(block)) > 0):
            continue
        u = beamsplitter_block(n, 0.5)[:, a_vals]
        w = no_click_weights(n + 1, det)
        povm = u.conj().T @ (w[:, None] * u)
        out.append((a_vals, block, povm))
    return out


def interference_scan(state: JointState, det: DetectorParams, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Click probability of one output detector vs. the phase applied to mode B."""
    thetas = 2.0 * math.pi * np.arange(points) / points
    blocks = _recombined_blocks(state, det)
    norm = state.trace
    probs = np.empty(points)
    for i, theta in enumerate(thetas):
        no_click = 0.0
        for a_vals, block, povm in blocks:
            ph = np.exp(1j * theta * (a_vals[None, :] - a_vals[:, None]))
            no_click += float(np.sum(block * ph * povm.T).real)
        probs[i] = 1.0 - no_click / norm
    return thetas, probs


def fringe_harmonics(state: JointState, det: DetectorParams) -> dict[int, complex]:
    """Fourier coefficients ``c_h`` of the click probability ``sum_h c_h exp(i h theta)``."""
    coeffs: dict[int, complex] = {0: 1.0 + 0j}
    norm = state.trace
    for a_vals, block, povm in _recombined_blocks(state, det):
        terms = block * povm.T / norm
        diff = a_vals[None, :] - a_vals[:, None]
        for h in np.unique(diff):
            coeffs[int(h)] = coeffs.get(int(h), 0j) - complex(terms[diff == h].sum())
    return coeffs


def visibility_from_scan(probs: np.ndarray) -> float:
    hi, lo = float(probs.max()), float(probs.min())
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def visibility_from_coherence(state: JointState, det: DetectorParams) -> float:
    """First-harmonic visibility ``2 |c_1| / c_0`` of the fringe."""
    c = fringe_harmonics(state, det)
    return 2.0 * abs(c.get(1, 0j)) / c[0].real if c[0].real > 0 else 0.0


# -- pipeline --------------------------------------------------------------


def analysed_state(params: ExperimentParams, mc_samples: int | None = None,
                   seed: int | None = None) -> JointState:
    """Joint A/B state right before the analysis detectors (herald-conditioned).

    With ``mc_samples`` the phase average uses Monte-Carlo sampling instead of
    quadrature.
    """
    _, signal = heralded_source_state(params.source)
    joint = product_state(signal, vacuum(signal.dim))
    joint = beamsplitter_apply(joint, 0.5)
    joint = loss_channel(joint, params.loss_A_pre, mode="A")
    if mc_samples is None:
        joint = noisy_redisplacement(joint, params.alpha, params.noise, mode="A")
    else:
        joint = mc_redisplacement(joint, params.alpha, params.noise, mc_samples,
                                  0 if seed is None else seed, mode="A")
    joint = loss_channel(joint, params.loss_A, mode="A")
    joint = loss_channel(joint, params.loss_B, mode="B")
    return joint


def record_from_state(state: JointState, params: ExperimentParams) -> TomographyRecord:
    p00, p01, p10, p11 = click_patterns(state, params.analysis_det_A, params.analysis_det_B)
    if abs(p00 + p01 + p10 + p11 - 1.0) > NORMALIZATION_TOL:
        raise ArithmeticError("click-pattern probabilities do not sum to one")
    points = max(params.phase_scan_points, 8)
    _, probs = interference_scan(state, params.analysis_det_A, points)
    V = visibility_from_scan(probs)
    V_coh = visibility_from_coherence(state, params.analysis_det_A)
    return TomographyRecord.from_measurements(V, p00, p01, p10, p11, visibility_coherence=V_coh)


def run_pipeline(params: ExperimentParams) -> TomographyRecord:
    """Heralded tomography record; both analyzer settings are evaluated."""
    return record_from_state(analysed_state(params), params)


# -- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    points: tuple[tuple[float, TomographyRecord], ...]
    zero_crossing: float | None = None

    @property
    def alpha_sq(self) -> np.ndarray:
        return np.array([x for x, _ in self.points])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for _, r in self.points])


def find_zero_crossing(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Linear interpolation between the last positive value and the first negative one."""
    for i in range(1, len(ys)):
        if ys[i] < 0 <= ys[i - 1]:
            x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
            return float(x0 + (x1 - x0) * y0 / (y0 - y1))
    return None


def sweep_alpha(params: ExperimentParams, alpha_sq_grid: Sequence[float]) -> SweepResult:
    grid = [float(x) for x in alpha_sq_grid]
    if not grid:
        raise ValueError("alpha_sq grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha_sq grid must be sorted")
    points = tuple((x, run_pipeline(params.with_alpha_sq(x))) for x in grid)
    crossing = find_zero_crossing(grid, [r.concurrence_bound for _, r in points])
    return SweepResult(points, crossing)


class LossStage(str, Enum):
    DETECTION_AND_TRANSMISSION = "detection_and_transmission"
    ALSO_PRE_DISPLACEMENT = "also_pre_displacement"


def idealized(params: ExperimentParams, stage: LossStage) -> ExperimentParams:
    """Copy of ``params`` with the losses of ``stage`` removed (dark counts kept)."""
    stage = LossStage(stage)
    out = replace(
        params,
        loss_A=LossParams(1.0),
        loss_A_pre=LossParams(1.0),
        loss_B=LossParams(1.0),
        analysis_det_A=replace(params.analysis_det_A, efficiency=1.0),
        analysis_det_B=replace(params.analysis_det_B, efficiency=1.0),
    )
    if stage is LossStage.ALSO_PRE_DISPLACEMENT:
        out = replace(out, source=replace(params.source, signal_coupling=1.0))
    return out


def factor_out_loss(params: ExperimentParams, stage: LossStage,
                    alpha_sq_grid: Sequence[float]) -> SweepResult:
    return sweep_alpha(idealized(params, stage), alpha_sq_grid)
