"""Non-unitary maps: photon loss, threshold detection, phase-noisy re-displacement.

The re-displacement channel never builds the macroscopic mode.  An ideal
undo ``D(-alpha e^{i phi}) D(alpha)`` collapses (up to a global phase that
cancels in ``rho -> U rho U^dag``) to the residual displacement
``D(alpha (1 - e^{i phi}))``, whose size is set by the phase error alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import gammaln

from .errors import ConvergenceError, TruncationError
from .fock import (
    LEAKAGE_TOL,
    AmplitudeLike,
    DensityOperator,
    JointState,
    Mode,
    as_complex,
    default_dim,
    displacement_block,
    photon_pmf,
)

State = Union[DensityOperator, JointState]


@dataclass(frozen=True)
class LossParams:
    transmission: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError(f"transmission must be in [0, 1], got {self.transmission}")


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 1.0
    dark_prob: float = 0.0

    def __post_init__(self):
        for name in ("efficiency", "dark_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


# numpy's Gauss-Hermite weights overflow somewhere between 351 and 401 nodes
MAX_QUADRATURE_ORDER = 351


class PhaseConvention(str, Enum):
    """How the interferometer visibility deficit maps to phase-noise variance.

    ``TWO_EPSILON``: variance ``2 * epsilon``.  ``ONE_EPSILON``: variance
    ``epsilon``, so that the mean leaked photon number is ``epsilon * |alpha|^2``
    (the extinction-ratio reading).
    """

    TWO_EPSILON = "two_epsilon"
    ONE_EPSILON = "one_epsilon"


@dataclass(frozen=True)
class NoiseParams:
    epsilon: float = 0.0
    phase_variance_convention: PhaseConvention = PhaseConvention.TWO_EPSILON
    quadrature_order: int = 21

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        object.__setattr__(self, "phase_variance_convention",
                           PhaseConvention(self.phase_variance_convention))
        order = self.quadrature_order
        if order < 7 or order % 2 == 0 or order > MAX_QUADRATURE_ORDER:
            raise ValueError(f"quadrature_order must be odd and in [7, {MAX_QUADRATURE_ORDER}], got {order}")

    @property
    def phase_variance(self) -> float:
        if self.phase_variance_convention is PhaseConvention.TWO_EPSILON:
            return 2.0 * self.epsilon
        return self.epsilon


def expected_noise_photons(alpha: AmplitudeLike, noise: NoiseParams) -> float:
    """Mean photon number the noisy undo adds to vacuum: ``|alpha|^2 * 2(1 - exp(-var/2))``."""
    return abs(as_complex(alpha)) ** 2 * 2.0 * -math.expm1(-noise.phase_variance / 2.0)


# -- loss ------------------------------------------------------------------


def _loss_coefficients(dim: int, eta: float) -> list[np.ndarray]:
    """``c_k[m, n]`` so that ``rho'[m, n] = sum_k c_k[m, n] rho[m+k, n+k]``."""
    out = []
    lg = gammaln(np.arange(2 * dim) + 1.0)
    log_eta = math.log(eta) if eta > 0 else -np.inf
    log_loss = math.log1p(-eta) if eta < 1 else -np.inf
    for k in range(dim):
        m = np.arange(dim - k)
        log_binom = lg[m + k] - lg[m] - lg[k]
        with np.errstate(invalid="ignore"):
            lm = 0.5 * log_binom + 0.5 * m * log_eta
            lk = k * log_loss if k else 0.0
            c = np.exp(lm[:, None] + lm[None, :] + lk)
        if eta == 0:
            c = np.zeros_like(c)
            c[0, 0] = 1.0
        out.append(np.nan_to_num(c))
    return out


def _loss_on_axes(tensor: np.ndarray, eta: float, ket: int, bra: int) -> np.ndarray:
    t = np.moveaxis(tensor, (ket, bra), (0, 1))
    dim = t.shape[0]
    out = np.zeros_like(t)
    extra = (None,) * (t.ndim - 2)
    for k, c in enumerate(_loss_coefficients(dim, eta)):
        out[: dim - k, : dim - k] += c[(...,) + extra] * t[k:, k:]
    return np.moveaxis(out, (0, 1), (ket, bra))


def loss_channel(state: State, loss: LossParams, mode: Mode = "A") -> State:
    """Pure-loss (beamsplitter-to-vacuum) channel at intensity transmission ``eta``.

    For a :class:`JointState` the channel acts on ``mode``; it is ignored for a
    single-mode state.
    """
    eta = loss.transmission
    if eta == 1.0:
        return state
    if isinstance(state, DensityOperator):
        out = _loss_on_axes(state.entries, eta, 0, 1)
        return DensityOperator(_hermitize(out), leakage=state.leakage)
    axes = (0, 2) if mode == "A" else (1, 3)
    out = _loss_on_axes(state.tensor(), eta, *axes)
    return JointState.from_tensor(_hermitize_tensor(out), leakage=state.leakage)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _hermitize_tensor(t: np.ndarray) -> np.ndarray:
    return 0.5 * (t + np.conj(np.transpose(t, (2, 3, 0, 1))))


# -- detection -------------------------------------------------------------


def no_click_weights(dim: int, det: DetectorParams) -> np.ndarray:
    """Diagonal of the no-click POVM element: ``(1 - dark) (1 - eff)^n``."""
    return (1.0 - det.dark_prob) * (1.0 - det.efficiency) ** np.arange(dim)


def click_probability(state: DensityOperator, det: DetectorParams) -> float:
    """Click probability of a threshold detector, conditioned on the state's trace."""
    pmf = photon_pmf(state)
    return float(1.0 - no_click_weights(state.dim, det) @ pmf / pmf.sum())


# -- phase-noisy re-displacement ------------------------------------------


def residual_amplitude(alpha: AmplitudeLike, phi) -> np.ndarray:
    """Net displacement left by ``D(-alpha e^{i phi}) D(alpha)``."""
    return as_complex(alpha) * (1.0 - np.exp(1j * np.asarray(phi)))


def _apply_on_mode(state: State, ops: np.ndarray, weights: np.ndarray, mode: Mode) -> np.ndarray:
    """``sum_s w_s (K_s (x) I) rho (K_s (x) I)^dag`` for rectangular ``K_s`` on ``mode``."""
    if isinstance(state, DensityOperator):
        return np.einsum("s,sia,ab,sjb->ij", weights, ops, state.entries, ops.conj(), optimize=True)
    t = state.tensor()
    if mode == "A":
        return np.einsum("s,sia,abcd,sjc->ibjd", weights, ops, t, ops.conj(), optimize=True)
    return np.einsum("s,sia,bacd,sjd->bicj", weights, ops, t, ops.conj(), optimize=True)


def _wrap(state: State, out: np.ndarray, leakage: float) -> State:
    if isinstance(state, DensityOperator):
        return DensityOperator(_hermitize(out), leakage=leakage)
    return JointState.from_tensor(_hermitize_tensor(out), leakage=leakage)


def _mode_dim(state: State, mode: Mode) -> int:
    if isinstance(state, DensityOperator):
        return state.dim
    return state.dim_a if mode == "A" else state.dim_b


# Gauss-Hermite nodes whose normalised weight is below this are dropped; their
# contribution is far under any tolerance but their residual displacement
# would otherwise dictate the truncation.
NODE_WEIGHT_CUTOFF = 1e-18
NODE_X_MAX = math.sqrt(2.0 * math.log(1.0 / NODE_WEIGHT_CUTOFF))


def _quadrature(alpha: complex, sigma: float, order: int, state: State, dim_out: int,
                mode: Mode) -> np.ndarray:
    x, w = hermegauss(order)
    w = w / math.sqrt(2.0 * math.pi)
    keep = w > NODE_WEIGHT_CUTOFF
    betas = residual_amplitude(alpha, sigma * x[keep])
    dim_in = _mode_dim(state, mode)
    ops = np.stack([displacement_block(b, dim_out, dim_in) for b in betas])
    return _apply_on_mode(state, ops, w[keep], mode)


def noisy_redisplacement(state: State, alpha: AmplitudeLike, noise: NoiseParams, mode: Mode = "A",
                         dim_out: int | None = None, leakage_tol: float = LEAKAGE_TOL,
                         convergence_tol: float = 1e-9) -> State:
    """Average of ``D(beta) rho D(beta)^dag`` over a Gaussian phase error.

    ``beta = alpha (1 - e^{i phi})`` with ``phi ~ Normal(0, var)`` and ``var``
    from ``noise.phase_variance``.  The average is a Gauss-Hermite rule that
    starts at ``noise.quadrature_order`` nodes and is doubled (``n -> 2n + 1``)
    until two successive rules agree to ``convergence_tol`` on every entry; the
    finer rule is returned.  If no agreement is reached by
    ``MAX_QUADRATURE_ORDER`` a :class:`ConvergenceError` is raised.

    The output truncation on ``mode`` defaults to six standard deviations beyond
    the largest residual displacement among the retained nodes.
    """
    a = as_complex(alpha)
    var = noise.phase_variance
    if var == 0.0 or a == 0:
        return state
    sigma = math.sqrt(var)
    dim_in = _mode_dim(state, mode)
    if dim_out is None:
        phi_max = min(sigma * NODE_X_MAX, math.pi)
        b_max = float(np.abs(residual_amplitude(a, phi_max)))
        dim_out = max(dim_in, default_dim(b_max, dim_in - 1))
    if dim_out < dim_in:
        raise ValueError("dim_out must not be smaller than the input dimension")

    order = noise.quadrature_order
    out = _quadrature(a, sigma, order, state, dim_out, mode)
    delta, prev = math.inf, order
    while True:
        finer = 2 * order + 1
        if finer > MAX_QUADRATURE_ORDER:
            raise ConvergenceError(
                f"phase average changed by {delta:.3g} between orders {prev} and {order}; "
                f"order cap {MAX_QUADRATURE_ORDER} reached")
        ref = _quadrature(a, sigma, finer, state, dim_out, mode)
        delta = float(np.abs(out - ref).max())
        prev, order, out = order, finer, ref
        if delta <= convergence_tol:
            break

    leak = _trace_of(state, out, dim_out, mode)
    if leak > leakage_tol:
        raise TruncationError(f"re-displacement leaks {leak:.3g} beyond dim={dim_out}")
    return _wrap(state, out, state.leakage + max(leak, 0.0))


def _trace_of(state: State, out: np.ndarray, dim_out: int, mode: Mode) -> float:
    if isinstance(state, DensityOperator):
        return state.trace - float(np.trace(out).real)
    return state.trace - float(np.einsum("abab->", out).real)


def _displaced_columns(betas: np.ndarray, dim_out: int, dim_in: int) -> np.ndarray:
    """``<m|D(beta)|n>`` for a batch of betas, built column by column.

    ``D|n+1> = (a^dag - conj(beta)) D|n> / sqrt(n+1)`` starting from the
    coherent state, which is exact on the retained rows.
    """
    betas = np.asarray(betas, dtype=np.complex128)
    s = betas.size
    cols = np.zeros((s, dim_out, dim_in), dtype=np.complex128)
    c = np.empty((s, dim_out), dtype=np.complex128)
    c[:, 0] = np.exp(-0.5 * np.abs(betas) ** 2)
    for m in range(1, dim_out):
        c[:, m] = c[:, m - 1] * betas / math.sqrt(m)
    cols[:, :, 0] = c
    for n in range(dim_in - 1):
        nxt = np.empty_like(c)
        nxt[:, 0] = 0.0
        nxt[:, 1:] = np.sqrt(np.arange(1, dim_out)) * c[:, :-1]
        nxt -= betas.conj()[:, None] * c
        c = nxt / math.sqrt(n + 1)
        cols[:, :, n + 1] = c
    return cols


def _per_sample(state: State, ops: np.ndarray, mode: Mode) -> np.ndarray:
    if isinstance(state, DensityOperator):
        return np.einsum("sia,ab,sjb->sij", ops, state.entries, ops.conj(), optimize=True)
    ones = np.ones(1)
    return np.stack([_apply_on_mode(state, op[None], ones, mode) for op in ops])


def mc_redisplacement(state: State, alpha: AmplitudeLike, noise: NoiseParams, samples: int,
                      seed: int, mode: Mode = "A", dim_out: int | None = None,
                      return_stderr: bool = False, batch: int = 2048):
    """Monte-Carlo estimate of :func:`noisy_redisplacement` from ``samples`` phase draws.

    Deterministic for a given ``seed``.  With ``return_stderr`` the per-entry
    standard error of the mean is returned as a second, complex array whose
    real and imaginary parts are the standard errors of the real and imaginary
    parts of each entry.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a = as_complex(alpha)
    var = noise.phase_variance
    rng = np.random.default_rng(seed)
    phis = rng.normal(0.0, math.sqrt(var), samples) if var > 0 else np.zeros(samples)
    betas = residual_amplitude(a, phis)
    dim_in = _mode_dim(state, mode)
    if dim_out is None:
        b_max = float(np.abs(betas).max())
        dim_out = dim_in if b_max == 0 else max(dim_in, default_dim(b_max, dim_in - 1))

    total = None
    total_sq_re = total_sq_im = None
    for start in range(0, samples, batch):
        ops = _displaced_columns(betas[start:start + batch], dim_out, dim_in)
        if return_stderr:
            per = _per_sample(state, ops, mode)
            part = per.sum(axis=0)
            sq_re = (per.real ** 2).sum(axis=0)
            sq_im = (per.imag ** 2).sum(axis=0)
            total_sq_re = sq_re if total_sq_re is None else total_sq_re + sq_re
            total_sq_im = sq_im if total_sq_im is None else total_sq_im + sq_im
        else:
            part = _apply_on_mode(state, ops, np.ones(len(ops)), mode)
        total = part if total is None else total + part

    mean = total / samples
    leak = _trace_of(state, mean, dim_out, mode)
    result = _wrap(state, mean, state.leakage + max(leak, 0.0))
    if not return_stderr:
        return result
    if samples < 2:
        return result, np.full(mean.shape, np.inf)
    var_re = (total_sq_re / samples - mean.real ** 2) * samples / (samples - 1)
    var_im = (total_sq_im / samples - mean.imag ** 2) * samples / (samples - 1)
    stderr = (np.sqrt(np.clip(var_re, 0, None)) + 1j * np.sqrt(np.clip(var_im, 0, None))) / math.sqrt(samples)
    if isinstance(state, JointState):
        stderr = stderr.reshape(result.entries.shape)
    return result, stderr
