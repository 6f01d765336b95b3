"""Single- and two-mode bosonic states in a truncated photon-number basis.

Conventions used throughout the package:

* Amplitudes and matrices are complex128, index ``n`` is the photon number.
* Two-mode objects are A-major: the flat index of ``|a, b>`` is ``a * dim_b + b``.
  ``JointState.tensor()`` exposes the ``(dim_a, dim_b, dim_a, dim_b)`` view.
* Beamsplitter: ``a^dag -> sqrt(t) a^dag + i sqrt(1 - t) b^dag``, i.e. the
  transmitted amplitude is real-positive and the reflected one carries ``+i``.

Constructors never renormalise silently.  Weight lost to the truncation is kept
in the ``leakage`` attribute and checked against a tolerance.
"""

from __future__ import annotations

import cmath
import math
import sys
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import TruncationError

LEAKAGE_TOL = 1e-10
HERMITIAN_TOL = 1e-9

Mode = Literal["A", "B"]


@dataclass(frozen=True)
class ComplexAmplitude:
    """Displacement amplitude stored as magnitude and phase in [0, 2*pi)."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise ValueError(f"magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "magnitude", float(self.magnitude))
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexAmplitude":
        z = _flush_subnormal(complex(z))
        return cls(abs(z), cmath.phase(z) if z != 0 else 0.0)

    @classmethod
    def from_mean_photons(cls, nbar: float, phase: float = 0.0) -> "ComplexAmplitude":
        if nbar < 0:
            raise ValueError("mean photon number must be >= 0")
        return cls(math.sqrt(nbar), phase)

    @property
    def value(self) -> complex:
        return cmath.rect(self.magnitude, self.phase)

    @property
    def mean_photons(self) -> float:
        return self.magnitude**2

    def __complex__(self) -> complex:
        return self.value


AmplitudeLike = Union[ComplexAmplitude, complex, float, int]


def _flush_subnormal(z: complex) -> complex:
    # abs() of a complex with a subnormal component raises OverflowError in CPython
    tiny = sys.float_info.min
    re = z.real if abs(z.real) >= tiny else 0.0
    im = z.imag if abs(z.imag) >= tiny else 0.0
    return complex(re, im)


def as_complex(alpha: AmplitudeLike) -> complex:
    return alpha.value if isinstance(alpha, ComplexAmplitude) else _flush_subnormal(complex(alpha))


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state of one mode; ``amplitudes[n]`` is the amplitude of ``|n>``."""

    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = _frozen_array(self.amplitudes, 1)
        if amps.size == 0:
            raise ValueError("dim must be positive")
        object.__setattr__(self, "amplitudes", amps)
        norm2 = self.norm2
        if not 0 < norm2 <= 1 + HERMITIAN_TOL:
            raise ValueError(f"squared norm {norm2} outside (0, 1]")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def to_density(self) -> "DensityOperator":
        psi = self.amplitudes
        return DensityOperator(np.outer(psi, psi.conj()), leakage=self.leakage)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed state of one mode in a ``dim``-dimensional Fock space."""

    entries: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        rho = _frozen_array(self.entries, 2)
        if rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise ValueError(f"density matrix must be square and non-empty, got {rho.shape}")
        _check_hermitian_trace(rho)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def padded(self, dim: int) -> "DensityOperator":
        """Embed in a larger truncation (zero padding)."""
        if dim < self.dim:
            raise ValueError("cannot pad to a smaller dimension")
        out = np.zeros((dim, dim), dtype=np.complex128)
        out[: self.dim, : self.dim] = self.entries
        return DensityOperator(out, leakage=self.leakage)


@dataclass(frozen=True, eq=False)
class JointState:
    """Two-mode (A x B) density operator, A-major flat indexing."""

    entries: np.ndarray
    dim_a: int
    dim_b: int
    leakage: float = 0.0

    def __post_init__(self):
        rho = _frozen_array(self.entries, 2)
        n = self.dim_a * self.dim_b
        if rho.shape != (n, n) or n == 0:
            raise ValueError(f"entries shape {rho.shape} does not match dims ({self.dim_a}, {self.dim_b})")
        _check_hermitian_trace(rho)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, leakage: float = 0.0) -> "JointState":
        da, db = tensor.shape[:2]
        return cls(np.reshape(tensor, (da * db, da * db)), da, db, leakage=leakage)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def joint_pmf(self) -> np.ndarray:
        """``P[a, b]`` = probability of a photons in A and b in B."""
        return np.real(np.diagonal(self.entries)).reshape(self.dim_a, self.dim_b).copy()


def _check_hermitian_trace(rho: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(rho).max()))
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValueError("operator is not Hermitian")
    tr = np.trace(rho).real
    if not 0 < tr <= 1 + HERMITIAN_TOL:
        raise ValueError(f"trace {tr} outside (0, 1]")


# -- constructors -----------------------------------------------------------


def default_dim(alpha: AmplitudeLike, n_max: int = 0) -> int:
    """Truncation covering six standard deviations of ``D(alpha)|n_max>``."""
    mag = abs(as_complex(alpha))
    return math.ceil((mag + math.sqrt(n_max) + 6.0) ** 2) + 4


def fock_state(n: int, dim: int | None = None) -> FockVector:
    dim = n + 1 if dim is None else dim
    if not 0 <= n < dim:
        raise ValueError(f"|{n}> does not fit in dim={dim}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[n] = 1.0
    return FockVector(amps)


def vacuum(dim: int = 1) -> FockVector:
    return fock_state(0, dim)


def coherent_state(alpha: AmplitudeLike, dim: int | None = None,
                   leakage_tol: float = LEAKAGE_TOL) -> FockVector:
    return displaced_fock(alpha, 0, dim, leakage_tol)


def displaced_fock(alpha: AmplitudeLike, n: int, dim: int | None = None,
                   leakage_tol: float = LEAKAGE_TOL) -> FockVector:
    """``D(alpha)|n>`` truncated to ``dim`` levels."""
    dim = default_dim(alpha, n) if dim is None else dim
    if dim <= n:
        raise TruncationError(f"dim={dim} cannot hold |{n}>")
    col = displacement_block(alpha, dim, n + 1)[:, n]
    leak = 1.0 - float(np.vdot(col, col).real)
    if leak > leakage_tol:
        raise TruncationError(f"D(alpha)|{n}> leaks {leak:.3g} beyond dim={dim}")
    return FockVector(col, leakage=max(leak, 0.0))


def thermal_state(nbar: float, dim: int, leakage_tol: float = LEAKAGE_TOL) -> DensityOperator:
    n = np.arange(dim)
    pmf = nbar**n / (1.0 + nbar) ** (n + 1)
    leak = 1.0 - pmf.sum()
    if leak > leakage_tol:
        raise TruncationError(f"thermal state with mean {nbar} leaks {leak:.3g} beyond dim={dim}")
    return DensityOperator(np.diag(pmf).astype(np.complex128), leakage=max(leak, 0.0))


def product_state(rho_a: DensityOperator | FockVector, rho_b: DensityOperator | FockVector) -> JointState:
    if isinstance(rho_a, FockVector):
        rho_a = rho_a.to_density()
    if isinstance(rho_b, FockVector):
        rho_b = rho_b.to_density()
    return JointState(np.kron(rho_a.entries, rho_b.entries), rho_a.dim, rho_b.dim,
                      leakage=rho_a.leakage + rho_b.leakage)


def pure_joint_state(amplitudes: np.ndarray) -> JointState:
    """Joint state from a ``(dim_a, dim_b)`` amplitude table ``psi[a, b]``."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    flat = psi.reshape(-1)
    return JointState(np.outer(flat, flat.conj()), psi.shape[0], psi.shape[1])


# -- displacement ----------------------------------------------------------


def _laguerre_table(x: float, jmax: int, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Generalised Laguerre values ``L_j^(k)(x)`` for ``j < jmax``, ``k < kmax``.

    Returned as ``(values, log_scale)`` with the true value equal to
    ``values[j, k] * exp(log_scale[j, k])``; the three-term recurrence in ``j``
    is rescaled per column so that large orders never overflow.
    """
    k = np.arange(kmax, dtype=float)
    vals = np.empty((jmax, kmax))
    logs = np.zeros((jmax, kmax))
    prev = np.zeros(kmax)
    cur = np.ones(kmax)
    scale = np.zeros(kmax)
    vals[0] = cur
    for j in range(1, jmax):
        nxt = ((2 * j - 1 + k - x) * cur - (j - 1 + k) * prev) / j
        prev, cur = cur, nxt
        big = np.maximum(np.abs(cur), np.abs(prev))
        over = big > 1e150
        if over.any():
            cur = np.where(over, cur / big, cur)
            prev = np.where(over, prev / big, prev)
            scale = scale + np.where(over, np.log(np.where(over, big, 1.0)), 0.0)
        vals[j] = cur
        logs[j] = scale
    return vals, logs


def displacement_block(alpha: AmplitudeLike, dim_out: int, dim_in: int) -> np.ndarray:
    """Exact matrix elements ``<m|D(alpha)|n>`` for ``m < dim_out``, ``n < dim_in``.

    Uses the associated-Laguerre closed form with log-factorial prefactors.
    """
    a = as_complex(alpha)
    if dim_out < 1 or dim_in < 1:
        raise ValueError("dimensions must be >= 1")
    if a == 0:
        return np.eye(dim_out, dim_in, dtype=np.complex128)
    x = abs(a) ** 2
    theta = cmath.phase(a)
    jmax = min(dim_out, dim_in)
    kmax = max(dim_out, dim_in)
    lag, lag_log = _laguerre_table(x, jmax, kmax)

    m = np.arange(dim_out)[:, None]
    n = np.arange(dim_in)[None, :]
    j = np.minimum(m, n)
    k = np.abs(m - n)
    lval = lag[j, k]
    with np.errstate(divide="ignore"):
        log_mag = (0.5 * (gammaln(j + 1) - gammaln(j + k + 1)) + k * math.log(abs(a))
                   - x / 2 + lag_log[j, k] + np.log(np.abs(lval)))
    mag = np.where(lval == 0, 0.0, np.exp(log_mag)) * np.sign(lval)
    # m >= n: alpha^k ; m < n: (-conj(alpha))^k
    phase = np.where(m >= n, np.exp(1j * k * theta), (-1.0) ** k * np.exp(-1j * k * theta))
    return mag * phase


def displacement_operator(alpha: AmplitudeLike, dim: int, leakage_tol: float = LEAKAGE_TOL,
                          checked_columns: int = 1) -> np.ndarray:
    """``dim x dim`` matrix of ``D(alpha)`` in the truncated Fock basis.

    The first ``checked_columns`` columns must retain norm ``>= 1 - leakage_tol``,
    otherwise :class:`TruncationError` is raised.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    mat = displacement_block(alpha, dim, dim)
    cols = mat[:, : min(checked_columns, dim)]
    leak = 1.0 - np.sum(np.abs(cols) ** 2, axis=0)
    if leak.max() > leakage_tol:
        raise TruncationError(
            f"dim={dim} too small for |alpha|={abs(as_complex(alpha)):.4g}: "
            f"column leakage {leak.max():.3g} > {leakage_tol:.1g}")
    return mat


def compose_displacements(alpha: AmplitudeLike, beta: AmplitudeLike) -> tuple[ComplexAmplitude, float]:
    """Net displacement of ``D(beta) D(alpha)`` (alpha applied first).

    ``D(beta) D(alpha) = exp(i * Im(beta * conj(alpha))) D(alpha + beta)``.
    """
    a, b = as_complex(alpha), as_complex(beta)
    return ComplexAmplitude.from_complex(a + b), (b * a.conjugate()).imag


# -- beamsplitter ----------------------------------------------------------


@lru_cache(maxsize=1024)
def beamsplitter_block(total: int, transmittance: float) -> np.ndarray:
    """Beamsplitter unitary on the ``total``-photon subspace.

    Rows and columns are indexed by the photon number in mode A; entry
    ``[k, a]`` is ``<k, total-k| U |a, total-a>``.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must be in [0, 1]")
    if total == 0:
        return np.ones((1, 1), dtype=np.complex128)
    theta = math.acos(math.sqrt(transmittance))
    a = np.arange(total)
    off = np.sqrt((a + 1.0) * (total - a))
    evals, evecs = eigh_tridiagonal(np.zeros(total + 1), off)
    block = (evecs * np.exp(1j * theta * evals)) @ evecs.T
    block.setflags(write=False)
    return block


def beamsplitter_apply(state: JointState, transmittance: float,
                       leakage_tol: float = LEAKAGE_TOL) -> JointState:
    """Mix modes A and B on a beamsplitter of intensity transmittance ``t``.

    Number-conserving, so each total-photon block is rotated independently.  A
    block that does not fit completely in ``(dim_a, dim_b)`` must be empty.
    """
    da, db = state.dim_a, state.dim_b
    pmf = state.joint_pmf()
    fits = min(da, db) - 1
    a_idx, b_idx = np.indices((da, db))
    tot = a_idx + b_idx
    overflow = pmf[tot > fits].sum()
    if overflow > leakage_tol:
        raise TruncationError(
            f"photon-number support reaches {int(tot[pmf > leakage_tol].max())} "
            f"but dims ({da}, {db}) only hold {fits} photons through a beamsplitter")

    u = np.zeros((da * db, da * db), dtype=np.complex128)
    for n in range(da + db - 1):
        a_vals = np.arange(max(0, n - db + 1), min(n, da - 1) + 1)
        flat = a_vals * db + (n - a_vals)
        if n <= fits:
            u[np.ix_(flat, flat)] = beamsplitter_block(n, transmittance)
        else:
            u[flat, flat] = 1.0
    out = u @ state.entries @ u.conj().T
    return JointState(0.5 * (out + out.conj().T), da, db, leakage=state.leakage)


# -- statistics ------------------------------------------------------------


def photon_pmf(state: DensityOperator | FockVector) -> np.ndarray:
    if isinstance(state, FockVector):
        return np.abs(state.amplitudes) ** 2
    return np.clip(np.real(np.diagonal(state.entries)), 0.0, None)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    leakage: float = 0.0
    warning: str | None = field(default=None, compare=False)

    def __iter__(self):
        return iter((self.mean, self.variance))


def mean_and_variance(pmf, leakage_tol: float = LEAKAGE_TOL) -> Moments:
    """Mean and variance of a photon-number distribution.

    Moments are those of the truncated distribution renormalised to unit mass;
    the missing mass is reported as ``leakage`` and, above tolerance, as a warning.
    """
    p = np.asarray(pmf, dtype=float)
    total = p.sum()
    if total <= 0:
        raise ValueError("pmf has no mass")
    leak = max(1.0 - total, 0.0)
    n = np.arange(p.size)
    mean = float(n @ p / total)
    var = float(((n - mean) ** 2) @ p / total)
    msg = None
    if leak > leakage_tol:
        msg = f"pmf leakage {leak:.3g} exceeds tolerance {leakage_tol:.1g}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return Moments(mean, var, leak, msg)


def partial_trace(state: JointState, keep: Mode) -> DensityOperator:
    t = state.tensor()
    if keep == "A":
        red = np.einsum("ibjb->ij", t)
    elif keep == "B":
        red = np.einsum("aiaj->ij", t)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityOperator(0.5 * (red + red.conj().T), leakage=state.leakage)
