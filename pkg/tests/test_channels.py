import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import comb

from micromacro.channels import (
    DetectorParams,
    LossParams,
    NoiseParams,
    PhaseConvention,
    click_probability,
    expected_noise_photons,
    loss_channel,
    mc_redisplacement,
    no_click_weights,
    noisy_redisplacement,
    residual_amplitude,
)
from micromacro.errors import ConvergenceError
from micromacro.fock import (
    DensityOperator,
    JointState,
    coherent_state,
    fock_state,
    mean_and_variance,
    photon_pmf,
    product_state,
    thermal_state,
    vacuum,
)


def _kraus_loss(rho, eta):
    """Loss via explicit Kraus operators ``A_k = sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|``."""
    dim = rho.shape[0]
    out = np.zeros_like(rho)
    for k in range(dim):
        a = np.zeros((dim, dim))
        for n in range(k, dim):
            a[n - k, n] = math.sqrt(comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
        out += a @ rho @ a.T
    return out


def _random_density(dim, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.81, 1.0])
def test_loss_matches_kraus_oracle(eta):
    rho = _random_density(7, 3)
    ours = loss_channel(DensityOperator(rho), LossParams(eta)).entries
    assert np.abs(ours - _kraus_loss(rho, eta)).max() < 1e-13


def test_loss_on_fock_state_is_binomial():
    out = photon_pmf(loss_channel(fock_state(4, 5).to_density(), LossParams(0.3)))
    n = np.arange(5)
    assert np.allclose(out, comb(4, n) * 0.3**n * 0.7 ** (4 - n), atol=1e-14)


def test_loss_keeps_coherent_state_coherent():
    rho = coherent_state(1.2, 30).to_density()
    out = loss_channel(rho, LossParams(0.25))
    ref = coherent_state(1.2 * 0.5, 30).to_density()
    assert np.abs(out.entries - ref.entries).max() < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.integers(0, 10_000), st.integers(1, 9))
def test_loss_preserves_trace(eta, seed, dim):
    rho = DensityOperator(_random_density(dim, seed))
    out = loss_channel(rho, LossParams(eta))
    assert abs(out.trace - rho.trace) <= 1e-10
    assert out.min_eigenvalue() > -1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 10_000))
def test_loss_composes_multiplicatively(e1, e2, seed):
    rho = DensityOperator(_random_density(6, seed))
    two = loss_channel(loss_channel(rho, LossParams(e1)), LossParams(e2))
    one = loss_channel(rho, LossParams(e1 * e2))
    assert np.abs(two.entries - one.entries).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.sampled_from(["A", "B"]), st.integers(0, 10_000))
def test_joint_loss_preserves_trace_and_marginal(eta, mode, seed):
    ra, rb = _random_density(4, seed), _random_density(3, seed + 1)
    joint = product_state(DensityOperator(ra), DensityOperator(rb))
    out = loss_channel(joint, LossParams(eta), mode=mode)
    assert abs(out.trace - 1.0) <= 1e-10
    t = out.tensor()
    if mode == "A":
        assert np.abs(np.einsum("ibjb->ij", t) - _kraus_loss(ra, eta)).max() < 1e-12
    else:
        assert np.abs(np.einsum("aiaj->ij", t) - _kraus_loss(rb, eta)).max() < 1e-12


def test_loss_params_validate():
    with pytest.raises(ValueError):
        LossParams(1.5)
    with pytest.raises(ValueError):
        DetectorParams(efficiency=-0.1)


def test_click_probability_of_fock_state():
    det = DetectorParams(0.25, 1e-3)
    p = click_probability(fock_state(2, 3).to_density(), det)
    assert p == pytest.approx(1 - (1 - 1e-3) * 0.75**2, abs=1e-15)
    assert no_click_weights(3, DetectorParams())[1:].max() == 0.0


def test_click_probability_of_coherent_state():
    det = DetectorParams(0.4, 0.0)
    p = click_probability(coherent_state(1.5, 40).to_density(), det)
    assert p == pytest.approx(1 - math.exp(-0.4 * 2.25), abs=1e-12)


def test_noise_params_validate():
    with pytest.raises(ValueError):
        NoiseParams(quadrature_order=20)
    with pytest.raises(ValueError):
        NoiseParams(epsilon=-1)
    assert NoiseParams(1e-4).phase_variance == pytest.approx(2e-4)
    assert NoiseParams(1e-4, PhaseConvention.ONE_EPSILON).phase_variance == pytest.approx(1e-4)


def test_residual_amplitude_vanishes_without_error():
    assert residual_amplitude(3.0, 0.0) == 0
    assert residual_amplitude(1.0, math.pi) == pytest.approx(2.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 30), st.floats(0, 2 * math.pi))
def test_zero_noise_is_perfect_undo(mag, phase):
    alpha = mag * np.exp(1j * phase)
    rho = thermal_state(0.3, 12, leakage_tol=1e-5)
    out = noisy_redisplacement(rho, alpha, NoiseParams(0.0))
    assert np.abs(out.entries - rho.entries).max() <= 1e-9


@pytest.mark.parametrize("convention,mu", [(PhaseConvention.ONE_EPSILON, 6600),
                                           (PhaseConvention.TWO_EPSILON, 3333)])
def test_noise_photons_on_vacuum(convention, mu):
    noise = NoiseParams(1.5e-4, convention)
    out = noisy_redisplacement(vacuum(1).to_density(), math.sqrt(mu), noise)
    mean, _ = mean_and_variance(photon_pmf(out))
    assert mean == pytest.approx(expected_noise_photons(math.sqrt(mu), noise), rel=1e-8)
    assert mean == pytest.approx(1.0, abs=0.1)


def test_noise_adds_to_single_photon():
    noise = NoiseParams(1.5e-4)
    out = noisy_redisplacement(fock_state(1, 2).to_density(), 10.0, noise)
    assert out.trace == pytest.approx(1.0, abs=1e-10)
    mean, _ = mean_and_variance(photon_pmf(out))
    # each node displaces |1> by beta, adding |beta|^2 on average
    assert mean - 1.0 == pytest.approx(expected_noise_photons(10.0, noise), rel=1e-8)


def test_noisy_undo_on_joint_state_only_touches_mode():
    joint = product_state(fock_state(1, 2), thermal_state(0.1, 6, leakage_tol=1e-5))
    out = noisy_redisplacement(joint, 20.0, NoiseParams(1e-4), mode="A")
    assert isinstance(out, JointState)
    tb = np.einsum("aiaj->ij", out.tensor())
    assert np.abs(tb - thermal_state(0.1, 6, leakage_tol=1e-5).entries).max() < 1e-10


def test_quadrature_refines_at_large_phase_spread():
    # |alpha| sigma ~ 1 is where a fixed 21-node rule is visibly wrong
    noise = NoiseParams(5e-3)
    out = noisy_redisplacement(vacuum(1).to_density(), 10.0, noise)
    mean, _ = mean_and_variance(photon_pmf(out))
    assert mean == pytest.approx(expected_noise_photons(10.0, noise), rel=1e-8)


def test_convergence_error_when_order_cap_reached():
    # |alpha| sigma ~ 5: the phase average oscillates faster than 351 nodes resolve
    noise = NoiseParams(0.2, quadrature_order=175)
    with pytest.raises(ConvergenceError):
        noisy_redisplacement(vacuum(1).to_density(), 8.0, noise)


def test_quadrature_order_capped():
    with pytest.raises(ValueError):
        NoiseParams(quadrature_order=401)


def test_monte_carlo_is_seed_deterministic():
    rho = fock_state(1, 2).to_density()
    a = mc_redisplacement(rho, 5.0, NoiseParams(1e-3), 500, seed=11)
    b = mc_redisplacement(rho, 5.0, NoiseParams(1e-3), 500, seed=11)
    c = mc_redisplacement(rho, 5.0, NoiseParams(1e-3), 500, seed=12)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


@pytest.mark.parametrize("seed", [1, 2])
def test_monte_carlo_agrees_with_quadrature(seed):
    rho = fock_state(1, 2).to_density()
    alpha, noise = 10.0, NoiseParams(1.5e-4)
    quad = noisy_redisplacement(rho, alpha, noise)
    mc, se = mc_redisplacement(rho, alpha, noise, 100_000, seed, dim_out=quad.dim,
                               return_stderr=True)
    d = mc.entries - quad.entries
    assert np.all(np.abs(d.real) <= 3 * se.real + 1e-9)
    assert np.all(np.abs(d.imag) <= 3 * se.imag + 1e-9)
