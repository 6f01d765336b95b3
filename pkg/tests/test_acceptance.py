"""Acceptance checks, one per criterion, at the stated tolerances.

Each check returns ``(passed, detail)``.  Under pytest every criterion is a
test and a PASS/FAIL line is printed in the terminal summary; run this file
directly (``python tests/test_acceptance.py``) for the same lines on stdout.
"""

from __future__ import annotations

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from micromacro.channels import (
    LossParams,
    NoiseParams,
    PhaseConvention,
    loss_channel,
    mc_redisplacement,
    noisy_redisplacement,
)
from micromacro.config import load_config
from micromacro.experiment.coarse import coarse_grained_distinguishability
from micromacro.experiment.hom import hom_inputs_from_sources, hom_visibility
from micromacro.experiment.pipeline import (
    LossStage,
    concurrence_lower_bound,
    factor_out_loss,
    sweep_alpha,
)
from micromacro.experiment.source import SourceParams, g2_zero, heralded_source_state, unheralded_signal
from micromacro.fock import (
    DensityOperator,
    default_dim,
    displaced_fock,
    displacement_operator,
    fock_state,
    mean_and_variance,
    photon_pmf,
    vacuum,
)

RESULTS: list[str] = []


@lru_cache(maxsize=None)
def _paper_sweep():
    cfg = load_config("paper")
    start = time.perf_counter()
    result = sweep_alpha(cfg.experiment, cfg.grid)
    return result, time.perf_counter() - start


def _r_squared(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return 1.0 - (resid @ resid) / ((y - y.mean()) @ (y - y.mean()))


def criterion_1():
    c = concurrence_lower_bound(0.966, 0.9719, 1.313e-2, 1.492e-2, 1.0e-5)
    return abs(c - 0.0208) <= 2e-4, f"C = {c:.5f} (target 0.0208 +- 0.0002)"


def criterion_2():
    start = time.perf_counter()
    worst = 0.0
    for mu in (1, 4, 9, 25):
        mean, var = mean_and_variance(photon_pmf(displaced_fock(math.sqrt(mu), 1)))
        worst = max(worst, abs(mean - (mu + 1)), abs(var - 3 * mu))
    elapsed = time.perf_counter() - start
    return worst <= 1e-6 and elapsed < 1.0, f"max deviation {worst:.2e}, {elapsed:.2f} s"


def criterion_3():
    _, hsp = heralded_source_state(SourceParams(pair_prob=0.01, signal_coupling=0.5))
    v50 = hom_visibility(hom_inputs_from_sources(hsp, 0.05, 0.5))
    v90 = hom_visibility(hom_inputs_from_sources(hsp, 0.05, 0.1, hsp_transmission=0.5))
    model_ok = abs(v50 - 0.80) <= 0.01 and abs(v90 - 0.22) <= 0.01
    # measured 82(5) % and 23(4) %: inside model band plus experimental error
    measured_ok = abs(0.82 - v50) <= 0.05 + 0.01 and abs(0.23 - v90) <= 0.04 + 0.01
    return model_ok and measured_ok, f"V(50:50) = {v50:.4f}, V(90:10) = {v90:.4f}"


def criterion_4():
    start = time.perf_counter()
    p = coarse_grained_distinguishability(1000.0)
    elapsed = time.perf_counter() - start
    return abs(p - 0.74) <= 0.01 and elapsed < 5.0, f"P_guess(1000) = {p:.4f}, {elapsed:.3f} s"


def _noise_gain(mu, convention):
    noise = NoiseParams(1.5e-4, convention)
    out = noisy_redisplacement(vacuum(1).to_density(), math.sqrt(mu), noise)
    return mean_and_variance(photon_pmf(out)).mean


def criterion_5():
    start = time.perf_counter()
    g_one = _noise_gain(6600, PhaseConvention.ONE_EPSILON)
    g_two = _noise_gain(3333, PhaseConvention.TWO_EPSILON)
    lo = _noise_gain(3333 * 0.9, PhaseConvention.TWO_EPSILON)
    hi = _noise_gain(3333 * 1.1, PhaseConvention.TWO_EPSILON)
    elapsed = time.perf_counter() - start
    ok = abs(g_one - 1.0) <= 0.1 and abs(g_two - 1.0) <= 0.1 and lo < 1.0 < hi and elapsed < 1.0
    return ok, (f"gain {g_one:.4f} at 6600 (variance eps), {g_two:.4f} at 3333 (variance 2 eps), "
                f"one-photon point bracketed in 3333 +- 10 %: {lo < 1.0 < hi}, {elapsed:.2f} s")


def criterion_6():
    result, elapsed = _paper_sweep()
    c = result.column("concurrence_bound")
    mono = bool(np.all(np.diff(c) < 0))
    zc = result.zero_crossing
    ok = mono and zc is not None and 350 <= zc <= 750 and elapsed < 120 and len(c) >= 20
    return ok, f"{len(c)} points, monotone={mono}, zero crossing {zc:.1f}, {elapsed:.1f} s"


def criterion_7():
    params = load_config("paper").experiment
    start = time.perf_counter()
    det = factor_out_loss(params, LossStage.DETECTION_AND_TRANSMISSION, [100.0]).points[0][1]
    pre = factor_out_loss(params, LossStage.ALSO_PRE_DISPLACEMENT, [100.0]).points[0][1]
    elapsed = time.perf_counter() - start
    c1, c2 = det.concurrence_bound, pre.concurrence_bound
    ok = abs(c1 - 0.2) <= 0.05 and abs(c2 - 0.4) <= 0.1 and elapsed < 30
    return ok, (f"C(100) = {c1:.3f} without detection/transmission loss (target 0.2 +- 0.05), "
                f"{c2:.3f} also without coupling loss (target 0.4 +- 0.1), {elapsed:.1f} s")


def criterion_8():
    result, _ = _paper_sweep()
    x = result.alpha_sq
    p01 = result.column("p01")
    spread = (p01.max() - p01.min()) / p01.mean()
    r10 = _r_squared(x, result.column("p10"))
    r11 = _r_squared(x, result.column("p11"))
    ok = spread < 0.05 and r10 >= 0.99 and r11 >= 0.99
    return ok, f"p01 relative spread {spread:.2%}, R^2(p10) = {r10:.5f}, R^2(p11) = {r11:.5f}"


def criterion_9():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    # trace preservation of the loss channel
    trace_err = 0.0
    for _ in range(50):
        dim = int(rng.integers(1, 12))
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = g @ g.conj().T
        rho = DensityOperator(rho / np.trace(rho).real)
        out = loss_channel(rho, LossParams(float(rng.uniform())))
        trace_err = max(trace_err, abs(out.trace - rho.trace))
    # unitarity on the columns the truncation supports
    unit_err = 0.0
    for _ in range(50):
        alpha = complex(*rng.uniform(-6, 6, 2))
        cols = displacement_operator(alpha, default_dim(alpha, 4), checked_columns=5)[:, :5]
        unit_err = max(unit_err, float(np.abs(cols.conj().T @ cols - np.eye(5)).max()))
    # quadrature against Monte Carlo at 1e5 samples
    rho = fock_state(1, 2).to_density()
    noise = NoiseParams(1.5e-4)
    quad = noisy_redisplacement(rho, 10.0, noise)
    mc, se = mc_redisplacement(rho, 10.0, noise, 100_000, seed=9, dim_out=quad.dim, return_stderr=True)
    d = mc.entries - quad.entries
    mc_ok = bool(np.all(np.abs(d.real) <= 3 * se.real + 1e-9) and np.all(np.abs(d.imag) <= 3 * se.imag + 1e-9))
    # epsilon = 0 undoes the displacement exactly
    undo_err = 0.0
    for _ in range(20):
        alpha = complex(*rng.uniform(-30, 30, 2))
        state = displaced_fock(0.3, 2, dim=12, leakage_tol=1e-6).to_density()
        out = noisy_redisplacement(state, alpha, NoiseParams(0.0))
        undo_err = max(undo_err, float(np.abs(out.entries - state.entries).max()))
    elapsed = time.perf_counter() - start
    ok = trace_err <= 1e-10 and unit_err <= 1e-8 and mc_ok and undo_err <= 1e-9 and elapsed < 300
    return ok, (f"trace {trace_err:.1e}, unitarity {unit_err:.1e}, MC within 3 SE: {mc_ok}, "
                f"undo {undo_err:.1e}, {elapsed:.1f} s")


def criterion_10():
    g2 = g2_zero(unheralded_signal(SourceParams(pair_prob=0.01, max_pairs=6)))
    return abs(g2 - 2.0) <= 0.02, f"g2(0) = {g2:.4f}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _record(index, check):
    ok, detail = check()
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {index}: {detail}"
    RESULTS.append(line)
    return ok, line


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1))
def test_criterion(index):
    ok, line = _record(index, CRITERIA[index - 1])
    print(line)
    assert ok, line


if __name__ == "__main__":
    for i, check in enumerate(CRITERIA, start=1):
        print(_record(i, check)[1])
