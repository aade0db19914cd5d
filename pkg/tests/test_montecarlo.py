"""Euler simulation, signature estimation, and the quadrature oracle."""

import math

import numpy as np
import pytest

from sigcalc.montecarlo import (
    McEstimate,
    SimConfig,
    estimate,
    gauss_hermite_expectation,
    simulate_1d,
    simulate_sigsde,
)
from sigcalc.operators import black_scholes_spec, brownian_spec
from sigcalc.powerseries import brownian_model, jacobi_model
from sigcalc.tensor import TensorCoeffs, all_words, word_index


def test_estimate_and_within():
    samples = np.array([1.0, 2.0, 3.0, 4.0])
    est = estimate(samples)
    assert est.mean == 2.5
    assert abs(est.std_error - np.std(samples, ddof=1) / 2.0) < 1e-15
    assert est.within(2.5 + 2.0 * est.std_error, n_se=3)
    assert not est.within(2.5 + 4.0 * est.std_error, n_se=3)


def test_se_scaling(rng):
    xs = rng.normal(size=40000)
    small = estimate(xs[:10000])
    big = estimate(xs)
    assert big.std_error == pytest.approx(small.std_error / 2.0, rel=0.1)


def test_simulation_is_seed_deterministic():
    model = brownian_model(4)
    cfg = SimConfig(n_paths=5000, dt=0.01, seed=42)
    a = simulate_1d(model, cfg, T=1.0)
    b = simulate_1d(model, cfg, T=1.0)
    assert np.array_equal(a.finals, b.finals)
    c = simulate_1d(model, SimConfig(n_paths=5000, dt=0.01, seed=43), T=1.0)
    assert not np.array_equal(a.finals, c.finals)


def test_brownian_moments():
    model = brownian_model(4)
    cfg = SimConfig(n_paths=200_000, dt=0.002, seed=1)
    res = simulate_1d(model, cfg, T=1.0)
    mean = estimate(res.finals)
    var = estimate(res.finals**2)
    assert mean.within(0.0)
    assert var.within(1.0)
    assert res.clamped_steps == 0


def test_jacobi_simulation_martingale_and_range():
    model = jacobi_model(4, x0=0.3)
    cfg = SimConfig(n_paths=100_000, dt=0.001, seed=3)
    res = simulate_1d(model, cfg, T=1.0)
    est = estimate(res.finals)
    assert est.within(0.3, n_se=4)
    # Euler overshoots the boundary by at most an O(sqrt(dt)) step; the
    # clamping of the squared diffusion keeps paths from wandering further
    slack = 10.0 * math.sqrt(cfg.dt)
    assert res.finals.min() >= -slack and res.finals.max() <= 1.0 + slack
    assert res.clamped_steps > 0


def test_black_scholes_lognormal_moments():
    sigma, s0, T = 0.2, 1.0, 1.0
    spec = black_scholes_spec(sigma=sigma, s0=s0, N=2)
    cfg = SimConfig(n_paths=100_000, dt=0.001, seed=5)
    price_idx = word_index((2,), d=2)
    res = simulate_sigsde(
        spec, cfg, T=T, N_sig=2, functional=lambda sig: s0 + sig[:, price_idx]
    )
    # the price is a martingale: E S_T = s0, both via the path state and via
    # the level-1 signature functional
    assert res.functional.within(s0, n_se=4)
    direct = estimate(res.finals[:, 1])
    assert direct.within(s0, n_se=4)
    # the lognormal second moment s0^2 exp(sigma^2 T), within Euler bias
    m2 = estimate(res.finals[:, 1] ** 2)
    ref2 = s0**2 * math.exp(sigma**2 * T)
    assert abs(m2.mean.real - ref2) < 4.0 * m2.std_error + 1e-3


def test_expected_brownian_signature_vs_closed_form():
    d, N, T = 2, 3, 1.0
    spec = brownian_spec(d, N)
    cfg = SimConfig(n_paths=60_000, dt=0.002, seed=7)
    res = simulate_sigsde(spec, cfg, T=T, N_sig=N)
    gen = TensorCoeffs.zero(d, N)
    for k in range(d):
        gen[(k + 1, k + 1)] = T / 2.0
    expect = gen.concat_exp()
    for i, w in enumerate(all_words(d, N)):
        se = max(res.sig_se[i], 1e-12)
        err = abs(res.sig_mean[i] - expect[w])
        assert err < 4.0 * se + 5e-3, (w, err, se)


def test_gauss_hermite_closed_forms():
    # moments and mgf of a centred Gaussian
    var = 0.7
    assert abs(gauss_hermite_expectation(lambda z: z**2, var) - var) < 1e-12
    assert abs(gauss_hermite_expectation(lambda z: z**3, var)) < 1e-12
    for theta in (-1.0, 0.5, 2.0):
        got = gauss_hermite_expectation(lambda z: np.exp(theta * z), var)
        assert abs(got - math.exp(theta**2 * var / 2.0)) < 1e-10


def test_gauss_hermite_zero_variance():
    assert abs(gauss_hermite_expectation(lambda z: np.cos(z), 0.0) - 1.0) < 1e-14


def test_gauss_hermite_vs_mc():
    var = 1.3
    f = lambda z: np.exp(-(z**4) / 24.0)
    quad = gauss_hermite_expectation(f, var).real
    rng = np.random.default_rng(11)
    samples = f(rng.normal(scale=math.sqrt(var), size=400_000))
    est = estimate(samples)
    assert est.within(quad, n_se=4)
