import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbm_renorm.random_sources import (
    GaussianCoefficients,
    ModelParams,
    SeedSpec,
    initial_data,
    limit_noise_path,
    linear_solution_norm_sq,
    linear_solution_zN,
    renorm_constant,
    renormalized_truncated_data,
    sample_gaussian_batch,
    sample_gaussian_coeffs,
    white_noise,
    wiener_convolution_path,
)
from bbm_renorm.spectral import GridSpec, h_norm, semigroup_apply


def test_renorm_constant_closed_forms():
    # alpha = 0: every term is 2, so C^{-4} = 2 (2N + 1)
    for N in (0, 1, 10, 1000):
        assert renorm_constant(0.0, N) == pytest.approx((2.0 * (2 * N + 1)) ** -0.25, rel=1e-15)
    # N = 1, alpha = 1/2: 2 + 2*(2 * 2^{-1}) = 4
    assert renorm_constant(0.5, 1) == pytest.approx(4 ** -0.25, rel=1e-15)


def test_renorm_constant_monotone():
    for alpha in (0.25, 0.0, -0.5):
        vals = [renorm_constant(alpha, N) for N in (1, 10, 100, 1000)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    # alpha > 1/4: the sum converges, so C stays bounded away from 0
    assert renorm_constant(1.0, 10**6) > 0.5


def test_seed_streams_distinct_and_reproducible():
    s = SeedSpec(42)
    a = sample_gaussian_coeffs(8, s).values
    b = sample_gaussian_coeffs(8, s).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_gaussian_coeffs(8, s.member(1)).values)
    assert not np.array_equal(a, sample_gaussian_coeffs(8, s, "white-noise").values)
    with pytest.raises(ValueError):
        SeedSpec(-1)


def test_draws_hermitian_and_prefix_consistent():
    s = SeedSpec(7, 3)
    big = sample_gaussian_coeffs(20, s).values
    small = sample_gaussian_coeffs(5, s).values
    assert np.array_equal(big[15:26], small)
    assert np.allclose(big, np.conj(big[::-1]))
    assert big[20].imag == 0


def test_coefficient_moments():
    g = sample_gaussian_batch(3, 200_000, SeedSpec(1))
    se = 4 / math.sqrt(200_000)
    assert abs(np.mean(g[:, 3].real ** 2) - 1) < 4 * math.sqrt(2) / math.sqrt(200_000)
    for k in (4, 5, 6):
        assert abs(np.mean(np.abs(g[:, k]) ** 2) - 1) < 4 * se
        assert abs(np.mean(g[:, k] ** 2)) < 4 * se  # E g^2 = 0 for n != 0


def test_kind_checks():
    g = sample_gaussian_coeffs(4, SeedSpec(0), "white-noise")
    with pytest.raises(ValueError):
        initial_data(g, 0.0)
    with pytest.raises(ValueError):
        GaussianCoefficients(np.zeros(3), "nonsense")
    with pytest.raises(ValueError):
        ModelParams(0.0, 4, "unknown")


def test_initial_data_scaling():
    g = sample_gaussian_coeffs(6, SeedSpec(2))
    u = initial_data(g, 1.0)
    assert u.mode(3) == pytest.approx(g.values[9] / math.sqrt(10))
    assert np.allclose(initial_data(g, 0.0).coeffs, g.values)


def test_renormalized_data_and_linear_solution():
    g = sample_gaussian_coeffs(10, SeedSpec(3))
    d = renormalized_truncated_data(g, 0.25, 4)
    C = renorm_constant(0.25, 4)
    assert d.mode(5) == 0
    assert d.mode(2) == pytest.approx(C * g.values[12] / 5 ** 0.125)
    z = linear_solution_zN(g, 0.25, 4, 0.7)
    assert np.allclose(z.coeffs, semigroup_apply(d, 0.7).coeffs)
    with pytest.raises(ValueError):
        renormalized_truncated_data(g, 0.25, 11)


def test_white_noise_is_unscaled():
    g = sample_gaussian_coeffs(4, SeedSpec(5), "white-noise")
    assert np.array_equal(white_noise(g).coeffs, g.values)


def test_linear_norm_expectation_matches_mc():
    alpha, N, s = 0.0, 12, -0.3
    gb = sample_gaussian_batch(N, 20_000, SeedSpec(11))
    C = renorm_constant(alpha, N)
    w = (1.0 + np.arange(-N, N + 1) ** 2.0) ** (s - alpha)
    vals = C ** 2 * np.sum(w * np.abs(gb) ** 2, axis=1)
    exact = linear_solution_norm_sq(alpha, N, s)
    assert abs(vals.mean() - exact) <= 3 * vals.std() / math.sqrt(vals.size)


def test_wiener_path_ito_isometry():
    alpha, N = 0.75, 6
    times = [0.5, 1.0, 2.0]
    C2 = renorm_constant(0.25, N) ** 2
    v = np.array([np.abs(wiener_convolution_path(alpha, N, times, SeedSpec(9, i)).coeffs[:, 2 * N + np.array([1, 3, 6])]) ** 2
                  for i in range(4000)])
    for k, t in enumerate(times):
        for j, n in enumerate((1, 3, 6)):
            exact = C2 * (n / (1 + n * n)) ** 2 * (1 + n * n) ** alpha * t
            est = v[:, k, j]
            assert abs(est.mean() - exact) <= 3.5 * est.std() / math.sqrt(est.size)


def test_wiener_path_shape_and_validation():
    p = wiener_convolution_path(0.75, 4, [0.1, 0.2], SeedSpec(1))
    assert p.grid.mode_bound == 8 and p[0].is_hermitian()
    assert np.all(p.coeffs[:, 8] == 0) and np.all(p.coeffs[:, 13:] == 0)
    with pytest.raises(ValueError):
        wiener_convolution_path(0.75, 4, [0.2, 0.1], SeedSpec(1))


def test_limit_noise_covariance():
    times = [1.0, 2.0, 3.0]
    X = np.array([limit_noise_path(2, times, SeedSpec(4, i)).coeffs[:, 3] for i in range(20_000)])
    for a in range(3):
        for b in range(3):
            prod = (X[:, a] * np.conj(X[:, b])).real
            exact = min(times[a], times[b]) ** 2
            assert abs(prod.mean() - exact) <= 3.5 * prod.std() / math.sqrt(prod.size)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 30), st.floats(-1, 2))
def test_initial_data_hermitian(seed, M, alpha):
    g = sample_gaussian_coeffs(GridSpec(M), SeedSpec(seed))
    u = initial_data(g, alpha)
    assert u.is_hermitian(0.0)
    # the H^alpha norm undoes the <n>^{-alpha} weights
    assert h_norm(u, alpha) == pytest.approx(float(np.sqrt(np.sum(np.abs(g.values) ** 2))), rel=1e-12)
