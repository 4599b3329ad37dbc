import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from bbm_renorm import picard
from bbm_renorm.experiments import cosine, duhamel_quadrature
from bbm_renorm.random_sources import (
    SeedSpec,
    renorm_constant,
    sample_gaussian_batch,
    sample_gaussian_coeffs,
    wiener_convolution_path,
)
from bbm_renorm.spectral import GridSpec, SpectralField, Trajectory, bracket, pairing, phi_symbol

COS = cosine()


# ---- phase integral

def test_phase_integral_resonant_and_hand_value():
    for n2 in (-3, 0, 5):
        assert picard.phase_integral(0, n2, 0.8) == 0.8
    t = 1.3
    hand = (1 - np.exp(-3j * t / 5)) * 5 / (3j)
    assert picard.phase_integral(1, 1, t) == pytest.approx(hand, abs=1e-15)


@pytest.mark.parametrize("n1,n2,t", [(1, 1, 1.3), (2, -5, 0.4), (7, 3, 2.0), (-4, -4, 3.1)])
def test_phase_integral_vs_quadrature(n1, n2, t):
    d = phi_symbol(n1 + n2) - phi_symbol(n1) - phi_symbol(n2)
    re = quad(lambda s: np.exp(-s * d).real, 0, t, epsabs=1e-13, epsrel=1e-13)[0]
    im = quad(lambda s: np.exp(-s * d).imag, 0, t, epsabs=1e-13, epsrel=1e-13)[0]
    assert picard.phase_integral(n1, n2, t) == pytest.approx(re + 1j * im, abs=1e-10)


def test_phase_integral_taylor_branch_is_continuous():
    # |t Delta| straddling the 1e-6 threshold
    n1, n2 = 1, 1
    d = abs(phi_symbol(2) - 2 * phi_symbol(1))
    for t in (0.99e-6 / d, 1.01e-6 / d):
        x = -t * (phi_symbol(2) - 2 * phi_symbol(1))
        exact = t * sum(x ** k / math.factorial(k + 1) for k in range(8))  # power series of (e^x - 1) / x
        assert abs(picard.phase_integral(n1, n2, t) - exact) <= 1e-12 * t


@settings(max_examples=200)
@given(st.integers(-500, 500), st.integers(-500, 500), st.floats(0, 50))
def test_phase_integral_bounded_by_t(n1, n2, t):
    assert abs(picard.phase_integral(n1, n2, t)) <= t * (1 + 1e-12) + 1e-300


# ---- second iterate

def test_second_iterate_zero_time_and_grid_check():
    g = sample_gaussian_coeffs(4, SeedSpec(1))
    assert not np.any(picard.second_iterate(g, 0.25, 4, 0.0).coeffs)
    with pytest.raises(ValueError):
        picard.second_iterate(g, 0.25, 4, 1.0, mode_bound=7)


@pytest.mark.parametrize("N", [1, 2, 5, 8])
def test_second_iterate_matches_duhamel_quadrature(N):
    g = sample_gaussian_coeffs(N, SeedSpec(100 + N))
    for alpha, t in ((0.25, 1.0), (0.0, 0.45)):
        Z = picard.second_iterate(g, alpha, N, t).coeffs
        assert np.max(np.abs(Z - duhamel_quadrature(g, alpha, N, t))) <= 1e-9


def test_second_iterate_structure():
    g = sample_gaussian_coeffs(6, SeedSpec(2))
    Z = picard.second_iterate(g, 0.1, 6, 0.9)
    assert Z.mode(0) == 0 and Z.is_hermitian(1e-13)
    K = picard.iterate_kernel(0.1, 6, 0.9)
    assert np.allclose(K, K.T, atol=1e-15)
    n = np.arange(-6, 7)
    assert np.all(K[(n[:, None] + n[None, :]) == 0] == 0)


def test_batched_pairings_match_single_iterates():
    gb = sample_gaussian_batch(5, 4, SeedSpec(3))
    batch = picard.second_iterate_pairings(gb, 0.25, 5, 0.7, COS)
    single = [pairing(picard.second_iterate(g, 0.25, 5, 0.7), COS) for g in gb]
    assert np.allclose(batch, single, atol=1e-14)


def test_divergent_iterate_scaling():
    g = sample_gaussian_coeffs(5, SeedSpec(4))
    Z = picard.second_iterate(g, 0.0, 5, 1.0)
    F = picard.divergent_iterate(g, 0.0, 5, 1.0)
    assert np.array_equal(F.coeffs, (Z * renorm_constant(0.0, 5) ** -2).coeffs)


# ---- covariance

def wick_covariance(alpha, N, t1, t2, n):
    """E[Z(t1,n) conj Z(t2,n)] from the kernel and the two Wick pairings."""
    K1, K2 = picard.iterate_kernel(alpha, N, t1), picard.iterate_kernel(alpha, N, t2)
    total = 0j
    for n1 in range(-N, N + 1):
        n2 = n - n1
        if abs(n2) <= N:
            a, b = n1 + N, n2 + N
            total += K1[a, b] * np.conj(K2[a, b] + K2[b, a])
    return total


@pytest.mark.parametrize("alpha,N,t1,t2,n", [(0.0, 4, 1.0, 1.0, 1), (0.25, 5, 0.3, 1.2, 2), (-0.5, 3, 2.0, 0.7, -3), (0.25, 6, 1.0, 1.0, 12)])
def test_covariance_finite_matches_wick_sum(alpha, N, t1, t2, n):
    assert picard.covariance_finite(alpha, N, t1, t2, n) == pytest.approx(wick_covariance(alpha, N, t1, t2, n), rel=1e-12, abs=1e-16)


def test_covariance_finite_basic_properties():
    assert picard.covariance_finite(0.0, 8, 0.0, 1.0, 1) == 0
    assert picard.covariance_finite(0.0, 8, 1.0, 1.0, 0) == 0
    c12 = picard.covariance_finite(0.25, 8, 0.4, 1.1, 3)
    c21 = picard.covariance_finite(0.25, 8, 1.1, 0.4, 3)
    assert c12 == pytest.approx(np.conj(c21), rel=1e-13)
    c = picard.covariance_finite(0.25, 8, 1.1, 1.1, 3)
    assert abs(c.imag) < 1e-15 and c.real > 0


def test_covariance_finite_vs_monte_carlo():
    N, alpha, t = 16, 0.0, 1.0
    x = picard.second_iterate_pairings(sample_gaussian_batch(N, 10_000, SeedSpec(5)), alpha, N, t, COS)
    exact = picard.covariance_finite_pair(alpha, N, t, t, COS, COS)
    se = np.std(x ** 2, ddof=1) / math.sqrt(x.size)
    assert abs(np.mean(x ** 2) - exact) <= 3 * se


def test_covariance_limit_values():
    assert picard.covariance_limit(math.pi, math.pi, 1) == pytest.approx(2.0)
    t = 0.7
    assert picard.covariance_limit(t, t, 3).real == pytest.approx(2 - 2 * math.cos(t * 3 / 10))
    assert picard.covariance_limit(0.3, 1.7, -2) == pytest.approx(np.conj(picard.covariance_limit(0.3, 1.7, 2)))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_finite_covariance_approaches_limit(n):
    fin = picard.covariance_finite(0.0, 1024, 1.0, 1.0, n)
    lim = picard.covariance_limit(1.0, 1.0, n)
    assert abs(fin - lim) / abs(lim) <= 0.02


@pytest.mark.parametrize("alpha", [0.0, 0.25])
def test_limit_gap_monotone(alpha):
    gaps = [abs(picard.covariance_finite(alpha, N, 1.0, 1.0, 1) - picard.covariance_limit(1.0, 1.0, 1))
            for N in (64, 128, 256, 512, 1024)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    if alpha == 0.0:
        # O(1/N) gap: doubling N halves it
        assert gaps[-1] / gaps[-2] == pytest.approx(0.5, abs=0.02)


def test_covariance_spectral_decay():
    N, t = 32, 1.0
    ratios = [picard.covariance_finite(0.0, N, t, t, n).real / (t * t / (1 + n * n)) for n in range(1, 2 * N + 1)]
    assert max(ratios) < 1.0  # a single constant K covers all n <= 2N


# ---- c_alpha

def test_c_alpha_counting_closed_form():
    for N in (1, 7, 100):
        assert picard.c_alpha_partial(0.0, N, 1) == pytest.approx(2 * N / (2 * N + 1), rel=1e-14)
    assert abs(picard.c_alpha_partial(0.0, 10 ** 4, 1) - (1 - 1 / 20001)) <= 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.0, -0.5])
def test_c_alpha_monotone_and_n_independent(alpha):
    Ns = (100, 1000, 10000, 100000)
    c1 = [picard.c_alpha_partial(alpha, N, 1) for N in Ns]
    c2 = [picard.c_alpha_partial(alpha, N, 2) for N in Ns]
    for c in (c1, c2):
        assert all(b > a for a, b in zip(c, c[1:])) and c[-1] < 1
    gaps = [abs(a - b) for a, b in zip(c1, c2)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_c_alpha_errors():
    with pytest.raises(ValueError):
        picard.c_alpha_partial(0.0, 10, 0)
    with pytest.raises(ValueError):
        picard.c_alpha_partial(0.0, 2, 3)


# ---- contraction norm

def brute_force_contraction_sq(alpha, N, t, psi):
    """sum_{n1,n2} |sum_m f(n1, m) f(n2, -m)|^2 with f = C^2 Y, by explicit loops."""
    Y = picard.contraction_table(alpha, N, t, psi)
    f = renorm_constant(alpha, N) ** 2 * Y
    total = 0.0
    for a in range(2 * N + 1):
        for b in range(2 * N + 1):
            s = 0j
            for m in range(-N, N + 1):
                s += f[a, m + N] * f[b, -m + N]
            total += abs(s) ** 2
    return total


def test_contraction_matches_brute_force():
    for alpha in (0.25, 0.0):
        got = picard.contraction_norm(alpha, 4, 1.0, COS, squared=True)
        assert got == pytest.approx(brute_force_contraction_sq(alpha, 4, 1.0, COS), rel=1e-10)


def test_contraction_zero_test_function():
    assert picard.contraction_norm(0.25, 6, 1.0, SpectralField.zeros(GridSpec(2))) == 0.0


def test_contraction_decreasing():
    vals = [picard.contraction_norm(0.25, N, 1.0, COS) for N in (8, 16, 32, 64, 128)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("N", [2, 4, 7])
def test_quadratic_form_links_variance_and_contraction(N):
    lam = np.linalg.eigvalsh(picard.quadratic_form_matrix(0.25, N, 1.0, COS))
    # 2 tr Q^2 is the variance; tr Q^4 is the squared contraction norm
    assert 2 * np.sum(lam ** 2) == pytest.approx(picard.covariance_finite_pair(0.25, N, 1.0, 1.0, COS, COS), rel=1e-12)
    assert np.sum(lam ** 4) == pytest.approx(picard.contraction_norm(0.25, N, 1.0, COS, squared=True), rel=1e-10)


def test_quadratic_form_reproduces_pairing():
    N = 4
    rng = np.random.default_rng(0)
    x = rng.standard_normal(2 * N + 1)
    g = np.empty(2 * N + 1, dtype=complex)
    g[N] = x[0]
    g[N + 1 :] = (x[1::2] + 1j * x[2::2]) / math.sqrt(2)
    g[:N] = np.conj(g[N + 1 :][::-1])
    Q = picard.quadratic_form_matrix(0.25, N, 1.0, COS)
    assert x @ Q @ x == pytest.approx(pairing(picard.second_iterate(g, 0.25, N, 1.0), COS), abs=1e-14)


# ---- limit convolution

def test_limit_convolution():
    zeta = SpectralField.from_modes(GridSpec(3), {1: 0.6 - 0.2j, 3: 1.0})
    assert not np.any(picard.limit_convolution(zeta, 0.0).coeffs)
    Z = picard.limit_convolution(zeta, math.pi)
    assert abs(Z.mode(1) / zeta.mode(1)) ** 2 == pytest.approx(2.0)
    # d/dt Z - phi Z + phi zeta = 0 by central differences
    t, h = 0.9, 1e-4
    dZ = (picard.limit_convolution(zeta, t + h).coeffs - picard.limit_convolution(zeta, t - h).coeffs) / (2 * h)
    ph = np.array([phi_symbol(n) for n in range(-3, 4)])
    resid = dZ - ph * picard.limit_convolution(zeta, t).coeffs + ph * zeta.coeffs
    assert np.max(np.abs(resid)) <= 1e-8


# ---- appendix objects

def test_appendix_quadratic_basic():
    path = wiener_convolution_path(0.75, 6, [0.5, 1.0], SeedSpec(1))
    Y = picard.appendix_quadratic(path, 1)
    assert Y.mode(0) == 0
    zero = Trajectory(GridSpec(12), [0.0, 1.0], np.zeros((2, 25), dtype=complex))
    assert not np.any(picard.appendix_quadratic(zero, 1).coeffs)
    with pytest.raises(ValueError):
        picard.appendix_quadratic(wiener_convolution_path(0.75, 6, [1.0], SeedSpec(1), mode_bound=8), 0)


def test_appendix_limit_covariance():
    assert picard.appendix_limit_covariance(2.0, 3.0, COS, COS) == pytest.approx(2.0)
    assert picard.appendix_limit_covariance(0.0, 3.0, COS, COS) == 0.0
    psi2 = SpectralField.from_modes(GridSpec(2), {1: 0.3, 2: 0.1})
    assert picard.appendix_limit_covariance(1.0, 2.5, COS, psi2) == pytest.approx(picard.appendix_limit_covariance(2.5, 1.0, psi2, COS))


def test_appendix_covariance_finite_vs_monte_carlo():
    N, a = 8, 0.75
    X = []
    for i in range(6000):
        p = wiener_convolution_path(a, N, [1.0, 2.0], SeedSpec(21, i))
        X.append([pairing(picard.appendix_quadratic(p, k), COS) for k in (0, 1)])
    X = np.array(X)
    for (i, j, t1, t2) in ((0, 0, 1.0, 1.0), (0, 1, 1.0, 2.0)):
        prod = X[:, i] * X[:, j]
        exact = picard.appendix_covariance_finite(a, N, t1, t2, 1).real / 2
        assert abs(prod.mean() - exact) <= 3.5 * prod.std() / math.sqrt(prod.size)


def test_appendix_covariance_finite_tends_to_limit_slowly():
    vals = [picard.appendix_covariance_finite(0.75, N, 1.0, 1.0, 1).real / 2 for N in (32, 128, 512, 2048)]
    assert all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] < 0.5


def test_appendix_second_iterate_quadrature():
    times = np.linspace(0.0, 1.0, 257)
    path = wiener_convolution_path(0.75, 8, times[1:], SeedSpec(2))
    full = Trajectory(path.grid, times, np.vstack([np.zeros((1, path.grid.size)), path.coeffs]))
    assert not np.any(picard.appendix_second_iterate(full, 0).coeffs)
    bad = Trajectory(full.grid, np.r_[times[:3], 1.5], full.coeffs[:4])
    with pytest.raises(ValueError):
        picard.appendix_second_iterate(bad, 3)


def test_appendix_second_iterate_dt_halving_rate():
    # the integrand is only Hoelder-1/2 in time along a path, so trapezoid gaps
    # between successive halvings shrink like dt in root mean square
    times = np.linspace(0.0, 1.0, 257)
    sq = np.zeros(3)
    for k in range(40):
        path = wiener_convolution_path(0.75, 8, times[1:], SeedSpec(2, k))
        full = Trajectory(path.grid, times, np.vstack([np.zeros((1, path.grid.size)), path.coeffs]))
        res = {s: picard.appendix_second_iterate(Trajectory(full.grid, times[::s], full.coeffs[::s]), 256 // s).coeffs
               for s in (1, 2, 4, 8)}
        sq += [np.linalg.norm(res[2 * s] - res[s]) ** 2 for s in (4, 2, 1)]
    d = np.sqrt(sq)
    orders = np.log2(d[:-1] / d[1:])
    assert np.all((orders > 0.8) & (orders < 1.3))


def test_covariance_rows():
    r = picard.covariance_rows(0.25, 16, 1.0, 1.0, 1, "finite", 0.5 + 0.1j)
    assert r == {"alpha": 0.25, "N": 16, "t1": 1.0, "t2": 1.0, "n": 1, "re": 0.5, "im": 0.1, "kind": "finite"}
