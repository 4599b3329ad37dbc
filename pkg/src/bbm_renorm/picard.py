"""Closed-form second Picard iterates, their covariances, and chaos-kernel norms.

Everything here is exact up to floating-point summation: time integrals of
products of exponentials are carried out analytically through
:func:`phase_integral`, and Gaussian expectations are reduced by Wick's
rule to single sums over the convolution line n1 + n2 = n.
"""
from __future__ import annotations

import math

import numpy as np

from .random_sources import GaussianCoefficients, renorm_constant
from .spectral import (
    GridSpec,
    SpectralField,
    Trajectory,
    bracket,
    mode_indices,
    phi_array,
    phi_symbol,
    product_coeffs,
    resize_coeffs,
)

_RESONANCE = 1e-6


def phase_integral(n1, n2, t):
    """J_{n1,n2}(t) = int_0^t exp(-t' (phi(n1+n2) - phi(n1) - phi(n2))) dt'.

    (1 - exp(-t Delta)) / Delta, evaluated with expm1 to avoid cancellation,
    and a four-term Taylor series when |t * Delta| < 1e-6. |J| <= t.
    """
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    t = np.asarray(t, dtype=float)
    delta = phi_symbol(n1 + n2) - phi_symbol(n1) - phi_symbol(n2)
    x = t * delta
    small = np.abs(x) < _RESONANCE
    safe = np.where(small, 1.0, delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = -np.expm1(-x) / safe
    series = t * (1.0 - x / 2.0 + x * x / 6.0 - x ** 3 / 24.0)
    out = np.where(small, series, exact)
    return complex(out) if out.ndim == 0 else out


def _weights(N: int, alpha: float) -> np.ndarray:
    return bracket(mode_indices(N)) ** (-alpha)


def iterate_kernel(alpha: float, N: int, t: float) -> np.ndarray:
    """Matrix K[n1, n2] with Z_N(t, n1+n2) = sum K[n1, n2] g_{n1} g_{n2}."""
    n = mode_indices(N)
    n1 = n[:, None]
    n2 = n[None, :]
    s = n1 + n2
    ph = phi_symbol(s)
    w = _weights(N, alpha)
    C2 = renorm_constant(alpha, N) ** 2
    return C2 * np.exp(t * ph) * ph * phase_integral(n1, n2, t) * np.outer(w, w)


def _antidiagonal_sums(P: np.ndarray, N: int) -> np.ndarray:
    """out[k] = sum_{i+j=k} P[i, j] for k = 0..4N, i.e. mode n = k - 2N."""
    size = 2 * N + 1
    idx = (np.arange(size)[:, None] + np.arange(size)[None, :]).ravel()
    re = np.bincount(idx, weights=P.real.ravel(), minlength=4 * N + 1)
    im = np.bincount(idx, weights=P.imag.ravel(), minlength=4 * N + 1)
    return re + 1j * im


def _g_values(g) -> np.ndarray:
    return g.values if isinstance(g, GaussianCoefficients) else np.asarray(g)


def second_iterate(g: GaussianCoefficients, alpha: float, N: int, t: float, mode_bound: int | None = None) -> SpectralField:
    """Z_N(t) from the closed-form coefficient sum; O(N^2).

    The output grid (default ``2N``) must hold all modes |n| <= 2N.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    M = 2 * N if mode_bound is None else mode_bound
    if M < 2 * N:
        raise ValueError(f"output grid M={M} cannot hold modes up to 2N={2 * N}")
    gv = resize_coeffs(_g_values(g), N)
    K = iterate_kernel(alpha, N, t)
    Z = _antidiagonal_sums(K * np.outer(gv, gv), N)
    Z[2 * N] = 0.0
    M = max(M, 1)
    return SpectralField(GridSpec(M), resize_coeffs(Z, M))


def divergent_iterate(g: GaussianCoefficients, alpha: float, N: int, t: float, mode_bound: int | None = None) -> SpectralField:
    """Un-renormalized truncated iterate: C_{alpha,N}^{-2} Z_N(t)."""
    return second_iterate(g, alpha, N, t, mode_bound) * renorm_constant(alpha, N) ** -2


def second_iterate_modes(g_batch: np.ndarray, alpha: float, N: int, t: float, modes) -> np.ndarray:
    """Z_N(t, n) for each n in ``modes`` and each row of ``g_batch``; O(S N) per mode."""
    g_batch = resize_coeffs(np.atleast_2d(g_batch), N)
    C2 = renorm_constant(alpha, N) ** 2
    w = _weights(N, alpha)
    out = np.zeros((g_batch.shape[0], len(modes)), dtype=complex)
    for j, n in enumerate(modes):
        if n == 0:
            continue
        n1 = np.arange(max(-N, n - N), min(N, n + N) + 1)
        n2 = n - n1
        coef = C2 * np.exp(t * phi_symbol(n)) * phi_symbol(n) * phase_integral(n1, n2, t) * w[n1 + N] * w[n2 + N]
        out[:, j] = (g_batch[:, n1 + N] * g_batch[:, n2 + N]) @ coef
    return out


def second_iterate_pairings(g_batch: np.ndarray, alpha: float, N: int, t: float, psi: SpectralField) -> np.ndarray:
    """<Z_N(t), psi> for each row of ``g_batch``."""
    support = [int(n) for n in psi.modes if n != 0 and abs(n) <= 2 * N and psi.mode(int(n)) != 0]
    if not support:
        return np.zeros(np.atleast_2d(g_batch).shape[0])
    Zn = second_iterate_modes(g_batch, alpha, N, t, support)
    weights = np.conj([psi.mode(n) for n in support])
    return np.real(Zn @ weights)


def limit_convolution(zeta: SpectralField, t: float) -> SpectralField:
    """Z(t) = -int_0^t S(t-t') phi(D) zeta dt' = zeta^(n) (1 - exp(t phi(n)))."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return SpectralField(zeta.grid, zeta.coeffs * (1.0 - np.exp(t * phi_array(zeta.mode_bound))))


def _A(r: float, n: int, n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    return np.exp(r * phi_symbol(n)) * phase_integral(n1, n2, r)


def covariance_finite(alpha: float, N: int, t1: float, t2: float, n: int) -> complex:
    """E[Z_N(t1, n) conj(Z_N(t2, n))], O(N) per call.

    2 C^4 |phi(n)|^2 sum_{n1+n2=n, |ni|<=N} A(t1) conj(A(t2)) / (<n1><n2>)^{2 alpha}
    with A(r) = exp(r phi(n)) J_{n1,n2}(r).
    """
    if n == 0 or abs(n) > 2 * N:
        return 0j
    n1 = np.arange(max(-N, n - N), min(N, n + N) + 1)
    n2 = n - n1
    w = (bracket(n1) * bracket(n2)) ** (-2.0 * alpha)
    s = np.sum(_A(t1, n, n1, n2) * np.conj(_A(t2, n, n1, n2)) * w)
    C4 = renorm_constant(alpha, N) ** 4
    return complex(2.0 * C4 * abs(phi_symbol(n)) ** 2 * s)


def covariance_limit(t1: float, t2: float, n: int) -> complex:
    """E[Z(t1, n) conj(Z(t2, n))] = (1 - exp(t1 phi(n))) (1 - exp(-t2 phi(n)))."""
    p = phi_symbol(n)
    return complex((1.0 - np.exp(t1 * p)) * (1.0 - np.exp(-t2 * p)))


def pair_covariance(cov_n, psi1: SpectralField, psi2: SpectralField) -> float:
    """sum_n cov_n(n) conj(psi1^(n)) psi2^(n) over the common support."""
    total = 0j
    for n in psi1.modes:
        a, b = psi1.mode(int(n)), psi2.mode(int(n))
        if n != 0 and a != 0 and b != 0:
            total += cov_n(int(n)) * np.conj(a) * b
    return float(total.real)


def covariance_finite_pair(alpha, N, t1, t2, psi1, psi2) -> float:
    return pair_covariance(lambda n: covariance_finite(alpha, N, t1, t2, n), psi1, psi2)


def covariance_limit_pair(t1, t2, psi1, psi2) -> float:
    return pair_covariance(lambda n: covariance_limit(t1, t2, n), psi1, psi2)


def c_alpha_partial(alpha: float, N: int, n: int) -> float:
    """C_{alpha,N}^4 sum_{n1+n2=n, |ni|<=N} 2 / (<n1><n2>)^{2 alpha}; tends to 1."""
    if n == 0:
        raise ValueError("n must be non-zero")
    if N < abs(n):
        raise ValueError("need N >= |n|")
    n1 = np.arange(n - N, N + 1) if n > 0 else np.arange(-N, N + n + 1)
    n2 = n - n1
    terms = 2.0 * (bracket(n1) * bracket(n2)) ** (-2.0 * alpha)
    return renorm_constant(alpha, N) ** 4 * math.fsum(terms.tolist())


def contraction_table(alpha: float, N: int, t: float, psi: SpectralField) -> np.ndarray:
    """Y[n, m] = exp(t phi(n+m)) phi(n+m) conj(psi^(n+m)) J_{n,m}(t) / (<n><m>)^alpha."""
    n = mode_indices(N)
    s = n[:, None] + n[None, :]
    Mp = psi.mode_bound
    psi_s = np.where(np.abs(s) <= Mp, psi.coeffs[np.clip(s + Mp, 0, 2 * Mp)], 0)
    ph = phi_symbol(s)
    w = _weights(N, alpha)
    return np.exp(t * ph) * ph * np.conj(psi_s) * phase_integral(n[:, None], n[None, :], t) * np.outer(w, w)


def contraction_norm(alpha: float, N: int, t: float, psi: SpectralField, squared: bool = False) -> float:
    """L^2 norm of the one-fold self-contraction of the chaos kernel of <Z_N(t), psi>.

    Built as the Gram product G = Y Y^H of :func:`contraction_table`, so
    the O(N^3) work is a single dense matrix product:
    ||f (x)_1 f||^2 = C^8 sum_{n1,n2} |G[n1, n2]|^2.
    """
    Y = contraction_table(alpha, N, t, psi)
    G = Y @ Y.conj().T
    sq = renorm_constant(alpha, N) ** 8 * float(np.sum(np.abs(G) ** 2))
    return sq if squared else math.sqrt(sq)


def quadratic_form_matrix(alpha: float, N: int, t: float, psi: SpectralField) -> np.ndarray:
    """Real symmetric Q with <Z_N(t), psi> = x^T Q x, x the 2N+1 underlying real normals.

    Ordering of x matches the samplers: x[0] = g_0, x[2k-1], x[2k] the
    scaled real/imaginary parts of g_k.
    """
    size = 2 * N + 1
    L = np.zeros((size, size), dtype=complex)
    L[N, 0] = 1.0
    r = 1.0 / math.sqrt(2.0)
    for k in range(1, N + 1):
        L[N + k, 2 * k - 1] = r
        L[N + k, 2 * k] = 1j * r
        L[N - k, 2 * k - 1] = r
        L[N - k, 2 * k] = -1j * r
    K = iterate_kernel(alpha, N, t)
    n = mode_indices(N)
    s = n[:, None] + n[None, :]
    Mp = psi.mode_bound
    psi_s = np.where((np.abs(s) <= Mp) & (s != 0), psi.coeffs[np.clip(s + Mp, 0, 2 * Mp)], 0)
    W = K * np.conj(psi_s)
    Q = np.real(L.T @ W @ L)
    return (Q + Q.T) / 2.0


def quadratic_form_moments(alpha: float, N: int, t: float, psi: SpectralField) -> dict:
    """Exact mean, variance and excess kurtosis of <Z_N(t), psi> from the eigenvalues of Q."""
    lam = np.linalg.eigvalsh(quadratic_form_matrix(alpha, N, t, psi))
    s2 = float(np.sum(lam ** 2))
    return {
        "mean": float(np.sum(lam)),
        "variance": 2.0 * s2,
        "excess_kurtosis": 12.0 * float(np.sum(lam ** 4)) / s2 ** 2 if s2 > 0 else float("nan"),
    }


def _highest_mode(traj: Trajectory) -> int:
    M = traj.grid.mode_bound
    nz = np.nonzero(np.any(traj.coeffs != 0, axis=0))[0]
    return int(np.max(np.abs(nz - M))) if nz.size else 0


def appendix_quadratic(path: Trajectory, k: int) -> SpectralField:
    """Y_N(t_k) = -P_{!=0}(z_N(t_k)^2)."""
    M = path.grid.mode_bound
    if 2 * _highest_mode(path) > M:
        raise ValueError("path grid too small to hold the square of the sampled modes")
    sq = -product_coeffs(path.coeffs[k])
    sq[M] = 0.0
    return SpectralField(path.grid, sq)


def appendix_second_iterate(path: Trajectory, t_index: int) -> SpectralField:
    """Z_N(t_k) = int_0^{t_k} S(t_k - t') phi(D) z_N(t')^2 dt' by the trapezoidal rule.

    The path must start at t = 0 on a uniform grid.
    """
    t = path.times
    M = path.grid.mode_bound
    if 2 * _highest_mode(path) > M:
        raise ValueError("path grid too small to hold the square of the sampled modes")
    if t_index == 0:
        return SpectralField.zeros(path.grid)
    if t[0] != 0.0:
        raise ValueError("path must start at t = 0")
    h = np.diff(t[: t_index + 1])
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("trapezoidal quadrature needs a uniform time grid")
    sq = product_coeffs(path.coeffs[: t_index + 1])
    ph = phi_array(M)
    integrand = np.exp(np.outer(t[t_index] - t[: t_index + 1], ph)) * ph * sq
    w = np.full(t_index + 1, h[0])
    w[0] = w[-1] = h[0] / 2.0
    return SpectralField(path.grid, w @ integrand)


def appendix_limit_covariance(t1: float, t2: float, psi1: SpectralField, psi2: SpectralField) -> float:
    """(t1 ^ t2)^2 sum_{n != 0} conj(psi1^(n)) psi2^(n)."""
    return pair_covariance(lambda n: min(t1, t2) ** 2, psi1, psi2)


def appendix_covariance_finite(alpha_app: float, N: int, t1: float, t2: float, n: int) -> complex:
    """Exact E[Y_N(t1, n) conj(Y_N(t2, n))] at finite N.

    2 C_{1-alpha,N}^4 (t1 ^ t2)^2 sum_{n1+n2=n} exp((t1-t2)(phi(n1)+phi(n2))) w(n1) w(n2),
    with w(n) = |phi(n)|^2 <n>^{2 alpha}.
    """
    if n == 0 or abs(n) > 2 * N:
        return 0j
    n1 = np.arange(max(-N, n - N), min(N, n + N) + 1)
    n2 = n - n1

    def w(k):
        return np.abs(phi_symbol(k)) ** 2 * (1.0 + k.astype(float) ** 2) ** alpha_app

    s = np.sum(np.exp((t1 - t2) * (phi_symbol(n1) + phi_symbol(n2))) * w(n1) * w(n2))
    C4 = renorm_constant(1.0 - alpha_app, N) ** 4
    return complex(2.0 * C4 * min(t1, t2) ** 2 * s)


def covariance_rows(alpha, N, t1, t2, n, kind, value) -> dict:
    """One CSV row of a covariance report."""
    value = complex(value)
    return {"alpha": alpha, "N": N, "t1": t1, "t2": t2, "n": n,
            "re": value.real, "im": value.imag, "kind": kind}
