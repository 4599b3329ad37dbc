"""Seeded samplers for every random object of the model.

All Gaussian families are Hermitian: ``g[-n] = conj(g[n])`` with ``g[0]``
a real standard normal and, for n != 0, ``g[n] = (a + i b)/sqrt(2)`` so
that E|g_n|^2 = 1 and E[g_n^2] = 0.

Seeding goes through :class:`numpy.random.SeedSequence` with a spawn key
``(stream_id, substream)``, so every ensemble member and every substream
(initial data, noise, Brownian increments, ...) owns an independent PCG64
stream regardless of execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .spectral import (
    GridSpec,
    SpectralField,
    Trajectory,
    bracket,
    dirichlet_project,
    mode_indices,
    phi_array,
    resize_coeffs,
    semigroup_apply,
)

KINDS = ("initial-data", "white-noise", "brownian-increment", "limit-noise", "auxiliary")
_SUBSTREAM = {k: i for i, k in enumerate(KINDS)}

VARIANTS = ("data-renormalized", "weak-nonlinearity", "noise-renormalized-appendix", "weak-appendix")


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be >= 0")

    def generator(self, kind: str) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, _SUBSTREAM[kind]))
        return np.random.Generator(np.random.PCG64(ss))

    def member(self, stream_id: int) -> "SeedSpec":
        return replace(self, stream_id=stream_id)


@dataclass(frozen=True, eq=False)
class GaussianCoefficients:
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        v = np.array(self.values, dtype=complex, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def mode_bound(self) -> int:
        return (self.values.shape[-1] - 1) // 2


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    truncation: int
    variant: str = "data-renormalized"
    appendix_alpha: float = 0.75

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.truncation < 0:
            raise ValueError("truncation must be >= 0")


@lru_cache(maxsize=4096)
def renorm_constant(alpha: float, N: int) -> float:
    """(sum_{|n|<=N} 2 <n>^{-4 alpha})^{-1/4}, summed with exact rounding (fsum)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    n = np.arange(1, N + 1, dtype=float)
    terms = 4.0 * (1.0 + n * n) ** (-2.0 * alpha)
    total = math.fsum(terms.tolist()) + 2.0
    return total ** -0.25


def _hermitian_from_normals(x: np.ndarray, M: int) -> np.ndarray:
    """x[..., 0] -> g_0; x[..., 2k-1], x[..., 2k] -> real/imag parts of g_k."""
    out = np.empty(x.shape[:-1] + (2 * M + 1,), dtype=complex)
    pos = (x[..., 1::2] + 1j * x[..., 2::2]) / np.sqrt(2.0)
    out[..., M] = x[..., 0]
    out[..., M + 1 :] = pos
    out[..., :M] = np.conj(pos[..., ::-1])
    return out


def _mode_bound(grid) -> int:
    return grid.mode_bound if isinstance(grid, GridSpec) else int(grid)


def sample_gaussian_coeffs(grid, seed: SeedSpec, kind: str = "initial-data") -> GaussianCoefficients:
    """One Hermitian draw on |n| <= M.

    Draws are prefix-consistent: the modes |n| <= K of a draw with bound M
    equal the draw with bound K from the same seed.
    """
    M = _mode_bound(grid)
    x = seed.generator(kind).standard_normal(2 * M + 1)
    return GaussianCoefficients(_hermitian_from_normals(x, M), kind)


def sample_gaussian_batch(M: int, size: int, seed: SeedSpec, kind: str = "initial-data") -> np.ndarray:
    """(size, 2M+1) Hermitian draws from a single stream, for vectorized Monte Carlo."""
    x = seed.generator(kind).standard_normal((size, 2 * M + 1))
    return _hermitian_from_normals(x, M)


def circular_normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric complex normals with E|z|^2 = 1."""
    x = rng.standard_normal(tuple(shape) + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, GaussianCoefficients) else np.asarray(g)


def initial_data(g: GaussianCoefficients, alpha: float) -> SpectralField:
    """u_0 with coefficients g_n / <n>^alpha."""
    if isinstance(g, GaussianCoefficients) and g.kind != "initial-data":
        raise ValueError(f"expected initial-data coefficients, got {g.kind}")
    v = _values(g)
    M = (v.size - 1) // 2
    return SpectralField(GridSpec(M), v * bracket(mode_indices(M)) ** (-alpha))


def renormalized_truncated_data(g: GaussianCoefficients, alpha: float, N: int) -> SpectralField:
    """C_{alpha,N} P_N u_0, the initial condition of the renormalized problem."""
    u0 = initial_data(g, alpha)
    if N > u0.mode_bound:
        raise ValueError(f"N={N} exceeds the coefficient bound {u0.mode_bound}")
    return dirichlet_project(u0, N) * renorm_constant(alpha, N)


def linear_solution_zN(g: GaussianCoefficients, alpha: float, N: int, t: float) -> SpectralField:
    return semigroup_apply(renormalized_truncated_data(g, alpha, N), t)


def white_noise(g: GaussianCoefficients) -> SpectralField:
    if isinstance(g, GaussianCoefficients) and g.kind != "white-noise":
        raise ValueError(f"expected white-noise coefficients, got {g.kind}")
    v = _values(g)
    return SpectralField(GridSpec((v.size - 1) // 2), v)


def _wiener_rates(alpha_app: float, N: int) -> np.ndarray:
    """Per-mode diffusion rate |phi(n)| <n>^alpha for n = 1..N."""
    n = np.arange(1, N + 1, dtype=float)
    return n / (1.0 + n * n) * (1.0 + n * n) ** (alpha_app / 2.0)


def wiener_convolution_path(
    alpha_app: float,
    N: int,
    times,
    seed: SeedSpec,
    mode_bound: int | None = None,
) -> Trajectory:
    """Joint samples of the renormalized stochastic convolution at ``times``.

    z_N(t, n) = -C_{1-alpha,N} exp(t phi(n)) I_n(t) with independent
    circular Gaussian increments of I_n of variance |phi(n)|^2 <n>^{2 alpha} dt.
    Exact in law at the grid times. ``mode_bound`` (default ``2N``) sets
    the output grid so that squares of the path are representable.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing and start at t >= 0")
    M = 2 * N if mode_bound is None else mode_bound
    if M < N or M < 1:
        raise ValueError("mode_bound must be >= N")
    dt = np.diff(np.concatenate([[0.0], t]))
    eta = circular_normals(seed.generator("brownian-increment"), (t.size, N))
    incr = eta * np.sqrt(dt)[:, None] * _wiener_rates(alpha_app, N)[None, :]
    I = np.cumsum(incr, axis=0)
    C = renorm_constant(1.0 - alpha_app, N)
    half = np.zeros((t.size, M + 1), dtype=complex)
    phase = np.exp(np.outer(t, phi_array(N)[N + 1 :]))
    half[:, 1 : N + 1] = -C * phase * I
    full = np.empty((t.size, 2 * M + 1), dtype=complex)
    full[:, M:] = half
    full[:, :M] = np.conj(half[:, :0:-1])
    return Trajectory(GridSpec(M), t, full)


def limit_noise_path(M: int, times, seed: SeedSpec) -> Trajectory:
    """Gaussian process with E[<x(t),psi1><x(s),psi2>] = (t^s)^2 sum_{n!=0} conj(psi1^) psi2^.

    Sampled as x(t, n) = int_0^t sqrt(2 t') dB_n(t'); increments over
    [a, b] have variance b^2 - a^2. Mode 0 is identically zero.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing and start at t >= 0")
    t2 = np.concatenate([[0.0], t]) ** 2
    eta = circular_normals(seed.generator("limit-noise"), (t.size, M))
    pos = np.cumsum(eta * np.sqrt(np.diff(t2))[:, None], axis=0)
    full = np.zeros((t.size, 2 * M + 1), dtype=complex)
    full[:, M + 1 :] = pos
    full[:, :M] = np.conj(pos[:, ::-1])
    return Trajectory(GridSpec(M), t, full)


def embed(g: GaussianCoefficients, M: int) -> np.ndarray:
    return resize_coeffs(g.values, M)


def linear_solution_norm_sq(alpha: float, N: int, s: float) -> float:
    """E||z_N(t)||_{H^s}^2 = C_{alpha,N}^2 sum_{|n|<=N} <n>^{2s - 2 alpha} (the flow is unitary)."""
    n = np.arange(1, N + 1, dtype=float)
    terms = 2.0 * (1.0 + n * n) ** (s - alpha)
    return renorm_constant(alpha, N) ** 2 * (1.0 + math.fsum(terms.tolist()))
