"""Time integration for BBM and its renormalized, weakly interacting, forced and
stochastically forced relatives.

All solvers work on dense coefficient arrays (modes -M..M). The deterministic
problems use classical RK4: the multiplier is bounded by 1/2 so nothing is
stiff. The noise-driven problems use an integrating-factor Euler-Maruyama
step whose noise increments are sampled exactly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .picard import limit_convolution
from .random_sources import (
    GaussianCoefficients,
    SeedSpec,
    circular_normals,
    initial_data,
    limit_noise_path,
    renorm_constant,
    renormalized_truncated_data,
)
from .spectral import (
    GridSpec,
    SpectralField,
    Trajectory,
    bracket,
    coeffs_to_grid,
    dirichlet_project,
    h_norm,
    mode_indices,
    phi_array,
    product_coeffs,
    resize_coeffs,
    semigroup_apply,
)

TAIL_WARN = 1e-8
TAIL_FAIL = 1e-4

# sup|v| <= K ||v||_{H^1} on the circle with K^2 = sum_n 1/(1+n^2) = pi coth(pi)
SOBOLEV_LINF = math.sqrt(math.pi / math.tanh(math.pi))
GRONWALL_C = 4.0 * SOBOLEV_LINF


class SolverError(RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class TailEnergyError(SolverError):
    pass


class TailEnergyWarning(UserWarning):
    pass


class ForcingProvider:
    """Time-indexed forcing returning coefficient arrays on a fixed grid.

    Either closed form (``fn(t) -> SpectralField``, exact at any t) or a
    sampled :class:`Trajectory` looked up at the nearest node.
    """

    def __init__(self, grid: GridSpec, fn: Callable | None = None, path: Trajectory | None = None):
        if (fn is None) == (path is None):
            raise ValueError("give exactly one of fn or path")
        self.grid = grid
        self._fn = fn
        self._path = path
        if path is not None:
            self._coeffs = resize_coeffs(path.coeffs, grid.mode_bound)

    @classmethod
    def closed_form(cls, fn: Callable, grid: GridSpec) -> "ForcingProvider":
        return cls(grid, fn=fn)

    @classmethod
    def sampled(cls, path: Trajectory, grid: GridSpec | None = None) -> "ForcingProvider":
        return cls(grid or path.grid, path=path)

    @classmethod
    def zero(cls, grid: GridSpec) -> "ForcingProvider":
        z = np.zeros(grid.size, dtype=complex)
        return cls(grid, fn=lambda t: z)

    @classmethod
    def limit_convolution(cls, zeta: SpectralField, grid: GridSpec) -> "ForcingProvider":
        """t -> Z(t) = zeta^(n)(1 - exp(t phi(n))), evaluated exactly."""
        zc = resize_coeffs(zeta.coeffs, grid.mode_bound)
        ph = phi_array(grid.mode_bound)
        return cls(grid, fn=lambda t: zc * (1.0 - np.exp(t * ph)))

    @property
    def is_sampled(self) -> bool:
        return self._path is not None

    def coeffs(self, t: float) -> np.ndarray:
        if self._path is None:
            v = self._fn(t)
            v = v.coeffs if isinstance(v, SpectralField) else np.asarray(v)
            return resize_coeffs(v, self.grid.mode_bound) if v.shape[-1] != self.grid.size else v
        k = int(np.argmin(np.abs(self._path.times - t)))
        return self._coeffs[k]

    def __call__(self, t: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs(t))


@dataclass(frozen=True)
class SolveConfig:
    dt: float
    T: float
    grid: GridSpec
    record_times: tuple = ()
    monitors: tuple = ("mean", "h1", "tail")

    def __post_init__(self):
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")
        if abs(self.T / self.dt - round(self.T / self.dt)) > 1e-6:
            raise ValueError("dt must divide T")
        rt = tuple(float(t) for t in self.record_times) or (0.0, float(self.T))
        for t in rt:
            if t < 0 or t > self.T * (1 + 1e-12) or abs(t / self.dt - round(t / self.dt)) > 1e-6:
                raise ValueError(f"record time {t} is not a step time in [0, T]")
        if any(b <= a for a, b in zip(rt, rt[1:])):
            raise ValueError("record times must be strictly increasing")
        object.__setattr__(self, "record_times", rt)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def record_indices(self) -> np.ndarray:
        return np.array([int(round(t / self.dt)) for t in self.record_times])

    @classmethod
    def every_step(cls, dt: float, T: float, grid: GridSpec, stride: int = 1, **kw) -> "SolveConfig":
        n = int(round(T / dt))
        return cls(dt, T, grid, tuple(k * dt for k in range(0, n + 1, stride)), **kw)


def _bbm_rhs_coeffs(c: np.ndarray, coefficient: float, ph: np.ndarray) -> np.ndarray:
    return ph * c + coefficient * (ph * product_coeffs(c))


def bbm_rhs(u: SpectralField, nonlinearity_coefficient: float = 1.0) -> SpectralField:
    """phi(D) u + coefficient * phi(D)(u^2) with the dealiased square."""
    return SpectralField(u.grid, _bbm_rhs_coeffs(u.coeffs, nonlinearity_coefficient, phi_array(u.mode_bound)))


def make_bbm_rhs(M: int, coefficient: float = 1.0):
    """Array RHS ``(c, f) -> phi c + coef phi P((c + f)^2)``; f is ignored when None."""
    ph = phi_array(M)

    def rhs(c, f=None):
        if f is None:
            return _bbm_rhs_coeffs(c, coefficient, ph)
        return ph * c + coefficient * (ph * product_coeffs(c + f))

    return rhs


def rk4_integrate(u0: SpectralField, rhs, cfg: SolveConfig, forcing: ForcingProvider | None = None) -> Trajectory:
    """Classical RK4 on the coefficient system; ``rhs(c, f)`` with f the forcing at the stage time."""
    M = cfg.grid.mode_bound
    c = resize_coeffs(u0.coeffs, M)
    dt = cfg.dt
    rec = cfg.record_indices()
    out = np.empty((rec.size, 2 * M + 1), dtype=complex)
    j = 0
    if rec[0] == 0:
        out[0] = c
        j = 1
    f0 = fh = f1 = None
    for k in range(cfg.n_steps):
        t = k * dt
        if forcing is not None:
            f0 = forcing.coeffs(t)
            fh = forcing.coeffs(t + dt / 2)
            f1 = forcing.coeffs(t + dt)
        k1 = rhs(c, f0)
        k2 = rhs(c + (dt / 2) * k1, fh)
        k3 = rhs(c + (dt / 2) * k2, fh)
        k4 = rhs(c + dt * k3, f1)
        c = c + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(c)):
            raise SolverError("non-finite coefficients", step=k + 1)
        if j < rec.size and rec[j] == k + 1:
            out[j] = c
            j += 1
    return Trajectory(cfg.grid, rec * dt, out)


def solve_bbm(u0: SpectralField, cfg: SolveConfig) -> Trajectory:
    return rk4_integrate(u0, make_bbm_rhs(cfg.grid.mode_bound, 1.0), cfg)


def tail_fraction(c: np.ndarray) -> np.ndarray:
    """Energy in the top octave |n| > M/2 over the energy in all nonzero modes."""
    M = (c.shape[-1] - 1) // 2
    n = np.abs(mode_indices(M))
    e = np.abs(c) ** 2
    total = np.sum(e[..., n != 0], axis=-1)
    top = np.sum(e[..., n > M // 2], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, top / np.where(total > 0, total, 1.0), 0.0)


def _check_tail(traj: Trajectory) -> float:
    frac = float(np.max(tail_fraction(traj.coeffs)))
    if frac > TAIL_FAIL:
        raise TailEnergyError(f"tail energy fraction {frac:.3e} exceeds {TAIL_FAIL:g}; increase the grid")
    if frac > TAIL_WARN:
        warnings.warn(f"tail energy fraction {frac:.3e} exceeds {TAIL_WARN:g}", TailEnergyWarning, stacklevel=3)
    return frac


def _check_grid(cfg: SolveConfig, N: int):
    M = cfg.grid.mode_bound
    if M < N:
        raise ValueError(f"solver grid M={M} is below the truncation N={N}")
    if M < 4 * N:
        warnings.warn(f"solver grid M={M} is below the recommended 4N={4 * N}", TailEnergyWarning, stacklevel=3)


def solve_renormalized(g: GaussianCoefficients, alpha: float, N: int, cfg: SolveConfig) -> Trajectory:
    """BBM from C_{alpha,N} P_N u_0, with tail-energy monitoring."""
    _check_grid(cfg, N)
    traj = solve_bbm(renormalized_truncated_data(g, alpha, N), cfg)
    if "tail" in cfg.monitors:
        _check_tail(traj)
    return traj


def solve_weak(g: GaussianCoefficients, alpha: float, N: int, cfg: SolveConfig, coefficient: float | None = None) -> Trajectory:
    """BBM with nonlinearity damped by C_{alpha,N}^2 from P_N u_0 (no amplitude factor).

    ``coefficient`` overrides the damping (e.g. 0 for the linear flow).
    """
    _check_grid(cfg, N)
    u0 = dirichlet_project(initial_data(g, alpha), N)
    coef = renorm_constant(alpha, N) ** 2 if coefficient is None else coefficient
    traj = rk4_integrate(u0, make_bbm_rhs(cfg.grid.mode_bound, coef), cfg)
    if "tail" in cfg.monitors:
        _check_tail(traj)
    return traj


def solve_perturbed(v0: SpectralField, f: ForcingProvider | None, cfg: SolveConfig) -> Trajectory:
    """d/dt v = phi v + phi((v + f(t))^2)."""
    if f is not None and f.grid.mode_bound != cfg.grid.mode_bound:
        raise ValueError("forcing must live on the solver grid")
    return rk4_integrate(v0, make_bbm_rhs(cfg.grid.mode_bound, 1.0), cfg, forcing=f)


@dataclass
class LimitSolution:
    u: Trajectory
    Z: Trajectory
    v: Trajectory


def solve_limit_sbbm(zeta: SpectralField, v0: SpectralField | None, cfg: SolveConfig, return_parts: bool = False):
    """u = Z + v with Z the closed-form stochastic convolution and v the forced remainder."""
    grid = cfg.grid
    if v0 is None:
        v0 = SpectralField.zeros(grid)
    prov = ForcingProvider.limit_convolution(zeta, grid)
    v = solve_perturbed(v0, prov, cfg)
    Zc = np.stack([prov.coeffs(t) for t in v.times])
    Z = Trajectory(grid, v.times, Zc)
    u = Trajectory(grid, v.times, Zc + v.coeffs)
    return LimitSolution(u, Z, v) if return_parts else u


def linear_limit(u0_field: SpectralField, zeta: SpectralField, t: float) -> SpectralField:
    """S(t) u_0 + Z(t), both on the larger of the two grids."""
    M = max(u0_field.mode_bound, zeta.mode_bound)
    return semigroup_apply(u0_field.resized(M), t) + limit_convolution(zeta.resized(M), t)


def duhamel_fixed_point(
    v0: SpectralField,
    f: ForcingProvider | None,
    T_short: float = 0.1,
    iterations: int = 20,
    dt: float = 1e-3,
    return_history: bool = False,
):
    """Picard iteration of v = S(t) v0 + int_0^t S(t - s) phi (v + f)^2(s) ds on [0, T_short].

    Time integrals use the trapezoidal rule on a uniform grid of step ``dt``.
    Returns v(T_short); with ``return_history`` also the sup-in-time H^1
    distances between successive iterates. Aborts if an iterate's norm more
    than doubles.
    """
    M = v0.mode_bound
    n = int(round(T_short / dt))
    if n < 1 or abs(n * dt - T_short) > 1e-9:
        raise ValueError("dt must divide T_short")
    t = np.arange(n + 1) * dt
    ph = phi_array(M)
    w1 = bracket(mode_indices(M))
    fwd = np.exp(np.outer(t, ph))
    F = np.zeros((n + 1, 2 * M + 1), dtype=complex) if f is None else np.stack([f.coeffs(s) for s in t])
    lin = fwd * v0.coeffs
    v = lin.copy()
    dists = []
    prev_norm = np.max(np.sqrt(np.sum(np.abs(w1 * v) ** 2, axis=1)))
    for it in range(iterations):
        g = np.conj(fwd) * ph * product_coeffs(v + F)
        cum = np.zeros_like(g)
        cum[1:] = np.cumsum((g[1:] + g[:-1]) * (dt / 2), axis=0)
        new = lin + fwd * cum
        norm = np.max(np.sqrt(np.sum(np.abs(w1 * new) ** 2, axis=1)))
        if not np.isfinite(norm) or (it > 0 and norm > 2 * prev_norm and norm > 1e-12):
            raise SolverError("fixed-point iteration diverged", step=it)
        dists.append(float(np.max(np.sqrt(np.sum(np.abs(w1 * (new - v)) ** 2, axis=1)))))
        v, prev_norm = new, norm
    out = SpectralField(v0.grid, v[-1])
    return (out, dists) if return_history else out


def l4_norm(c: np.ndarray) -> float:
    """L^4 norm under the normalized measure, exact for band-limited fields."""
    M = (c.shape[-1] - 1) // 2
    u = coeffs_to_grid(c, M, 4 * M + 2)
    return float(np.mean(u ** 4) ** 0.25)


def gronwall_envelope(v0: SpectralField, f: ForcingProvider, times, sample_times=None) -> np.ndarray:
    """(K1 t + ||v0||_{H^1}^2) exp(K2 t) with K1 = c sup||f||_{L^4}^4, K2 = c (1 + sup||f||_{L^2}).

    Suprema are taken over ``sample_times`` (default: ``times``) and c is the
    module constant :data:`GRONWALL_C`, derived from the energy identity and the
    embedding H^1 into L^infinity.
    """
    times = np.asarray(times, dtype=float)
    st = times if sample_times is None else np.asarray(sample_times, dtype=float)
    fs = [f.coeffs(s) for s in st]
    sup4 = max(l4_norm(c) for c in fs) ** 4
    sup2 = max(float(np.sqrt(np.sum(np.abs(c) ** 2))) for c in fs)
    K1 = GRONWALL_C * sup4
    K2 = GRONWALL_C * (1.0 + sup2)
    return (K1 * times + h_norm(v0, 1.0) ** 2) * np.exp(K2 * times)


APPENDIX_VARIANTS = ("XBBM1", "XBBM8", "XBBM9")


def _noise_increments(seed: SeedSpec, alpha_app: float, N: int, M: int, n_fine: int, dt_fine: float, refine: int) -> np.ndarray:
    """Exact increments int_{t_k}^{t_k+dt} exp((t_k+dt-s)phi) phi <n>^alpha dB_n(s), coarsened by ``refine``.

    Fine increments are circular Gaussians of variance |phi(n)|^2 <n>^{2 alpha} dt_fine;
    two consecutive increments combine as exp(dt_1 phi) d_1 + d_2.
    """
    eta = circular_normals(seed.generator("brownian-increment"), (n_fine, N))
    n = np.arange(1, N + 1)
    ph = -1j * n / (1.0 + n * n)
    d = eta * (ph * (1.0 + n * n) ** (alpha_app / 2.0) * math.sqrt(dt_fine))
    h = dt_fine
    while refine > 1:
        d = np.exp(h * ph) * d[0::2] + d[1::2]
        h *= 2
        refine //= 2
    full = np.zeros((d.shape[0], 2 * M + 1), dtype=complex)
    full[:, M + 1 : M + N + 1] = d
    full[:, M - N : M] = np.conj(d[:, ::-1])
    return full


def appendix_solve(
    seed: SeedSpec,
    alpha_app: float,
    N: int,
    variant: str,
    cfg: SolveConfig,
    v0: SpectralField | None = None,
    nonlinear: bool = True,
    noise_refinement: int = 1,
) -> Trajectory:
    """Noise-driven BBM with noise <D>^alpha d_x xi projected to |n| <= N.

    XBBM1: noise scaled by C_{1-alpha,N}, full nonlinearity.
    XBBM8: unscaled noise, nonlinearity damped by C_{1-alpha,N}^2.
    XBBM9: closed form S(t) v0 + Psi(t) + Z(t), with Psi the linear response to
    the noise and Z = -int S(t-s) phi varsigma(s) ds for the limit noise varsigma.

    XBBM1/XBBM8 step u <- S(dt)(u + dt coef phi P(u^2)) + d_k with exact noise
    increments d_k (weak order 1). Noise is drawn on the grid of step
    ``dt / noise_refinement`` and coarsened exactly, so runs at dt and dt/2
    with refinements 2 and 1 see the same noise.
    """
    if variant not in APPENDIX_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant != "XBBM9" and alpha_app < 0.75:
        warnings.warn("renormalized appendix variants assume alpha >= 3/4", UserWarning, stacklevel=2)
    if noise_refinement < 1 or noise_refinement & (noise_refinement - 1):
        raise ValueError("noise_refinement must be a power of two")
    grid = cfg.grid
    M = grid.mode_bound
    if M < N:
        raise ValueError("solver grid must hold the noise modes")
    v0c = np.zeros(2 * M + 1, dtype=complex) if v0 is None else resize_coeffs(v0.coeffs, M)
    steps = cfg.n_steps
    dt = cfg.dt
    incr = _noise_increments(seed, alpha_app, N, M, steps * noise_refinement, dt / noise_refinement, noise_refinement)
    ph = phi_array(M)
    E = np.exp(dt * ph)
    rec = cfg.record_indices()
    out = np.empty((rec.size, 2 * M + 1), dtype=complex)

    if variant == "XBBM9":
        times = np.arange(steps + 1) * dt
        psi = np.zeros((steps + 1, 2 * M + 1), dtype=complex)
        for k in range(steps):
            psi[k + 1] = E * psi[k] + incr[k]
        sig = limit_noise_path(M, times[1:], seed).coeffs
        sig = np.vstack([np.zeros((1, 2 * M + 1)), sig])
        back = np.exp(-np.outer(times, ph)) * ph * sig
        cum = np.zeros_like(back)
        cum[1:] = np.cumsum((back[1:] + back[:-1]) * (dt / 2), axis=0)
        fwd = np.exp(np.outer(times, ph))
        u = fwd * v0c + psi - fwd * cum
        return Trajectory(grid, rec * dt, u[rec])

    if variant == "XBBM1":
        incr = incr * renorm_constant(1.0 - alpha_app, N)
        coef = 1.0
    else:
        coef = renorm_constant(1.0 - alpha_app, N) ** 2
    if not nonlinear:
        coef = 0.0
    c = v0c
    j = 0
    if rec[0] == 0:
        out[0] = c
        j = 1
    for k in range(steps):
        if coef != 0.0:
            c = c + (dt * coef) * (ph * product_coeffs(c))
        c = E * c + incr[k]
        if not np.all(np.isfinite(c)):
            raise SolverError("non-finite coefficients", step=k + 1)
        if j < rec.size and rec[j] == k + 1:
            out[j] = c
            j += 1
    return Trajectory(grid, rec * dt, out)


@dataclass
class InvariantReport:
    times: np.ndarray
    mean: np.ndarray
    h0: np.ndarray
    h1: np.ndarray
    tail_fraction: np.ndarray
    max_abs: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def mean_drift(self) -> float:
        return float(np.max(np.abs(self.mean - self.mean[0])))

    @property
    def h1_relative_drift(self) -> float:
        return float(np.max(np.abs(self.h1 - self.h1[0])) / self.h1[0]) if self.h1[0] > 0 else 0.0

    def records(self) -> list[dict]:
        return [
            {"t": float(t), "mean": float(m), "h0": float(a), "h1": float(b), "tail_fraction": float(f), "max_abs": float(x)}
            for t, m, a, b, f, x in zip(self.times, self.mean, self.h0, self.h1, self.tail_fraction, self.max_abs)
        ]


def invariant_report(traj: Trajectory) -> InvariantReport:
    """Per-record mean mode, H^0 and H^1 functionals (squared norms), tail fraction, max |coefficient|."""
    c = traj.coeffs
    M = traj.grid.mode_bound
    w = 1.0 + mode_indices(M).astype(float) ** 2
    e = np.abs(c) ** 2
    return InvariantReport(
        times=traj.times.copy(),
        mean=c[:, M].real.copy(),
        h0=np.sum(e, axis=1),
        h1=np.sum(w * e, axis=1),
        tail_fraction=tail_fraction(c),
        max_abs=np.max(np.abs(c), axis=1),
    )
