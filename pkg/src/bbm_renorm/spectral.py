"""Fourier-side representation of real functions on the circle.

Coefficients are stored densely for n = -M..M (index ``i`` holds mode
``n = i - M``) under the normalized-measure convention

    f_hat(n) = (1/2pi) * int_0^{2pi} f(x) exp(-i n x) dx,

so Plancherel carries no factors of 2pi. Array-level helpers accept any
number of leading batch axes; :class:`SpectralField` wraps a single
coefficient vector and is immutable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy import fft as sfft

__all__ = [
    "GridSpec",
    "SpectralField",
    "Trajectory",
    "mode_indices",
    "bracket",
    "phi_symbol",
    "semigroup_apply",
    "dirichlet_project",
    "quadratic_product",
    "pairing",
    "h_norm",
    "winf_norm",
    "to_physical",
    "from_physical",
    "field_to_records",
    "field_from_records",
]


@dataclass(frozen=True)
class GridSpec:
    """Mode bound ``M`` and size ``P`` of the physical evaluation grid."""

    mode_bound: int
    physical_points: int = 0

    def __post_init__(self):
        if self.mode_bound < 1:
            raise ValueError(f"mode_bound must be >= 1, got {self.mode_bound}")
        if self.physical_points == 0:
            object.__setattr__(self, "physical_points", 2 * self.mode_bound + 2)
        if self.physical_points < 2 * self.mode_bound + 2:
            raise ValueError(
                f"physical_points={self.physical_points} < 2M+2={2 * self.mode_bound + 2}"
            )

    @property
    def size(self) -> int:
        return 2 * self.mode_bound + 1

    @property
    def modes(self) -> np.ndarray:
        return mode_indices(self.mode_bound)

    @property
    def x(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.physical_points) / self.physical_points


@lru_cache(maxsize=64)
def _modes_cached(M: int) -> np.ndarray:
    n = np.arange(-M, M + 1)
    n.setflags(write=False)
    return n


def mode_indices(M: int) -> np.ndarray:
    return _modes_cached(int(M))


def bracket(n):
    """Japanese bracket <n> = sqrt(1 + n^2)."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(1.0 + n * n)


def phi_symbol(n):
    """Symbol of the BBM multiplier, -i n / (1 + n^2).

    Purely imaginary, odd in ``n``, bounded by 1/2 in modulus.
    """
    if np.isscalar(n):
        return complex(0.0, -n / (1.0 + n * n))
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape, dtype=complex)
    out.imag = -n / (1.0 + n * n)
    return out


@lru_cache(maxsize=64)
def _phi_cached(M: int) -> np.ndarray:
    p = phi_symbol(mode_indices(M))
    p.setflags(write=False)
    return p


def phi_array(M: int) -> np.ndarray:
    """phi(n) for n = -M..M (cached, read-only)."""
    return _phi_cached(int(M))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


HERMITIAN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Hermitian coefficient vector of a real function (or distribution) on the circle."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.shape != (self.grid.size,):
            raise ValueError(
                f"coeffs has shape {c.shape}, expected ({self.grid.size},) for M={self.grid.mode_bound}"
            )
        object.__setattr__(self, "coeffs", _readonly(c))
        if not self.is_hermitian(HERMITIAN_TOL):
            raise ValueError("coefficients are not Hermitian (coeffs[-n] != conj(coeffs[n]))")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    @classmethod
    def from_modes(cls, grid: GridSpec, values: Mapping[int, complex]) -> "SpectralField":
        """Build from {n: value} for n >= 0; negative modes are filled by conjugation."""
        M = grid.mode_bound
        c = np.zeros(grid.size, dtype=complex)
        for n, v in values.items():
            if n < 0:
                raise ValueError("give non-negative modes only; negatives follow by symmetry")
            if n > M:
                raise ValueError(f"mode {n} outside |n| <= {M}")
            if n == 0:
                c[M] = complex(v).real
            else:
                c[M + n] = v
                c[M - n] = np.conj(v)
        return cls(grid, c)

    @classmethod
    def from_half(cls, grid: GridSpec, half: np.ndarray) -> "SpectralField":
        """Build from coefficients for n = 0..M."""
        return cls(grid, hermitian_from_half(np.asarray(half), grid.mode_bound))

    @property
    def mode_bound(self) -> int:
        return self.grid.mode_bound

    @property
    def modes(self) -> np.ndarray:
        return self.grid.modes

    def mode(self, n: int) -> complex:
        M = self.grid.mode_bound
        if abs(n) > M:
            return 0j
        return complex(self.coeffs[M + n])

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
        return bool(np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) <= tol * scale)

    def resized(self, M: int, physical_points: int = 0) -> "SpectralField":
        """Embed into (or truncate to) a grid with mode bound ``M``."""
        return SpectralField(GridSpec(M, physical_points), resize_coeffs(self.coeffs, M))

    def _binary(self, other, op):
        if isinstance(other, SpectralField):
            if other.grid.mode_bound != self.grid.mode_bound:
                raise ValueError("grid mismatch")
            return SpectralField(self.grid, op(self.coeffs, other.coeffs))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def hermitian_from_half(half: np.ndarray, M: int) -> np.ndarray:
    """Dense (..., 2M+1) array from the n >= 0 half (..., M+1)."""
    out = np.empty(half.shape[:-1] + (2 * M + 1,), dtype=complex)
    out[..., M:] = half[..., : M + 1]
    out[..., :M] = np.conj(half[..., M:0:-1])
    out[..., M] = out[..., M].real
    return out


def resize_coeffs(c: np.ndarray, M_new: int) -> np.ndarray:
    """Zero-pad or truncate a dense coefficient array to mode bound ``M_new``."""
    M_old = (c.shape[-1] - 1) // 2
    if M_new == M_old:
        return np.array(c, dtype=complex)
    out = np.zeros(c.shape[:-1] + (2 * M_new + 1,), dtype=complex)
    k = min(M_new, M_old)
    out[..., M_new - k : M_new + k + 1] = c[..., M_old - k : M_old + k + 1]
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time grid plus one coefficient vector per node, all on one grid."""

    grid: GridSpec
    times: np.ndarray
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if t.ndim != 1 or c.shape != (t.size, self.grid.size):
            raise ValueError(f"times {t.shape} / coeffs {c.shape} mismatch for M={self.grid.mode_bound}")
        if t.size and t[0] < 0:
            raise ValueError("times[0] must be >= 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "coeffs", c)

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, k: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[k])

    @property
    def states(self) -> list[SpectralField]:
        return [self[k] for k in range(len(self))]

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol * max(1.0, abs(t)):
            raise KeyError(f"time {t} not on trajectory grid")
        return k

    def at(self, t: float) -> SpectralField:
        return self[self.index_of(t)]

    @classmethod
    def from_fields(cls, times, fields: list[SpectralField]) -> "Trajectory":
        grid = fields[0].grid
        return cls(grid, np.asarray(times), np.stack([f.coeffs for f in fields]))


def semigroup_apply(f: SpectralField, t: float) -> SpectralField:
    """Linear BBM flow S(t) = exp(t phi(D)); unitary on every H^s."""
    return SpectralField(f.grid, f.coeffs * np.exp(t * phi_array(f.mode_bound)))


def dirichlet_project(f: SpectralField, N: int, drop_zero_mode: bool = False) -> SpectralField:
    if N < 0:
        raise ValueError("N must be >= 0")
    c = np.array(f.coeffs)
    c[np.abs(f.modes) > N] = 0
    if drop_zero_mode:
        c[f.mode_bound] = 0
    return SpectralField(f.grid, c)


@lru_cache(maxsize=64)
def padded_length(M: int) -> int:
    """FFT length >= 2(2M+1): exact for quadratic products of |n| <= M modes."""
    return sfft.next_fast_len(2 * (2 * M + 1), real=True)


def coeffs_to_grid(c: np.ndarray, M: int, L: int) -> np.ndarray:
    """Samples of a Hermitian field at x_j = 2 pi j / L (batch over leading axes)."""
    return sfft.irfft(c[..., M:], n=L, norm="forward")


def grid_to_half(u: np.ndarray, M: int) -> np.ndarray:
    return sfft.rfft(u, norm="forward")[..., : M + 1]


def product_coeffs(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Dealiased product of Hermitian coefficient arrays, truncated to |n| <= M."""
    M = (a.shape[-1] - 1) // 2
    L = padded_length(M)
    ua = coeffs_to_grid(a, M, L)
    ub = ua if b is None else coeffs_to_grid(b, M, L)
    return hermitian_from_half(grid_to_half(ua * ub, M), M)


def quadratic_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Exact spectral convolution (fg)^(n) = sum_{n1+n2=n} f^(n1) g^(n2), |n| <= M."""
    if f.grid.mode_bound != g.grid.mode_bound:
        raise ValueError(f"grid mismatch: M={f.grid.mode_bound} vs M={g.grid.mode_bound}")
    b = None if g is f else g.coeffs
    return SpectralField(f.grid, product_coeffs(f.coeffs, b))


def pairing(f: SpectralField, psi: SpectralField) -> float:
    """<f, psi> = sum_n f^(n) conj(psi^(n)) = int f psi dx/2pi for real fields."""
    K = min(f.mode_bound, psi.mode_bound)
    a = f.coeffs[f.mode_bound - K : f.mode_bound + K + 1]
    b = psi.coeffs[psi.mode_bound - K : psi.mode_bound + K + 1]
    return float(np.real(np.sum(a * np.conj(b))))


def h_norm(f: SpectralField, s: float) -> float:
    w = (1.0 + f.modes.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def winf_norm(f: SpectralField, s: float, oversample: int = 4) -> float:
    """Grid maximum of |<D>^s f| on oversample*(2M+1) points.

    A lower bound of the sup norm that increases to it as ``oversample``
    grows (for nested grids).
    """
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    M = f.mode_bound
    c = f.coeffs * bracket(f.modes) ** s
    u = coeffs_to_grid(c, M, oversample * (2 * M + 1))
    return float(np.max(np.abs(u)))


def to_physical(f: SpectralField) -> np.ndarray:
    return coeffs_to_grid(f.coeffs, f.mode_bound, f.grid.physical_points)


def from_physical(values: np.ndarray, grid: GridSpec) -> SpectralField:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.physical_points,):
        raise ValueError(f"expected {grid.physical_points} samples, got {values.shape}")
    return SpectralField.from_half(grid, grid_to_half(values, grid.mode_bound))


def field_to_records(f: SpectralField) -> list[tuple[int, float, float]]:
    """(n, re, im) rows, n = -M..M."""
    return [(int(n), float(c.real), float(c.imag)) for n, c in zip(f.modes, f.coeffs)]


def field_from_records(records, mode_bound: int | None = None) -> SpectralField:
    rows = [(int(n), float(re), float(im)) for n, re, im in records]
    M = mode_bound if mode_bound is not None else max(abs(n) for n, _, _ in rows)
    c = np.zeros(2 * M + 1, dtype=complex)
    for n, re, im in rows:
        c[M + n] = complex(re, im)
    return SpectralField(GridSpec(M), c)


def physical_transform(f, direction: str = "to-physical", grid: GridSpec | None = None):
    """Dispatch to :func:`to_physical` or :func:`from_physical` by ``direction``."""
    if direction == "to-physical":
        return to_physical(f)
    if direction == "from-physical":
        if grid is None:
            raise ValueError("from-physical needs the target grid")
        return from_physical(f, grid)
    raise ValueError(f"unknown direction {direction!r}")
