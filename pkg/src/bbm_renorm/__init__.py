"""Renormalized BBM on the circle: spectral tools, exact Picard objects,
solvers and Monte Carlo statistics for Gaussian random data and noise."""

from .spectral import (
    GridSpec,
    SpectralField,
    Trajectory,
    dirichlet_project,
    h_norm,
    pairing,
    phi_symbol,
    physical_transform,
    quadratic_product,
    semigroup_apply,
    winf_norm,
)
from .random_sources import (
    GaussianCoefficients,
    ModelParams,
    SeedSpec,
    initial_data,
    linear_solution_zN,
    renorm_constant,
    renormalized_truncated_data,
    sample_gaussian_coeffs,
    white_noise,
    wiener_convolution_path,
)

__version__ = "0.1.0"
