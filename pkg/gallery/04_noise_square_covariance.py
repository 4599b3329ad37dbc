"""The renormalized square of a rough stochastic convolution.

With noise <D>^alpha d_x xi (alpha = 3/4) the stochastic convolution z_N is
too rough to square. After renormalizing by C_{1/4,N}^2 the square Y_N has a
space-time covariance converging to (t^s)^2 <psi, psi>. The constant sits at
the logarithmic borderline, so convergence is slow: roughly 1 - 1.3/log N.
"""
import math

import numpy as np

from bbm_renorm import picard
from bbm_renorm.experiments import cosine
from bbm_renorm.random_sources import SeedSpec, wiener_convolution_path
from bbm_renorm.spectral import pairing

psi = cosine()
print("exact finite-N covariance / limit, at (t, s) = (1, 2)")
for N in (32, 128, 512, 2048, 8192):
    ratio = picard.appendix_covariance_finite(0.75, N, 1.0, 2.0, 1).real / 2 / 0.5
    print(f"  N={N:>5}: {ratio:.4f}   (1 - ratio) * log N = {(1 - ratio) * math.log(N):.3f}")

N, K = 32, 3000
X = np.array([[pairing(picard.appendix_quadratic(p, k), psi) for k in (0, 1)]
              for p in (wiener_convolution_path(0.75, N, [1.0, 2.0], SeedSpec(5, i)) for i in range(K))])
prod = X[:, 0] * X[:, 1]
exact = picard.appendix_covariance_finite(0.75, N, 1.0, 2.0, 1).real / 2
print(f"\nMonte Carlo at N={N} over {K} paths: {prod.mean():.4f} +- {prod.std() / math.sqrt(K):.4f}"
      f" (exact finite-N {exact:.4f}, limit 0.5)")
