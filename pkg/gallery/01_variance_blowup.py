"""Why the second iterate needs renormalization.

Tested against cos x, the unrenormalized second Picard iterate has a variance
that grows with the truncation N whenever alpha <= 1/4: like N^{1-4 alpha}
for alpha < 1/4, and like log N at alpha = 1/4. Multiplying the data by
C_{alpha,N} (which vanishes at exactly the compensating rate) turns the same
object into one with an N-independent limit.

All numbers below are exact finite sums; no sampling.
"""
from bbm_renorm import picard
from bbm_renorm.ensemble import scaling_fit
from bbm_renorm.experiments import cosine, divergent_variance
from bbm_renorm.random_sources import renorm_constant

psi = cosine()
Ns = (16, 32, 64, 128, 256, 512, 1024)

print("Var <F_N(1), cos x> without renormalization")
print(f"{'N':>6} " + " ".join(f"alpha={a:>5}" for a in (0.0, -0.25, 0.25)))
table = {a: [divergent_variance(a, N, 1.0) for N in Ns] for a in (0.0, -0.25, 0.25)}
for i, N in enumerate(Ns):
    print(f"{N:>6} " + " ".join(f"{table[a][i]:>11.4g}" for a in (0.0, -0.25, 0.25)))

for a, model in ((0.0, "power-law"), (-0.25, "power-law"), (0.25, "log-linear")):
    fit = scaling_fit(list(zip(Ns, table[a])), model)
    print(f"alpha={a:>5}: {model} slope {fit['slope']:.4f} (R^2 {fit['r2']:.6f})"
          + (f", expected {1 - 4 * a:g}" if model == "power-law" else ""))

print("\nWith data scaled by C_{alpha,N}: Var <Z_N(1), cos x> and the limit value")
lim = picard.covariance_limit(1.0, 1.0, 1).real / 2
for N in (16, 128, 1024):
    v = picard.covariance_finite_pair(0.0, N, 1.0, 1.0, psi, psi).real
    print(f"  N={N:>5}  C={renorm_constant(0.0, N):.4f}  variance={v:.6f}  (limit {lim:.6f})")
