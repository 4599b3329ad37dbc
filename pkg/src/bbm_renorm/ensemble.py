"""Monte Carlo orchestration and the statistics applied to scalar observables.

Ensembles are deterministic: member i always runs with ``seed.member(i)``
and results are reassembled in member order, so the output is bitwise
independent of the number of worker processes.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .random_sources import SeedSpec
from .spectral import Trajectory, bracket

FAILURE_TOLERANCE = 1e-3


class EnsembleError(RuntimeError):
    pass


@dataclass
class ObservableSample:
    label: str
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def __len__(self):
        return self.values.size

    def rows(self) -> list[dict]:
        idx = self.metadata.get("member_indices", range(len(self)))
        return [{"member_index": int(i), "value": float(v)} for i, v in zip(idx, self.values)]


@dataclass
class EnsembleSummary:
    n: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    fourth_moment: float
    fourth_moment_se: float
    excess_kurtosis: float
    kurtosis_se: float
    kurtosis_se_jackknife: float
    kurtosis_defined: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def config_digest(obj) -> str:
    """Short SHA-256 digest of a JSON-serializable description."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _run_chunk(experiment, seed: SeedSpec, start: int, stop: int, labels):
    out = np.full((stop - start, len(labels)), np.nan)
    errors = {}
    for i in range(start, stop):
        try:
            obs = experiment(seed.member(i))
            out[i - start] = [float(obs[k]) for k in labels]
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
        else:
            if not np.all(np.isfinite(out[i - start])):
                errors[i] = "non-finite observable"
    return start, out, errors


def run_ensemble(experiment, observables, M_samples: int, seed: SeedSpec, workers: int = 1, chunk: int | None = None) -> list[ObservableSample]:
    """Run ``experiment(member_seed) -> {label: value}`` for members 0..M-1.

    ``experiment`` must be picklable (a module-level function or a
    functools.partial of one) when ``workers > 1``. Failed members are
    recorded in the metadata; more than 0.1% failures abort the run.
    """
    if M_samples < 2:
        raise ValueError("M_samples must be >= 2")
    labels = list(observables)
    chunk = chunk or max(1, math.ceil(M_samples / (4 * max(workers, 1))))
    bounds = [(s, min(s + chunk, M_samples)) for s in range(0, M_samples, chunk)]
    values = np.full((M_samples, len(labels)), np.nan)
    errors: dict[int, str] = {}
    if workers <= 1:
        results = [_run_chunk(experiment, seed, a, b, labels) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run_chunk, experiment, seed, a, b, labels) for a, b in bounds]
            results = [f.result() for f in futs]
    for start, out, errs in results:
        values[start : start + out.shape[0]] = out
        errors.update(errs)
    if len(errors) > FAILURE_TOLERANCE * M_samples:
        first = min(errors)
        raise EnsembleError(f"{len(errors)} of {M_samples} members failed (first: member {first}: {errors[first]})")
    ok = np.array(sorted(set(range(M_samples)) - set(errors)))
    meta = {
        "master_seed": seed.master_seed,
        "stream_ids": [seed.stream_id, seed.stream_id + M_samples - 1],
        "failed_members": {int(k): v for k, v in sorted(errors.items())},
        "member_indices": ok.tolist(),
    }
    return [ObservableSample(lab, values[ok, j], dict(meta)) for j, lab in enumerate(labels)]


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, ObservableSample) else np.asarray(s, dtype=float)


def _jackknife_kurtosis(x: np.ndarray) -> float:
    """Jackknife SE of m4/m2^2 - 3 from leave-one-out power sums (O(n))."""
    n = x.size
    x = x - np.mean(x)
    S = [np.sum(x ** k) for k in range(1, 5)]
    m = n - 1
    s1 = (S[0] - x) / m
    s2 = (S[1] - x ** 2) / m
    s3 = (S[2] - x ** 3) / m
    s4 = (S[3] - x ** 4) / m
    c2 = s2 - s1 ** 2
    c4 = s4 - 4 * s3 * s1 + 6 * s2 * s1 ** 2 - 3 * s1 ** 4
    k = c4 / c2 ** 2
    return float(np.sqrt((n - 1) / n * np.sum((k - k.mean()) ** 2)))


def moment_summary(s) -> EnsembleSummary:
    """Moments with standard errors.

    Mean and variance are unbiased. Excess kurtosis is m4/m2^2 - 3 (central
    sample moments); its SE comes from the influence function of that ratio,
    which involves the sample 8th moment, with a jackknife SE alongside.
    """
    x = _values(s)
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    mu = float(np.mean(x))
    d = x - mu
    m2 = float(np.mean(d ** 2))
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    var = float(np.var(x, ddof=1))
    var_se = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    if_m4 = d ** 4 - m4 - 4 * m3 * d
    m4_se = float(np.std(if_m4) / math.sqrt(n))
    defined = m2 > 0 and n >= 8 and m2 > 1e-28 * max(1.0, mu * mu)
    if defined:
        kurt = m4 / m2 ** 2 - 3.0
        infl = if_m4 / m2 ** 2 - 2.0 * m4 * (d ** 2 - m2) / m2 ** 3
        k_se = float(np.std(infl) / math.sqrt(n))
        k_jk = _jackknife_kurtosis(x)
    else:
        kurt = k_se = k_jk = float("nan")
    return EnsembleSummary(
        n=n, mean=mu, mean_se=math.sqrt(var / n), variance=var, variance_se=var_se,
        fourth_moment=m4, fourth_moment_se=m4_se, excess_kurtosis=kurt,
        kurtosis_se=k_se, kurtosis_se_jackknife=k_jk, kurtosis_defined=defined,
    )


def gaussianization_test(s, multiplier: float = 4.0) -> dict:
    """Excess kurtosis with SE plus a one-sample KS test against N(mean, var)."""
    x = _values(s)
    summ = moment_summary(x)
    if not summ.kurtosis_defined:
        raise ValueError("degenerate sample: kurtosis undefined")
    ks = stats.kstest(x, "norm", args=(summ.mean, math.sqrt(summ.variance)))
    z = summ.excess_kurtosis / summ.kurtosis_se
    return {
        "n": summ.n,
        "excess_kurtosis": summ.excess_kurtosis,
        "kurtosis_se": summ.kurtosis_se,
        "kurtosis_se_jackknife": summ.kurtosis_se_jackknife,
        "z": z,
        "multiplier": multiplier,
        "kurtosis_gaussian": bool(abs(z) <= multiplier),
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
    }


def ks_two_sample(a, b) -> dict:
    x, y = _values(a), _values(b)
    if x.size == 0 or y.size == 0:
        raise ValueError("samples must be nonempty")
    r = stats.ks_2samp(x, y, method="asymp")
    return {"statistic": float(r.statistic), "pvalue": float(r.pvalue), "n_a": x.size, "n_b": y.size}


def compare_moments(a, b, multiplier: float = 3.0) -> dict:
    """Mean and variance differences in units of the combined standard error."""
    sa, sb = moment_summary(a), moment_summary(b)
    dm = sa.mean - sb.mean
    dm_se = math.hypot(sa.mean_se, sb.mean_se)
    dv = sa.variance - sb.variance
    dv_se = math.hypot(sa.variance_se, sb.variance_se)
    return {
        "mean_a": sa.mean, "mean_b": sb.mean, "mean_diff": dm, "mean_se": dm_se,
        "var_a": sa.variance, "var_b": sb.variance, "var_diff": dv, "var_se": dv_se,
        "mean_ok": bool(abs(dm) <= multiplier * dm_se),
        "var_ok": bool(abs(dv) <= multiplier * dv_se),
        "multiplier": multiplier,
    }


def scaling_fit(points, model: str = "power-law") -> dict:
    """Least squares of log(value) or value against log(N); returns slope, intercept, R^2."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least four (N, value) pairs")
    N, v = pts[:, 0], pts[:, 1]
    if np.any(N <= 0):
        raise ValueError("N must be positive")
    if model == "power-law":
        if np.any(v <= 0):
            raise ValueError("power-law fit needs positive values")
        y = np.log(v)
    elif model == "log-linear":
        y = v
    else:
        raise ValueError(f"unknown model {model!r}")
    r = stats.linregress(np.log(N), y)
    return {"model": model, "slope": float(r.slope), "intercept": float(r.intercept), "r2": float(r.rvalue ** 2)}


def increment_regularity(paths, s: float, lags) -> dict:
    """Mean E||X(t+h) - X(t)||^2_{H^s} per lag, and the log-log slope 2 theta.

    ``paths`` is a list of :class:`Trajectory` on one uniform time grid;
    every lag must be a multiple of the grid step.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("no paths")
    t = paths[0].times
    h0 = t[1] - t[0]
    if not np.allclose(np.diff(t), h0, rtol=1e-9, atol=0):
        raise ValueError("paths need a uniform time grid")
    X = np.stack([p.coeffs for p in paths])
    w = bracket(paths[0].grid.modes) ** (2 * s)
    moments = []
    for h in lags:
        k = h / h0
        if abs(k - round(k)) > 1e-6 or round(k) < 1:
            raise ValueError(f"lag {h} is not a positive multiple of the grid step {h0}")
        k = int(round(k))
        d = X[:, k:] - X[:, :-k]
        moments.append(float(np.mean(np.sum(w * np.abs(d) ** 2, axis=-1))))
    moments = np.array(moments)
    res = {"lags": [float(h) for h in lags], "moments": moments.tolist()}
    if np.all(moments > 0) and len(lags) >= 2:
        r = stats.linregress(np.log(lags), np.log(moments))
        res.update(two_theta=float(r.slope), r2=float(r.rvalue ** 2))
    else:
        res.update(two_theta=float("nan"), r2=float("nan"))
    return res
