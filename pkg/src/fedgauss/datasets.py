"""Synthetic data: feature zoo, bundled corpora, and generators.

The package ships two frozen CSVs under ``fedgauss/data``:

* ``mixed_shapes.csv`` -- a wide table of vetted features with assorted
  skews and tails.  Every column was screened at generation time so that
  (a) the exponential search and the Brent baseline agree tightly, (b) the
  federated protocol reproduces the pooled fit for K in {3, 5, 10} under
  both split schemes without fixed-point overflow (partition seed = column
  index, engine seed = 1000 + column index), and (c) Brent never hits a
  degenerate variance.  Tests load this file; they never regenerate it,
  because RNG stream stability across numpy versions is not guaranteed.
* ``collapse.csv`` -- one heavy right-skewed feature on which the Brent
  baseline slides into the degenerate-variance pocket at strongly negative
  lambda while the exponential search stays finite.

Generators for on-the-fly test data (random feature zoo, skew-normal
samples, and the three-covariate regression task) live here too.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .transform import DomainError, Feature

__all__ = [
    "RegressionData",
    "collapse_values",
    "gen_regression",
    "gen_skewnormal",
    "generate_mixed_corpus",
    "load_collapse",
    "load_mixed_shapes",
    "logistic",
    "random_feature",
    "save_features_csv",
    "load_features_csv",
    "REGRESSION_BETA",
]

#: coefficients of the synthetic linear model (latent space)
REGRESSION_BETA = np.array([-1.3, 2.4, 0.87])

#: variance of the regression noise term
REGRESSION_NOISE_VAR = 0.1


def logistic(x):
    """Numerically safe 1 / (1 + exp(-x))."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gen_skewnormal(n: int, seed=None, alpha: float = 5.0,
                   loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
    """Skew-normal sample via the two-normal representation.

    With delta = alpha / sqrt(1 + alpha^2), the variate
    delta*|z0| + sqrt(1 - delta^2)*z1 is skew-normal with shape alpha.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    delta = alpha / np.sqrt(1.0 + alpha * alpha)
    z0 = rng.standard_normal(n)
    z1 = rng.standard_normal(n)
    raw = delta * np.abs(z0) + np.sqrt(1.0 - delta * delta) * z1
    return loc + scale * raw


@dataclass(frozen=True)
class RegressionData:
    """One draw of the synthetic regression task.

    ``x_tilde`` is what a consumer sees (exponentiated / squashed columns);
    ``latent`` is the Gaussian design the responses were actually built
    from, kept so the generator itself can be validated by OLS recovery.
    """

    x_tilde: np.ndarray  # (n, 3) transformed covariates
    y: np.ndarray        # (n,) responses
    latent: np.ndarray   # (n, 3) latent Gaussian design
    beta: np.ndarray     # (3,) true coefficients


def gen_regression(n: int, seed=None) -> RegressionData:
    """Linear model on a latent Gaussian design, observed through warps.

    y = latent @ beta + eps with eps ~ N(0, 0.1); the observed columns are
    (exp(x1), exp(x2 + 2), logistic(x3)).
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    latent = rng.standard_normal((n, 3))
    eps = rng.normal(0.0, np.sqrt(REGRESSION_NOISE_VAR), size=n)
    y = latent @ REGRESSION_BETA + eps
    x_tilde = np.column_stack([
        np.exp(latent[:, 0]),
        np.exp(latent[:, 1] + 2.0),
        logistic(latent[:, 2]),
    ])
    return RegressionData(x_tilde=x_tilde, y=y, latent=latent,
                          beta=REGRESSION_BETA.copy())


def collapse_values(n: int = 500, seed=1) -> np.ndarray:
    """A heavy right-skewed sample (exp of a wide normal).

    At strongly negative lambda every transformed value lands on -1/lambda
    to machine precision, so a likelihood maximizer that evaluates
    log(sigma^2) dives toward that degenerate plateau.  Not every draw
    trips the baseline -- the default seed is one that does.
    """
    rng = np.random.default_rng(seed)
    return np.exp(rng.normal(7.3, 0.6, size=int(n)))


# --------------------------------------------------------------------------
# feature zoo

_ZOO_KINDS = (
    "gaussian", "lognormal", "neg_lognormal", "skewnormal",
    "student_t", "power_uniform", "bimodal", "chi_like",
)


def _zoo_draw(kind: str, n: int, rng) -> np.ndarray:
    if kind == "gaussian":
        return rng.normal(rng.uniform(-3, 3), rng.uniform(0.3, 2.5), n)
    if kind == "lognormal":
        s = rng.uniform(0.3, 0.8)
        return np.exp(rng.normal(0.0, s, n)) - rng.uniform(0.0, 1.5)
    if kind == "neg_lognormal":
        s = rng.uniform(0.3, 0.8)
        return rng.uniform(0.0, 1.5) - np.exp(rng.normal(0.0, s, n))
    if kind == "skewnormal":
        alpha = rng.uniform(-8, 8)
        delta = alpha / np.sqrt(1 + alpha * alpha)
        z0 = rng.standard_normal(n)
        z1 = rng.standard_normal(n)
        raw = delta * np.abs(z0) + np.sqrt(1 - delta * delta) * z1
        return rng.uniform(-2, 2) + rng.uniform(0.5, 2.0) * raw
    if kind == "student_t":
        df = rng.uniform(5, 12)
        return rng.uniform(-1, 1) + rng.uniform(0.5, 1.4) * rng.standard_t(df, n)
    if kind == "power_uniform":
        k = rng.integers(2, 4)
        sgn = 1.0 if rng.random() < 0.5 else -1.0
        return sgn * rng.uniform(0, 1, n) ** k * rng.uniform(1, 6) + rng.uniform(-1, 1)
    if kind == "bimodal":
        m = rng.random(n) < rng.uniform(0.25, 0.75)
        a = rng.normal(rng.uniform(-3, -0.5), rng.uniform(0.3, 1.0), n)
        b = rng.normal(rng.uniform(0.5, 3), rng.uniform(0.3, 1.0), n)
        return np.where(m, a, b)
    if kind == "chi_like":
        m = int(rng.integers(1, 5))
        q = np.add.reduce(rng.standard_normal((m, n)) ** 2, axis=0)
        return rng.uniform(0.4, 1.2) * q - rng.uniform(0.0, float(m))
    raise DomainError(f"unknown zoo kind {kind!r}")


def random_feature(rng, n: int = None, kind: str = None,
                   center: bool = False) -> Feature:
    """Draw one feature from the shape zoo.

    ``center=True`` subtracts the median, guaranteeing mass on both sides
    of zero (keeps the likelihood well-defined over wide lambda grids).
    """
    if n is None:
        n = int(rng.integers(150, 400))
    if kind is None:
        kind = _ZOO_KINDS[int(rng.integers(0, len(_ZOO_KINDS)))]
    for _ in range(64):
        vals = _zoo_draw(kind, n, rng)
        if center:
            vals = vals - np.median(vals)
        if np.max(np.abs(vals)) <= 30.0 and np.unique(vals).size >= 2:
            return Feature(vals, name=kind)
        kind = _ZOO_KINDS[int(rng.integers(0, len(_ZOO_KINDS)))]
    raise DomainError("zoo failed to produce a usable feature")


# --------------------------------------------------------------------------
# bundled corpora: save / load / (re)generate

def save_features_csv(features, path) -> None:
    """Write equal-length features as one wide CSV (full float precision)."""
    features = list(features)
    if not features:
        raise DomainError("no features to save")
    n = features[0].values.size
    if any(f.values.size != n for f in features):
        raise DomainError("wide CSV needs equal-length features")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f.name or f"f{i + 1:03d}" for i, f in enumerate(features)])
        for row in range(n):
            w.writerow([repr(float(f.values[row])) for f in features])


def load_features_csv(path_or_file) -> list:
    """Read a wide CSV back into a list of Features (one per column)."""
    if hasattr(path_or_file, "read"):
        rows = list(csv.reader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DomainError("CSV has no data rows")
    header = rows[0]
    body = np.array([[float(v) for v in row] for row in rows[1:]],
                    dtype=np.float64)
    return [Feature(body[:, j], name=header[j]) for j in range(len(header))]


def _data_text(name: str):
    return (resources.files("fedgauss") / "data" / name).read_text()


def load_mixed_shapes() -> list:
    """The bundled vetted corpus (list of Features)."""
    import io

    return load_features_csv(io.StringIO(_data_text("mixed_shapes.csv")))


def load_collapse() -> Feature:
    """The bundled collapsing feature."""
    import io

    (feat,) = load_features_csv(io.StringIO(_data_text("collapse.csv")))
    return feat


def generate_mixed_corpus(count: int = 112, n: int = 512, seed: int = 2026,
                          *, vet_protocol: bool = True,
                          vet_faithful: bool = True, progress=None):
    """Draw and vet the mixed-shape corpus.  Slow; run once, ship the CSV.

    Vetting per accepted column index ``idx`` (0-based):
      * pooled exponential-search lambda* with 0.05 <= |lambda*| <= 3.5;
      * Brent baseline non-degenerate, relative gap to the search <= 5e-7;
      * debug-mode federated runs for K in {3, 5, 10} x {uniform, decile}
        (partition seed = idx, engine seed = 1000 + idx): no overflow, all
        six sign sequences identical, lambda within 2e-7 relative of pooled;
      * one faithful-mode run (K=3, uniform, same seeds): same signs, same
        tolerance.

    Returns (features, report) where report counts kinds and rejections.
    """
    from .solver import fit_brent, fit_expyj
    from .smc import FieldConfig, FxpRangeError
    from .transform import (
        DegenerateVariance as _Degen,
        NumericOverflow as _Overflow,
    )
    from .fedproto import ProtocolError, partition, run_secure_fed_yj

    rng = np.random.default_rng(seed)
    cfgs = {k: FieldConfig.create(K=k) for k in (3, 5, 10)}
    kept = []
    kinds = {}
    rejects = {}

    def _reject(reason):
        rejects[reason] = rejects.get(reason, 0) + 1

    while len(kept) < count:
        idx = len(kept)
        kind = _ZOO_KINDS[int(rng.integers(0, len(_ZOO_KINDS)))]
        vals = _zoo_draw(kind, n, rng)
        if np.max(np.abs(vals)) > 30.0 or np.unique(vals).size < 2:
            _reject("range")
            continue
        feat = Feature(vals, name=f"f{idx + 1:03d}")
        pooled = fit_expyj(feat, t_max=40)
        lam = pooled.params.lmbda
        if not (0.05 <= abs(lam) <= 3.5):
            _reject("lambda_range")
            continue
        try:
            brent = fit_brent(feat)
        except Exception:
            _reject("brent_error")
            continue
        if brent.degenerate:
            _reject("brent_degenerate")
            continue
        if abs(brent.params.lmbda - lam) / max(abs(lam), 1e-8) > 5e-7:
            _reject("brent_gap")
            continue
        if vet_protocol:
            ok = True
            ref_deltas = None
            runs = [(k, s) for k in (3, 5, 10) for s in ("uniform", "decile")]
            for k, scheme in runs:
                clients = partition(feat, k, scheme, seed=idx)
                try:
                    p, tr, _ = run_secure_fed_yj(
                        clients, 40, cfgs[k], mode="debug", seed=1000 + idx,
                    )
                except (FxpRangeError, _Overflow, _Degen, ProtocolError):
                    ok = False
                    _reject("protocol_debug")
                    break
                if ref_deltas is None:
                    ref_deltas = tr.deltas
                if tr.deltas != ref_deltas:
                    ok = False
                    _reject("delta_split")
                    break
                if abs(p.lmbda - lam) / max(abs(lam), 1e-8) > 2e-7:
                    ok = False
                    _reject("fed_gap")
                    break
            if ok and vet_faithful:
                clients = partition(feat, 3, "uniform", seed=idx)
                try:
                    p, tr, _ = run_secure_fed_yj(
                        clients, 40, cfgs[3], mode="faithful",
                        seed=1000 + idx,
                    )
                except (FxpRangeError, _Overflow, _Degen, ProtocolError):
                    ok = False
                    _reject("protocol_faithful")
                if ok and (tr.deltas != ref_deltas
                           or abs(p.lmbda - lam) / max(abs(lam), 1e-8) > 2e-7):
                    ok = False
                    _reject("faithful_gap")
            if not ok:
                continue
        kept.append(feat)
        kinds[kind] = kinds.get(kind, 0) + 1
        if progress is not None:
            progress(len(kept), count)
    report = {"kinds": kinds, "rejects": rejects, "n": n, "seed": seed,
              "count": count}
    return kept, report
