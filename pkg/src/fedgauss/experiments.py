"""Canned experiments: accuracy sweeps, stability census, regression bench.

Each runner returns an :class:`ExperimentReport` -- a self-describing bundle
of per-record rows plus aggregate percentile summaries -- that the CLI can
serialize to JSON or CSV.  Runs are seeded and deterministic end to end.

Experiment names are part of the CLI surface:

* ``fig2``       exponential search vs Brent, accuracy vs step budget;
* ``fig3``       federated vs pooled fit, accuracy vs fractional bits,
                 homogeneous and heterogeneous splits;
* ``stability``  per-feature census of degenerate-variance failures of the
                 Brent baseline (the exponential search never evaluates
                 log sigma^2, so it has no such failure mode);
* ``regression`` R^2 of an OLS model on differently preprocessed covariates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .transform import (
    DegenerateVariance,
    DomainError,
    Feature,
    NumericOverflow,
    neg_log_likelihood,
    yj_transform,
)
from .solver import fit_brent, fit_expyj
from .smc import FieldConfig, FxpRangeError, MODE_DEBUG, MODE_FAITHFUL
from .fedproto import (
    ClientDataset,
    ProtocolError,
    partition,
    run_secure_fed_yj,
)
from . import datasets

__all__ = [
    "EXPERIMENT_NAMES",
    "ExperimentReport",
    "RunConfig",
    "delta_lambda",
    "percentile_summary",
    "run_experiment",
]

EXPERIMENT_NAMES = ("fig2", "fig3", "stability", "regression")

#: step budgets swept by fig2
_FIG2_TSWEEP = (5, 10, 15, 20, 25, 30, 35, 40)
#: fractional-bit settings swept by fig3 (integer part fixed at f + 50)
_FIG3_FSWEEP = (10, 20, 30, 40, 50)

_REG_CLIENTS = 10
_REG_TRAIN_PER_CLIENT = 20
_REG_TEST = 200
_REG_TMAX = 20
_REG_BITS_TOTAL = 120  # wide-tailed covariates need integer headroom


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by the experiment runners and the CLI."""

    t_max: int = 40
    l: int = 100
    f: int = 50
    K: int = 10
    split: str = "uniform"
    seed: int = 0
    mode: str = MODE_DEBUG
    latency: float = 0.020
    bandwidth: float = 1e9
    repeats: int = 200
    limit: int = 0  # cap on corpus features (0 = use all)
    input_path: str = ""
    output_path: str = ""

    def __post_init__(self):
        if int(self.t_max) < 1:
            raise DomainError("t_max must be >= 1")
        if not (2 <= int(self.l) and 0 <= int(self.f) < int(self.l)):
            raise DomainError("need 0 <= f < l and l >= 2")
        if int(self.K) < 1:
            raise DomainError("K must be >= 1")
        if self.split not in ("uniform", "decile"):
            raise DomainError(f"unknown split {self.split!r}")
        if self.mode not in (MODE_FAITHFUL, MODE_DEBUG):
            raise DomainError(f"unknown mode {self.mode!r}")
        if not (self.latency > 0 and self.bandwidth > 0):
            raise DomainError("latency and bandwidth must be positive")
        if int(self.repeats) < 1:
            raise DomainError("repeats must be >= 1")
        if int(self.limit) < 0:
            raise DomainError("limit must be >= 0")


@dataclass(frozen=True)
class ExperimentReport:
    """Records plus aggregates, with the config that produced them."""

    name: str
    config: dict
    records: tuple
    aggregates: tuple

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": dict(self.config),
            "records": [dict(r) for r in self.records],
            "aggregates": [dict(a) for a in self.aggregates],
        }


def percentile_summary(values) -> dict:
    """median / quartiles / deciles / max of a sample (linear interpolation)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        nan = float("nan")
        return {"count": 0, "median": nan, "p25": nan, "p75": nan,
                "p10": nan, "p90": nan, "max": nan}
    return {
        "count": int(arr.size),
        "median": float(np.percentile(arr, 50)),
        "p25": float(np.percentile(arr, 25)),
        "p75": float(np.percentile(arr, 75)),
        "p10": float(np.percentile(arr, 10)),
        "p90": float(np.percentile(arr, 90)),
        "max": float(np.max(arr)),
    }


def delta_lambda(lam: float, lam_ref: float) -> float:
    """Relative gap to a reference, absolute when the reference is ~ 0."""
    if abs(lam_ref) < 1e-8:
        return abs(lam - lam_ref)
    return abs(lam - lam_ref) / abs(lam_ref)


def _corpus(cfg: RunConfig):
    if cfg.input_path:
        feats = datasets.load_features_csv(cfg.input_path)
    else:
        feats = datasets.load_mixed_shapes()
    if cfg.limit:
        feats = feats[: cfg.limit]
    return feats


# --------------------------------------------------------------------------
# fig2: exponential search vs Brent, accuracy as a function of step budget

def _run_fig2(cfg: RunConfig) -> ExperimentReport:
    feats = _corpus(cfg)
    sweep = [t for t in _FIG2_TSWEEP if t <= cfg.t_max]
    if cfg.t_max not in sweep:
        sweep.append(cfg.t_max)
    records = []
    per_t = {t: [] for t in sweep}
    for feat in feats:
        ref = fit_brent(feat)
        lam_ref = ref.params.lmbda
        for t in sweep:
            rep = fit_expyj(feat, t_max=t)
            d = delta_lambda(rep.params.lmbda, lam_ref)
            per_t[t].append(d)
            records.append({
                "feature": feat.name,
                "t_max": t,
                "lambda_expyj": rep.params.lmbda,
                "lambda_brent": lam_ref,
                "delta_rel": d,
            })
    aggregates = []
    for t in sweep:
        row = {"t_max": t}
        row.update(percentile_summary(per_t[t]))
        aggregates.append(row)
    return ExperimentReport("fig2", asdict(cfg), tuple(records),
                            tuple(aggregates))


# --------------------------------------------------------------------------
# fig3: federated vs pooled, accuracy as a function of fractional bits

def _run_fig3(cfg: RunConfig) -> ExperimentReport:
    feats = _corpus(cfg)
    records = []
    groups = {}
    for fbits in _FIG3_FSWEEP:
        if fbits > cfg.f:
            continue
        field_cfg = FieldConfig.create(l=fbits + 50, f=fbits, K=cfg.K)
        for scheme in ("uniform", "decile"):
            for idx, feat in enumerate(feats):
                pooled = fit_expyj(feat, t_max=cfg.t_max)
                lam_ref = pooled.params.lmbda
                clients_ = partition(feat, cfg.K, scheme, seed=idx)
                flag = ""
                lam_fed = float("nan")
                d = float("nan")
                try:
                    params, _, _ = run_secure_fed_yj(
                        clients_, cfg.t_max, field_cfg, mode=cfg.mode,
                        seed=1000 + idx,
                    )
                    lam_fed = params.lmbda
                    d = delta_lambda(lam_fed, lam_ref)
                except (FxpRangeError, NumericOverflow) as exc:
                    flag = f"overflow: {exc}"
                except (DegenerateVariance, ProtocolError) as exc:
                    flag = f"protocol: {exc}"
                records.append({
                    "feature": feat.name,
                    "f": fbits,
                    "scheme": scheme,
                    "lambda_fed": lam_fed,
                    "lambda_pooled": lam_ref,
                    "delta_rel": d,
                    "flag": flag,
                })
                if not flag:
                    groups.setdefault((fbits, scheme), []).append(d)
    aggregates = []
    for (fbits, scheme), vals in sorted(groups.items()):
        row = {"f": fbits, "scheme": scheme}
        row.update(percentile_summary(vals))
        aggregates.append(row)
    return ExperimentReport("fig3", asdict(cfg), tuple(records),
                            tuple(aggregates))


# --------------------------------------------------------------------------
# stability: census of Brent degeneracy over the corpus + collapsing feature

def _run_stability(cfg: RunConfig) -> ExperimentReport:
    feats = _corpus(cfg) + [datasets.load_collapse()]
    records = []
    n_brent_degen = 0
    for feat in feats:
        brent = fit_brent(feat)
        exp = fit_expyj(feat, t_max=cfg.t_max)
        nll_exp = neg_log_likelihood(exp.params.lmbda, feat)
        try:
            nll_brent = neg_log_likelihood(brent.params.lmbda, feat)
        except DegenerateVariance:
            nll_brent = math.inf
        n_brent_degen += int(brent.degenerate)
        records.append({
            "feature": feat.name,
            "lambda_brent": brent.params.lmbda,
            "brent_degenerate": int(brent.degenerate),
            "lambda_expyj": exp.params.lmbda,
            "nll_expyj": nll_exp,
            "nll_brent": nll_brent,
        })
    aggregates = ({
        "features": len(feats),
        "brent_degenerate_count": n_brent_degen,
        "expyj_degenerate_count": 0,
    },)
    return ExperimentReport("stability", asdict(cfg), tuple(records),
                            aggregates)


# --------------------------------------------------------------------------
# regression: OLS R^2 under four preprocessing pipelines

def _ols_r2(x_train, y_train, x_test, y_test) -> float:
    a = np.column_stack([x_train, np.ones(len(x_train))])
    beta, *_ = np.linalg.lstsq(a, y_train, rcond=None)
    pred = np.column_stack([x_test, np.ones(len(x_test))]) @ beta
    ss_res = float(np.sum((y_test - pred) ** 2))
    ss_tot = float(np.sum((y_test - np.mean(y_test)) ** 2))
    return 1.0 - ss_res / ss_tot


def _standardize(lam, mu, sigma2, column):
    z = (yj_transform(lam, column) - mu) / math.sqrt(sigma2)
    return z


def _run_regression(cfg: RunConfig) -> ExperimentReport:
    n_train = _REG_CLIENTS * _REG_TRAIN_PER_CLIENT
    field_cfg = FieldConfig.create(l=_REG_BITS_TOTAL, f=50, K=_REG_CLIENTS)
    records = []
    clean = {"none": [], "whitening": [], "local": [], "federated": []}
    seed = cfg.seed
    done = 0
    while done < cfg.repeats:
        data = datasets.gen_regression(n_train + _REG_TEST, seed=seed)
        xt, y = data.x_tilde, data.y
        x_tr, y_tr = xt[:n_train], y[:n_train]
        x_te, y_te = xt[n_train:], y[n_train:]
        flag = ""
        row = {"seed": seed, "r2_none": float("nan"),
               "r2_whitening": float("nan"), "r2_local": float("nan"),
               "r2_federated": float("nan"), "flag": ""}
        try:
            r2 = {}
            r2["none"] = _ols_r2(x_tr, y_tr, x_te, y_te)

            mu = x_tr.mean(axis=0)
            sd = x_tr.std(axis=0)
            r2["whitening"] = _ols_r2((x_tr - mu) / sd, y_tr,
                                      (x_te - mu) / sd, y_te)

            # one randomly chosen center fits locally and broadcasts
            pick = int(np.random.default_rng([seed, 17]).integers(_REG_CLIENTS))
            lo = pick * _REG_TRAIN_PER_CLIENT
            hi = lo + _REG_TRAIN_PER_CLIENT
            z_tr = np.empty_like(x_tr)
            z_te = np.empty_like(x_te)
            for j in range(3):
                rep = fit_expyj(Feature(x_tr[lo:hi, j]), t_max=_REG_TMAX)
                p = rep.params
                z_tr[:, j] = _standardize(p.lmbda, p.mu, p.sigma2, x_tr[:, j])
                z_te[:, j] = _standardize(p.lmbda, p.mu, p.sigma2, x_te[:, j])
            if not (np.isfinite(z_tr).all() and np.isfinite(z_te).all()):
                raise NumericOverflow(float("nan"))
            r2["local"] = _ols_r2(z_tr, y_tr, z_te, y_te)

            # the real protocol across the 10 training slices
            for j in range(3):
                clients = [
                    ClientDataset(
                        k + 1,
                        x_tr[k * _REG_TRAIN_PER_CLIENT:
                             (k + 1) * _REG_TRAIN_PER_CLIENT, j],
                    )
                    for k in range(_REG_CLIENTS)
                ]
                params, _, _ = run_secure_fed_yj(
                    clients, _REG_TMAX, field_cfg, mode=cfg.mode, seed=seed,
                )
                z_tr[:, j] = _standardize(params.lmbda, params.mu,
                                          params.sigma2, x_tr[:, j])
                z_te[:, j] = _standardize(params.lmbda, params.mu,
                                          params.sigma2, x_te[:, j])
            if not (np.isfinite(z_tr).all() and np.isfinite(z_te).all()):
                raise NumericOverflow(float("nan"))
            r2["federated"] = _ols_r2(z_tr, y_tr, z_te, y_te)
        except (FxpRangeError, NumericOverflow, DegenerateVariance,
                ProtocolError) as exc:
            flag = f"{type(exc).__name__}"
        if not flag:
            row["r2_none"] = r2["none"]
            row["r2_whitening"] = r2["whitening"]
            row["r2_local"] = r2["local"]
            row["r2_federated"] = r2["federated"]
            for k in clean:
                clean[k].append(r2[k])
            done += 1
        row["flag"] = flag
        records.append(row)
        seed += 1
    aggregates = []
    for k in ("none", "whitening", "local", "federated"):
        vals = np.asarray(clean[k])
        aggregates.append({
            "pipeline": k,
            "count": int(vals.size),
            "mean_r2": float(vals.mean()),
            "std_r2": float(vals.std(ddof=1)),
        })
    return ExperimentReport("regression", asdict(cfg), tuple(records),
                            tuple(aggregates))


_RUNNERS = {
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "stability": _run_stability,
    "regression": _run_regression,
}


def run_experiment(name: str, cfg: RunConfig = None) -> ExperimentReport:
    """Run one named experiment under the given configuration."""
    if name not in _RUNNERS:
        raise DomainError(
            f"unknown experiment {name!r}; choose from {EXPERIMENT_NAMES}"
        )
    return _RUNNERS[name](cfg if cfg is not None else RunConfig())
