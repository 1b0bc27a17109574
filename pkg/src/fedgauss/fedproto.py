"""Federated Yeo-Johnson fitting over secret-shared statistics.

Each client holds a horizontal slice of one feature.  Per search step the
clients compute their local sums in binary64, encode them to fixed point,
and share them; the parties then evaluate the sign of the gradient argument
with three sequential fixed-point multiplications, one secure sign, and one
reveal.  Only the per-step signs and the final (mu, sigma^2) are ever opened
in the clear -- everything else stays masked.  A ledger tracks rounds and
field elements so network cost can be estimated without real sockets.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .transform import (
    DegenerateVariance,
    DomainError,
    Feature,
    FedgaussError,
    NumericOverflow,
    YJParams,
    phi,
    yj_lambda_derivative,
    yj_transform,
)
from .solver import SearchState, exp_update
from .smc import (
    ConfigError,
    FieldConfig,
    MODE_FAITHFUL,
    RoundLedger,
    SmcEngine,
    add,
    centered,
    fxp_decode,
    fxp_encode,
    scale,
    sub,
)

__all__ = [
    "ClientDataset",
    "NetworkModel",
    "ProtocolError",
    "Transcript",
    "cost_estimate",
    "parse_transcript",
    "partition",
    "run_secure_fed_yj",
]

#: order in which per-step client sums are shared (phi joins only in step 1)
_STEP_SUMS = ("s_psi", "s_psi2", "s_dpsi", "s_dpsi2")


class ProtocolError(FedgaussError, RuntimeError):
    """A protocol invariant broke mid-run (bad reveal, wrong party count)."""


@dataclass(frozen=True)
class ClientDataset:
    """One client's horizontal slice of a feature."""

    client_id: int
    values: np.ndarray

    def __post_init__(self):
        if int(self.client_id) < 1:
            raise DomainError("client_id must be >= 1")
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise DomainError("client values must be one-dimensional")
        if arr.size and not np.isfinite(arr).all():
            raise DomainError(
                f"client {self.client_id}: values must be finite"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "client_id", int(self.client_id))

    @property
    def n_k(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class NetworkModel:
    """Synchronous network: per-round latency plus per-link bandwidth."""

    latency: float = 0.020  # seconds per communication round
    bandwidth: float = 1e9  # bits per second

    def __post_init__(self):
        if not (self.latency > 0 and np.isfinite(self.latency)):
            raise DomainError("latency must be a positive real")
        if not (self.bandwidth > 0 and np.isfinite(self.bandwidth)):
            raise DomainError("bandwidth must be a positive real")


@dataclass(frozen=True)
class Transcript:
    """Everything a protocol run opened in the clear, plus replay metadata.

    ``revealed`` holds one ``(step, kind, value)`` record per opened value;
    honest runs open exactly the per-step signs and the final moments.
    Mask openings (the uniformly random values consumed by truncation and
    sign) are counted, never recorded -- they carry no information.
    """

    deltas: tuple
    lambdas: tuple
    final: YJParams
    revealed: tuple
    mask_openings: int = 0
    t_max: int = 0
    n_clients: int = 0
    n_total: int = 0
    mode: str = MODE_FAITHFUL
    rounds: int = 0
    bits_per_pair: int = 0

    def to_lines(self) -> list:
        """Line-oriented record format: one ``step,kind,value`` per reveal."""
        head = [
            "# fedgauss transcript v1",
            f"# t_max={self.t_max} clients={self.n_clients} "
            f"n={self.n_total} mode={self.mode}",
            f"# rounds={self.rounds} bits_per_pair={self.bits_per_pair} "
            f"mask_openings={self.mask_openings}",
            f"# params lambda={self.final.lmbda!r} mu={self.final.mu!r} "
            f"sigma2={self.final.sigma2!r}",
        ]
        body = []
        for step, kind, value in self.revealed:
            if kind == "delta":
                body.append(f"{step},delta,{int(value):+d}")
            else:
                body.append(f"{step},{kind},{value!r}")
        return head + body

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def summary(self) -> dict:
        return {
            "lambda": self.final.lmbda,
            "mu": self.final.mu,
            "sigma2": self.final.sigma2,
            "t_max": self.t_max,
            "n_clients": self.n_clients,
            "n_total": self.n_total,
            "mode": self.mode,
            "rounds": self.rounds,
            "bits_per_pair": self.bits_per_pair,
            "revealed_values": len(self.revealed),
            "mask_openings": self.mask_openings,
        }


def parse_transcript(text: str) -> Transcript:
    """Rebuild a Transcript from its line format.

    The lambda trajectory is not serialized; it is replayed from the signs
    with the same bracket update the parties ran, so binary64 equality with
    the in-memory transcript is preserved.
    """
    meta = {}
    revealed = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, _, val = tok.partition("=")
                    meta[key] = val
            continue
        step_s, kind, value_s = line.split(",", 2)
        value = float(value_s)
        revealed.append((int(step_s), kind, value))
    deltas = tuple(
        int(value) for _, kind, value in revealed if kind == "delta"
    )
    state = SearchState(0.0, float("-inf"), float("inf"), 0)
    lambdas = []
    for delta in deltas:
        state = exp_update(state, delta)
        lambdas.append(state.lmbda)
    finals = {kind: value for _, kind, value in revealed if kind != "delta"}
    # The header records the protocol's actual lambda*; prefer it over the
    # replayed endpoint so sign records doctored on disk cannot masquerade
    # as a (different) self-consistent run.
    if "lambda" in meta:
        lam_star = float(meta["lambda"])
    else:
        lam_star = lambdas[-1] if lambdas else 0.0
    params = YJParams(
        lam_star, finals.get("mu", float("nan")),
        finals.get("sigma2", float("nan")),
    )
    return Transcript(
        deltas=deltas,
        lambdas=tuple(lambdas),
        final=params,
        revealed=tuple(revealed),
        mask_openings=int(meta.get("mask_openings", 0)),
        t_max=int(meta.get("t_max", len(deltas))),
        n_clients=int(meta.get("clients", 0)),
        n_total=int(meta.get("n", 0)),
        mode=meta.get("mode", MODE_FAITHFUL),
        rounds=int(meta.get("rounds", 0)),
        bits_per_pair=int(meta.get("bits_per_pair", 0)),
    )


def partition(feature, K: int, scheme: str = "uniform", seed: int = 0):
    """Split one feature across K clients.

    uniform: seeded shuffle, near-equal slice sizes.
    decile:  sort ascending, K contiguous blocks (client 1 gets the lowest
    values) -- the heterogeneous split used in the robustness experiments.
    """
    values = feature.values if isinstance(feature, Feature) else (
        np.asarray(feature, dtype=np.float64)
    )
    if values.size == 0:
        raise DomainError("cannot partition an empty feature")
    K = int(K)
    if K < 1:
        raise DomainError("K must be >= 1")
    if scheme == "uniform":
        rng = np.random.default_rng(seed)
        shuffled = values[rng.permutation(values.size)]
        parts = np.array_split(shuffled, K)
    elif scheme == "decile":
        parts = np.array_split(np.sort(values), K)
    else:
        raise DomainError(f"unknown partition scheme {scheme!r}")
    return [
        ClientDataset(client_id=k + 1, values=part)
        for k, part in enumerate(parts)
    ]


def union_values(clients) -> np.ndarray:
    """Pooled multiset of all client values (order: client 1, 2, ...)."""
    chunks = [c.values for c in clients]
    if not chunks:
        raise DomainError("no clients")
    return np.concatenate(chunks)


def _local_sums(lmbda: float, values: np.ndarray, with_phi: bool):
    """Binary64 local sums of one client at the current lambda.

    Returns (s_psi, s_psi2, s_dpsi, s_dpsi2[, s_phi]).  Empty slices
    contribute zeros.  Non-finite sums abort the run.
    """
    if values.size == 0:
        out = [0.0, 0.0, 0.0, 0.0]
        if with_phi:
            out.append(0.0)
        return tuple(out)
    psi = yj_transform(lmbda, values)
    dpsi = yj_lambda_derivative(lmbda, values, 1)
    out = [
        float(np.add.reduce(psi)),
        float(np.add.reduce(psi * psi)),
        float(np.add.reduce(dpsi)),
        2.0 * float(np.add.reduce(psi * dpsi)),
    ]
    if with_phi:
        out.append(float(np.add.reduce(phi(values))))
    if not all(np.isfinite(v) for v in out):
        raise NumericOverflow(lmbda)
    return tuple(out)


def _share_client_sums(engine, clients, lmbda, step, with_phi):
    """One parallel sharing round of every client's local sums.

    Returns share vectors of the *global* sums, one per sum kind, obtained
    by locally adding the per-client dealings.
    """
    names = _STEP_SUMS + ("s_phi",) if with_phi else _STEP_SUMS
    secrets = []
    dealers = []
    per_client = []
    for client in clients:
        sums = _local_sums(lmbda, client.values, with_phi)
        per_client.append(sums)
    for j, name in enumerate(names):
        for k, client in enumerate(clients):
            secrets.append(
                fxp_encode(
                    per_client[k][j],
                    engine.cfg,
                    context=f"step {step}, client {client.client_id}, {name}",
                )
            )
            dealers.append(k)
    vecs = engine.share_batch(secrets, dealers=dealers)
    K = len(clients)
    totals = []
    for j in range(len(names)):
        total = vecs[j * K]
        for k in range(1, K):
            total = add(total, vecs[j * K + k])
        totals.append(total)
    return totals


def run_secure_fed_yj(
    clients,
    t_max: int = 40,
    cfg: FieldConfig = None,
    *,
    mode: str = MODE_FAITHFUL,
    seed: int = 0,
    record_views: bool = False,
):
    """Fit Yeo-Johnson parameters across clients without pooling data.

    Runs ``t_max`` search steps; each costs 18 communication rounds
    (1 share + 6 for three sequential fixed-point multiplications +
    10 for the secure sign + 1 reveal), and the final moment computation
    costs 6 more, so the ledger always reads ``18 * t_max + 6``.

    Returns ``(params, transcript, ledger)``.
    """
    clients = list(clients)
    K = len(clients)
    if K < 3:
        raise ConfigError("need at least 3 clients (honest majority)")
    if cfg is None:
        cfg = FieldConfig.create(K=K)
    if cfg.K != K:
        raise ConfigError(
            f"field config expects K={cfg.K} parties, got {K} clients"
        )
    t_max = int(t_max)
    if t_max < 1:
        raise DomainError("t_max must be >= 1")
    # Validates the union (>= 2 distinct finite values) before any rounds.
    Feature(union_values(clients), name="union")
    n = sum(c.n_k for c in clients)

    engine = SmcEngine(cfg, mode=mode, seed=seed, record_views=record_views)
    inv_n = fxp_encode(1.0 / n, cfg, context="1/n")

    state = SearchState(0.0, float("-inf"), float("inf"), 0)
    lam = 0.0
    v_phi = None
    deltas = []
    lambdas = []
    revealed = []

    for t in range(1, t_max + 1):
        with_phi = t == 1
        totals = _share_client_sums(engine, clients, lam, t, with_phi)
        v_psi, v_psi2, v_dpsi, v_dpsi2 = totals[:4]
        if with_phi:
            v_phi = totals[4]
        # Three sequential fixed-point multiplication stages.
        p1, p2 = engine.fxp_mul_batch([(v_psi, v_dpsi), (v_psi, v_psi)])
        (p3,) = engine.fxp_scale_public_batch([p2], inv_n)
        (p4,) = engine.fxp_mul_batch([(v_phi, sub(v_psi2, p3))])
        # Gradient argument; integer scalings stay local and exact.
        arg = add(sub(scale(2, p1), scale(n, v_dpsi2)), scale(2, p4))
        sign_vec = engine.secure_sign(arg)
        (opened,) = engine.reveal_batch([sign_vec], tag=f"delta:{t}")
        delta = centered(opened, cfg)
        if delta not in (-1, 1):
            raise ProtocolError(
                f"step {t}: sign reveal produced {delta}, expected +-1"
            )
        state = exp_update(state, delta)
        lam = state.lmbda
        deltas.append(delta)
        lambdas.append(lam)
        revealed.append((t, "delta", delta))

    # Final phase: mu and sigma^2 at lambda*, 6 rounds total.
    secrets = []
    dealers = []
    for k, client in enumerate(clients):
        s_psi, s_psi2, _, _ = _local_sums(lam, client.values, False)
        secrets.append(
            fxp_encode(
                s_psi, cfg,
                context=f"final, client {client.client_id}, s_psi",
            )
        )
        secrets.append(
            fxp_encode(
                s_psi2, cfg,
                context=f"final, client {client.client_id}, s_psi2",
            )
        )
        dealers.extend((k, k))
    vecs = engine.share_batch(secrets, dealers=dealers)
    v_psi = vecs[0]
    v_psi2 = vecs[1]
    for k in range(1, K):
        v_psi = add(v_psi, vecs[2 * k])
        v_psi2 = add(v_psi2, vecs[2 * k + 1])
    mu_sh, m2_sh = engine.fxp_scale_public_batch([v_psi, v_psi2], inv_n)
    (mu2_sh,) = engine.fxp_mul_batch([(mu_sh, mu_sh)])
    var_sh = sub(m2_sh, mu2_sh)
    mu_f, var_f = engine.reveal_batch([mu_sh, var_sh], tag="final")
    mu = fxp_decode(mu_f, cfg)
    sigma2 = fxp_decode(var_f, cfg)
    if not sigma2 > 0:
        raise DegenerateVariance(lam)
    revealed.append((t_max + 1, "mu", mu))
    revealed.append((t_max + 1, "sigma2", sigma2))

    params = YJParams(lam, mu, sigma2)
    transcript = Transcript(
        deltas=tuple(deltas),
        lambdas=tuple(lambdas),
        final=params,
        revealed=tuple(revealed),
        mask_openings=engine.mask_openings,
        t_max=t_max,
        n_clients=K,
        n_total=n,
        mode=mode,
        rounds=engine.ledger.rounds,
        bits_per_pair=engine.ledger.bits_per_pair,
    )
    return params, transcript, engine.ledger


def cost_estimate(ledger: RoundLedger, net: NetworkModel, features: int = 1):
    """Wall-clock estimate for a run: latency term + bandwidth term.

    Rounds are feature-independent when features are fitted concurrently;
    traffic grows linearly with the feature count.
    """
    features = int(features)
    if features < 1:
        raise DomainError("features must be >= 1")
    bits_per_pair = ledger.bits_per_pair
    wall = ledger.rounds * net.latency + features * bits_per_pair / net.bandwidth
    return wall, bits_per_pair
