"""Command-line front end: ingestion, fitting, protocol runs, reports.

Subcommands
-----------
fit         pooled exponential-search fit, one record per CSV column
fit-brent   Brent-baseline fit (reports degenerate-variance failures)
fedfit      federated fit across simulated clients, with cost accounting
audit       replay transcripts from lambda* and report match/mismatch
bench       round/traffic/wall-clock estimate for a protocol configuration
gen         write synthetic datasets (skewnormal, regression)
experiment  canned sweeps: fig2, fig3, stability, regression

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric/protocol
error.  Reports embed the configuration that produced them; with a fixed
seed every byte of output is reproducible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .transform import (
    DegenerateVariance,
    DomainError,
    Feature,
    FedgaussError,
    InvalidFeature,
    NumericOverflow,
)
from .solver import BrentConvergenceError, fit_brent, fit_expyj
from .smc import ConfigError, FieldConfig, FxpRangeError
from .fedproto import (
    NetworkModel,
    ProtocolError,
    cost_estimate,
    parse_transcript,
    partition,
    run_secure_fed_yj,
)
from .audit import revealed_surface_ok, verify_leakage
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentReport,
    RunConfig,
    run_experiment,
)
from . import datasets

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_DATA",
    "EXIT_NUMERIC",
    "emit_report",
    "ingest_csv",
    "main",
    "parse_report_csv",
    "parse_report_json",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

log = logging.getLogger("fedgauss.cli")

_NUMERIC_ERRORS = (
    NumericOverflow,
    DegenerateVariance,
    FxpRangeError,
    ProtocolError,
    BrentConvergenceError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


# --------------------------------------------------------------------------
# ingestion

def ingest_csv(path, header: bool = False, skip_bad_rows: bool = False):
    """Read a CSV into one Feature per numeric column.

    Columns with fewer than two distinct values are dropped with a warning.
    Rows containing non-numeric cells are skipped (with a warning) when
    ``skip_bad_rows`` is set, and abort the ingestion otherwise.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise DomainError(f"{path}: no rows")
    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DomainError(f"{path}: header but no data rows")
    ncol = len(rows[0])
    if names is None:
        names = [f"col{j + 1:03d}" for j in range(ncol)]
    data = []
    for i, row in enumerate(rows):
        if len(row) != ncol:
            if skip_bad_rows:
                log.warning("%s: row %d has %d cells, expected %d; skipped",
                            path, i + 1, len(row), ncol)
                continue
            raise DomainError(
                f"{path}: row {i + 1} has {len(row)} cells, expected {ncol}"
            )
        try:
            data.append([float(c) for c in row])
        except ValueError:
            if skip_bad_rows:
                log.warning("%s: row %d has a non-numeric cell; skipped",
                            path, i + 1)
                continue
            raise DomainError(
                f"{path}: row {i + 1} has a non-numeric cell "
                "(use --skip-bad-rows to drop such rows)"
            ) from None
    if not data:
        raise DomainError(f"{path}: no usable data rows")
    arr = np.asarray(data, dtype=np.float64)
    features = []
    for j in range(ncol):
        col = arr[:, j]
        if np.unique(col[np.isfinite(col)]).size < 2:
            log.warning("%s: column %s dropped (fewer than two distinct "
                        "values)", path, names[j])
            continue
        try:
            features.append(Feature(col, name=names[j]))
        except InvalidFeature as exc:
            if skip_bad_rows:
                log.warning("%s: column %s dropped (%s)", path, names[j], exc)
                continue
            raise
    if not features:
        raise DomainError(f"{path}: no usable columns")
    return features


# --------------------------------------------------------------------------
# report serialization

def emit_report(report: ExperimentReport, fmt: str = "json",
                path=None) -> str:
    """Serialize a report deterministically; write to ``path`` if given.

    JSON carries the whole report.  CSV carries the records table prefixed
    by one ``#`` comment line holding the config (and name) as JSON, so a
    CSV report remains self-describing.
    """
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=1) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        head = json.dumps({"name": report.name, "config": dict(report.config)})
        buf.write(f"#{head}\n")
        if report.records:
            cols = list(report.records[0].keys())
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for rec in report.records:
                w.writerow([_csv_cell(rec[c]) for c in cols])
        text = buf.getvalue()
    else:
        raise DomainError(f"unknown report format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _csv_value(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def parse_report_json(text: str) -> dict:
    return json.loads(text)


def parse_report_csv(text: str) -> dict:
    """Inverse of ``emit_report(..., "csv")`` up to record typing."""
    lines = text.splitlines()
    meta = {"name": "", "config": {}}
    body = []
    for line in lines:
        if line.startswith("#"):
            meta.update(json.loads(line[1:]))
        elif line:
            body.append(line)
    records = []
    if body:
        rows = list(csv.reader(body))
        cols = rows[0]
        for row in rows[1:]:
            records.append({c: _csv_value(v) for c, v in zip(cols, row)})
    return {"name": meta["name"], "config": meta["config"],
            "records": records}


# --------------------------------------------------------------------------
# subcommand bodies

def _pool_map(fn, items):
    """Ordered parallel map (results merged back in input order)."""
    if len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
        return list(pool.map(fn, items))


def _report_out(report, args) -> int:
    text = emit_report(report, args.format, args.out or None)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _run_config(args, **over) -> RunConfig:
    kw = dict(
        t_max=args.tmax,
        l=args.bits_total,
        f=args.bits_frac,
        K=args.clients,
        split=args.split,
        seed=args.seed,
        mode=args.mode,
        latency=args.latency_ms / 1000.0,
        bandwidth=args.bandwidth_gbps * 1e9,
    )
    kw.update(over)
    return RunConfig(**kw)


def _cmd_fit(args) -> int:
    feats = ingest_csv(args.input, header=args.header,
                       skip_bad_rows=args.skip_bad_rows)

    def one(feat):
        rep = fit_expyj(feat, t_max=args.tmax)
        return {
            "feature": feat.name,
            "n": feat.values.size,
            "lambda": rep.params.lmbda,
            "mu": rep.params.mu,
            "sigma2": rep.params.sigma2,
            "steps": rep.steps,
        }

    records = _pool_map(one, feats)
    cfg = _run_config(args)
    report = ExperimentReport("fit", dict(vars(cfg).items()),
                              tuple(records), ())
    return _report_out(report, args)


def _cmd_fit_brent(args) -> int:
    feats = ingest_csv(args.input, header=args.header,
                       skip_bad_rows=args.skip_bad_rows)

    def one(feat):
        rep = fit_brent(feat)
        return {
            "feature": feat.name,
            "n": feat.values.size,
            "lambda": rep.params.lmbda,
            "mu": rep.params.mu,
            "sigma2": rep.params.sigma2,
            "iterations": rep.steps,
            "degenerate": int(rep.degenerate),
        }

    records = _pool_map(one, feats)
    cfg = _run_config(args)
    report = ExperimentReport("fit-brent", dict(vars(cfg).items()),
                              tuple(records), ())
    return _report_out(report, args)


def _cmd_fedfit(args) -> int:
    feats = ingest_csv(args.input, header=args.header,
                       skip_bad_rows=args.skip_bad_rows)
    field_cfg = FieldConfig.create(l=args.bits_total, f=args.bits_frac,
                                   K=args.clients)
    net = NetworkModel(args.latency_ms / 1000.0, args.bandwidth_gbps * 1e9)
    if args.transcript_dir:
        os.makedirs(args.transcript_dir, exist_ok=True)

    def one(item):
        idx, feat = item
        clients = partition(feat, args.clients, args.split, seed=idx)
        params, transcript, ledger = run_secure_fed_yj(
            clients, args.tmax, field_cfg, mode=args.mode,
            seed=args.seed + idx,
        )
        wall, bits = cost_estimate(ledger, net, features=1)
        if args.transcript_dir:
            out = os.path.join(args.transcript_dir, f"{feat.name}.transcript")
            with open(out, "w") as fh:
                fh.write(transcript.to_text())
        return {
            "feature": feat.name,
            "n": feat.values.size,
            "lambda": params.lmbda,
            "mu": params.mu,
            "sigma2": params.sigma2,
            "rounds": ledger.rounds,
            "bits_per_pair": bits,
            "wall_seconds": wall,
            "revealed_values": len(transcript.revealed),
            "mask_openings": transcript.mask_openings,
        }

    records = _pool_map(one, list(enumerate(feats)))
    cfg = _run_config(args)
    report = ExperimentReport("fedfit", dict(vars(cfg).items()),
                              tuple(records), ())
    return _report_out(report, args)


def _cmd_audit(args) -> int:
    worst = EXIT_OK
    for path in args.transcripts:
        try:
            with open(path) as fh:
                transcript = parse_transcript(fh.read())
        except OSError as exc:
            raise DomainError(f"cannot read {path}: {exc}") from exc
        if not transcript.deltas:
            raise DomainError(f"{path}: no sign records")
        verdict = verify_leakage(transcript)
        surface = revealed_surface_ok(transcript)
        line = f"{path}: {verdict}"
        if not surface:
            line += " [revealed surface unexpected]"
            worst = EXIT_NUMERIC
        print(line)
        if not verdict.matched:
            worst = EXIT_NUMERIC
    return worst


def _cmd_bench(args) -> int:
    # Rounds and traffic depend only on the configuration, so a tiny
    # synthetic run prices out any dataset of the same shape.
    field_cfg = FieldConfig.create(l=args.bits_total, f=args.bits_frac,
                                   K=args.clients)
    rng = np.random.default_rng(0)
    feat = Feature(rng.normal(0.0, 1.0, 64), name="bench")
    clients = partition(feat, args.clients, "uniform", seed=0)
    _, _, ledger = run_secure_fed_yj(clients, args.tmax, field_cfg,
                                     mode="debug", seed=0)
    net = NetworkModel(args.latency_ms / 1000.0, args.bandwidth_gbps * 1e9)
    wall, bits = cost_estimate(ledger, net, features=args.features)
    out = {
        "t_max": args.tmax,
        "l": args.bits_total,
        "f": args.bits_frac,
        "K": args.clients,
        "features": args.features,
        "rounds": ledger.rounds,
        "elements": ledger.elements,
        "bits_per_pair": bits,
        "latency_seconds": net.latency,
        "bandwidth_bps": net.bandwidth,
        "latency_term_seconds": ledger.rounds * net.latency,
        "bandwidth_term_seconds": args.features * bits / net.bandwidth,
        "wall_seconds": wall,
    }
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.kind == "skewnormal":
        vals = datasets.gen_skewnormal(args.n, seed=args.seed,
                                       alpha=args.alpha)
        feats = [Feature(vals, name="skewnormal")]
        datasets.save_features_csv(feats, args.out)
    else:  # regression
        data = datasets.gen_regression(args.n, seed=args.seed)
        cols = [
            Feature(data.x_tilde[:, 0], name="x1"),
            Feature(data.x_tilde[:, 1], name="x2"),
            Feature(data.x_tilde[:, 2], name="x3"),
            Feature(data.y, name="y"),
        ]
        datasets.save_features_csv(cols, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = _run_config(args, repeats=args.repeats, limit=args.limit,
                      input_path=args.input or "",
                      output_path=args.out or "")
    report = run_experiment(args.name, cfg)
    return _report_out(report, args)


# --------------------------------------------------------------------------
# parser assembly

def _add_common(p, with_input=True):
    if with_input:
        p.add_argument("input", help="CSV file of features (columns)")
        p.add_argument("--header", action="store_true",
                       help="first row is a header")
        p.add_argument("--skip-bad-rows", action="store_true",
                       help="skip rows with non-numeric cells")
    p.add_argument("--tmax", type=int, default=40,
                   help="search steps (default 40)")
    p.add_argument("--bits-total", type=int, default=100, metavar="L",
                   help="fixed-point total bits (default 100)")
    p.add_argument("--bits-frac", type=int, default=50, metavar="F",
                   help="fixed-point fractional bits (default 50)")
    p.add_argument("--clients", type=int, default=10, metavar="K",
                   help="number of clients (default 10)")
    p.add_argument("--split", choices=("uniform", "decile"),
                   default="uniform", help="partition scheme")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--mode", choices=("faithful", "debug"),
                   default="faithful",
                   help="secure arithmetic mode (default faithful)")
    p.add_argument("--latency-ms", type=float, default=20.0,
                   help="network latency per round, ms (default 20)")
    p.add_argument("--bandwidth-gbps", type=float, default=1.0,
                   help="link bandwidth, Gbit/s (default 1)")
    p.add_argument("--out", default="", help="write output to this file")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="report format (default json)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fedgauss",
                 description=__doc__,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="pooled exponential-search fit")
    _add_common(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("fit-brent", help="Brent baseline fit")
    _add_common(p)
    p.set_defaults(func=_cmd_fit_brent)

    p = sub.add_parser("fedfit", help="federated fit over simulated clients")
    _add_common(p)
    p.add_argument("--transcript-dir", default="",
                   help="write one transcript file per feature here")
    p.set_defaults(func=_cmd_fedfit)

    p = sub.add_parser("audit", help="replay transcripts from lambda*")
    p.add_argument("transcripts", nargs="+", help="transcript files")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("bench", help="estimate protocol cost")
    _add_common(p, with_input=False)
    p.add_argument("--features", type=int, default=1,
                   help="feature count for the bandwidth term")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gen", help="generate synthetic data")
    p.add_argument("kind", choices=("skewnormal", "regression"))
    p.add_argument("--n", type=int, default=200, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=5.0,
                   help="skewnormal shape (default 5)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("experiment", help="run a canned experiment")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    _add_common(p, with_input=False)
    p.add_argument("--input", default="",
                   help="feature CSV overriding the bundled corpus")
    p.add_argument("--repeats", type=int, default=200,
                   help="seeded repeats for the regression experiment")
    p.add_argument("--limit", type=int, default=0,
                   help="cap corpus features (0 = all)")
    p.set_defaults(func=_cmd_experiment)

    return ap


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FedgaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
