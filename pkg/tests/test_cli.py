"""CLI surface: in-process invocations of every subcommand and exit code."""
import json

import numpy as np
import pytest

from fedgauss import DomainError
from fedgauss.cli import (
    EXIT_DATA,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    emit_report,
    ingest_csv,
    main,
    parse_report_csv,
    parse_report_json,
)
from fedgauss.datasets import collapse_values
from fedgauss.experiments import ExperimentReport


def write_csv(path, columns, header=None):
    lines = []
    if header:
        lines.append(",".join(header))
    n = len(columns[0])
    for i in range(n):
        lines.append(",".join(repr(float(c[i])) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture()
def feature_csv(tmp_path, rng):
    cols = [rng.lognormal(0.0, 0.5, 80), rng.normal(2.0, 1.0, 80)]
    return write_csv(tmp_path / "feats.csv", cols, header=["a", "b"])


# ---------------------------------------------------------------------------
# ingest_csv


def test_ingest_reads_columns(feature_csv):
    feats = ingest_csv(feature_csv, header=True)
    assert [f.name for f in feats] == ["a", "b"]
    assert all(f.values.size == 80 for f in feats)


def test_ingest_without_header_names_columns(tmp_path, rng):
    path = write_csv(tmp_path / "h.csv", [rng.normal(size=10)])
    (feat,) = ingest_csv(path)
    assert feat.name == "col001"


def test_ingest_drops_constant_columns_with_warning(tmp_path, rng, caplog):
    path = write_csv(
        tmp_path / "c.csv", [rng.normal(size=12), np.ones(12)], header=["x", "k"]
    )
    with caplog.at_level("WARNING", logger="fedgauss.cli"):
        feats = ingest_csv(path, header=True)
    assert [f.name for f in feats] == ["x"]
    assert any("dropped" in r.message for r in caplog.records)


def test_ingest_bad_cell_aborts_unless_skipped(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0\nx,3.0\n4.0,5.0\n7.0,8.0\n")
    with pytest.raises(DomainError):
        ingest_csv(str(path))
    feats = ingest_csv(str(path), skip_bad_rows=True)
    assert all(f.values.size == 3 for f in feats)


def test_ingest_ragged_row_aborts_unless_skipped(tmp_path):
    path = tmp_path / "rag.csv"
    path.write_text("1.0,2.0\n3.0\n4.0,5.0\n0.0,9.0\n")
    with pytest.raises(DomainError):
        ingest_csv(str(path))
    feats = ingest_csv(str(path), skip_bad_rows=True)
    assert all(f.values.size == 3 for f in feats)


def test_ingest_missing_file_and_empty(tmp_path):
    with pytest.raises(DomainError):
        ingest_csv(str(tmp_path / "nope.csv"))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DomainError):
        ingest_csv(str(empty))


# ---------------------------------------------------------------------------
# report serialization


def sample_report():
    return ExperimentReport(
        name="fit",
        config={"t_max": 5, "seed": 0},
        records=({"feature": "a", "lambda": 0.5, "n": 4},
                 {"feature": "b", "lambda": -1.25, "n": 4}),
        aggregates=(),
    )


def test_report_json_roundtrip():
    text = emit_report(sample_report(), "json")
    back = parse_report_json(text)
    assert back["name"] == "fit"
    assert back["records"][1]["lambda"] == -1.25


def test_report_csv_roundtrip_and_self_description():
    text = emit_report(sample_report(), "csv")
    assert text.startswith("#{")
    back = parse_report_csv(text)
    assert back["name"] == "fit"
    assert back["config"]["t_max"] == 5
    assert back["records"] == [
        {"feature": "a", "lambda": 0.5, "n": 4},
        {"feature": "b", "lambda": -1.25, "n": 4},
    ]


def test_report_formats_hold_identical_records():
    j = parse_report_json(emit_report(sample_report(), "json"))
    c = parse_report_csv(emit_report(sample_report(), "csv"))
    assert j["records"] == c["records"]
    with pytest.raises(DomainError):
        emit_report(sample_report(), "yaml")


# ---------------------------------------------------------------------------
# subcommands (in-process main)


def test_fit_subcommand(feature_csv, capsys):
    code = main(["fit", feature_csv, "--header", "--tmax", "25"])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["name"] == "fit"
    assert [r["feature"] for r in out["records"]] == ["a", "b"]
    lam_a = out["records"][0]["lambda"]
    assert 0.0 > lam_a > -2.0  # lognormal wants a left-shifting transform


def test_fit_deterministic_bytes(feature_csv, capsys):
    main(["fit", feature_csv, "--header"])
    first = capsys.readouterr().out
    main(["fit", feature_csv, "--header"])
    assert capsys.readouterr().out == first


def test_fit_brent_reports_degeneracy(tmp_path, capsys):
    path = write_csv(tmp_path / "col.csv", [collapse_values()])
    code = main(["fit-brent", str(path)])
    assert code == EXIT_OK
    (rec,) = json.loads(capsys.readouterr().out)["records"]
    assert rec["degenerate"] == 1
    assert np.isnan(rec["mu"])


def test_fedfit_then_audit_pipeline(feature_csv, tmp_path, capsys):
    tdir = tmp_path / "transcripts"
    code = main([
        "fedfit", feature_csv, "--header", "--clients", "3", "--tmax", "12",
        "--mode", "debug", "--transcript-dir", str(tdir),
    ])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    for rec in report["records"]:
        assert rec["rounds"] == 18 * 12 + 6
        assert rec["revealed_values"] == 12 + 2
        assert rec["mask_openings"] == 0
    files = sorted(p.name for p in tdir.iterdir())
    assert files == ["a.transcript", "b.transcript"]

    code = main(["audit", str(tdir / "a.transcript"), str(tdir / "b.transcript")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.count(": match") == 2


def test_audit_flags_doctored_transcript(feature_csv, tmp_path, capsys):
    tdir = tmp_path / "t"
    main([
        "fedfit", feature_csv, "--header", "--clients", "3", "--tmax", "8",
        "--mode", "debug", "--transcript-dir", str(tdir),
    ])
    capsys.readouterr()
    target = tdir / "a.transcript"
    lines = target.read_text().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("3,delta,"):
            flipped = "+1" if line.endswith("-1") else "-1"
            lines[i] = f"3,delta,{flipped}"
            break
    target.write_text("\n".join(lines) + "\n")
    code = main(["audit", str(target)])
    assert code == EXIT_NUMERIC
    assert "mismatch(step=3)" in capsys.readouterr().out


def test_bench_reports_cost_model(capsys):
    code = main([
        "bench", "--tmax", "40", "--clients", "3", "--latency-ms", "20",
        "--bandwidth-gbps", "1",
    ])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["rounds"] == 726
    assert out["latency_term_seconds"] == pytest.approx(14.52)
    assert out["wall_seconds"] == pytest.approx(
        out["latency_term_seconds"] + out["bandwidth_term_seconds"]
    )
    assert out["bits_per_pair"] == out["elements"] * 101


def test_gen_then_fit_roundtrip(tmp_path, capsys):
    out_csv = tmp_path / "skew.csv"
    code = main(["gen", "skewnormal", "--n", "150", "--seed", "3",
                 "--out", str(out_csv)])
    assert code == EXIT_OK
    assert out_csv.exists()
    capsys.readouterr()
    code = main(["fit", str(out_csv), "--header", "--tmax", "20"])
    assert code == EXIT_OK
    (rec,) = json.loads(capsys.readouterr().out)["records"]
    assert rec["feature"] == "skewnormal"
    assert rec["n"] == 150


def test_gen_regression_columns(tmp_path, capsys):
    out_csv = tmp_path / "reg.csv"
    assert main(["gen", "regression", "--n", "50", "--out", str(out_csv)]) == EXIT_OK
    header = out_csv.read_text().splitlines()[0]
    assert header == "x1,x2,x3,y"


def test_experiment_subcommand_csv_format(capsys):
    code = main([
        "experiment", "stability", "--limit", "4", "--tmax", "15",
        "--format", "csv",
    ])
    assert code == EXIT_OK
    parsed = parse_report_csv(capsys.readouterr().out)
    assert parsed["name"] == "stability"
    assert len(parsed["records"]) == 5  # 4 corpus features + collapse
    assert parsed["config"]["limit"] == 4


# ---------------------------------------------------------------------------
# exit codes


def test_usage_errors_exit_1(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["fit"]) == EXIT_USAGE  # missing input
    assert main(["experiment", "fig9"]) == EXIT_USAGE
    assert main(["fit", "x.csv", "--format", "xml"]) == EXIT_USAGE
    capsys.readouterr()


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "missing.csv")]) == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\nx,y\n")
    assert main(["fit", str(bad), "--header"]) == EXIT_DATA
    capsys.readouterr()


def test_numeric_errors_exit_3(tmp_path, rng, capsys):
    # values too large for a narrow encoding: overflow inside the protocol
    path = write_csv(tmp_path / "big.csv", [rng.normal(0.0, 1.0, 40) * 1e6])
    code = main([
        "fedfit", str(path), "--clients", "3", "--mode", "debug",
        "--tmax", "3", "--bits-total", "24", "--bits-frac", "10",
    ])
    assert code == EXIT_NUMERIC
    assert "error:" in capsys.readouterr().err


def test_out_flag_writes_file(feature_csv, tmp_path, capsys):
    dest = tmp_path / "report.json"
    code = main(["fit", feature_csv, "--header", "--out", str(dest)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(dest.read_text())["name"] == "fit"
