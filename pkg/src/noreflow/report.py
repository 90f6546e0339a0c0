"""JSON / CSV serialization of evaluation artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .model.evaluation import EvaluationReport, FoldPrediction
from .stats import METRIC_NAMES, TestResult, classification_metrics

SCHEMA_VERSION = 1
NA = "NA"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, TestResult):
        return _plain(obj.as_dict())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def report_to_dict(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "evaluation_report",
        "config": _plain(report.config),
        "metrics": _plain(report.metrics),
        "p_vs_baseline": _plain(report.p_vs_baseline) if report.p_vs_baseline else None,
        "folds": [
            {"patient_id": f.patient_id, "true_label": f.true_label, "score": f.score,
             "view_scores": _plain(f.view_scores)}
            for f in report.folds
        ],
        "importances": _plain(report.importances),
        "subgroups": _plain(report.subgroups),
        "ablations": _plain(report.ablations),
    }


def report_from_dict(doc):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {doc.get('schema_version')!r}", "schema_version")
    folds = [FoldPrediction(f["patient_id"], int(f["true_label"]), float(f["score"]), dict(f["view_scores"]))
             for f in doc["folds"]]
    p = doc.get("p_vs_baseline")
    test = TestResult(p["statistic"], p["p_value"], p["method"], p["alternative"], tuple(p["flags"])) if p else None
    return EvaluationReport(doc["config"], folds, doc["metrics"], doc.get("importances") or {}, test,
                            doc.get("subgroups"), doc.get("ablations"))


def dump_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(obj), indent=2, allow_nan=True) + "\n", encoding="utf-8")
    return path


def write_report(report, path):
    return dump_json(report_to_dict(report), path)


def read_report(path):
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _cell(value):
    if value is None:
        return NA
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(rows, path, columns=None):
    """CSV with one row per dict; ``None`` is written as NA."""
    rows = list(rows)
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r.get(c)) for c in columns])
    return path


def write_folds_csv(report, path):
    views = sorted({v for f in report.folds for v in f.view_scores})
    rows = []
    for f in report.folds:
        row = {"patient_id": f.patient_id, "true_label": f.true_label, "score": f.score}
        row.update({f"score.{v}": f.view_scores.get(v) for v in views})
        rows.append(row)
    return write_rows(rows, path, ["patient_id", "true_label", "score", *[f"score.{v}" for v in views]])


def read_folds_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(r["patient_id"], int(r["true_label"]), float(r["score"])) for r in reader]


def metrics_from_folds_csv(path, threshold=0.5):
    folds = read_folds_csv(path)
    return classification_metrics([f[2] for f in folds], [f[1] for f in folds], threshold)


def write_metrics_csv(report, path):
    row = {"feature_set": "+".join(report.config.get("feature_sets", [])) or "?"}
    row.update({m: report.metrics.get(m) for m in METRIC_NAMES})
    if report.p_vs_baseline is not None:
        row["p_vs_baseline"] = report.p_vs_baseline.p_value
    return write_rows([row], path)


def write_importances_csv(report, path):
    rows = [{"model": unit, "feature": name, "importance": value}
            for unit, table in report.importances.items() for name, value in table.items()]
    return write_rows(rows, path, ["model", "feature", "importance"])
