"""
File formats: parameter input, JSON reports and CSV tables.

Every output carries ``schema_version``. JSON is written with sorted keys and
CSV rows in a fixed order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .model import InvalidParamsError, ModelParams

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ("value", "status", "y_hat_i", "y_hat_m", "y_n_star", "y_i_star", "y_m_star", "y_s_star",
                 "stable_set", "unstable_set", "config_index", "config_label", "threshold_order")
TRANSITION_COLUMNS = ("left", "right", "before", "after")
SIGN_COLUMNS = ("target", "parameter", "rho", "kappa", "theta", "mu", "beta", "delta", "lambda", "h",
                "predicted", "basis", "limit_point", "difference", "observed", "verdict", "reason")
TERMINAL_COLUMNS = ("run", "terminal_y", "assigned")


def load_params(source: str) -> ModelParams:
    """Parameters from a JSON file path or an inline JSON object."""
    text = source
    path = Path(source)
    if not source.lstrip().startswith("{"):
        try:
            text = path.read_text()
        except OSError as exc:
            raise InvalidParamsError([f"cannot read parameter file {source!r}: {exc.strerror}"]) from None
    return ModelParams.from_json(text)


def _plain(obj):
    # numpy scalars and arrays, tuples, sets and dataclass-like objects to JSON types
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(payload: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, **_plain(payload)}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(dumps(payload))
    return path


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
    return path


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def sweep_rows(result) -> list:
    rows = []
    for pt in result.points:
        row = {"value": pt.value, "status": pt.status}
        a = pt.analysis
        if a is not None:
            row.update(a.qss.as_dict())
            row.update(y_hat_i=a.thresholds.y_hat_i, y_hat_m=a.thresholds.y_hat_m,
                       stable_set=";".join(s.name for s in a.stable_set),
                       unstable_set=";".join(s.name for s in a.unstable_set),
                       config_index=a.configuration.index, config_label=a.configuration.label(),
                       threshold_order=a.configuration.threshold_order)
        rows.append(row)
    return rows


def transition_rows(result) -> list:
    return [{"left": t.left, "right": t.right, "before": ";".join(t.before), "after": ";".join(t.after)}
            for t in result.transitions]


def sweep_payload(result) -> dict:
    return {"parameter": result.parameter, "base": result.base.as_dict(),
            "points": sweep_rows(result), "transitions": transition_rows(result)}


def terminal_rows(dist) -> list:
    return [{"run": i, "terminal_y": float(y), "assigned": lab}
            for i, (y, lab) in enumerate(zip(dist.terminal_y, dist.labels))]
