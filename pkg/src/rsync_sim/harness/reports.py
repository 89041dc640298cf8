"""CSV and JSON result files."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict

from ..tasks import TrialReport
from .config import Scenario, scenario_to_dict
from .runner import SweepReport

RESULTS_HEADER = ("scenario", "policy", "trial", "seed", "finished", "max_error_mm", "cumulative_error_mm",
                  "duration_s", "attempts", "successes")
SWEEP_HEADER = ("param", "value", "policy", "n_trials", "finish_rate", "error_mean", "error_median",
                "error_max", "error_std", "duration_mean", "success_rate")
CSV = "csv"
JSON = "json"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(list(v))
    return str(v)


def _row(r: TrialReport) -> list:
    return [r.scenario, r.policy, r.trial, r.seed, r.finished, r.max_error, r.cumulative_error, r.duration,
            r.attempts, r.successes]


def results_csv(reports: list[TrialReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in reports:
        w.writerow([_cell(v) for v in _row(r)])
    return buf.getvalue()


def _json_float(v):
    # NaN is not valid JSON
    return None if isinstance(v, float) and not math.isfinite(v) else v


def results_json(reports: list[TrialReport], scenario: Scenario | None = None) -> str:
    trials = []
    for r in reports:
        d = r.to_dict()
        trials.append({k: _json_float(v) for k, v in d.items()})
    doc = {"scenario": None if scenario is None else scenario_to_dict(scenario), "trials": trials}
    return json.dumps(doc, indent=2) + "\n"


def write_report(reports: list[TrialReport], path, format: str = CSV, scenario: Scenario | None = None) -> None:
    """Write trial reports; JSON output also embeds the resolved scenario."""
    if format == CSV:
        text = results_csv(reports)
    elif format == JSON:
        text = results_json(reports, scenario)
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _parse(v: str, kind):
    if v == "":
        return None
    if kind is bool:
        return v == "true"
    return kind(v)


def read_results_csv(path) -> list[dict]:
    kinds = (str, str, int, int, bool, float, float, float, int, int)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != RESULTS_HEADER:
        raise ValueError(f"{path}: not a results file")
    return [{h: _parse(v, k) for h, v, k in zip(RESULTS_HEADER, row, kinds)} for row in rows[1:]]


def sweep_csv(sw: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for a in sw.rows:
        d = asdict(a)
        w.writerow([sw.param] + [_cell(d[h]) for h in SWEEP_HEADER[1:]])
    return buf.getvalue()


def write_sweep(sw: SweepReport, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv(sw))
