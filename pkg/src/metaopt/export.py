"""CSV writers for trajectories, errors, learning curves and comparisons."""

import csv
import io
from pathlib import Path

from .errors import InputError


def _num(v):
    return f"{float(v):.17g}"


def _write(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def export_trajectory_csv(report, task, path):
    """One row per horizon step t: the state reached after control t and its reference."""
    rows = []
    for t in range(task.horizon + 1):
        x, y, psi = report.states[t + 1]
        rx, ry = report.references[t]
        rows.append([t, _num(x), _num(y), _num(psi), _num(rx), _num(ry),
                     _num(report.errors[t])])
    _write(path, ["t", "x", "y", "psi", "ref_x", "ref_y", "err"], rows)


def export_errors_csv(reports, path):
    """``reports`` is a list of (task_index, EvalReport) pairs."""
    rows = [[j, t, _num(e)] for j, rep in reports for t, e in enumerate(rep.errors)]
    _write(path, ["task", "t", "err"], rows)


def export_learning_curve(curve, path):
    _write(path, ["iteration", "mean_return", "return_std"],
           [[i, _num(m), _num(s)] for i, m, s in curve])


def export_meta_curve(curve, path):
    _write(path, ["meta_iteration", "mean_pre_return", "mean_post_return"],
           [[i, _num(a), _num(b)] for i, a, b in curve])


def export_comparison(comp, path, summary_path):
    winners = comp.winners()
    rows = [[j, task.path_kind, *(_num(e) for e in comp.mean_errors[j]), winners[j]]
            for j, task in enumerate(comp.tasks)]
    _write(path, ["task", "path_kind", *comp.methods, "winner"], rows)
    summary, ties = comp.summary()
    srows = [[r["method"], _num(r["mean"]), _num(r["median"]), r["wins"]] for r in summary]
    srows.append(["tie", "", "", ties])
    _write(summary_path, ["method", "mean_error", "median_error", "wins"], srows)


def safe_name(label):
    return label.replace(":", "-")
