"""CLI report formatting."""
import math
from typing import Any, Optional

from lac_risk.core import ThetaEstimate
from lac_risk.experiments import METRICS, SummaryRow

TIE_TOLERANCE = 1e-12


def best_flags(rows: list[SummaryRow]) -> dict[tuple[int, str], bool]:
    """(row index, metric) -> True where the row has the highest mean among rows
    sharing its sweep value. Ties are all flagged."""
    flags: dict[tuple[int, str], bool] = {}
    groups: dict[Optional[float], list[int]] = {}
    for i, row in enumerate(rows):
        groups.setdefault(row.axis_value, []).append(i)
    for members in groups.values():
        for metric in METRICS:
            means = [rows[i].stats[metric][0] for i in members]
            finite = [m for m in means if not math.isnan(m)]
            if not finite:
                continue
            best = max(finite)
            for i, mean in zip(members, means):
                flags[(i, metric)] = not math.isnan(mean) and best - mean <= TIE_TOLERANCE
    return flags


def format_summary_table(rows: list[SummaryRow], skipped: int = 0) -> str:
    """Per-method mean +- std table; '*' marks the best mean per metric."""
    lines = []
    lines.append("=" * 78)
    lines.append("LAC EXPERIMENT SUMMARY")
    lines.append("=" * 78)

    with_axis = any(row.axis_value is not None for row in rows)
    header = f"{'value':>10}  " if with_axis else ""
    header += f"{'method':<14}{'runs':>5}{'fail':>5}"
    for metric in METRICS:
        header += f"  {metric:>18}"
    lines.append(header)
    lines.append("-" * 78)

    flags = best_flags(rows)
    for i, row in enumerate(rows):
        line = f"{_format_value(row.axis_value):>10}  " if with_axis else ""
        line += f"{row.method:<14}{row.runs:>5}{row.failed:>5}"
        for metric in METRICS:
            mean, std = row.stats[metric]
            mark = "*" if flags.get((i, metric)) else " "
            line += f"  {mean:8.4f} +- {std:6.4f}{mark}"
        lines.append(line)

    lines.append("-" * 78)
    lines.append("* best mean per metric")
    if skipped:
        lines.append(f"Skipped {skipped} malformed result line(s)")
    return "\n".join(lines)


def format_metrics(line: dict[str, Any]) -> str:
    """One result line as method, seed and its test metrics."""
    if line.get("status") != "ok":
        return f"{line['method']:<14} seed={line['seed']:<4} failed: {line.get('error', '')}"
    return (
        f"{line['method']:<14} seed={line['seed']:<4} accuracy={line['accuracy']:.4f} "
        f"macro_f1={line['macro_f1']:.4f} auc={line['auc']:.4f}"
    )


def format_theta_curve(estimate: ThetaEstimate) -> str:
    """theta_hat line followed by the (lambda, distance) curve as CSV."""
    lines = [f"theta_hat={estimate.theta!r}", f"bandwidth={estimate.bandwidth!r}", "lambda,distance"]
    for lam, distance in zip(estimate.lambdas, estimate.distances):
        lines.append(f"{lam!r},{distance!r}")
    return "\n".join(lines)


def _format_value(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:g}"
