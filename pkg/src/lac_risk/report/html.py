"""HTML report generation."""
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from lac_risk.experiments import METRICS, SummaryRow
from .cli import best_flags

try:
    from jinja2 import Template
except ImportError:
    Template = None  # type: ignore


HTML_TEMPLATE = """
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>LAC Experiment Report - {{ report_date }}</title>
    <style>
        body {
            font-family: -apple-system, BlinkMacSystemFont, 'Segoe UI', Roboto, 'Helvetica Neue', Arial, sans-serif;
            line-height: 1.6;
            color: #333;
            background: #f5f5f5;
            padding: 20px;
        }

        .container {
            max-width: 1200px;
            margin: 0 auto;
            background: white;
            padding: 40px;
            border-radius: 8px;
            box-shadow: 0 2px 4px rgba(0,0,0,0.1);
        }

        h2 {
            margin-top: 30px;
            border-bottom: 2px solid #dbdbdb;
            padding-bottom: 8px;
        }

        .meta {
            color: #8e8e8e;
            font-size: 14px;
        }

        table {
            width: 100%;
            border-collapse: collapse;
            margin-top: 15px;
        }

        th {
            background: #fafafa;
            padding: 10px;
            text-align: left;
            border-bottom: 2px solid #dbdbdb;
        }

        td {
            padding: 10px;
            border-bottom: 1px solid #efefef;
            font-variant-numeric: tabular-nums;
        }

        td.best {
            font-weight: 700;
            color: #0b7a3e;
        }

        .failed {
            color: #ed4956;
        }
    </style>
</head>
<body>
    <div class="container">
        <h1>LAC Experiment Report</h1>
        <div class="meta">Generated {{ report_date }} from {{ source }}{% if skipped %}, {{ skipped }} malformed line(s) skipped{% endif %}</div>

        <h2>Summary</h2>
        <table>
            <tr>
                {% if with_axis %}<th>{{ axis }}</th>{% endif %}
                <th>Method</th><th>Runs</th><th>Failed</th>
                {% for metric in metrics %}<th>{{ metric }}</th>{% endfor %}
            </tr>
            {% for row in rows %}
            <tr>
                {% if with_axis %}<td>{{ row.value }}</td>{% endif %}
                <td>{{ row.method }}</td>
                <td>{{ row.runs }}</td>
                <td{% if row.failed %} class="failed"{% endif %}>{{ row.failed }}</td>
                {% for cell in row.cells %}
                <td{% if cell.best %} class="best"{% endif %}>{{ "%.4f"|format(cell.mean) }} &plusmn; {{ "%.4f"|format(cell.std) }}</td>
                {% endfor %}
            </tr>
            {% endfor %}
        </table>

        {% if failures %}
        <h2>Failed runs</h2>
        <table>
            <tr><th>Method</th><th>Seed</th><th>Error</th></tr>
            {% for line in failures %}
            <tr><td>{{ line.method }}</td><td>{{ line.seed }}</td><td class="failed">{{ line.error }}</td></tr>
            {% endfor %}
        </table>
        {% endif %}
    </div>
</body>
</html>
"""


def generate_results_html(
    rows: list[SummaryRow],
    lines: list[dict[str, Any]],
    output_path: Optional[Path] = None,
    source: str = "results.jsonl",
    skipped: int = 0,
) -> Path:
    """Render the summary table and failed runs to an HTML file."""
    if Template is None:
        raise ImportError("jinja2 is required for HTML reports. Install with: pip install jinja2")

    flags = best_flags(rows)
    axes = {line.get("axis") for line in lines if line.get("axis")}
    table = [
        {
            "value": "" if row.axis_value is None else f"{row.axis_value:g}",
            "method": row.method,
            "runs": row.runs,
            "failed": row.failed,
            "cells": [
                {"mean": row.stats[m][0], "std": row.stats[m][1], "best": flags.get((i, m), False)}
                for m in METRICS
            ],
        }
        for i, row in enumerate(rows)
    ]

    html = Template(HTML_TEMPLATE).render(
        report_date=datetime.now().strftime("%Y-%m-%d %H:%M"),
        source=source,
        skipped=skipped,
        with_axis=any(row.axis_value is not None for row in rows),
        axis=", ".join(sorted(axes)) or "value",
        metrics=METRICS,
        rows=table,
        failures=[line for line in lines if line.get("status") != "ok"],
    )

    if output_path is None:
        output_path = Path("reports") / f"{datetime.now().strftime('%Y-%m-%d')}.html"
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(html, encoding="utf-8")
    return output_path
