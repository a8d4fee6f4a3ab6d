"""Text and HTML reports."""
from .cli import best_flags, format_metrics, format_summary_table, format_theta_curve
from .html import generate_results_html

__all__ = [
    "best_flags",
    "format_metrics",
    "format_summary_table",
    "format_theta_curve",
    "generate_results_html",
]
