"""Command-line driver, expression parser, scans and reports."""

from .parser import parse_poly, parse_rational
from .scan import ScanConfig, ScanSummary, bound_check, decay_report, run_scan
from .verify import verify_suite

__all__ = [
    "ScanConfig",
    "ScanSummary",
    "bound_check",
    "decay_report",
    "parse_poly",
    "parse_rational",
    "run_scan",
    "verify_suite",
]
