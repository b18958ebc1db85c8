# scripts/thrifty_runner.py
"""Run every verification suite and print one line per suite."""
import sys

from thrifty.config import configure_logging
from thrifty.verification import SUITES, run_suite

configure_logging("WARNING")

failed = False
for name in SUITES:
    report = run_suite(name)
    bad = [c.name for c in report.checks if not c.passed]
    failed = failed or bool(bad)
    status = "ok" if not bad else "FAILED: " + ", ".join(bad)
    print(f"{name:16s} {len(report.checks):3d} checks  {status}")

sys.exit(1 if failed else 0)
