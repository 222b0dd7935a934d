#!/usr/bin/env python3
"""Run the verification battery and write a JSON report.

Equivalent to `mixdih verify all --report verification_report.json`.
A different target (h56, p59, toy2) may be given as the first
argument; any remaining flags are passed through.
"""

import sys

from mixdih.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    target = "all"
    if extra and not extra[0].startswith("-"):
        target = extra.pop(0)
    if not any(a.startswith("--report") for a in extra):
        extra = ["--report", "verification_report.json"] + extra
    raise SystemExit(main(["verify", target] + extra))
