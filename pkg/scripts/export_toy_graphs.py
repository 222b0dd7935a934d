#!/usr/bin/env python3
"""Write the three desk-scale graphs to edge-list files.

Produces toy_cayley.txt (256 vertices), toy_incidence.txt (128
vertices) and toy_quotient.txt (8 vertices) in the current directory,
or under the directory given as the only argument.
"""

import os
import sys

from mixdih.cli import main

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    os.makedirs(outdir, exist_ok=True)
    jobs = [
        ("cayley", "toy_cayley.txt"),
        ("incidence", "toy_incidence.txt"),
        ("quotient", "toy_quotient.txt"),
    ]
    status = 0
    for kind, fname in jobs:
        path = os.path.join(outdir, fname)
        status = max(status, main(["graph", kind, "--emit-graph", path]))
        print(f"wrote {path}")
    raise SystemExit(status)
