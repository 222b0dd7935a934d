#!/usr/bin/env python3
"""Run the regular-subgroup descent and print the per-level summary.

Exit status 0 means the final level is empty, certifying that no
subgroup of the big extension acts regularly on the coset space of the
point stabilizer, hence the incidence graph is not a Cayley graph.

Checkpoints go to search_checkpoint.txt by default; pass --resume to
pick up a previous run.  Extra flags are handed to `mixdih search`.
"""

import sys

from mixdih.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    if not any(a.startswith("--checkpoint") for a in extra):
        extra = ["--checkpoint", "search_checkpoint.txt"] + extra
    raise SystemExit(main(["search"] + extra))
