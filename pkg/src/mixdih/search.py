"""Descent over the maximal-subgroup lattice ruling out regular subgroups.

The chain-extended group acts on the right cosets of its vertex
stabilizer (order 2**6), so a subgroup acting regularly on that coset
space would have index 2**6 and trivial meet with the stabilizer.  Every
overgroup of such a subgroup still covers the coset space, and covering
pins the stabilizer meet exactly: a subgroup of index 2**k covers iff
its meet with the stabilizer has order 2**(6-k).  An index-2 step can
only keep the meet or halve it, so any regular subgroup sits at the
bottom of a six-step chain of maximal subgroups whose stabilizer meets
halve at every level.  The run expands those chains breadth-first with
canonical deduplication; an empty sixth level proves that no regular
subgroup exists.

Levels hold survivors as canonical IGS member tuples (not Subgroup
objects) to keep the per-survivor footprint at a few dozen ints.  The
per-level expansion is an independent map over survivors; with more
than one worker it runs on a forked process pool and the dedup map is
merged in submission order, so counts do not depend on the worker
count.
"""

import multiprocessing
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .pcgroup import (
    PcPresentation,
    Subgroup,
    frattini,
    maximal_subgroups,
    subgroup_igs,
)

Rows = Tuple[int, ...]


class MemoryBudgetExceeded(RuntimeError):
    """A level outgrew the configured survivor cap."""

    def __init__(self, depth: int, cap: int):
        super().__init__(f"survivor cap {cap} exceeded at depth {depth}")
        self.depth = depth
        self.cap = cap


@dataclass
class SearchConfig:
    levels: int = 6
    max_survivors: int = 10_000_000
    checkpoint_path: Optional[str] = None
    resume_path: Optional[str] = None
    threads: Optional[int] = None  # None reads DF_THREADS, default 1
    log: Optional[Callable[[str], None]] = None

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        return max(1, int(os.environ.get("DF_THREADS", "1")))


@dataclass
class SearchLevel:
    """One breadth-first level: all live subgroups of index 2**depth.

    survivors[i] is the canonical IGS of a subgroup and meets[i] the IGS
    of its meet with the vertex stabilizer; the meet order is
    2**required_meet_log for every survivor t, which together with the
    order 2**(n-depth) certifies t * stab = whole group.
    """

    depth: int
    required_meet_log: int
    survivors: List[Rows]
    meets: List[Rows]
    candidates: int = 0

    def survivor_subgroups(self, group: PcPresentation) -> List[Subgroup]:
        return [Subgroup(group, rows, canonical=True) for rows in self.survivors]


@dataclass
class SearchReport:
    stab_order_log: int
    start_depth: int
    required_meet_logs: List[int] = field(default_factory=list)
    survivor_counts: List[int] = field(default_factory=list)
    candidate_counts: List[int] = field(default_factory=list)
    final_survivors: List[Rows] = field(default_factory=list)
    wall_seconds: float = 0.0
    no_regular_subgroup: bool = False


# ── the acting group's distinguished subgroups ──────────────────────────────


def stab_subgroup(p: PcPresentation) -> Subgroup:
    """Stabilizer of the base vertex: the x block joined with the square
    of the chain generator."""
    gens = [1 << p.names.index(nm) for nm in ("x1", "x2", "x3", "x4", "r2")]
    return subgroup_igs(p, gens)


def full_group(p: PcPresentation) -> Subgroup:
    return Subgroup(p, [1 << i for i in range(p.n)], canonical=True)


def trivial_subgroup(p: PcPresentation) -> Subgroup:
    return Subgroup(p, [], canonical=True)


def root_level(p: PcPresentation, stab: Subgroup) -> SearchLevel:
    return SearchLevel(
        depth=0,
        required_meet_log=stab.order_log,
        survivors=[full_group(p).members],
        meets=[stab.members],
    )


# ── one descent step ─────────────────────────────────────────────────────────


def _halved_meet(group: PcPresentation, mx: Subgroup, t: Subgroup) -> Subgroup:
    """t meet mx when the meet has index exactly 2 in t.

    The members of t inside mx, together with f*m for a fixed outside
    member f and every other outside member m, generate the kernel of
    the quotient map t -> t/(t meet mx) of order 2.
    """
    ins: List[int] = []
    outs: List[int] = []
    for m in t.members:
        (ins if mx.contains(m) else outs).append(m)
    f = outs[0]
    gens = ins + [group.multiply(f, m) for m in outs[1:]]
    meet = subgroup_igs(group, gens)
    if meet.order_log != t.order_log - 1:
        raise AssertionError("stabilizer meet did not halve")
    return meet


_FORK: Dict[str, object] = {}


def _expand_one(payload: Tuple[Rows, Rows]) -> Tuple[int, List[Tuple[Rows, Rows]]]:
    """Expand one survivor: filtered maximal subgroups plus their meets."""
    group: PcPresentation = _FORK["group"]
    req: int = _FORK["req"]
    rows, meet_rows = payload
    m = Subgroup(group, rows, canonical=True)
    t = Subgroup(group, meet_rows)
    out: List[Tuple[Rows, Rows]] = []
    seen = 0
    phi = frattini(group, m)
    for mx in maximal_subgroups(group, m, phi):
        seen += 1
        if t.order_log == req + 1:
            # meet must halve: reject branches keeping the whole meet
            if mx.contains_subgroup(t):
                continue
            tn = _halved_meet(group, mx, t)
        elif t.order_log == req:
            # meet must persist unchanged
            if not mx.contains_subgroup(t):
                continue
            tn = t
        else:
            continue
        out.append((mx.canonicalize().members, tn.members))
    return seen, out


def descend(group: PcPresentation, level: SearchLevel, config: SearchConfig) -> SearchLevel:
    """All maximal subgroups of the survivors whose stabilizer meet drops
    to the next required order, deduplicated by canonical IGS."""
    req = level.required_meet_log - 1 if level.required_meet_log > 0 else 0
    _FORK["group"] = group
    _FORK["req"] = req
    payload = list(zip(level.survivors, level.meets))
    workers = config.worker_count()
    if workers > 1 and len(payload) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            results = pool.map(_expand_one, payload, chunksize=1)
    else:
        results = [_expand_one(item) for item in payload]
    new: Dict[Rows, Rows] = {}
    candidates = 0
    for seen, pairs in results:
        candidates += seen
        for key, meet_rows in pairs:
            if key not in new:
                new[key] = meet_rows
                if len(new) > config.max_survivors:
                    raise MemoryBudgetExceeded(level.depth + 1, config.max_survivors)
    return SearchLevel(
        depth=level.depth + 1,
        required_meet_log=req,
        survivors=list(new.keys()),
        meets=list(new.values()),
        candidates=candidates,
    )


# ── checkpoints ──────────────────────────────────────────────────────────────


def write_checkpoint(path, level: SearchLevel) -> None:
    lines = [f"level {level.depth} count {len(level.survivors)}"]
    for rows in level.survivors:
        lines.append(" ".join(format(m, "x") for m in rows))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> Tuple[int, List[Rows]]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("empty checkpoint")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "level" or head[2] != "count":
        raise ValueError(f"bad checkpoint header {lines[0]!r}")
    depth, count = int(head[1]), int(head[3])
    rows = [tuple(int(tok, 16) for tok in ln.split()) for ln in lines[1:]]
    if len(rows) != count:
        raise ValueError("checkpoint row count mismatch")
    return depth, rows


def _rebuild_level(
    p: PcPresentation, stab: Subgroup, depth: int, rows_list: List[Rows]
) -> SearchLevel:
    """Reattach stabilizer meets to checkpointed survivors."""
    req = max(stab.order_log - depth, 0)
    meets: List[Rows] = []
    stab_elems = stab.elements()
    for rows in rows_list:
        m = Subgroup(p, rows, canonical=True)
        meet = subgroup_igs(p, [w for w in stab_elems if m.contains(w)])
        if meet.order_log != req:
            raise ValueError("checkpoint inconsistent with the stabilizer")
        meets.append(meet.members)
    return SearchLevel(depth, req, list(rows_list), meets)


# ── the full run ─────────────────────────────────────────────────────────────


def run_search(
    p: PcPresentation,
    config: Optional[SearchConfig] = None,
    stab: Optional[Subgroup] = None,
) -> SearchReport:
    """Breadth-first descent from the whole group; empty final level means
    no subgroup acts regularly on the stabilizer's coset space."""
    config = config or SearchConfig()
    stab = stab if stab is not None else stab_subgroup(p)
    t0 = time.perf_counter()
    if config.resume_path:
        depth, rows_list = load_checkpoint(config.resume_path)
        level = _rebuild_level(p, stab, depth, rows_list)
    else:
        level = root_level(p, stab)
    report = SearchReport(stab_order_log=stab.order_log, start_depth=level.depth)
    while level.depth < config.levels:
        level = descend(p, level, config)
        report.required_meet_logs.append(level.required_meet_log)
        report.survivor_counts.append(len(level.survivors))
        report.candidate_counts.append(level.candidates)
        if config.log:
            config.log(
                f"depth {level.depth}: {len(level.survivors)} survivors "
                f"of {level.candidates} candidates (meet 2^{level.required_meet_log})"
            )
        if config.checkpoint_path:
            write_checkpoint(config.checkpoint_path, level)
    report.final_survivors = list(level.survivors)
    report.wall_seconds = time.perf_counter() - t0
    report.no_regular_subgroup = level.depth == config.levels and not level.survivors
    return report
