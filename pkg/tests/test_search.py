import pytest

from mixdih import search as se
from mixdih.graphs import letter_subgroups
from mixdih.pcgroup import Subgroup, frattini, small_intersection_order, subgroup_igs


@pytest.fixture(scope="module")
def stab(p59):
    return se.stab_subgroup(p59)


@pytest.fixture(scope="module")
def level1(p59, stab):
    return se.descend(p59, se.root_level(p59, stab), se.SearchConfig())


def test_stab_shape(p59, stab):
    assert stab.order == 64
    assert stab.contains(1 << p59.names.index("x1"))
    assert not stab.contains(1 << p59.names.index("r"))


def test_stab_meets_the_normal_part_in_the_x_block(p59, stab):
    inner = subgroup_igs(p59, [1 << i for i in range(3, p59.n)])
    meet = [w for w in stab.elements() if inner.contains(w)]
    xblock = subgroup_igs(p59, [1 << p59.names.index(f"x{i}") for i in range(1, 5)])
    assert len(meet) == 16
    assert sorted(meet) == sorted(xblock.elements())


def test_level1_counts(level1):
    # rank of the top quotient is 2, so three maximal subgroups; the one
    # containing the whole stabilizer image drops out
    assert level1.candidates == 3
    assert len(level1.survivors) == 2
    assert level1.required_meet_log == 5


def test_level1_survivor_invariants(p59, stab, level1):
    phi_top = frattini(p59, se.full_group(p59))
    for rows, meet_rows in zip(level1.survivors, level1.meets):
        sub = Subgroup(p59, rows, canonical=True)
        assert sub.order_log == 58
        assert sub.contains_subgroup(phi_top)
        meet = Subgroup(p59, meet_rows)
        assert meet.order_log == 5
        assert small_intersection_order(p59, sub, stab) == 32
        for w in meet.members:
            assert stab.contains(w) and sub.contains(w)


def test_level1_survivors_are_distinct(p59, level1):
    a, b = (Subgroup(p59, rows, canonical=True) for rows in level1.survivors)
    assert a.digest() != b.digest()
    assert not (a.contains_subgroup(b) and b.contains_subgroup(a))


def test_descend_is_deterministic(p59, stab, level1):
    again = se.descend(p59, se.root_level(p59, stab), se.SearchConfig())
    assert again.survivors == level1.survivors
    assert again.meets == level1.meets


def test_trivial_stab_keeps_the_lattice(p59):
    # with a trivial stabilizer the meet requirement is vacuous, so the
    # filter keeps every maximal subgroup: the lattice itself is not what
    # empties the real run
    cfg = se.SearchConfig(levels=1)
    rep = se.run_search(p59, cfg, stab=se.trivial_subgroup(p59))
    assert rep.survivor_counts == [3]
    assert not rep.no_regular_subgroup


def test_required_meet_sequence(p59, stab):
    level = se.root_level(p59, stab)
    assert level.required_meet_log == 6
    assert [max(6 - k, 0) for k in range(1, 7)] == [5, 4, 3, 2, 1, 0]


# ── desk-scale runs on the 2+2-letter group ──────────────────────────────────


@pytest.fixture(scope="module")
def toy_stab(toy):
    xsub, _ = letter_subgroups(toy)
    return xsub


def test_toy_descent_finds_regular_subgroups(toy, toy_stab):
    # the toy group acting on its x-block cosets has plenty of regular
    # subgroups, e.g. the y block joined with the derived subgroup, so a
    # two-level descent must keep survivors
    cfg = se.SearchConfig(levels=2)
    rep = se.run_search(toy, cfg, stab=toy_stab)
    assert rep.survivor_counts[-1] > 0
    assert not rep.no_regular_subgroup
    y_and_derived = subgroup_igs(
        toy, [1 << 2, 1 << 3] + [1 << (4 + t) for t in range(4)]
    )
    assert y_and_derived.order_log == 6
    assert y_and_derived.digest() in {
        Subgroup(toy, rows, canonical=True).digest() for rows in rep.final_survivors
    }


def test_toy_descent_matches_brute_filter(toy, toy_stab):
    # oracle: every subgroup of index 2 with halved stabilizer meet
    cfg = se.SearchConfig(levels=1)
    rep = se.run_search(toy, cfg, stab=toy_stab)
    from mixdih.pcgroup import maximal_subgroups

    full = se.full_group(toy)
    keep = []
    for mx in maximal_subgroups(toy, full):
        meet = sum(1 for w in toy_stab.elements() if mx.contains(w))
        if meet == 2:
            keep.append(mx.canonicalize().members)
    assert sorted(keep) == sorted(rep.final_survivors)


def test_parallel_matches_serial(toy, toy_stab):
    serial = se.run_search(toy, se.SearchConfig(levels=2, threads=1), stab=toy_stab)
    forked = se.run_search(toy, se.SearchConfig(levels=2, threads=2), stab=toy_stab)
    assert serial.survivor_counts == forked.survivor_counts
    assert serial.final_survivors == forked.final_survivors


def test_checkpoint_roundtrip(tmp_path, toy, toy_stab):
    path = tmp_path / "descent.txt"
    one = se.run_search(toy, se.SearchConfig(levels=2, checkpoint_path=path), stab=toy_stab)
    depth, rows = se.load_checkpoint(path)
    assert depth == 2 and rows == one.final_survivors

    # replay the first level only, then resume from the file
    se.write_checkpoint(
        path,
        se.descend(toy, se.root_level(toy, toy_stab), se.SearchConfig()),
    )
    resumed = se.run_search(
        toy, se.SearchConfig(levels=2, resume_path=path), stab=toy_stab
    )
    assert resumed.start_depth == 1
    assert resumed.final_survivors == one.final_survivors


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("once upon a time\n", encoding="ascii")
    with pytest.raises(ValueError):
        se.load_checkpoint(path)


def test_resume_validates_meets(tmp_path, toy, toy_stab):
    # a checkpoint whose survivors do not meet the stabilizer correctly
    # must be rejected instead of silently descending
    path = tmp_path / "wrong.txt"
    level = se.descend(toy, se.root_level(toy, toy_stab), se.SearchConfig())
    level.depth = 2  # lie about the depth: required meet drops to 1
    se.write_checkpoint(path, level)
    with pytest.raises(ValueError):
        se.run_search(toy, se.SearchConfig(levels=3, resume_path=path), stab=toy_stab)


def test_budget_abort(toy, toy_stab):
    with pytest.raises(se.MemoryBudgetExceeded):
        se.run_search(toy, se.SearchConfig(levels=1, max_survivors=1), stab=toy_stab)
