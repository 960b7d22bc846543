from __future__ import annotations

import itertools
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amalgam_nim.engine import AMALGAMATION, CLASSIC, RESTRICTED, Outcome, legal_moves, nim_sum
from amalgam_nim.solver import (
    BoundSpec,
    GrundySolver,
    GrundyTable,
    MalformedTableError,
    ResourceLimitError,
    RulesetMismatchError,
    TruncatedTableError,
    format_table,
    grundy,
    load_table,
    mex,
    parse_table,
    recompute_grundy,
    retrograde_fill,
    save_table,
    solve_outcome,
)

# Grundy values of the restricted game from a separate, naive recursive
# solver (written independently of this package).
RESTRICTED_GRUNDY = {
    (0, 0, 0): 0,
    (1, 1, 1): 1,
    (0, 2, 2): 0,
    (1, 2, 2): 1,
    (2, 2, 2): 2,
    (2, 4, 6): 1,
    (3, 5, 6): 1,
    (3, 5, 7): 0,
    (4, 4, 4): 4,
    (6, 10, 12): 0,
    (5, 9, 13): 0,
    (7, 8, 9): 7,
}


@pytest.mark.parametrize("values, expected", [(set(), 0), ({0, 1, 3}, 2), ({1, 2}, 0), ([0, 0, 1], 2)])
def test_mex(values, expected):
    assert mex(values) == expected


@given(st.sets(st.integers(0, 30)))
def test_mex_definition(values):
    m = mex(values)
    assert m not in values
    assert all(k in values for k in range(m))


@pytest.mark.parametrize("p, g", sorted(RESTRICTED_GRUNDY.items()))
def test_restricted_grundy_values(p, g):
    assert GrundySolver(RESTRICTED).grundy(p) == g


@pytest.mark.parametrize("n", [0, 1, 5, 37])
def test_single_pile_is_nim(n):
    assert grundy((0, 0, n), RESTRICTED) == n


def test_outcomes():
    assert solve_outcome((0, 0, 0), RESTRICTED) is Outcome.P
    assert solve_outcome((1, 1), AMALGAMATION) is Outcome.P
    assert solve_outcome((1, 2), AMALGAMATION) is Outcome.N
    assert solve_outcome((3, 5, 6), RESTRICTED) is Outcome.N


def test_outcome_agrees_with_grundy():
    solver = GrundySolver(RESTRICTED)
    for p in BoundSpec.total_stones(30).positions():
        assert solver.is_p(p) == (solver.grundy(p) == 0)


def test_p_means_no_p_successor():
    solver = GrundySolver(AMALGAMATION)
    for p in BoundSpec.total_stones(20).positions():
        succ_p = [solver.is_p(q) for q in legal_moves(p, AMALGAMATION)]
        assert solver.is_p(p) == (not any(succ_p))


def test_deep_position_needs_no_recursion_limit():
    # move chains here are far longer than the interpreter's recursion limit
    solver = GrundySolver(RESTRICTED)
    assert solver.grundy((0, 0, 2000)) == 2000
    assert not solver.is_p((0, 1, 1500))


def test_classic_matches_nim_sum():
    table = retrograde_fill(BoundSpec.total_stones(30), CLASSIC)
    assert all(g == nim_sum(p) for p, g in table.rows())


def test_unmemoized_matches_memoized():
    fresh = GrundySolver(RESTRICTED, memoize=False)
    for p in [(2, 4, 6), (3, 5, 7), (4, 4, 4)]:
        assert fresh.grundy(p) == recompute_grundy(p, RESTRICTED) == RESTRICTED_GRUNDY[p]
    assert fresh.grundy_cache == {}


def test_concurrent_callers_agree():
    solver = GrundySolver(RESTRICTED)
    positions = list(BoundSpec.total_stones(24).positions())
    results = {}

    def work(k):
        results[k] = [solver.grundy(p) for p in positions[k::3] + positions]

    threads = [threading.Thread(target=work, args=(k,)) for k in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    serial = GrundySolver(RESTRICTED)
    for k, vals in results.items():
        assert vals == [serial.grundy(p) for p in positions[k::3] + positions]


def test_fill_total_two():
    table = retrograde_fill(BoundSpec.total_stones(2), RESTRICTED)
    assert table.entries == {(0, 0, 0): 0, (0, 0, 1): 1, (0, 0, 2): 2, (0, 1, 1): 0}


def test_fill_total_zero():
    assert retrograde_fill(BoundSpec.total_stones(0), RESTRICTED).entries == {(0, 0, 0): 0}


def test_fill_max_pile_recurses_past_bound():
    bound = BoundSpec.max_pile(64)
    table = retrograde_fill(bound, RESTRICTED)
    assert len(table) == bound.count() == 47905
    assert max(max(p) for p in table.entries) == 64
    solver = GrundySolver(RESTRICTED)
    for p in [(64, 64, 64), (33, 60, 63), (2, 62, 64)]:
        assert table[p] == solver.grundy(p)


def test_fill_matches_recursion():
    table = retrograde_fill(BoundSpec.total_stones(24), AMALGAMATION)
    solver = GrundySolver(AMALGAMATION)
    assert all(solver.grundy(p) == g for p, g in table.rows())


@pytest.mark.parametrize(
    "bound, count",
    [
        (BoundSpec.total_stones(0), 1),
        (BoundSpec.total_stones(2), 4),
        (BoundSpec.total_stones(150), 100451),
        (BoundSpec.max_pile(8), 165),
        (BoundSpec.max_pile(5, pile_count=2), 21),
        (BoundSpec.total_stones(7, pile_count=1), 8),
        (BoundSpec.total_stones(9, pile_count=4), 71),
    ],
)
def test_bound_count_matches_enumeration(bound, count):
    positions = list(bound.positions())
    assert len(positions) == bound.count() == count
    assert positions == sorted(set(positions))
    assert all(p == tuple(sorted(p)) and p in bound for p in positions)


def test_bound_enumeration_is_complete():
    bound = BoundSpec.total_stones(9, pile_count=4)
    brute = {tuple(sorted(p)) for p in itertools.product(range(10), repeat=4) if sum(p) <= 9}
    assert set(bound.positions()) == brute


def test_total_bound_is_move_closed():
    bound = BoundSpec.total_stones(18)
    members = set(bound.positions())
    for p in members:
        assert legal_moves(p, AMALGAMATION) <= members


def test_resource_ceiling():
    with pytest.raises(ResourceLimitError):
        retrograde_fill(BoundSpec.max_pile(1_000_000_000), RESTRICTED)
    with pytest.raises(ResourceLimitError):
        retrograde_fill(BoundSpec.total_stones(10**9), RESTRICTED)
    with pytest.raises(ResourceLimitError):
        retrograde_fill(BoundSpec.total_stones(30), RESTRICTED, ceiling=100)


def test_table_round_trip(tmp_path):
    table = retrograde_fill(BoundSpec.total_stones(2), RESTRICTED)
    path = tmp_path / "t.csv"
    save_table(table, path)
    assert path.read_text() == (
        "# amalgam-nim grundy v1; ruleset=restricted; threshold=2; piles=3; bound=total_stones:2\n"
        "0,0,0,0\n0,0,1,1\n0,0,2,2\n0,1,1,0\n"
    )
    loaded = load_table(path, expected=RESTRICTED)
    assert loaded == table
    save_table(loaded, tmp_path / "u.csv")
    assert (tmp_path / "u.csv").read_bytes() == path.read_bytes()


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from([CLASSIC, RESTRICTED, AMALGAMATION]),
    st.integers(0, 12),
    st.integers(1, 4),
)
def test_table_round_trip_property(rules, limit, piles):
    table = retrograde_fill(BoundSpec.total_stones(limit, piles), rules)
    assert parse_table(format_table(table)) == table


def test_load_ruleset_mismatch(tmp_path):
    path = tmp_path / "t.csv"
    save_table(retrograde_fill(BoundSpec.total_stones(3), CLASSIC), path)
    with pytest.raises(RulesetMismatchError) as exc:
        load_table(path, expected=RESTRICTED)
    assert exc.value.line == 1


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(MalformedTableError):
        load_table(path)


HEADER = "# amalgam-nim grundy v1; ruleset=restricted; threshold=2; piles=3; bound=total_stones:2\n"


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("hello\n", MalformedTableError, 1),
        (HEADER + "0,0,0,0\n0,0,1\n", MalformedTableError, 3),
        (HEADER + "0,0,0,0\n0,1,0,1\n", MalformedTableError, 3),
        (HEADER + "0,0,1,1\n0,0,0,0\n", MalformedTableError, 3),
        (HEADER + "0,0,0,0\n0,0,x,1\n", MalformedTableError, 3),
        (HEADER + "0,0,0,0\n0,0,1,1\n", TruncatedTableError, 4),
        (HEADER + "0,0,0,0\n0,0,1,1\n0,0,2,2\n0,1,1", TruncatedTableError, 5),
    ],
)
def test_load_errors(text, error, line):
    with pytest.raises(error) as exc:
        parse_table(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_grundy_table_lookup_canonicalizes():
    table = GrundyTable(RESTRICTED, BoundSpec.total_stones(2), {(0, 1, 1): 0})
    assert table[(1, 0, 1)] == 0
    assert table.outcome((1, 1, 0)) is Outcome.P
