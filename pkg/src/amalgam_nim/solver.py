"""Brute-force Sprague-Grundy oracle.

Nothing here knows about the closed-form classifier; values come only from
the move rules. Recursion is replaced by explicit stacks because merges can
push single piles to twice the sweep bound and move chains get long.

Termination: every move lowers ``(total stones, non-empty piles)``
lexicographically (removals lower the total, merges keep it but empty a pile),
so the search graph is acyclic and needs no cycle detection.
"""

from __future__ import annotations

import itertools
import logging
import math
import re
import threading
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .engine import (
    Outcome,
    Position,
    Ruleset,
    canonicalize,
    iter_moves,
    legal_moves,
    measure,
)

logger = logging.getLogger(__name__)

DEFAULT_ENTRY_CEILING = 10**8
TABLE_MAGIC = "amalgam-nim grundy v1"


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed the configured entry ceiling."""


class TableFormatError(ValueError):
    """Base class for problems reading a table file."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedTableError(TableFormatError):
    pass


class RulesetMismatchError(TableFormatError):
    pass


class TruncatedTableError(TableFormatError):
    pass


def mex(values: Iterable[int]) -> int:
    """Least non-negative integer not in ``values``."""
    vals = values if isinstance(values, (set, frozenset)) else set(values)
    # mex never exceeds the number of distinct values
    seen = [False] * (len(vals) + 1)
    for v in vals:
        if v < len(seen):
            seen[v] = True
    return seen.index(False)


class BoundMode(str, Enum):
    MAX_PILE = "max_pile"
    TOTAL_STONES = "total_stones"


@dataclass(frozen=True)
class BoundSpec:
    """Which positions a sweep enumerates.

    ``total_stones`` bounds are closed under moves; ``max_pile`` bounds are
    not, because a merge can produce a pile above the limit.
    """

    mode: BoundMode
    limit: int
    pile_count: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", BoundMode(self.mode))
        if self.limit < 0:
            raise ValueError(f"bound limit must be non-negative, got {self.limit}")
        if self.pile_count < 1:
            raise ValueError(f"pile_count must be positive, got {self.pile_count}")

    @classmethod
    def total_stones(cls, limit: int, pile_count: int = 3) -> BoundSpec:
        return cls(BoundMode.TOTAL_STONES, limit, pile_count)

    @classmethod
    def max_pile(cls, limit: int, pile_count: int = 3) -> BoundSpec:
        return cls(BoundMode.MAX_PILE, limit, pile_count)

    @property
    def move_closed(self) -> bool:
        return self.mode is BoundMode.TOTAL_STONES

    def __contains__(self, p: Position) -> bool:
        if len(p) != self.pile_count:
            return False
        if self.mode is BoundMode.TOTAL_STONES:
            return sum(p) <= self.limit
        return max(p) <= self.limit

    def __str__(self) -> str:
        return f"{self.mode.value}:{self.limit}"

    def positions(self) -> Iterator[Position]:
        """Canonical positions inside the bound, in lexicographic order."""
        if self.mode is BoundMode.TOTAL_STONES:
            return _nondecreasing(self.pile_count, 0, self.limit, self.limit)
        return _nondecreasing(self.pile_count, 0, self.limit, None)

    def count(self) -> int:
        """Number of canonical positions inside the bound."""
        k, n = self.pile_count, self.limit
        if self.mode is BoundMode.MAX_PILE:
            return math.comb(n + k, k)
        return _count_by_total(k, n)


def _nondecreasing(k: int, lo: int, hi: int, budget: int | None) -> Iterator[Position]:
    if k == 1:
        top = hi if budget is None else min(hi, budget)
        for v in range(lo, top + 1):
            yield (v,)
        return
    for v in range(lo, hi + 1):
        if budget is not None:
            rest = budget - v
            if v * (k - 1) > rest:
                break
        else:
            rest = None
        for tail in _nondecreasing(k - 1, v, hi, rest):
            yield (v,) + tail


def _count_by_total(k: int, n: int, ceiling: int | None = None) -> int:
    # every pile <= n // k is a subset, so this cheap lower bound guards the DP
    lower = math.comb(n // k + k, k)
    if ceiling is not None and lower > ceiling:
        return lower
    # partitions of m with at most k parts == partitions of m into parts <= k
    ways = [1] + [0] * n
    for part in range(1, k + 1):
        for m in range(part, n + 1):
            ways[m] += ways[m - part]
    return sum(ways)


def check_ceiling(bound: BoundSpec, ceiling: int = DEFAULT_ENTRY_CEILING) -> int:
    """Return the enumeration size, raising if it exceeds ``ceiling``."""
    if bound.mode is BoundMode.MAX_PILE:
        count = bound.count()
    else:
        count = _count_by_total(bound.pile_count, bound.limit, ceiling)
    if count > ceiling:
        raise ResourceLimitError(
            f"bound {bound} with {bound.pile_count} piles needs at least {count} "
            f"entries, above the ceiling of {ceiling}"
        )
    return count


class GrundySolver:
    """Memoised outcome and Grundy-value search for one ruleset.

    With ``memoize=False`` each top-level call works on a private scratch
    cache that is dropped afterwards, so results never depend on earlier
    queries.
    """

    def __init__(self, rules: Ruleset, memoize: bool = True) -> None:
        self.rules = rules
        self.memoize = memoize
        self.grundy_cache: dict[Position, int] = {}
        self.outcome_cache: dict[Position, bool] = {}  # True means P

    def grundy(self, p: Iterable[int]) -> int:
        p = canonicalize(p)
        memo = self.grundy_cache if self.memoize else {}
        if p in memo:
            return memo[p]
        rules = self.rules
        succ_of: dict[Position, set[Position]] = {}
        stack = [p]
        while stack:
            q = stack[-1]
            if q in memo:
                stack.pop()
                continue
            succ = succ_of.get(q)
            if succ is None:
                succ = succ_of[q] = legal_moves(q, rules)
                missing = [s for s in succ if s not in memo]
                if missing:
                    stack.extend(missing)
                    continue
            memo[q] = mex({memo[s] for s in succ})
            del succ_of[q]
            stack.pop()
        return memo[p]

    def is_p(self, p: Iterable[int]) -> bool:
        p = canonicalize(p)
        memo = self.outcome_cache if self.memoize else {}
        if p in memo:
            return memo[p]
        rules = self.rules
        stack: list[tuple[Position, Iterator[Position]]] = [(p, iter_moves(p, rules))]
        while stack:
            q, moves = stack[-1]
            if q in memo:
                stack.pop()
                continue
            result = True
            for s in moves:
                v = memo.get(s)
                if v is None:
                    # revisit s once it is solved
                    stack[-1] = (q, itertools.chain((s,), moves))
                    stack.append((s, iter_moves(s, rules)))
                    result = None
                    break
                if v:
                    result = False
                    break
            if result is not None:
                memo[q] = result
                stack.pop()
        return memo[p]

    def outcome(self, p: Iterable[int]) -> Outcome:
        return Outcome.P if self.is_p(p) else Outcome.N


_shared: dict[Ruleset, GrundySolver] = {}
_shared_lock = threading.Lock()


def shared_solver(rules: Ruleset) -> GrundySolver:
    """Process-wide memoised solver for ``rules``."""
    with _shared_lock:
        solver = _shared.get(rules)
        if solver is None:
            solver = _shared[rules] = GrundySolver(rules)
        return solver


def solve_outcome(p: Iterable[int], rules: Ruleset) -> Outcome:
    return shared_solver(rules).outcome(p)


def grundy(p: Iterable[int], rules: Ruleset) -> int:
    return shared_solver(rules).grundy(p)


def recompute_grundy(p: Iterable[int], rules: Ruleset) -> int:
    """Grundy value from a throwaway solver that shares no cache."""
    return GrundySolver(rules, memoize=False).grundy(p)


@dataclass
class GrundyTable:
    rules: Ruleset
    bound: BoundSpec
    entries: dict[Position, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, p: Position) -> int:
        return self.entries[canonicalize(p)]

    def outcome(self, p: Position) -> Outcome:
        return Outcome.P if self[p] == 0 else Outcome.N

    def rows(self) -> list[tuple[Position, int]]:
        return sorted(self.entries.items())


def retrograde_fill(
    bound: BoundSpec,
    rules: Ruleset,
    ceiling: int = DEFAULT_ENTRY_CEILING,
) -> GrundyTable:
    """Grundy values for every position in ``bound``.

    Positions are solved in increasing ``(total, non-empty)`` order so that
    in-bound successors are always ready. For ``max_pile`` bounds, merged
    successors outside the bound are solved on demand and kept out of the
    returned table.
    """
    check_ceiling(bound, ceiling)
    positions = sorted(bound.positions(), key=measure)
    values: dict[Position, int] = {}
    helper = None
    if not bound.move_closed:
        helper = GrundySolver(rules)
        helper.grundy_cache = values
    for p in positions:
        succ = legal_moves(p, rules)
        try:
            values[p] = mex({values[q] for q in succ})
        except KeyError:
            if helper is None:
                raise
            values[p] = helper.grundy(p)
    if helper is not None:
        extra = len(values) - len(positions)
        logger.debug("solved %d out-of-bound positions for %s", extra, bound)
        values = {p: values[p] for p in positions}
    return GrundyTable(rules, bound, dict(sorted(values.items())))


def table_header(table: GrundyTable) -> str:
    r, b = table.rules, table.bound
    return (
        f"# {TABLE_MAGIC}; ruleset={r.kind.value}; threshold={r.merge_threshold}; "
        f"piles={b.pile_count}; bound={b.mode.value}:{b.limit}"
    )


def format_table(table: GrundyTable) -> str:
    lines = [table_header(table)]
    lines.extend(",".join(map(str, p + (g,))) for p, g in table.rows())
    return "\n".join(lines) + "\n"


def save_table(table: GrundyTable, path: str | Path) -> None:
    Path(path).write_text(format_table(table), encoding="utf-8")


_HEADER_RE = re.compile(
    r"# amalgam-nim grundy v1; ruleset=(?P<kind>\w+); threshold=(?P<m>\d+); "
    r"piles=(?P<k>\d+); bound=(?P<mode>\w+):(?P<limit>\d+)"
)
_ROW_RE = re.compile(r"\d+(,\d+)*")


def load_table(path: str | Path, expected: Ruleset | None = None) -> GrundyTable:
    """Read a table written by :func:`save_table`.

    Raises :class:`RulesetMismatchError` when ``expected`` differs from the
    header's ruleset.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_table(text, expected)


def parse_table(text: str, expected: Ruleset | None = None) -> GrundyTable:
    if not text:
        raise MalformedTableError("empty file", 1)
    lines = text.split("\n")
    complete = lines[-1] == ""
    if complete:
        lines.pop()
    m = _HEADER_RE.fullmatch(lines[0])
    if m is None:
        raise MalformedTableError(f"bad header {lines[0][:80]!r}", 1)
    try:
        rules = Ruleset.parse(m["kind"], int(m["m"]))
        bound = BoundSpec(m["mode"], int(m["limit"]), int(m["k"]))
    except ValueError as exc:
        raise MalformedTableError(str(exc), 1) from None
    if expected is not None and expected != rules:
        raise RulesetMismatchError(f"table is for {rules}, expected {expected}", 1)
    if not complete:
        raise TruncatedTableError("missing final newline", len(lines))
    k = bound.pile_count
    entries: dict[Position, int] = {}
    prev = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not _ROW_RE.fullmatch(line):
            raise MalformedTableError(f"bad row {line[:80]!r}", lineno)
        nums = tuple(int(s) for s in line.split(","))
        if len(nums) != k + 1:
            raise MalformedTableError(f"expected {k + 1} fields, got {len(nums)}", lineno)
        p = nums[:k]
        if list(p) != sorted(p) or p not in bound:
            raise MalformedTableError(f"position {p} is not canonical or outside {bound}", lineno)
        if prev is not None and p <= prev:
            raise MalformedTableError(f"position {p} out of order", lineno)
        entries[p] = nums[k]
        prev = p
    expected_rows = bound.count()
    if len(entries) < expected_rows:
        raise TruncatedTableError(
            f"{len(entries)} rows, bound {bound} needs {expected_rows}", len(lines) + 1
        )
    return GrundyTable(rules, bound, entries)
