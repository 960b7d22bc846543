"""Positions, rulesets and move generation for Nim with pile amalgamation.

A position is a plain tuple of pile sizes. Every function that returns a
position returns it in canonical form (sorted non-decreasing), since all three
games are symmetric under permuting piles.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from operator import xor

Position = tuple[int, ...]

MAX_PILE = 2**32 - 1


class PositionError(ValueError):
    """Raised for pile sequences that are not valid positions."""


class RuleKind(str, Enum):
    CLASSIC = "classic"
    AMALGAMATION = "amalgamation"
    RESTRICTED = "restricted"


class Outcome(str, Enum):
    """Outcome class under normal play."""

    P = "P"  # previous player wins
    N = "N"  # next player wins


@dataclass(frozen=True)
class Ruleset:
    """Which moves are legal.

    ``classic`` never merges, ``amalgamation`` merges any two non-empty piles,
    ``restricted`` merges two piles only when both hold at least
    ``merge_threshold`` stones.
    """

    kind: RuleKind = RuleKind.RESTRICTED
    merge_threshold: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if self.merge_threshold < 1:
            raise ValueError(f"merge_threshold must be positive, got {self.merge_threshold}")

    @classmethod
    def parse(cls, kind: str, merge_threshold: int = 2) -> Ruleset:
        return cls(RuleKind(kind), merge_threshold)

    @property
    def min_merge(self) -> int | None:
        """Smallest pile size allowed in a merge, or None when merging is off."""
        if self.kind is RuleKind.CLASSIC:
            return None
        if self.kind is RuleKind.AMALGAMATION:
            return 1
        return self.merge_threshold

    def can_merge(self, a: int, b: int) -> bool:
        m = self.min_merge
        return m is not None and a >= m and b >= m

    def __str__(self) -> str:
        if self.kind is RuleKind.RESTRICTED:
            return f"{self.kind.value}(threshold={self.merge_threshold})"
        return self.kind.value


CLASSIC = Ruleset(RuleKind.CLASSIC)
AMALGAMATION = Ruleset(RuleKind.AMALGAMATION)
RESTRICTED = Ruleset(RuleKind.RESTRICTED, 2)


def canonicalize(piles: Iterable[int]) -> Position:
    return tuple(sorted(piles))


def make_position(piles: Iterable[int]) -> Position:
    """Validate pile sizes and return the canonical position."""
    out = []
    for v in piles:
        if isinstance(v, bool) or not isinstance(v, int):
            raise PositionError(f"pile size must be an integer, got {v!r}")
        if v < 0:
            raise PositionError(f"pile size must be non-negative, got {v}")
        if v > MAX_PILE:
            raise PositionError(f"pile size {v} exceeds {MAX_PILE}")
        out.append(v)
    if not out:
        raise PositionError("a position needs at least one pile")
    return canonicalize(out)


def parse_piles(text: str) -> list[int]:
    """Parse ``"3,5,7"`` into ``[3, 5, 7]`` keeping the given order."""
    parts = [s.strip() for s in text.split(",")]
    if not text.strip() or any(not s for s in parts):
        raise PositionError(f"malformed position {text!r}")
    piles = []
    for s in parts:
        if not s.isdigit():
            raise PositionError(f"malformed pile size {s!r} in {text!r}")
        piles.append(int(s))
    make_position(piles)
    return piles


def parse_position(text: str) -> Position:
    return canonicalize(parse_piles(text))


def format_position(p: Sequence[int]) -> str:
    return ",".join(str(v) for v in p)


def total(p: Sequence[int]) -> int:
    return sum(p)


def nonempty(p: Sequence[int]) -> int:
    return sum(1 for v in p if v)


def nim_sum(p: Sequence[int]) -> int:
    return reduce(xor, p, 0)


def is_terminal(p: Sequence[int]) -> bool:
    return not any(p)


def measure(p: Sequence[int]) -> tuple[int, int]:
    """Well-founded measure that strictly decreases along every move."""
    return total(p), nonempty(p)


def iter_reductions(p: Position) -> Iterator[tuple[int, int, Position]]:
    """Yield ``(index, new_size, successor)`` for every single-pile removal.

    Equal piles are only expanded once; the successor is canonical. Larger
    piles come first, which is where winning replies usually are.
    """
    for i in range(len(p) - 1, -1, -1):
        v = p[i]
        if i and p[i - 1] == v:
            continue
        rest = p[:i] + p[i + 1 :]
        for u in range(v - 1, -1, -1):
            yield i, u, _insert(rest, u)


def iter_merges(p: Position, rules: Ruleset) -> Iterator[tuple[int, int, Position]]:
    """Yield ``(i, j, successor)`` for every legal merge of piles i < j.

    One item per pile pair, so equal piles can produce repeated successors.
    """
    m = rules.min_merge
    if m is None:
        return
    n = len(p)
    for i in range(n):
        if p[i] < m:
            continue
        for j in range(i + 1, n):
            rest = p[:i] + p[i + 1 : j] + p[j + 1 :]
            yield i, j, _insert(_insert(rest, 0), p[i] + p[j])


def iter_moves(p: Position, rules: Ruleset) -> Iterator[Position]:
    """Lazily yield successors of ``p``; may repeat a position."""
    for _, _, q in iter_reductions(p):
        yield q
    for _, _, q in iter_merges(p, rules):
        yield q


def legal_moves(p: Position, rules: Ruleset) -> set[Position]:
    """All positions reachable from canonical ``p`` in one move."""
    return set(iter_moves(p, rules))


def _insert(sorted_piles: Position, v: int) -> Position:
    # linear insertion keeps the tuple canonical without a full sort
    for k, w in enumerate(sorted_piles):
        if v <= w:
            return sorted_piles[:k] + (v,) + sorted_piles[k:]
    return sorted_piles + (v,)
