"""Human versus perfect-play engine on a text console."""

from __future__ import annotations

import re
from collections.abc import Iterator
from typing import TextIO

from . import formula
from .engine import RESTRICTED, Position, Ruleset, canonicalize, is_terminal
from .solver import shared_solver

_TAKE = re.compile(r"take\s+(\d+)\s+from\s+(\d+)")
_MERGE = re.compile(r"merge\s+(\d+)\s+(\d+)")


class IllegalMove(ValueError):
    pass


def p_test(rules: Ruleset, pile_count: int):
    """P-position test: the closed form where it applies, else the solver."""
    if rules == RESTRICTED and pile_count == 3:
        return formula.is_p_position
    return shared_solver(rules).is_p


def ordered_moves(piles: list[int], rules: Ruleset) -> Iterator[tuple[str, list[int]]]:
    """Moves on the displayed pile order, as ``(description, new_piles)``."""
    n = len(piles)
    for i in range(n):
        for u in range(piles[i] - 1, -1, -1):
            new = list(piles)
            new[i] = u
            yield f"take {piles[i] - u} from {i + 1}", new
    for i in range(n):
        for j in range(i + 1, n):
            if rules.can_merge(piles[i], piles[j]):
                new = list(piles)
                new[i], new[j] = piles[i] + piles[j], 0
                yield f"merge {i + 1} {j + 1}", new


def apply_text_move(piles: list[int], text: str, rules: Ruleset) -> list[int]:
    """Apply a move typed as ``take <k> from <pile>`` or ``merge <i> <j>``."""
    text = " ".join(text.lower().split())
    n = len(piles)
    if m := _TAKE.fullmatch(text):
        k, i = int(m[1]), int(m[2])
        if not 1 <= i <= n:
            raise IllegalMove(f"there is no pile {i}")
        if not 1 <= k <= piles[i - 1]:
            raise IllegalMove(f"pile {i} holds {piles[i - 1]}; take between 1 and that")
        new = list(piles)
        new[i - 1] -= k
        return new
    if m := _MERGE.fullmatch(text):
        i, j = sorted((int(m[1]), int(m[2])))
        if i == j or not (1 <= i and j <= n):
            raise IllegalMove("name two different existing piles")
        if not rules.can_merge(piles[i - 1], piles[j - 1]):
            raise IllegalMove(f"piles {i} and {j} cannot be merged under {rules}")
        new = list(piles)
        new[i - 1], new[j - 1] = piles[i - 1] + piles[j - 1], 0
        return new
    raise IllegalMove("say 'take <k> from <pile>' or 'merge <i> <j>'")


def engine_move(piles: list[int], rules: Ruleset) -> tuple[str, list[int]]:
    """Move to the smallest canonical P-position, or stall by taking one stone."""
    is_p = p_test(rules, len(piles))
    moves = list(ordered_moves(piles, rules))
    targets: dict[Position, tuple[str, list[int]]] = {}
    for desc, new in moves:
        targets.setdefault(canonicalize(new), (desc, new))
    winning = [q for q in sorted(targets) if is_p(q)]
    if winning:
        return targets[winning[0]]
    big = max(range(len(piles)), key=lambda i: (piles[i], -i))
    new = list(piles)
    new[big] -= 1
    return f"take 1 from {big + 1}", new


def show(piles: list[int]) -> str:
    return "  ".join(f"[{i + 1}] {v}" for i, v in enumerate(piles))


def play(piles: list[int], rules: Ruleset, stdin: TextIO, stdout: TextIO) -> int:
    """Run the game loop; the human moves first. Returns the exit code."""
    piles = list(piles)

    def say(msg: str) -> None:
        print(msg, file=stdout, flush=True)

    say(f"Rules: {rules}. You move first. Moves: 'take <k> from <pile>' or 'merge <i> <j>'.")
    if is_terminal(piles):
        say("No stones left: you cannot move. Engine wins.")
        return 0
    while True:
        say(f"Piles: {show(piles)}")
        while True:
            print("your move> ", end="", file=stdout, flush=True)
            line = stdin.readline()
            if not line:
                say("\nEnd of input: you resign. Engine wins.")
                return 0
            if line.strip().lower() in ("quit", "resign"):
                say("You resign. Engine wins.")
                return 0
            try:
                piles = apply_text_move(piles, line, rules)
                break
            except IllegalMove as exc:
                say(f"Illegal move: {exc}")
        if is_terminal(piles):
            say(f"Piles: {show(piles)}")
            say("You made the last move. You win.")
            return 0
        desc, piles = engine_move(piles, rules)
        say(f"Engine: {desc}")
        if is_terminal(piles):
            say(f"Piles: {show(piles)}")
            say("Engine made the last move. Engine wins.")
            return 0
