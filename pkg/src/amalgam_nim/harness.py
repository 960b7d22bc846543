"""Sweeps that pit the closed-form classifier against the brute-force oracle.

Each check returns a :class:`VerificationReport`. Reports never depend on the
number of workers: work is split into fixed chunks, results are merged and
counterexamples are sorted by position before truncation.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

from . import formula
from .engine import (
    AMALGAMATION,
    CLASSIC,
    RESTRICTED,
    Position,
    Ruleset,
    format_position,
    iter_reductions,
    legal_moves,
    measure,
    nim_sum,
)
from .formula import Relation, Subset, digit_relation, membership
from .solver import BoundMode, BoundSpec, GrundySolver, recompute_grundy, retrograde_fill

DEFAULT_MAX_COUNTEREXAMPLES = 100
DEFAULT_THEOREM_BOUND = BoundSpec.total_stones(150)
DEFAULT_LEMMA_STRUCTURE_BOUND = BoundSpec.max_pile(128)
DEFAULT_DIGIT_LIMIT = 512
DEFAULT_TRANSITION_BOUND = BoundSpec.total_stones(120)
DEFAULT_CONJECTURE_BOUND = BoundSpec.max_pile(48)
DEFAULT_TWO_PILE_MAX = 256

_CHUNK = 4096


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    OPEN = "open"  # holds at this bound, but unproven


@dataclass(frozen=True, order=True)
class Counterexample:
    position: Position
    expected: str
    actual: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "expected": self.expected,
            "actual": self.actual,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    check: str
    rules: Ruleset
    bound: BoundSpec
    checked: int
    counterexamples: list[Counterexample] = field(default_factory=list)
    elapsed_ms: int = 0
    conjecture: bool = False
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        if self.counterexamples:
            return Verdict.FAIL
        return Verdict.OPEN if self.conjecture else Verdict.PASS

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.FAIL

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "check": self.check,
            "ruleset": self.rules.kind.value,
            "threshold": self.rules.merge_threshold,
            "bound": {
                "mode": self.bound.mode.value,
                "limit": self.bound.limit,
                "piles": self.bound.pile_count,
            },
            "checked": self.checked,
            "verdict": self.verdict.value,
            "counterexamples": [c.to_dict() for c in self.counterexamples],
            "elapsed_ms": self.elapsed_ms if timing else 0,
        }
        if self.counts:
            d["counts"] = dict(self.counts)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VerificationReport:
        b = d["bound"]
        report = cls(
            check=d["check"],
            rules=Ruleset.parse(d["ruleset"], d["threshold"]),
            bound=BoundSpec(b["mode"], b["limit"], b["piles"]),
            checked=d["checked"],
            counterexamples=[
                Counterexample(tuple(c["position"]), c["expected"], c["actual"], c["detail"])
                for c in d["counterexamples"]
            ],
            elapsed_ms=d["elapsed_ms"],
            conjecture=d["verdict"] == Verdict.OPEN.value,
            counts=dict(d.get("counts", {})),
        )
        return report

    def summary(self, timing: bool = True) -> str:
        line = (
            f"{self.check}: {self.verdict.value} | ruleset={self.rules.kind.value} "
            f"threshold={self.rules.merge_threshold} bound={self.bound} "
            f"piles={self.bound.pile_count} | checked={self.checked} "
            f"counterexamples={len(self.counterexamples)}"
        )
        if self.counts:
            line += " | " + " ".join(f"{k}={v}" for k, v in self.counts.items())
        if timing:
            line += f" | {self.elapsed_ms} ms"
        return line

    def to_text(self, timing: bool = True) -> str:
        lines = [self.summary(timing)]
        for c in self.counterexamples:
            lines.append(
                f"  ({format_position(c.position)}) expected={c.expected} "
                f"actual={c.actual} {c.detail}".rstrip()
            )
        return "\n".join(lines) + "\n"


def format_reports(reports: Sequence[VerificationReport], fmt: str, timing: bool = True) -> str:
    if fmt == "json":
        body = [r.to_dict(timing) for r in reports]
        return json.dumps(body[0] if len(body) == 1 else body, indent=2) + "\n"
    if fmt == "text":
        return "".join(r.to_text(timing) for r in reports)
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(
    report: VerificationReport | Sequence[VerificationReport],
    path: str | Path,
    fmt: str = "json",
) -> None:
    """Write one report (or several, as a JSON array) to ``path``."""
    reports = [report] if isinstance(report, VerificationReport) else list(report)
    Path(path).write_text(format_reports(reports, fmt), encoding="utf-8")


def read_report(path: str | Path) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- plumbing ---------------------------------------------------------------


def _chunks(items: Sequence, size: int = _CHUNK) -> list[Sequence]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def _map_chunks(fn: Callable, items: Sequence, workers: int) -> list:
    chunks = _chunks(items)
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _finish(
    report: VerificationReport,
    found: Iterable[Counterexample],
    started: float,
    cap: int,
) -> VerificationReport:
    found = sorted(found)
    if len(found) > cap:
        report.counts["counterexamples_total"] = len(found)
    report.counterexamples = found[:cap]
    report.elapsed_ms = int((time.perf_counter() - started) * 1000)
    return report


def _require_three(bound: BoundSpec) -> None:
    if bound.pile_count != 3:
        raise ValueError(f"this check needs 3 piles, got {bound.pile_count}")


def _label(is_p: bool) -> str:
    return "P" if is_p else "N"


# -- main theorem -----------------------------------------------------------


def _classify_chunk(positions: Sequence[Position]) -> list[bool]:
    return [formula.is_p_position(p) for p in positions]


def verify_main_theorem(
    bound: BoundSpec = DEFAULT_THEOREM_BOUND,
    workers: int = 1,
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Closed form versus exhaustive search for restricted 3-pile positions."""
    _require_three(bound)
    started = time.perf_counter()
    positions = list(bound.positions())
    solver = GrundySolver(RESTRICTED)
    # solving in measure order keeps the search shallow
    for p in sorted(positions, key=measure):
        solver.is_p(p)
    oracle = solver.outcome_cache
    formula_p = [v for part in _map_chunks(_classify_chunk, positions, workers) for v in part]

    found = []
    tally: Counter[str] = Counter()
    for p, fp in zip(positions, formula_p):
        op = oracle[p]
        tally[_label(op)] += 1
        if fp != op:
            found.append(Counterexample(p, _label(op), _label(fp), membership(p).describe()))
    report = VerificationReport("theorem", RESTRICTED, bound, len(positions))
    report.counts = {"P": tally["P"], "N": tally["N"]}
    return _finish(report, found, started, max_counterexamples)


# -- two piles --------------------------------------------------------------


def verify_two_pile(
    max_pile: int = DEFAULT_TWO_PILE_MAX,
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Unrestricted amalgamation with two piles: P exactly when x == y."""
    started = time.perf_counter()
    bound = BoundSpec.max_pile(max_pile, pile_count=2)
    solver = GrundySolver(AMALGAMATION)
    found = []
    checked = 0
    for x, y in sorted(bound.positions(), key=measure):
        checked += 1
        got = solver.is_p((x, y))
        if got != (x == y):
            found.append(Counterexample((x, y), _label(x == y), _label(got), "oracle"))
    report = VerificationReport("two-pile", AMALGAMATION, bound, checked)
    return _finish(report, found, started, max_counterexamples)


# -- lemma structure --------------------------------------------------------


def _digit_loop_relation(x: int, y: int, z: int) -> tuple[Relation, int | None]:
    """Bit-by-bit reading of the digit lemma; assumes nim-sum zero."""
    n = max(x, y, z).bit_length()
    carries = [i for i in range(n) if (x >> i) & 1 and (y >> i) & 1 and not (z >> i) & 1]
    if not carries:
        return Relation.EQUAL_SUM, None
    if carries == [0]:
        return Relation.SUM_PLUS_TWO, None
    return Relation.SUM_EXCEEDS_TWO, min(i for i in carries if i >= 1)


def _arithmetic_relation(x: int, y: int, z: int) -> Relation:
    s = x + y
    if s == z:
        return Relation.EQUAL_SUM
    if s == z + 2:
        return Relation.SUM_PLUS_TWO
    if s > z + 2:
        return Relation.SUM_EXCEEDS_TWO
    raise AssertionError(f"x+y < z with nim-sum zero at {(x, y, z)}")


def _digit_chunk(xs: Sequence[int], limit: int) -> tuple[int, list[Counterexample]]:
    checked = 0
    found = []
    for x in xs:
        for y in range(limit + 1):
            z = x ^ y
            if z > limit or x > z or y > z:
                continue
            checked += 1
            rel, bit = digit_relation(x, y, z)
            arith = _arithmetic_relation(x, y, z)
            loop_rel, loop_bit = _digit_loop_relation(x, y, z)
            if rel is not arith or rel is not loop_rel or bit != loop_bit:
                found.append(
                    Counterexample(
                        (x, y, z),
                        f"{arith.value}/{loop_rel.value}@{loop_bit}",
                        f"{rel.value}@{bit}",
                        "digit relation",
                    )
                )
    return checked, found


def _digit_chunk_star(args):
    return _digit_chunk(*args)


def verify_digit_relation(limit: int = DEFAULT_DIGIT_LIMIT, workers: int = 1):
    """Digit relation against integer arithmetic for nim-sum zero ``x, y <= z <= limit``.

    Returns ``(triples_checked, counterexamples)``.
    """
    xs = list(range(limit + 1))
    step = max(1, len(xs) // 16)
    jobs = [(xs[i : i + step], limit) for i in range(0, len(xs), step)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_digit_chunk_star, jobs))
    else:
        parts = [_digit_chunk(*j) for j in jobs]
    return sum(c for c, _ in parts), [cx for _, f in parts for cx in f]


def _structure_clauses(s: Subset, x: int, y: int, z: int) -> list[tuple[str, bool]]:
    if s is Subset.N01:
        return [
            ("x,y>=2", x >= 2 and y >= 2),
            ("z>=4", z >= 4),
            ("z>=x+2,y+2", z >= x + 2 and z >= y + 2),
            ("x+y=z", x + y == z),
        ]
    if s is Subset.N02:
        return [
            ("x,y>=3", x >= 3 and y >= 3),
            ("x,y odd", x % 2 == 1 and y % 2 == 1),
            ("z even", z % 2 == 0),
            ("z>=x+1,y+1", z >= x + 1 and z >= y + 1),
            ("x+y=z+2", x + y == z + 2),
        ]
    if s is Subset.P11:
        return [
            ("x,y>=2", x >= 2 and y >= 2),
            ("z>=3", z >= 3),
            ("z>=x+1,y+1", z >= x + 1 and z >= y + 1),
            ("|x+y-z|=1", abs(x + y - z) == 1),
        ]
    if s is Subset.P12:
        return [
            ("x,y,z>=3", min(x, y, z) >= 3),
            ("z>=x+2,y+2", z >= x + 2 and z >= y + 2),
            ("x+y=z+1", x + y == z + 1),
        ]
    if s is Subset.P01:
        return [
            (
                "x,y,z>=1 or (0,k,k)/(k,0,k)",
                min(x, y, z) >= 1 or (x == 0 and y == z) or (y == 0 and x == z),
            ),
            ("x+y+z even", (x + y + z) % 2 == 0),
        ]
    return [
        ("x,y,z>=1", min(x, y, z) >= 1),
        ("x+y+z even", (x + y + z) % 2 == 0),
    ]


def _structure_chunk(positions: Sequence[Position]) -> tuple[Counter, list[Counterexample]]:
    tally: Counter[str] = Counter()
    found = []
    for p in positions:
        hits = formula.subsets_of(p)
        kinds = sorted({s.value for s, _ in hits})
        if len(kinds) > 1:
            found.append(Counterexample(p, "at most one set", "+".join(kinds), "sets overlap"))
        for s, t in hits:
            tally[s.value] += 1
            for name, ok in _structure_clauses(s, *t):
                if not ok:
                    found.append(Counterexample(t, name, s.value, "structure clause violated"))
    return tally, found


def verify_lemma_structure(
    bound: BoundSpec = DEFAULT_LEMMA_STRUCTURE_BOUND,
    digit_limit: int | None = None,
    workers: int = 1,
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Digit lemma sweep plus the structural facts about each defined set.

    Every canonical position in ``bound`` is tested against all six sets in
    every orientation; members must satisfy their structural clauses and no
    position may belong to two sets. ``digit_limit`` defaults to the bound's
    largest pile.
    """
    _require_three(bound)
    started = time.perf_counter()
    positions = list(bound.positions())
    tally: Counter[str] = Counter()
    found: list[Counterexample] = []
    for part_tally, part_found in _map_chunks(_structure_chunk, positions, workers):
        tally.update(part_tally)
        found.extend(part_found)

    kmax = bound.limit if bound.mode is BoundMode.MAX_PILE else bound.limit // 2
    for k in range(kmax + 1):
        if not formula.in_P01(0, k, k):
            found.append(Counterexample((0, k, k), "P01", "not P01", "(0,k,k) family"))

    dlimit = bound.limit if digit_limit is None else digit_limit
    digit_checked, digit_found = verify_digit_relation(dlimit, workers)
    found.extend(digit_found)

    report = VerificationReport("lemma-structure", RESTRICTED, bound, len(positions))
    report.counts = {s.value: tally[s.value] for s in formula.REPORT_ORDER}
    report.counts["digit_limit"] = dlimit
    report.counts["digit_triples"] = digit_checked
    return _finish(report, found, started, max_counterexamples)


# -- lemma transitions ------------------------------------------------------


@lru_cache(maxsize=None)
def _set_class(p: Position) -> str | None:
    s = membership(p).subset
    if s is None:
        return None
    if s in (Subset.P01, Subset.P02):
        return "P0"
    if s in (Subset.P11, Subset.P12):
        return "P1"
    return "N0"


def _transition_chunk(positions: Sequence[Position]) -> tuple[Counter, list[Counterexample]]:
    tally: Counter[str] = Counter()
    found = []
    for p in positions:
        cls = _set_class(p)
        is_p = cls in ("P0", "P1")
        succ = legal_moves(p, RESTRICTED)
        p_succ = sorted(q for q in succ if _set_class(q) in ("P0", "P1"))
        if is_p:
            tally["P"] += 1
            for q in p_succ:
                found.append(
                    Counterexample(
                        p, "no P-successor", f"({format_position(q)})", f"(a) closure from {cls}"
                    )
                )
        else:
            tally["N"] += 1
            if not p_succ:
                found.append(Counterexample(p, "some P-successor", "none", "(b) reachability"))
        if cls not in ("P0", "P1"):
            continue
        # single-pile moves across the nim-sum 0 / nim-sum 1 line; P1 targets
        # (from P0) and P0 targets (from P1) are a subset of these
        target_sum = 1 if cls == "P0" else 0
        target_cls = "P1" if cls == "P0" else "P0"
        for i, u, q in iter_reductions(p):
            if nim_sum(q) != target_sum:
                continue
            tally["shape_moves"] += 1
            if _set_class(q) == target_cls:
                tally["cross_moves"] += 1
            v = p[i]
            if u != v - 1 or v % 2 == 0:
                found.append(
                    Counterexample(
                        p,
                        "one pile, odd, minus 1",
                        f"pile {v}->{u}",
                        f"(c) shape {cls}->nim-sum {target_sum}",
                    )
                )
    return tally, found


def verify_lemma_transitions(
    bound: BoundSpec = DEFAULT_TRANSITION_BOUND,
    workers: int = 1,
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Move-level facts behind the theorem, checked over a move-closed bound.

    (a) no move from a P-set member reaches a P-set member;
    (b) every other position has a move into a P-set;
    (c) a single-pile move from a P0 member to nim-sum 1, or from a P1
        member to nim-sum 0, lowers one odd pile by exactly one.
    """
    _require_three(bound)
    if not bound.move_closed:
        raise ValueError("transition checks need a total_stones bound (move-closed)")
    started = time.perf_counter()
    positions = list(bound.positions())
    tally: Counter[str] = Counter()
    found: list[Counterexample] = []
    for part_tally, part_found in _map_chunks(_transition_chunk, positions, workers):
        tally.update(part_tally)
        found.extend(part_found)
    report = VerificationReport("lemma-transitions", RESTRICTED, bound, len(positions))
    report.counts = {k: tally[k] for k in ("P", "N", "shape_moves", "cross_moves")}
    return _finish(report, found, started, max_counterexamples)


# -- conjecture -------------------------------------------------------------


class OracleInconsistency(RuntimeError):
    """Memoised and fresh Grundy computations disagree."""


def check_conjecture(
    bound: BoundSpec = DEFAULT_CONJECTURE_BOUND,
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Grundy value and nim-sum agree after dropping the lowest bit.

    Any position where ``grundy // 2 != nim_sum // 2`` is recomputed by a
    fresh solver before it is reported.
    """
    _require_three(bound)
    started = time.perf_counter()
    table = retrograde_fill(bound, RESTRICTED)
    found = []
    tally: Counter[str] = Counter()
    for p, g in table.rows():
        s = nim_sum(p)
        if g == s:
            tally["grundy_eq_nimsum"] += 1
        if g // 2 == s // 2:
            continue
        again = recompute_grundy(p, RESTRICTED)
        if again != g:
            raise OracleInconsistency(f"grundy{p}: table says {g}, fresh solver says {again}")
        found.append(
            Counterexample(p, f"grundy in {{{2 * (s // 2)},{2 * (s // 2) + 1}}}", str(g), f"nim-sum {s}")
        )
    report = VerificationReport("conjecture", RESTRICTED, bound, len(table), conjecture=True)
    report.counts = dict(tally)
    return _finish(report, found, started, max_counterexamples)


# -- unrestricted table -----------------------------------------------------


def emit_unrestricted_table(small_heap_max: int = 7, other_max: int = 40) -> list[Position]:
    """P-positions of 3-pile unrestricted amalgamation with a small heap.

    Lists canonical ``(a, b, c)`` with ``a <= small_heap_max`` and
    ``c <= other_max``, in lexicographic order.
    """
    solver = GrundySolver(AMALGAMATION)
    rows = []
    for a in range(min(small_heap_max, other_max) + 1):
        for b in range(a, other_max + 1):
            for c in range(b, other_max + 1):
                if solver.is_p((a, b, c)):
                    rows.append((a, b, c))
    return rows


def format_unrestricted_table(rows: Sequence[Position], small_heap_max: int, other_max: int) -> str:
    header = (
        f"# amalgam-nim p-positions v1; ruleset=amalgamation; piles=3; "
        f"small_max={small_heap_max}; max={other_max}"
    )
    return "\n".join([header, *(format_position(r) for r in rows)]) + "\n"


# -- classic calibration ----------------------------------------------------


def verify_classic_baseline(
    bound: BoundSpec = BoundSpec.total_stones(60),
    max_counterexamples: int = DEFAULT_MAX_COUNTEREXAMPLES,
) -> VerificationReport:
    """Oracle calibration: classic Nim Grundy values equal the nim-sum."""
    started = time.perf_counter()
    table = retrograde_fill(bound, CLASSIC)
    found = [
        Counterexample(p, str(nim_sum(p)), str(g), "classic grundy")
        for p, g in table.rows()
        if g != nim_sum(p)
    ]
    report = VerificationReport("classic-baseline", CLASSIC, bound, len(table))
    return _finish(report, found, started, max_counterexamples)
