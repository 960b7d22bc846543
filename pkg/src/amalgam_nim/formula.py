"""Closed-form P-position test for three-pile restricted amalgamation Nim.

All set predicates take an *ordered* triple ``(x, y, z)`` where ``z`` plays
the role of the largest pile. Every predicate is symmetric in ``x`` and ``y``,
so :func:`membership` only needs to rotate each coordinate of a position into
the ``z`` role.

Set names follow the usual labelling:

* ``P01``/``P02`` - nim-sum zero P-positions (``x+y == z`` with a pile below 2,
  or ``x+y > z+2``),
* ``N01``/``N02`` - nim-sum zero N-positions (``x+y == z`` with both piles at
  least 2, or ``x+y == z+2``),
* ``P11``/``P12`` - an ``N01``/``N02`` triple with the largest pile shifted by
  one (up when ``x+y`` is even, down when odd).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .engine import Outcome, Position, PositionError, canonicalize


class Relation(str, Enum):
    EQUAL_SUM = "EqualSum"  # x + y == z
    SUM_PLUS_TWO = "SumPlusTwo"  # x + y == z + 2
    SUM_EXCEEDS_TWO = "SumExceedsTwo"  # x + y > z + 2
    NOT_APPLICABLE = "NotApplicable"  # nim-sum is not zero


class DigitRelation(NamedTuple):
    value: Relation
    witness_bit: int | None = None


class Subset(str, Enum):
    P01 = "P01"
    P02 = "P02"
    P11 = "P11"
    P12 = "P12"
    N01 = "N01"
    N02 = "N02"

    @property
    def is_p(self) -> bool:
        return self.value[0] == "P"

    @property
    def label(self) -> str:
        """Subscripted label such as ``P_{1,2}``."""
        return f"{self.value[0]}_{{{self.value[1]},{self.value[2]}}}"


P_SETS = (Subset.P01, Subset.P02, Subset.P11, Subset.P12)
N_SETS = (Subset.N01, Subset.N02)
REPORT_ORDER = P_SETS + N_SETS


@dataclass(frozen=True)
class Membership:
    """Which defined set a triple belongs to.

    ``orientation`` is the ordered ``(x, y, z)`` form that matched, and
    ``witness`` is the ``N01``/``N02`` triple a ``P11``/``P12`` member was
    shifted from.
    """

    subset: Subset | None
    orientation: Position | None = None
    witness: Position | None = None

    @property
    def is_p(self) -> bool:
        return self.subset is not None and self.subset.is_p

    def describe(self) -> str:
        if self.subset is None:
            return "no set"
        text = self.subset.label
        if self.witness is not None:
            ws = _WITNESS_SET[self.subset].label
            text += f" via witness ({','.join(map(str, self.witness))}) ∈ {ws}"
        return text


def digit_relation(x: int, y: int, z: int) -> DigitRelation:
    """Compare ``x + y`` with ``z`` for a nim-sum zero triple.

    Returns the relation and, for ``SUM_EXCEEDS_TWO``, the lowest bit index
    ``j >= 1`` where ``x`` and ``y`` both have a one and ``z`` a zero.

    With ``x ^ y == z`` we have ``x + y == z + 2*(x & y)``, so the carry word
    ``x & y`` decides everything.

    >>> digit_relation(6, 10, 12)
    DigitRelation(value=<Relation.SUM_EXCEEDS_TWO: 'SumExceedsTwo'>, witness_bit=1)
    """
    if x ^ y ^ z:
        return _NA
    carry = x & y
    if carry == 0:
        return _EQ
    if carry == 1:
        return _PLUS_TWO
    high = carry >> 1
    return DigitRelation(Relation.SUM_EXCEEDS_TWO, (high & -high).bit_length())


_NA = DigitRelation(Relation.NOT_APPLICABLE)
_EQ = DigitRelation(Relation.EQUAL_SUM)
_PLUS_TWO = DigitRelation(Relation.SUM_PLUS_TWO)


def _ordered(x: int, y: int, z: int) -> bool:
    return x <= z and y <= z


def in_N01(x: int, y: int, z: int) -> bool:
    return (
        _ordered(x, y, z)
        and digit_relation(x, y, z).value is Relation.EQUAL_SUM
        and x >= 2
        and y >= 2
    )


def in_N02(x: int, y: int, z: int) -> bool:
    return _ordered(x, y, z) and digit_relation(x, y, z).value is Relation.SUM_PLUS_TWO


def in_P01(x: int, y: int, z: int) -> bool:
    return (
        _ordered(x, y, z)
        and digit_relation(x, y, z).value is Relation.EQUAL_SUM
        and min(x, y) < 2
    )


def in_P02(x: int, y: int, z: int) -> bool:
    return _ordered(x, y, z) and digit_relation(x, y, z).value is Relation.SUM_EXCEEDS_TWO


def _shift_witness(x: int, y: int, w: int) -> int | None:
    # undo the +1 (x+y even) or -1 (x+y odd) shift of the largest pile
    if (x + y) % 2 == 0:
        return w - 1 if w >= 1 else None
    return w + 1


def in_P11(x: int, y: int, w: int) -> bool:
    z = _shift_witness(x, y, w)
    return z is not None and in_N01(x, y, z)


def in_P12(x: int, y: int, w: int) -> bool:
    z = _shift_witness(x, y, w)
    return z is not None and in_N02(x, y, z)


_PREDICATES = {
    Subset.P01: in_P01,
    Subset.P02: in_P02,
    Subset.P11: in_P11,
    Subset.P12: in_P12,
    Subset.N01: in_N01,
    Subset.N02: in_N02,
}
_WITNESS_SET = {Subset.P11: Subset.N01, Subset.P12: Subset.N02}


def predicate(subset: Subset):
    return _PREDICATES[subset]


def orientations(p: Sequence[int]) -> list[Position]:
    """Distinct ordered triples placing each coordinate of ``p`` in the z role."""
    a, b, c = canonicalize(_check_three(p))
    out: list[Position] = []
    for t in ((a, b, c), (a, c, b), (b, c, a)):
        if t not in out:
            out.append(t)
    return out


def subsets_of(p: Sequence[int]) -> list[tuple[Subset, Position]]:
    """Every ``(subset, orientation)`` pair that ``p`` satisfies."""
    hits = []
    for t in orientations(p):
        for s in REPORT_ORDER:
            if _PREDICATES[s](*t):
                hits.append((s, t))
    return hits


def membership(p: Sequence[int]) -> Membership:
    """First matching set for the three-pile position ``p``.

    P-sets are tried before N-sets in the order P01, P02, P11, P12, N01, N02.
    """
    ts = orientations(p)
    for s in REPORT_ORDER:
        pred = _PREDICATES[s]
        for t in ts:
            if pred(*t):
                witness = None
                if s in _WITNESS_SET:
                    x, y, w = t
                    witness = (x, y, _shift_witness(x, y, w))
                return Membership(s, t, witness)
    return Membership(None)


def classify(p: Sequence[int]) -> Outcome:
    """P/N outcome of ``p`` under restricted amalgamation with threshold 2."""
    return Outcome.P if membership(p).is_p else Outcome.N


def is_p_position(p: Sequence[int]) -> bool:
    return membership(p).is_p


def _check_three(p: Sequence[int]) -> Sequence[int]:
    if len(p) != 3:
        raise PositionError(f"the closed form needs exactly 3 piles, got {len(p)}")
    return p
