"""Unimodular simply-connected 3D Lie groups and their Milnor frames.

A Milnor frame satisfies ``[F2, F3] = n1 F1``, ``[F3, F1] = n2 F2`` and
``[F1, F2] = n3 F3`` with ``n_i`` in ``{-1, 0, +1}``.  Each group is stored
with one canonical triple; every flow and curvature formula in the package is
written against that triple.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .exceptions import UnknownSignatureError

__all__ = [
    "GroupSpec",
    "SignPattern",
    "CaseRow",
    "SU2",
    "SL2R",
    "E2",
    "E11",
    "H3",
    "R3",
    "GROUPS",
    "get_group",
    "group_from_signature",
    "milnor_constants",
    "table1_cases",
    "table1_case",
]


@dataclass(frozen=True)
class GroupSpec:
    name: str
    n: tuple[int, int, int]

    def __str__(self) -> str:
        return self.name


SU2 = GroupSpec("SU2", (1, 1, 1))
SL2R = GroupSpec("SL2R", (1, 1, -1))
E2 = GroupSpec("E2", (-1, 0, -1))
E11 = GroupSpec("E11", (1, 0, -1))
H3 = GroupSpec("H3", (1, 0, 0))
R3 = GroupSpec("R3", (0, 0, 0))

GROUPS: dict[str, GroupSpec] = {g.name: g for g in (SU2, SL2R, E2, E11, H3, R3)}

# Classification rows keyed by the sorted triple.  Global sign flips (F_i -> -F_i)
# and reorderings are the same group, so both members of each row appear.
_CLASSIFICATION: dict[tuple[int, int, int], GroupSpec] = {
    (-1, -1, -1): SU2,
    (1, 1, 1): SU2,
    (-1, -1, 1): SL2R,
    (-1, 1, 1): SL2R,
    (-1, -1, 0): E2,
    (0, 1, 1): E2,
    (-1, 0, 1): E11,
    (-1, 0, 0): H3,
    (0, 0, 1): H3,
    (0, 0, 0): R3,
}

_ALIASES = {
    "su2": SU2,
    "su(2)": SU2,
    "sl2r": SL2R,
    "sl(2,r)": SL2R,
    "e2": E2,
    "e(2)": E2,
    "e11": E11,
    "e(1,1)": E11,
    "h3": H3,
    "r3": R3,
}


def get_group(name: str | GroupSpec) -> GroupSpec:
    """Look up a group by (case-insensitive) name."""
    if isinstance(name, GroupSpec):
        return name
    key = name.strip().lower().replace(" ", "")
    try:
        return _ALIASES[key]
    except KeyError:
        raise UnknownSignatureError(
            f"unknown group {name!r}; expected one of {sorted(GROUPS)}"
        ) from None


def group_from_signature(n: Iterable[int]) -> GroupSpec:
    """Classify structure constants ``(n1, n2, n3)`` up to order and sign.

    Order of the constants is irrelevant.

    >>> group_from_signature((1, 0, 0)).name
    'H3'
    >>> group_from_signature((0, -1, -1)).name
    'E2'
    """
    triple = tuple(n)
    if len(triple) != 3 or any(v not in (-1, 0, 1) for v in triple):
        raise UnknownSignatureError(
            f"signature {triple!r} is not a triple over {{-1, 0, +1}}"
        )
    key = tuple(sorted(int(v) for v in triple))
    try:
        return _CLASSIFICATION[key]
    except KeyError:
        raise UnknownSignatureError(f"signature {triple!r} is not a unimodular signature") from None


def milnor_constants(group: GroupSpec | str) -> tuple[int, int, int]:
    return get_group(group).n


@dataclass(frozen=True)
class SignPattern:
    """Signs applied to ``(a^2, b^2, c^2)``; ``dt^2`` always carries +1."""

    eps: tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        if len(self.eps) != 3 or any(e not in (1, -1) for e in self.eps):
            raise ValueError(f"sign pattern must be three of +1/-1, got {self.eps!r}")

    @classmethod
    def parse(cls, text: str | SignPattern) -> SignPattern:
        """Parse ``'+--'`` style strings."""
        if isinstance(text, SignPattern):
            return text
        s = text.strip()
        if len(s) != 3 or any(ch not in "+-" for ch in s):
            raise ValueError(f"sign pattern must look like '+--', got {text!r}")
        return cls(tuple(1 if ch == "+" else -1 for ch in s))

    @property
    def signature(self) -> tuple[int, int]:
        """(positives, negatives) of the 4-metric, counting ``dt^2``."""
        neg = sum(1 for e in self.eps if e < 0)
        return (4 - neg, neg)

    def __str__(self) -> str:
        return "".join("+" if e > 0 else "-" for e in self.eps)


ALL_PLUS = SignPattern((1, 1, 1))


@dataclass(frozen=True)
class CaseRow:
    group: GroupSpec
    flow_group: GroupSpec
    signs: SignPattern = ALL_PLUS

    @property
    def label(self) -> str:
        return f"{self.group.name}/{self.flow_group.name}/{self.signs}"

    def to_dict(self) -> dict:
        return {
            "group": self.group.name,
            "flow_group": self.flow_group.name,
            "signs": str(self.signs),
            "signature": list(self.signs.signature),
        }


_TABLE1 = (
    CaseRow(SU2, SU2, ALL_PLUS),
    CaseRow(E2, E2, ALL_PLUS),
    CaseRow(SL2R, SU2, SignPattern((-1, -1, 1))),
    CaseRow(H3, H3, ALL_PLUS),
    CaseRow(E11, E11, SignPattern((1, -1, -1))),
)


def table1_cases() -> list[CaseRow]:
    """The five Ricci-flat constructions, in table order."""
    return list(_TABLE1)


def table1_case(group: GroupSpec | str) -> CaseRow:
    """The Ricci-flat case whose metric lives on ``group``."""
    g = get_group(group)
    for row in _TABLE1:
        if row.group == g:
            return row
    raise UnknownSignatureError(f"{g.name} has no Ricci-flat case")
