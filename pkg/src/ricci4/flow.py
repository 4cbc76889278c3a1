"""Ricci flow of diagonal left-invariant metrics on 3D unimodular Lie groups.

The evolving metric is ``g3 = a (θ¹)² + b (θ²)² + c (θ³)²`` on a Milnor frame
with structure constants ``(n1, n2, n3)``.  Under ``∂g/∂t = -k Rc`` the
coefficients obey::

    da/dt = k [(n2 b - n3 c)² - n1² a²] / (2 b c)     (and cyclically)

The backward flow flips the sign.  Everything here is written with plain
arithmetic so that ``fractions.Fraction`` and sympy symbols pass through
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .exceptions import (
    DegenerateRelationError,
    DomainError,
    SingularMetricError,
    UnsupportedGroupError,
)
from .lie_catalog import E2, E11, H3, GroupSpec, get_group

__all__ = [
    "FlowState",
    "FlowConfig",
    "FlowJet",
    "ReducedState",
    "RatioRelation",
    "Invariant",
    "ConservedQuantities",
    "left_invariant_ricci",
    "ricci_rhs",
    "jet_second",
    "make_jet",
    "conserved_quantities",
    "heisenberg_closed_form",
    "heisenberg_blowup_time",
    "reduced_rhs",
    "reduce_state",
    "ratio_relation",
]

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class FlowState:
    t: float
    a: float
    b: float
    c: float

    @property
    def coeffs(self) -> tuple:
        return (self.a, self.b, self.c)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, t=0.0) -> FlowState:
        a, b, c = coeffs
        return cls(t, a, b, c)


@dataclass(frozen=True)
class FlowConfig:
    """Which flow to run.

    ``scale=1`` gives the ``1/2``-normalized systems; ``scale=2`` the
    ``∂g/∂t = -2 Rc`` normalization.
    """

    group: GroupSpec
    direction: str = FORWARD
    scale: float = 1

    def __post_init__(self):
        object.__setattr__(self, "group", get_group(self.group))
        if self.direction not in (FORWARD, BACKWARD):
            raise ValueError(f"direction must be 'forward' or 'backward', got {self.direction!r}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")

    @property
    def sign(self) -> int:
        return 1 if self.direction == FORWARD else -1


@dataclass(frozen=True)
class FlowJet:
    """State with first and second time derivatives of ``(a, b, c)``."""

    state: FlowState
    d1: tuple
    d2: tuple

    @property
    def t(self) -> float:
        return self.state.t


def _coeffs(s) -> tuple:
    if isinstance(s, FlowState):
        return s.coeffs
    a, b, c = s
    return (a, b, c)


def _check_nonzero(a, b, c) -> None:
    if a == 0 or b == 0 or c == 0:
        raise SingularMetricError(f"metric coefficient vanished: (a, b, c) = ({a}, {b}, {c})")


# One coefficient x with cyclic successors y, z and constants (ni, nj, nk).
def _component(ni, nj, nk, x, y, z):
    return ((nj * y - nk * z) ** 2 - ni * ni * x * x) / (2 * y * z)


def _component_grad(ni, nj, nk, x, y, z):
    u = nj * y - nk * z
    p = u * u - ni * ni * x * x
    dx = -(ni * ni) * x / (y * z)
    dy = (2 * nj * u * y - p) / (2 * y * y * z)
    dz = (-2 * nk * u * z - p) / (2 * y * z * z)
    return dx, dy, dz


def left_invariant_ricci(n, coeffs) -> tuple:
    """Diagonal Ricci ``Rc(F_i, F_i)`` of ``Σ x_i (θⁱ)²`` with constants ``n``."""
    x, y, z = coeffs
    _check_nonzero(x, y, z)
    n1, n2, n3 = n
    return (
        -_component(n1, n2, n3, x, y, z),
        -_component(n2, n3, n1, y, z, x),
        -_component(n3, n1, n2, z, x, y),
    )


def ricci_rhs(cfg: FlowConfig, s) -> tuple:
    """Time derivatives ``(da, db, dc)`` of the flow at state ``s``."""
    a, b, c = _coeffs(s)
    _check_nonzero(a, b, c)
    n1, n2, n3 = cfg.group.n
    k = cfg.sign * cfg.scale
    return (
        k * _component(n1, n2, n3, a, b, c),
        k * _component(n2, n3, n1, b, c, a),
        k * _component(n3, n1, n2, c, a, b),
    )


def jet_second(cfg: FlowConfig, s) -> tuple:
    """Second derivatives along the flow, by the chain rule ``J · rhs``."""
    a, b, c = _coeffs(s)
    da, db, dc = ricci_rhs(cfg, (a, b, c))
    n1, n2, n3 = cfg.group.n
    k = cfg.sign * cfg.scale
    # each gradient is ordered (self, next, next-next)
    ga = _component_grad(n1, n2, n3, a, b, c)
    gb = _component_grad(n2, n3, n1, b, c, a)
    gc = _component_grad(n3, n1, n2, c, a, b)
    return (
        k * (ga[0] * da + ga[1] * db + ga[2] * dc),
        k * (gb[0] * db + gb[1] * dc + gb[2] * da),
        k * (gc[0] * dc + gc[1] * da + gc[2] * db),
    )


def make_jet(cfg: FlowConfig, state: FlowState) -> FlowJet:
    return FlowJet(state, ricci_rhs(cfg, state), jet_second(cfg, state))


@dataclass(frozen=True)
class Invariant:
    name: str
    func: Callable

    def __call__(self, s):
        return self.func(*_coeffs(s))


@dataclass(frozen=True)
class ConservedQuantities:
    """Invariant functionals of one group's flow.

    ``cataloged`` is False for groups with no known invariants, in which case
    the collection is empty.
    """

    group: GroupSpec
    invariants: tuple = field(default_factory=tuple)
    cataloged: bool = True

    def __iter__(self) -> Iterator[Invariant]:
        return iter(self.invariants)

    def __len__(self) -> int:
        return len(self.invariants)

    @property
    def names(self) -> list[str]:
        return [inv.name for inv in self.invariants]


_INVARIANTS = {
    H3.name: (
        Invariant("ab", lambda a, b, c: a * b),
        Invariant("ac", lambda a, b, c: a * c),
        Invariant("b/c", lambda a, b, c: b / c),
    ),
    E11.name: (
        Invariant("ac", lambda a, b, c: a * c),
        Invariant("b(c-a)", lambda a, b, c: b * (c - a)),
    ),
    E2.name: (
        Invariant("ac", lambda a, b, c: a * c),
        Invariant("b(c+a)", lambda a, b, c: b * (c + a)),
    ),
}


def conserved_quantities(group: GroupSpec | str) -> ConservedQuantities:
    g = get_group(group)
    if g.name in _INVARIANTS:
        return ConservedQuantities(g, _INVARIANTS[g.name], True)
    return ConservedQuantities(g, (), False)


def _cbrt(x) -> float:
    return math.copysign(abs(float(x)) ** (1.0 / 3.0), float(x))


def heisenberg_blowup_time(init: FlowState) -> float:
    """``T = (2/3) b0 c0 / a0``: the H3 flow from ``init`` exists on ``(t0 - T, ∞)``."""
    a0, b0, c0 = (float(v) for v in init.coeffs)
    _check_nonzero(a0, b0, c0)
    return 2.0 * b0 * c0 / (3.0 * a0)


def heisenberg_closed_form(init: FlowState, t: float) -> FlowState:
    """Exact H3 flow (scale 1, forward) at time ``t``.

    Uses real cube roots, so data with ``a0 b0 c0 < 0`` is also handled.
    """
    a0, b0, c0 = (float(v) for v in init.coeffs)
    _check_nonzero(a0, b0, c0)
    tau = float(t) - float(init.t)
    s = 1.5 * tau + b0 * c0 / a0
    if s * (b0 * c0 / a0) <= 0:
        raise DomainError(
            f"t={t} is at or beyond the blow-up of the H3 flow",
            blowup_time=heisenberg_blowup_time(init),
        )
    ra, rb, rc, rs = _cbrt(a0), _cbrt(b0), _cbrt(c0), _cbrt(s)
    return FlowState(
        float(t),
        ra * ra * rb * rc / rs,
        ra * rb * rb / rc * rs,
        ra / rb * rc * rc * rs,
    )


@dataclass(frozen=True)
class ReducedState:
    b: float
    ratio: float


def reduce_state(s) -> ReducedState:
    a, b, c = _coeffs(s)
    return ReducedState(b, a / c)


def _check_reducible(group: GroupSpec | str) -> GroupSpec:
    g = get_group(group)
    if g not in (E11, E2):
        raise UnsupportedGroupError(f"no reduced system for {g.name}; expected E11 or E2")
    return g


def reduced_rhs(group: GroupSpec | str, r: ReducedState) -> tuple:
    """``(db/dt, d(ratio)/dt)`` with ``ratio = a/c`` and ``ac`` frozen."""
    g = _check_reducible(group)
    b, q = r.b, r.ratio
    if not q > 0 or b == 0:
        raise DomainError(f"reduced state needs ratio > 0 and b != 0, got b={b}, ratio={q}")
    if g == E11:
        db = (1 + q) ** 2 / (2 * q)
    else:
        db = (1 - q) ** 2 / (2 * q)
    return (db, (1 - q * q) / b)


@dataclass(frozen=True)
class RatioRelation:
    """``b = C sqrt(ρ)/|1-ρ|`` (E11) or ``b = C sqrt(k)/(1+k)`` (E2)."""

    group: GroupSpec
    constant: float

    def b_of(self, ratio: float) -> float:
        if self.group == E11:
            return self.constant * math.sqrt(ratio) / abs(1 - ratio)
        return self.constant * math.sqrt(ratio) / (1 + ratio)


def ratio_relation(group: GroupSpec | str, init) -> RatioRelation:
    g = _check_reducible(group)
    a0, b0, c0 = _coeffs(init)
    _check_nonzero(a0, b0, c0)
    q0 = a0 / c0
    if not q0 > 0:
        raise DomainError(f"ratio a/c must be positive, got {q0}")
    if g == E11:
        if q0 == 1:
            raise DegenerateRelationError("ρ0 = 1: the E(1,1) ratio relation is vacuous")
        return RatioRelation(g, b0 * abs(1 - q0) / math.sqrt(q0))
    return RatioRelation(g, b0 * (1 + q0) / math.sqrt(q0))
