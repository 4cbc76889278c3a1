"""Reference metrics and structures on the SU(2), H3 and E(2) space-times.

Taub-NUT and Eguchi-Hanson are given in a radial coordinate ``r`` with
``dt = h(r) dr``; their t-jets come from analytic r-derivatives via
``d/dt = (1/h) d/dr``.

Eguchi-Hanson and the constant-curvature examples are written on the SU(2)
coframe with ``dθⁱ = 2 θʲ∧θᵏ`` (``bracket_scale=2``); Taub-NUT on the
Milnor frame itself (``bracket_scale=1``).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .exceptions import DomainError, UnsupportedGroupError
from .flow import FlowConfig, FlowJet, FlowState, ricci_rhs
from .lie_catalog import ALL_PLUS, E2, H3, SU2, get_group
from .oracle import FrameMetricJet, oracle_riemann

__all__ = [
    "RadialSample",
    "ClosureResiduals",
    "ResidualReport",
    "CoefficientFamily",
    "taub_nut_jet",
    "eguchi_hanson_jet",
    "verify_backward_flow",
    "verify_modified_flow",
    "hyperkahler_residuals",
    "solve_closure",
    "constant_curvature_family",
    "default_radii",
]

MATCH_TOL = 1e-12


@dataclass(frozen=True)
class RadialSample:
    """One point of a radial metric: coordinates, dr/dt factor and t-jet."""

    r: float
    t: float | None
    h: float
    state: FlowState
    jet: FrameMetricJet

    @property
    def flow_jet(self) -> FlowJet:
        return FlowJet(self.state, self.jet.df, self.jet.ddf)


def _t_jet(f, f_r, f_rr, h, h_r):
    """(f, df/dt, d²f/dt²) from r-derivatives with ``dt = h dr``."""
    df = f_r / h
    ddf = (f_rr - f_r * h_r / h) / (h * h)
    return f, df, ddf


def _check_radius(m: float, r: float) -> None:
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if not r > m:
        raise DomainError(f"need r > m, got r={r}, m={m}")


def taub_nut_jet(m: float, r: float) -> RadialSample:
    """Taub-NUT: ``a = b = sqrt(r²-m²)``, ``c = 2m sqrt((r-m)/(r+m))``."""
    _check_radius(m, r)
    q = (r - m) / (r + m)
    q_r = 2 * m / (r + m) ** 2
    sq = math.sqrt(q)
    h = 1 / sq
    h_r = -0.5 * q_r / (q * sq)

    a = math.sqrt(r * r - m * m)
    a_r = r / a
    a_rr = -m * m / a**3
    c = 2 * m * sq
    c_r = 2 * m * m / ((r + m) ** 2 * sq)
    c_rr = 2 * m * m * (-2 / ((r + m) ** 3 * sq) - 0.5 * q_r / ((r + m) ** 2 * q * sq))

    fa = _t_jet(a, a_r, a_rr, h, h_r)
    fc = _t_jet(c, c_r, c_rr, h, h_r)
    t = a + m * math.acosh(r / m)
    jet = FrameMetricJet(
        SU2, ALL_PLUS, (fa[0], fa[0], fc[0]), (fa[1], fa[1], fc[1]), (fa[2], fa[2], fc[2]), 1.0
    )
    return RadialSample(r, t, h, FlowState(t, a, a, c), jet)


def _eh_time(m: float, r: float) -> float:
    val, _ = quad(lambda x: 1 / math.sqrt(1 - (m / x) ** 4), m, r, limit=200)
    return val


def eguchi_hanson_jet(m: float, r: float, with_time: bool = True) -> RadialSample:
    """Eguchi-Hanson: ``a = b = r``, ``c = r sqrt(1 - (m/r)⁴)``."""
    _check_radius(m, r)
    m4 = m**4
    s = math.sqrt(1 - m4 / r**4)
    s_r = 2 * m4 / (r**5 * s)
    h = 1 / s
    h_r = -s_r / (s * s)

    c = r * s
    c_r = (r + m4 / r**3) / c
    c_rr = ((1 - 3 * m4 / r**4) * c - (r + m4 / r**3) * c_r) / (c * c)

    fa = _t_jet(r, 1.0, 0.0, h, h_r)
    fc = _t_jet(c, c_r, c_rr, h, h_r)
    t = _eh_time(m, r) if with_time else None
    jet = FrameMetricJet(
        SU2, ALL_PLUS, (fa[0], fa[0], fc[0]), (fa[1], fa[1], fc[1]), (fa[2], fa[2], fc[2]), 2.0
    )
    return RadialSample(r, t, h, FlowState(t if t is not None else math.nan, r, r, c), jet)


def default_radii(m: float, r_max_factor: float = 100.0, n: int = 30) -> np.ndarray:
    """``n`` log-spaced radii in ``(m, r_max_factor * m]``."""
    return np.geomspace(m, r_max_factor * m, n + 1)[1:]


def _prepare_radii(m: float, r_samples) -> tuple[np.ndarray, int]:
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    radii = default_radii(m) if r_samples is None else np.asarray(r_samples, dtype=float)
    keep = radii > m
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        warnings.warn(f"dropped {dropped} radii in (0, m={m}]", RuntimeWarning, stacklevel=3)
    return radii[keep], dropped


@dataclass
class ResidualReport:
    metric: str
    m: float
    samples: list
    conventions: dict
    matched_convention: str | None
    printed_convention: str
    bracket_scale: float
    ricci_max: float
    dropped_radii: int = 0
    notes: list = field(default_factory=list)

    @property
    def printed_matches(self) -> bool:
        return self.matched_convention == self.printed_convention

    @property
    def matched_residual(self) -> float:
        if self.matched_convention is None:
            return math.inf
        return self.conventions[self.matched_convention]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "m": self.m,
            "samples": self.samples,
            "matched_convention": self.matched_convention,
            "printed_convention": self.printed_convention,
            "printed_convention_matches": self.printed_matches,
            "conventions": self.conventions,
            "bracket_scale": self.bracket_scale,
            "ricci_max": self.ricci_max,
            "dropped_radii": self.dropped_radii,
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _scan(metric, m, points, conventions: dict[str, Callable], printed, bracket_scale, dropped):
    worst = {name: 0.0 for name in conventions}
    samples = []
    ricci_max = 0.0
    for p in points:
        res = {}
        for name, rhs in conventions.items():
            pred = rhs(p.state.coeffs)
            res[name] = float(max(abs(x - y) for x, y in zip(p.jet.df, pred)))
            worst[name] = max(worst[name], res[name])
        rmax = float(np.max(np.abs(oracle_riemann(p.jet).ricci())))
        ricci_max = max(ricci_max, rmax)
        samples.append({"r": float(p.r), "t": p.t, "residuals": res, "ricci_max": rmax})
    best = min(worst, key=worst.get) if worst else None
    matched = best if best is not None and worst[best] < MATCH_TOL else None
    notes = []
    if matched is None:
        notes.append("no scanned convention reproduces the coefficient ODE")
    elif matched != printed:
        notes.append(f"printed convention '{printed}' does not match; '{matched}' does")
    return ResidualReport(
        metric, float(m), samples, worst, matched, printed, bracket_scale, ricci_max, dropped, notes
    )


def verify_backward_flow(m: float, r_samples=None) -> ResidualReport:
    """Check the Taub-NUT coefficients against the SU(2) flows.

    Scans forward/backward at scale 1 and 2; the printed system is the
    backward flow without the 1/2 factor (scale 2).
    """
    radii, dropped = _prepare_radii(m, r_samples)
    conventions = {}
    for direction in ("forward", "backward"):
        for scale in (1, 2):
            cfg = FlowConfig(SU2, direction, scale)
            conventions[f"{direction}, scale {scale}"] = lambda s, cfg=cfg: ricci_rhs(cfg, s)
    points = [taub_nut_jet(m, r) for r in radii]
    return _scan("taub-nut", m, points, conventions, "backward, scale 2", 1.0, dropped)


def verify_modified_flow(m: float, r_samples=None) -> ResidualReport:
    """Check Eguchi-Hanson against ``ȧ = σ[(b-c)² - a²]/(κ bc) + 2`` (cyclic).

    ``σ = +1`` is the forward orientation; ``κ = 1`` drops the 1/2 factor.
    """
    radii, dropped = _prepare_radii(m, r_samples)
    conventions = {}
    for direction in ("forward", "backward"):
        for kappa in (1, 2):
            cfg = FlowConfig(SU2, direction, 2 / kappa)
            conventions[f"{direction}, kappa {kappa}"] = lambda s, cfg=cfg: tuple(
                v + 2 for v in ricci_rhs(cfg, s)
            )
    points = [eguchi_hanson_jet(m, r) for r in radii]
    return _scan("eguchi-hanson", m, points, conventions, "backward, kappa 1", 2.0, dropped)


@dataclass(frozen=True)
class ClosureResiduals:
    """Coefficients of ``dω¹, dω², dω³``; all zero iff the triple is closed."""

    r1: float
    r2: float
    r3: float

    def max_abs(self) -> float:
        return max(abs(self.r1), abs(self.r2), abs(self.r3))


def hyperkahler_residuals(group, jet: FlowJet) -> ClosureResiduals:
    g = get_group(group)
    a, b, c = jet.state.coeffs
    da, db, dc = jet.d1
    if g == H3:
        return ClosureResiduals(a - db * c - b * dc, da * c + a * dc, da * b + a * db)
    if g == E2:
        return ClosureResiduals(
            dc * a + c * da,
            da * b + a * db - (c - a),
            db * c + b * dc - (a - c),
        )
    raise UnsupportedGroupError(f"no Kähler triple for {g.name}; expected H3 or E2")


def solve_closure(group, state: FlowState) -> tuple:
    """The unique ``(ȧ, ḃ, ċ)`` making all three closure residuals vanish."""
    g = get_group(group)
    a, b, c = (float(v) for v in state.coeffs)
    if g == H3:
        M = [[0, c, b], [c, 0, a], [b, a, 0]]
        rhs = [a, 0, 0]
    elif g == E2:
        M = [[c, 0, a], [b, a, 0], [0, c, b]]
        rhs = [0, c - a, a - c]
    else:
        raise UnsupportedGroupError(f"no Kähler triple for {g.name}; expected H3 or E2")
    return tuple(float(v) for v in np.linalg.solve(np.array(M, dtype=float), rhs))


_FAMILIES = {
    "linear": (lambda t: t, lambda t: 1.0, lambda t: 0.0, 0.0),
    "sin": (math.sin, math.cos, lambda t: -math.sin(t), 1.0),
    "sinh": (math.sinh, math.cosh, math.sinh, -1.0),
}


@dataclass(frozen=True)
class CoefficientFamily:
    """``a = b = c = f(t)`` (or constants) on the SU(2) space-time."""

    kind: str
    constants: tuple = (1.0, 1.0, 1.0)
    bracket_scale: float = 2.0

    @property
    def expected_curvature(self) -> float | None:
        return None if self.kind == "product" else _FAMILIES[self.kind][3]

    def coeffs(self, t: float) -> tuple:
        if self.kind == "product":
            return tuple(float(v) for v in self.constants)
        f = _FAMILIES[self.kind][0](t)
        return (f, f, f)

    def jet(self, t: float) -> FrameMetricJet:
        if self.kind == "product":
            f, df, ddf = self.coeffs(t), (0.0,) * 3, (0.0,) * 3
        else:
            fn, dfn, ddfn, _ = _FAMILIES[self.kind]
            f, df, ddf = (fn(t),) * 3, (dfn(t),) * 3, (ddfn(t),) * 3
        return FrameMetricJet(SU2, ALL_PLUS, f, df, ddf, self.bracket_scale)


def constant_curvature_family(kind: str, constants=(1.0, 1.0, 1.0)) -> CoefficientFamily:
    """One of ``linear``, ``product``, ``sin``, ``sinh``."""
    if kind not in _FAMILIES and kind != "product":
        raise ValueError(f"unknown family {kind!r}; expected linear, product, sin or sinh")
    return CoefficientFamily(kind, tuple(float(v) for v in constants))
