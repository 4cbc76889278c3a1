"""Adaptive Dormand-Prince 5(4) integration of the flow systems.

Steps are controlled by a PI controller (Hairer & Wanner's DOPRI5 settings).
Every accepted step keeps a quintic Hermite interpolant through the state and
its first two derivatives at both ends (the second derivative is exact along
the flow), so the trajectory is C² and can be evaluated anywhere on the
integrated interval.  Finite-time singularities
are reported as ``blow_up_detected`` rather than raised.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError
from .flow import (
    ConservedQuantities,
    FlowConfig,
    FlowJet,
    FlowState,
    conserved_quantities,
    make_jet,
    ricci_rhs,
)

__all__ = [
    "IntegratorSettings",
    "Trajectory",
    "BlowupEstimate",
    "DriftReport",
    "integrate",
    "estimate_blowup",
    "check_invariants",
    "CSV_HEADER",
]

REACHED_T_END = "reached_t_end"
BLOW_UP = "blow_up_detected"
STEP_BUDGET = "step_budget"

CSV_HEADER = ("t", "a", "b", "c", "da", "db", "dc", "dda", "ddb", "ddc")

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass(frozen=True)
class IntegratorSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float | None = None
    h_max: float = math.inf
    max_steps: int = 100_000
    blowup_threshold: float = 1e12
    min_step: float = 1e-14
    fixed_step: float | None = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class _Segment:
    t0: float
    h: float
    coeffs: np.ndarray  # (6, 3) monomial coefficients in θ = (t - t0)/h

    def __call__(self, t: float) -> np.ndarray:
        th = (t - self.t0) / self.h
        y = self.coeffs[5]
        for c in self.coeffs[4::-1]:
            y = y * th + c
        return y

    def derivative(self, t: float) -> np.ndarray:
        th = (t - self.t0) / self.h
        y = 5 * self.coeffs[5]
        for k in range(4, 0, -1):
            y = y * th + k * self.coeffs[k]
        return y / self.h


@dataclass(frozen=True)
class Trajectory:
    """Integrated flow: accepted-step jets plus a dense interpolant.

    ``samples`` are sorted by increasing ``t`` regardless of the integration
    direction; ``init`` is the starting state.
    """

    config: FlowConfig
    init: FlowState
    samples: tuple
    invariant_drift: dict
    terminated: str
    segments: tuple = field(repr=False, default=())
    n_steps: int = 0
    n_rejected: int = 0

    @property
    def t_start(self) -> float:
        return self.samples[0].t

    @property
    def t_stop(self) -> float:
        return self.samples[-1].t

    @property
    def end(self) -> FlowJet:
        """Jet at the point where integration stopped."""
        return self.samples[0] if self.samples[-1].t == self.init.t else self.samples[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([s.state.coeffs for s in self.samples], dtype=float)

    def _check_inside(self, t: float) -> None:
        if not (self.t_start <= t <= self.t_stop):
            raise ValueError(f"t={t} outside integrated interval [{self.t_start}, {self.t_stop}]")

    def _segment_index(self, t: float) -> int:
        starts = [min(s.t0, s.t0 + s.h) for s in self.segments]
        return max(0, bisect.bisect_right(starts, t) - 1)

    def state_at(self, t: float) -> FlowState:
        """Dense-output state at ``t`` inside the integrated interval."""
        self._check_inside(t)
        if not self.segments:
            return self.samples[0].state
        y = self.segments[self._segment_index(t)](t)
        return FlowState(float(t), float(y[0]), float(y[1]), float(y[2]))

    def rate_at(self, t: float) -> np.ndarray:
        """Time derivative of the dense interpolant (not of the ODE) at ``t``."""
        self._check_inside(t)
        if not self.segments:
            return np.zeros(3)
        return self.segments[self._segment_index(t)].derivative(t)

    def jet_at(self, t: float) -> FlowJet:
        """Flow-consistent jet at the dense-output state."""
        return make_jet(self.config, self.state_at(t))

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,a,b,c,da,db,dc,dda,ddb,ddc`` rows at full precision."""
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for jet in self.samples:
            row = (jet.t, *jet.state.coeffs, *jet.d1, *jet.d2)
            writer.writerow([repr(float(v)) for v in row])
        if fh is None:
            return buf.getvalue()
        return None


def _rhs_array(cfg: FlowConfig, y: np.ndarray) -> np.ndarray:
    return np.array(ricci_rhs(cfg, (float(y[0]), float(y[1]), float(y[2]))))


def _initial_step(cfg, t0, y0, f0, direction, settings, span) -> float:
    if settings.h_init is not None:
        return abs(settings.h_init)
    scale = settings.atol + settings.rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    try:
        f1 = _rhs_array(cfg, y0 + direction * h0 * f0)
    except ZeroDivisionError:
        return h0 * 1e-3
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span, settings.h_max)


def _dp_step(cfg, t, y, f0, h):
    k = np.empty((7, 3))
    k[0] = f0
    for i in range(1, 7):
        yi = y + h * np.dot(_A[i], k[:i])
        k[i] = _rhs_array(cfg, yi)
    y_new = y + h * np.dot(_B, k)
    err = h * np.dot(_E, k)
    return y_new, err, k


def _hermite_coeffs(y0, y1, d0, d1, h) -> np.ndarray:
    """Quintic through ``(y, y', y'')`` at both ends of a step of length ``h``."""
    y0, y1 = np.asarray(y0), np.asarray(y1)
    f0, f1 = h * np.asarray(d0[0]), h * np.asarray(d1[0])
    s0, s1 = h * h * np.asarray(d0[1]), h * h * np.asarray(d1[1])
    dy = y1 - y0
    return np.array([
        y0,
        f0,
        s0 / 2,
        10 * dy - 6 * f0 - 4 * f1 - 1.5 * s0 + 0.5 * s1,
        -15 * dy + 8 * f0 + 7 * f1 + 1.5 * s0 - s1,
        6 * dy - 3 * f0 - 3 * f1 - 0.5 * s0 + 0.5 * s1,
    ])


def integrate(
    cfg: FlowConfig,
    init: FlowState,
    t_end: float,
    settings: IntegratorSettings | None = None,
    invariants: ConservedQuantities | None = None,
) -> Trajectory:
    """Integrate the flow from ``init`` to ``t_end`` (either direction).

    Blow-up (a coefficient beyond ``settings.blowup_threshold``, a step
    below ``settings.min_step`` or a singular right-hand side) ends the run
    early with ``terminated='blow_up_detected'``.
    """
    settings = settings or IntegratorSettings()
    t0 = float(init.t)
    t_end = float(t_end)
    if t_end == t0:
        raise ConfigurationError("t_end must differ from the initial time")
    y = np.array(init.coeffs, dtype=float)
    if np.any(y == 0):
        raise ConfigurationError("initial coefficients must be nonzero")
    direction = 1.0 if t_end > t0 else -1.0
    span = abs(t_end - t0)

    t = t0
    f = _rhs_array(cfg, y)
    jets = [make_jet(cfg, FlowState(t, *y.tolist()))]
    segments = []
    if settings.fixed_step is not None:
        h = abs(settings.fixed_step)
    else:
        h = _initial_step(cfg, t0, y, f, direction, settings, span)
    err_old = 1e-4
    rejected_last = False
    n_steps = n_rejected = 0
    status = REACHED_T_END

    while True:
        remaining = abs(t_end - t)
        if remaining <= 1e-15 * max(1.0, abs(t_end)):
            break
        if n_steps >= settings.max_steps:
            status = STEP_BUDGET
            break
        min_step = max(settings.min_step, 4 * np.spacing(abs(t)))
        if h < min_step:
            status = BLOW_UP
            break
        h = min(h, settings.h_max, remaining)
        hs = direction * h
        try:
            with np.errstate(all="ignore"):
                y_new, err, k = _dp_step(cfg, t, y, f, hs)
            # a coefficient changing sign means the step jumped over a degeneration
            ok = (
                np.all(np.isfinite(y_new))
                and np.all(np.isfinite(k))
                and np.all(np.sign(y_new) == np.sign(y))
            )
        except ZeroDivisionError:
            ok = False
        if not ok:
            if settings.fixed_step is not None:
                status = BLOW_UP
                break
            n_rejected += 1
            h *= 0.25
            rejected_last = True
            continue

        if settings.fixed_step is None:
            scale = settings.atol + settings.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            if err_norm > 1.0:
                n_rejected += 1
                h *= max(_FAC_MIN, _SAFETY * err_norm ** -0.2)
                rejected_last = True
                continue
            fac = _SAFETY * max(err_norm, 1e-16) ** -_EXPO * err_old**_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_old = max(err_norm, 1e-4)
            h_next = h * fac
        else:
            h_next = h

        t_new = t_end if h == remaining else t + hs
        try:
            jet = make_jet(cfg, FlowState(float(t_new), *y_new.tolist()))
        except ZeroDivisionError:
            status = BLOW_UP
            break
        prev = jets[-1]
        segments.append(
            _Segment(t, t_new - t, _hermite_coeffs(y, y_new, (prev.d1, prev.d2), (jet.d1, jet.d2), t_new - t))
        )
        jets.append(jet)
        t, y, f = t_new, y_new, k[6]
        n_steps += 1
        rejected_last = False
        h = h_next
        if np.max(np.abs(y)) > settings.blowup_threshold:
            status = BLOW_UP
            break

    if direction < 0:
        jets.reverse()
        segments.reverse()
    invariants = conserved_quantities(cfg.group) if invariants is None else invariants
    drift = _drift([j.state for j in jets], init, invariants).drift
    return Trajectory(
        config=cfg,
        init=FlowState(t0, *(float(v) for v in init.coeffs)),
        samples=tuple(jets),
        invariant_drift=drift,
        terminated=status,
        segments=tuple(segments),
        n_steps=n_steps,
        n_rejected=n_rejected,
    )


@dataclass(frozen=True)
class DriftReport:
    """Per-invariant max ``|F(t) - F(t0)| / |F(t0)|``.

    ``flagged`` lists, per invariant, the sample times where it could not be
    evaluated.
    """

    drift: dict
    flagged: dict

    @property
    def max_drift(self) -> float:
        return max(self.drift.values(), default=0.0)


def _drift(states, init, invariants) -> DriftReport:
    drift, flagged = {}, {}
    for inv in invariants:
        try:
            ref = inv(init)
        except ZeroDivisionError:
            flagged[inv.name] = [init.t]
            drift[inv.name] = math.nan
            continue
        worst = 0.0
        bad = []
        for s in states:
            try:
                v = inv(s)
            except ZeroDivisionError:
                bad.append(s.t)
                continue
            dev = abs(v - ref)
            if ref != 0:
                dev /= abs(ref)
            worst = max(worst, float(dev))
        drift[inv.name] = worst
        if bad:
            flagged[inv.name] = bad
    return DriftReport(drift, flagged)


def check_invariants(traj: Trajectory, invariants=None) -> DriftReport:
    """Drift of each invariant over the trajectory's accepted steps."""
    if not traj.samples:
        raise ValueError("empty trajectory")
    if invariants is None:
        invariants = conserved_quantities(traj.config.group)
    return _drift([j.state for j in traj.samples], traj.init, invariants)


@dataclass(frozen=True)
class BlowupEstimate:
    """End of the maximal existence interval on one side.

    ``T`` is the distance from the initial time to the singularity, or None
    when none was found within the search horizon (open interval).
    """

    T: float | None
    side: str
    t_singular: float | None = None
    horizon: float | None = None

    @property
    def found(self) -> bool:
        return self.T is not None


def estimate_blowup(
    cfg: FlowConfig,
    init: FlowState,
    side: str = "past",
    horizon: float = 1e3,
    settings: IntegratorSettings | None = None,
) -> BlowupEstimate:
    """Locate a finite-time singularity by integrating until steps collapse."""
    if side not in ("past", "future"):
        raise ValueError("side must be 'past' or 'future'")
    if any(not v > 0 for v in init.coeffs):
        raise ValueError("estimate_blowup expects positive initial data")
    settings = settings or IntegratorSettings(max_steps=1_000_000)
    sign = -1.0 if side == "past" else 1.0
    traj = integrate(
        cfg, init, init.t + sign * horizon, settings, invariants=ConservedQuantities(cfg.group)
    )
    if traj.terminated != BLOW_UP:
        return BlowupEstimate(None, side, None, horizon)
    t_sing = traj.t_start if side == "past" else traj.t_stop
    return BlowupEstimate(float(abs(t_sing - init.t)), side, float(t_sing), horizon)
