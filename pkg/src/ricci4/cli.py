"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a failed check or numerical
failure, 2 on bad usage.
"""

from __future__ import annotations

import json
import math
import os
import sys
import warnings
from dataclasses import dataclass

import click
import numpy as np

from .exceptions import Ricci4Error
from .flow import FlowConfig, FlowState, conserved_quantities
from .integrator import BLOW_UP, STEP_BUDGET, IntegratorSettings, check_invariants, integrate
from .lie_catalog import CaseRow, SignPattern, get_group, table1_case, table1_cases
from .spacetime import verify_ricci_flat
from .special import default_radii, hyperkahler_residuals, verify_backward_flow, verify_modified_flow

RTOL_ENV = "RICCI4_DEFAULT_RTOL"
DEFAULT_ATOL = 1e-12
# near the top of the sampling box so the SU(2) flow survives to t = 5
DEFAULT_INIT = "2.8,2.9,3.0"
REPORT_BOX = (0.5, 3.0)


def default_rtol() -> float:
    raw = os.environ.get(RTOL_ENV)
    if raw is None:
        return 1e-10
    try:
        value = float(raw)
    except ValueError:
        raise click.UsageError(f"{RTOL_ENV}={raw!r} is not a number")
    if not value > 0:
        raise click.UsageError(f"{RTOL_ENV} must be positive")
    return value


@dataclass(frozen=True)
class RunRequest:
    command: str
    group: str | None = None
    signs: str = "+++"
    init: tuple = (1.0, 1.0, 1.0)
    t_end: float = 5.0
    scale: float = 1.0
    direction: str = "forward"
    rtol: float = 1e-10
    atol: float = DEFAULT_ATOL
    output: str | None = None
    fmt: str = "text"

    def settings(self) -> IntegratorSettings:
        return IntegratorSettings(rtol=self.rtol, atol=self.atol)


class _Triple(click.ParamType):
    name = "a,b,c"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split(",")
        try:
            nums = tuple(float(p) for p in parts)
        except ValueError:
            self.fail(f"{value!r} is not three comma-separated numbers", param, ctx)
        if len(nums) != 3:
            self.fail(f"expected three values, got {len(nums)}", param, ctx)
        if any(not math.isfinite(v) or v == 0 for v in nums):
            self.fail("coefficients must be finite and nonzero", param, ctx)
        return nums


class _Group(click.ParamType):
    name = "group"

    def convert(self, value, param, ctx):
        try:
            return get_group(value)
        except Ricci4Error as exc:
            self.fail(str(exc), param, ctx)


class _Signs(click.ParamType):
    name = "signs"

    def convert(self, value, param, ctx):
        try:
            return SignPattern.parse(value)
        except (ValueError, TypeError) as exc:
            self.fail(str(exc), param, ctx)


TRIPLE, GROUP, SIGNS = _Triple(), _Group(), _Signs()


def _positive(ctx, param, value):
    if value is not None and not value > 0:
        raise click.BadParameter("must be positive")
    return value


def _emit(payload: dict, fmt: str, text_lines, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            json.dump(payload, fh, indent=2)
    if fmt == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            click.echo(line)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True
)
tol_options = [
    click.option("--rtol", type=float, default=None, callback=_positive,
                 help=f"Relative tolerance (default 1e-10, or ${RTOL_ENV})."),
    click.option("--atol", type=float, default=DEFAULT_ATOL, show_default=True, callback=_positive),
]


def _with_tolerances(f):
    for opt in reversed(tol_options):
        f = opt(f)
    return f


@click.group()
def main():
    """Ricci flow on 3D unimodular groups and Ricci-flat 4-metrics."""


@main.command()
@click.option("--group", type=GROUP, required=True)
@click.option("--init", type=TRIPLE, required=True, help="Initial a,b,c.")
@click.option("--t-end", type=float, required=True)
@click.option("--scale", type=float, default=1.0, show_default=True, callback=_positive)
@click.option("--direction", type=click.Choice(["forward", "backward"]), default="forward", show_default=True)
@_with_tolerances
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="CSV path (default stdout).")
@format_option
def flow(group, init, t_end, scale, direction, rtol, atol, output, fmt):
    """Integrate a flow and write the trajectory as CSV."""
    req = RunRequest("flow", group.name, init=init, t_end=t_end, scale=scale, direction=direction,
                     rtol=rtol or default_rtol(), atol=atol, output=output, fmt=fmt)
    cfg = FlowConfig(group, direction, scale)
    if t_end == 0:
        raise click.BadParameter("must differ from 0", param_hint="--t-end")
    try:
        traj = integrate(cfg, FlowState(0.0, *init), t_end, req.settings())
    except Ricci4Error as exc:
        _fail(str(exc))
    csv = traj.to_csv()
    if output:
        with open(output, "w") as fh:
            fh.write(csv)
    elif fmt == "text":
        click.echo(csv, nl=False)

    invariants = conserved_quantities(group)
    drift = check_invariants(traj, invariants)
    end = traj.end.state
    summary = {
        "group": group.name,
        "direction": direction,
        "scale": scale,
        "init": list(init),
        "t_end": t_end,
        "terminated": traj.terminated,
        "end": {"t": end.t, "a": end.a, "b": end.b, "c": end.c},
        "steps": traj.n_steps,
        "rejected": traj.n_rejected,
        "invariant_drift": drift.drift,
        "invariants_cataloged": invariants.cataloged,
        "blowup_time": None,
    }
    lines = [f"# {group.name} {direction} scale {scale}: {traj.terminated} after {traj.n_steps} steps"]
    if invariants.cataloged:
        lines += [f"# drift {name}: {v:.3e}" for name, v in drift.drift.items()]
    else:
        lines.append(f"# no cataloged invariants for {group.name}")
    if traj.terminated == BLOW_UP:
        t_sing = end.t
        summary["blowup_time"] = abs(t_sing)
        lines.append(f"# blow-up detected: flow degenerates at t = {t_sing:.10g}")
    if fmt == "json":
        click.echo(json.dumps(summary, indent=2))
    else:
        for line in lines:
            click.echo(line, err=bool(not output))
    if traj.terminated == STEP_BUDGET:
        _fail(f"step budget exhausted at t = {end.t}")


def _verify_case(case: CaseRow, init, t_end, samples, tol, settings):
    traj = integrate(FlowConfig(case.flow_group), FlowState(0.0, *init), t_end, settings)
    return verify_ricci_flat(case, traj, n_samples=samples, tol=tol)


def _report_lines(rep) -> list[str]:
    lines = [
        f"{rep.case.label}: {'PASS' if rep.passed else 'FAIL'}",
        f"  max |R_ij| (closed form) = {rep.max_ricci_abs:.3e}",
        f"  max |R_ij| (oracle)      = {rep.oracle_max_abs:.3e}",
        f"  closed form vs oracle    = {rep.oracle_residual:.3e}",
        f"  trajectory: {rep.terminated}",
    ]
    if not rep.expected_flat:
        lines.append("  expected non-flat: " + ("confirmed" if rep.passed else "NOT observed"))
    lines += [f"  {n}" for n in rep.notes]
    return lines


@main.command()
@click.option("--case", "case_name", type=GROUP, default=None, help="Ricci-flat case, by the group it lives on.")
@click.option("--group", type=GROUP, default=None, help="Group of the 4-metric (controls).")
@click.option("--flow-group", type=GROUP, default=None, help="Flow driving the coefficients.")
@click.option("--signs", type=SIGNS, default=None, help="Sign pattern such as +++ or +--.")
@click.option("--init", type=TRIPLE, default=DEFAULT_INIT, show_default=True)
@click.option("--t-end", type=float, default=5.0, show_default=True, callback=_positive)
@click.option("--samples", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True, callback=_positive)
@_with_tolerances
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="JSON report path.")
@format_option
def verify(case_name, group, flow_group, signs, init, t_end, samples, tol, rtol, atol, output, fmt):
    """Check Ricci-flatness of a catalogued case (or a control) along its flow."""
    if case_name is not None and group is not None:
        raise click.UsageError("give --case or --group, not both")
    if case_name is None and group is None:
        raise click.UsageError("one of --case or --group is required")
    if case_name is not None:
        try:
            case = table1_case(case_name)
        except Ricci4Error as exc:
            raise click.BadParameter(str(exc), param_hint="--case")
        if signs is not None or flow_group is not None:
            case = CaseRow(case.group, flow_group or case.flow_group, signs or case.signs)
    else:
        case = CaseRow(group, flow_group or group, signs or SignPattern.parse("+++"))
    settings = IntegratorSettings(rtol=rtol or default_rtol(), atol=atol)
    try:
        rep = _verify_case(case, init, t_end, samples, tol, settings)
    except Ricci4Error as exc:
        _fail(str(exc))
    _emit(rep.to_dict(), fmt, _report_lines(rep), output)
    sys.exit(0 if rep.passed else 1)


@main.command()
@click.argument("metric", type=click.Choice(["taub-nut", "eguchi-hanson"]))
@click.option("--m", "m", type=float, default=1.0, show_default=True, callback=_positive)
@click.option("--r-max", type=float, default=None, help="Largest radius (default 100 m).")
@click.option("--samples", type=click.IntRange(min=1), default=30, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True, callback=_positive)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@format_option
def special(metric, m, r_max, samples, tol, output, fmt):
    """Check Taub-NUT or Eguchi-Hanson against their flow systems."""
    r_max = 100.0 * m if r_max is None else r_max
    if not r_max > m:
        raise click.BadParameter("must exceed m", param_hint="--r-max")
    radii = default_radii(m, r_max / m, samples)
    check = verify_backward_flow if metric == "taub-nut" else verify_modified_flow
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rep = check(m, radii)
        except Ricci4Error as exc:
            _fail(str(exc))
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    passed = rep.ricci_max < tol and rep.matched_convention is not None
    payload = rep.to_dict() | {"tol": tol, "pass": passed}
    lines = [
        f"{metric} (m={m}): {'PASS' if passed else 'FAIL'}",
        f"  oracle max |Ric| over {len(rep.samples)} radii = {rep.ricci_max:.3e}",
        f"  matched convention: {rep.matched_convention}",
        f"  printed convention: {rep.printed_convention}",
    ]
    lines += [f"  {name}: residual {v:.3e}" for name, v in rep.conventions.items()]
    lines += [f"  {n}" for n in rep.notes]
    _emit(payload, fmt, lines, output)
    sys.exit(0 if passed else 1)


@main.command()
@click.option("--group", type=click.Choice(["h3", "e2"], case_sensitive=False), default="h3", show_default=True)
@click.option("--init", type=TRIPLE, default="1,2,3", show_default=True)
@click.option("--t-end", type=float, default=5.0, show_default=True, callback=_positive)
@click.option("--samples", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True, callback=_positive)
@_with_tolerances
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@format_option
def hyperkahler(group, init, t_end, samples, tol, rtol, atol, output, fmt):
    """Closure residuals of the Kähler triple along a flow."""
    g = get_group(group)
    settings = IntegratorSettings(rtol=rtol or default_rtol(), atol=atol)
    try:
        traj = integrate(FlowConfig(g), FlowState(0.0, *init), t_end, settings)
    except Ricci4Error as exc:
        _fail(str(exc))
    worst = 0.0
    for t in np.linspace(traj.t_start, traj.t_stop, samples):
        worst = max(worst, hyperkahler_residuals(g, traj.jet_at(float(t))).max_abs())
    passed = worst < tol
    payload = {"group": g.name, "init": list(init), "t_end": traj.t_stop, "samples": samples,
               "max_residual": worst, "tol": tol, "pass": passed, "terminated": traj.terminated}
    lines = [f"{g.name} closure: {'PASS' if passed else 'FAIL'} (max residual {worst:.3e})"]
    _emit(payload, fmt, lines, output)
    sys.exit(0 if passed else 1)


@main.command()
@click.option("--table1", is_flag=True, required=True, help="Run every Ricci-flat case.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--t-end", type=float, default=5.0, show_default=True, callback=_positive)
@click.option("--samples", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True, callback=_positive)
@_with_tolerances
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@format_option
def report(table1, seed, runs, t_end, samples, tol, rtol, atol, output, fmt):
    """Pass/fail matrix for the Ricci-flat cases on pseudo-random initial data."""
    if not table1:
        raise click.UsageError("nothing to report; pass --table1")
    rng = np.random.default_rng(seed)
    settings = IntegratorSettings(rtol=rtol or default_rtol(), atol=atol)
    rows, lines, all_pass = [], [], True
    for case in table1_cases():
        cells = []
        for _ in range(runs):
            init = tuple(float(v) for v in rng.uniform(*REPORT_BOX, size=3))
            try:
                rep = _verify_case(case, init, t_end, samples, tol, settings)
                cell = {"init": list(init), "pass": rep.passed, "max_abs_ricci": rep.max_ricci_abs,
                        "oracle_max_abs_ricci": rep.oracle_max_abs, "terminated": rep.terminated}
            except Ricci4Error as exc:
                cell = {"init": list(init), "pass": False, "error": str(exc)}
            cells.append(cell)
        all_pass &= all(c["pass"] for c in cells)
        rows.append({"case": case.to_dict(), "runs": cells})
        marks = "  ".join("PASS" if c["pass"] else "FAIL" for c in cells)
        lines.append(f"{case.label:<14} {marks}")
    payload = {"seed": seed, "t_end": t_end, "tol": tol, "rows": rows, "pass": all_pass}
    _emit(payload, fmt, lines, output)
    sys.exit(0 if all_pass else 1)


if __name__ == "__main__":
    main()
