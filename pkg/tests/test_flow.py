import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ricci4.exceptions import DegenerateRelationError, DomainError, SingularMetricError, UnsupportedGroupError
from ricci4.flow import (
    FlowConfig, FlowState, ReducedState, conserved_quantities, heisenberg_blowup_time,
    heisenberg_closed_form, jet_second, left_invariant_ricci, make_jet, ratio_relation,
    reduce_state, reduced_rhs, ricci_rhs,
)
from ricci4.integrator import integrate
from ricci4.lie_catalog import E2, E11, GROUPS, H3, R3, SL2R, SU2

nonzero_q = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=50)
signed_q = st.one_of(nonzero_q, nonzero_q.map(lambda x: -x))
positive = st.floats(0.2, 5.0)


# The systems as printed, typed by hand (scale 1, forward; SU(2) at scale 2).
def printed_h3(a, b, c):
    return (-a * a / (2 * b * c), a / (2 * c), a / (2 * b))


def printed_e11(a, b, c):
    return ((c * c - a * a) / (2 * b * c), (a + c) ** 2 / (2 * a * c), (a * a - c * c) / (2 * a * b))


def printed_e2(a, b, c):
    return ((c * c - a * a) / (2 * b * c), (c - a) ** 2 / (2 * c * a), (a * a - c * c) / (2 * a * b))


def printed_sl2r(a, b, c):
    return (((b + c) ** 2 - a * a) / (2 * b * c), ((c + a) ** 2 - b * b) / (2 * c * a),
            ((a - b) ** 2 - c * c) / (2 * a * b))


def printed_su2_unhalved(a, b, c):
    return (((b - c) ** 2 - a * a) / (b * c), ((c - a) ** 2 - b * b) / (c * a),
            ((a - b) ** 2 - c * c) / (a * b))


@pytest.mark.parametrize("group, scale, printed", [
    (H3, 1, printed_h3),
    (E11, 1, printed_e11),
    (E2, 1, printed_e2),
    (SL2R, 1, printed_sl2r),
    (SU2, 2, printed_su2_unhalved),
])
@given(a=signed_q, b=signed_q, c=signed_q)
def test_rhs_matches_printed_systems_exactly(group, scale, printed, a, b, c):
    assert ricci_rhs(FlowConfig(group, scale=scale), (a, b, c)) == printed(a, b, c)


def test_rhs_examples():
    assert ricci_rhs(FlowConfig(H3), FlowState(0, 1, 1, 1)) == (-0.5, 0.5, 0.5)
    assert ricci_rhs(FlowConfig(E2), (1, 1, 1)) == (0, 0, 0)
    assert ricci_rhs(FlowConfig(E11), (1, 1, 1)) == (0, 2, 0)
    for A in (Fraction(1, 3), 1, 7):
        assert ricci_rhs(FlowConfig(SU2, scale=2), (A, A, A)) == (-1, -1, -1)


@given(a=signed_q, b=signed_q, c=signed_q, k=nonzero_q)
def test_backward_and_scale(a, b, c, k):
    for g in GROUPS.values():
        fwd = ricci_rhs(FlowConfig(g), (a, b, c))
        bwd = ricci_rhs(FlowConfig(g, "backward", k), (a, b, c))
        assert bwd == tuple(-k * v for v in fwd)


def test_rhs_singular():
    with pytest.raises(SingularMetricError):
        ricci_rhs(FlowConfig(SU2), (1, 0, 1))


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(SU2, "sideways")
    with pytest.raises(ValueError):
        FlowConfig(SU2, scale=0)
    assert FlowConfig("h3").group == H3


def _symbolic_second(group, scale=1, direction="forward"):
    a, b, c = sp.symbols("a b c")
    rhs = sp.Matrix(ricci_rhs(FlowConfig(group, direction, scale), (a, b, c)))
    jac = rhs.jacobian([a, b, c])
    return sp.lambdify((a, b, c), jac * rhs)


@pytest.mark.parametrize("group", list(GROUPS.values()))
def test_second_derivative_vs_symbolic_chain_rule(group):
    oracle = _symbolic_second(group, 2, "backward")
    cfg = FlowConfig(group, "backward", 2)
    for s in [(1.0, 2.0, 3.0), (0.3, -1.7, 2.2), (5.0, 0.4, 0.9)]:
        expect = [float(v) for v in oracle(*s).ravel()]
        assert jet_second(cfg, s) == pytest.approx(expect, rel=1e-13, abs=1e-13)


def test_second_derivative_examples():
    assert jet_second(FlowConfig(H3), (1, 1, 1)) == (1, -0.5, -0.5)
    assert jet_second(FlowConfig(E11), (1, 1, 1)) == (0, 0, 0)
    assert jet_second(FlowConfig(H3), (2, 1, 1)) == (8, -2, -2)
    # closed forms quoted with the proof for H3 and E(1,1)
    a, b, c = Fraction(3, 2), Fraction(5, 7), Fraction(2, 9)
    assert jet_second(FlowConfig(H3), (a, b, c))[0] == a ** 3 / (b * b * c * c)
    # E(1,1): the chain rule gives half the quoted first entry and the
    # opposite sign for the third; the middle one agrees as quoted
    dda, ddb, ddc = jet_second(FlowConfig(E11), (a, b, c))
    assert dda == (a * a - c * c) * (2 * a * a + a * c + c * c) / (2 * a * b * b * c * c)
    assert ddb == -((c * c - a * a) ** 2) / (2 * a * a * b * c * c)
    assert ddc == -(a * a - c * c) * (a * a + a * c + 2 * c * c) / (2 * a * a * b * b * c)


def test_make_jet():
    j = make_jet(FlowConfig(H3), FlowState(0.5, 1, 1, 1))
    assert j.t == 0.5 and j.d1 == (-0.5, 0.5, 0.5) and j.d2 == (1, -0.5, -0.5)


def test_conserved_catalog():
    assert conserved_quantities(H3).names == ["ab", "ac", "b/c"]
    assert conserved_quantities(E11).names == ["ac", "b(c-a)"]
    assert conserved_quantities(E2).names == ["ac", "b(c+a)"]
    su2 = conserved_quantities(SU2)
    assert not su2.cataloged and len(su2) == 0


def _time_derivative(inv, state, rhs):
    # exact directional derivative via symbolic gradient
    a, b, c = sp.symbols("a b c")
    expr = inv.func(a, b, c)
    grad = [sp.diff(expr, v) for v in (a, b, c)]
    subs = dict(zip((a, b, c), (sp.Rational(x) for x in state)))
    return sum(g.subs(subs) * sp.Rational(r) for g, r in zip(grad, rhs))


@pytest.mark.parametrize("group", [H3, E11, E2])
@given(a=nonzero_q, b=nonzero_q, c=nonzero_q)
def test_invariants_are_conserved_exactly(group, a, b, c):
    rhs = ricci_rhs(FlowConfig(group), (a, b, c))
    for inv in conserved_quantities(group):
        assert _time_derivative(inv, (a, b, c), rhs) == 0


def test_closed_form_examples():
    init = FlowState(0, 1, 1, 1)
    assert heisenberg_closed_form(init, 0).coeffs == pytest.approx((1, 1, 1), rel=1e-15)
    s = heisenberg_closed_form(init, 2)
    assert s.coeffs == pytest.approx((4 ** (-1 / 3), 4 ** (1 / 3), 4 ** (1 / 3)), rel=1e-14)
    assert heisenberg_blowup_time(init) == pytest.approx(2 / 3)
    assert heisenberg_blowup_time(FlowState(0, 2, 1, 1)) == pytest.approx(1 / 3)


@given(a=positive, b=positive, c=positive, t=st.floats(-0.3, 10))
def test_closed_form_solves_the_flow(a, b, c, t):
    init = FlowState(0, a, b, c)
    T = heisenberg_blowup_time(init)
    if t <= -0.9 * T:
        return
    s = heisenberg_closed_form(init, t)
    # invariants hold and the derivative matches the RHS
    assert s.a * s.b == pytest.approx(a * b, rel=1e-12)
    assert s.b / s.c == pytest.approx(b / c, rel=1e-12)
    h = 1e-5 * max(1.0, abs(t))
    up, dn = heisenberg_closed_form(init, t + h), heisenberg_closed_form(init, t - h)
    fd = [(u - d) / (2 * h) for u, d in zip(up.coeffs, dn.coeffs)]
    assert fd == pytest.approx(ricci_rhs(FlowConfig(H3), s), rel=1e-5, abs=1e-7)


def test_closed_form_domain():
    with pytest.raises(DomainError) as info:
        heisenberg_closed_form(FlowState(0, 1, 1, 1), -1.0)
    assert info.value.blowup_time == pytest.approx(2 / 3)


def test_reduced_examples():
    assert reduced_rhs(E11, ReducedState(1, 1)) == (2, 0)
    assert reduced_rhs(E2, ReducedState(1, 1)) == (0, 0)
    assert reduced_rhs(E2, ReducedState(2, 4)) == (Fraction(9, 8), Fraction(-15, 2))
    with pytest.raises(UnsupportedGroupError):
        reduced_rhs(H3, ReducedState(1, 1))
    with pytest.raises(DomainError):
        reduced_rhs(E2, ReducedState(1, -1))


@pytest.mark.parametrize("group", [E11, E2])
@given(a=nonzero_q, b=signed_q, c=nonzero_q)
def test_reduced_system_is_projection(group, a, b, c):
    da, db, dc = ricci_rhs(FlowConfig(group), (a, b, c))
    r = reduce_state(FlowState(0, a, b, c))
    assert reduced_rhs(group, r) == (db, (da * c - a * dc) / (c * c))


def test_ratio_relation_examples():
    assert ratio_relation(E11, (2, 1, 1)).constant == pytest.approx(1 / math.sqrt(2))
    assert ratio_relation(E2, (1, 1, 1)).constant == 2
    assert ratio_relation(E11, (4, 3, 1)).constant == pytest.approx(4.5)
    rel = ratio_relation(E11, (4, 3, 1))
    assert rel.b_of(4) == pytest.approx(3)
    with pytest.raises(DegenerateRelationError):
        ratio_relation(E11, (1, 2, 1))
    with pytest.raises(DomainError):
        ratio_relation(E2, (-1, 1, 1))


def test_left_invariant_ricci():
    # unit round SU(2) with unit brackets: Ric = 1/2 g
    assert left_invariant_ricci((1, 1, 1), (1, 1, 1)) == (0.5, 0.5, 0.5)
    assert left_invariant_ricci(R3.n, (2, 3, 4)) == (0, 0, 0)
    for g in GROUPS.values():
        s = (Fraction(3), Fraction(1, 2), Fraction(5, 4))
        assert left_invariant_ricci(g.n, s) == tuple(-v for v in ricci_rhs(FlowConfig(g), s))


@given(a=signed_q, b=signed_q, c=signed_q)
def test_sl2r_sign_flip_gives_su2(a, b, c):
    # (-a, -b, c) solves the SL(2,R) flow iff (a, b, c) solves the SU(2) one
    da, db, dc = ricci_rhs(FlowConfig(SL2R), (-a, -b, c))
    assert (-da, -db, dc) == ricci_rhs(FlowConfig(SU2), (a, b, c))


def test_closed_form_exact_residual():
    t, a0, b0, c0 = sp.symbols("t a0 b0 c0", positive=True)
    s = sp.Rational(3, 2) * t + b0 * c0 / a0
    exprs = (
        a0 ** sp.Rational(2, 3) * (b0 * c0) ** sp.Rational(1, 3) / s ** sp.Rational(1, 3),
        a0 ** sp.Rational(1, 3) * b0 ** sp.Rational(2, 3) / c0 ** sp.Rational(1, 3) * s ** sp.Rational(1, 3),
        a0 ** sp.Rational(1, 3) * c0 ** sp.Rational(2, 3) / b0 ** sp.Rational(1, 3) * s ** sp.Rational(1, 3),
    )
    rates = sp.lambdify((t, a0, b0, c0), [sp.diff(e, t) for e in exprs])
    cfg = FlowConfig(H3)
    for init in [(1, 2, 3), (0.4, 2.5, 1.1), (3.0, 0.7, 0.9)]:
        s0 = FlowState(0, *init)
        for tt in np.linspace(0, 10, 100):
            state = heisenberg_closed_form(s0, tt)
            rhs = np.array(ricci_rhs(cfg, state))
            res = np.abs(np.array(rates(tt, *init), dtype=float).ravel() - rhs)
            assert np.max(res / np.maximum(1.0, np.abs(rhs))) < 1e-12


@pytest.mark.parametrize("init", [(2, 1, 1), (0.5, 3, 2.5), (3, 0.5, 0.6)])
def test_e11_coefficients_meet_at_geometric_mean(init):
    a0, _, c0 = init
    limit = math.sqrt(a0 * c0)
    traj = integrate(FlowConfig(E11), FlowState(0, *init), 400.0)
    times = [25, 50, 100, 200, 400]
    states = [traj.state_at(t) for t in times]
    for s in states:
        assert s.a * s.c == pytest.approx(a0 * c0, rel=1e-9)
        assert (s.a - limit) * (a0 - limit) > 0 and (s.c - limit) * (c0 - limit) > 0
    dist = [max(abs(s.a - limit), abs(s.c - limit)) / limit for s in states]
    # distance keeps halving as t doubles, so it goes to zero
    assert all(d1 < 0.6 * d0 for d0, d1 in zip(dist, dist[1:]))
    assert dist[-1] < 0.01
