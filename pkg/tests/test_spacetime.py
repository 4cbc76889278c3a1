import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ricci4.exceptions import ConfigurationError, UnsupportedSignatureError
from ricci4.flow import FlowConfig, FlowJet, FlowState, left_invariant_ricci, make_jet
from ricci4.integrator import integrate
from ricci4.lie_catalog import E2, E11, GROUPS, H3, R3, SL2R, SU2, CaseRow, SignPattern, table1_cases
from ricci4.oracle import jet_from_flow, oracle_connection, oracle_riemann
from ricci4.spacetime import (
    connection_coefficients, ricci_components, sectional_curvatures, sectional_from_ratio,
    verify_ricci_flat,
)

coef = st.floats(0.3, 3.0)
deriv = st.floats(-2.0, 2.0)
groups = st.sampled_from(list(GROUPS.values()))
PLUS = SignPattern.parse("+++")


@st.composite
def free_jets(draw):
    s = FlowState(0.0, *(draw(coef) for _ in range(3)))
    return FlowJet(s, tuple(draw(deriv) for _ in range(3)), tuple(draw(deriv) for _ in range(3)))


def _oracle_diag(case, jet):
    ric = oracle_riemann(jet_from_flow(case.group, jet, case.signs)).ricci()
    return np.diag(ric), ric


@given(groups, free_jets())
def test_connection_matches_oracle(g, jet):
    table = connection_coefficients(g, jet).gamma
    assert np.allclose(table, oracle_connection(jet_from_flow(g, jet)), rtol=1e-13, atol=1e-13)


def test_connection_examples():
    jet = make_jet(FlowConfig(H3), FlowState(0, 1, 1, 1))
    conn = connection_coefficients(H3, jet)
    assert conn.covariant(1, 2)[3] == -0.5
    static = FlowJet(FlowState(0, 1, 1, 1), (0, 0, 0), (0, 0, 0))
    assert connection_coefficients(SU2, static).covariant(2, 3)[1] == 0.5
    flat = FlowJet(FlowState(0, 2, 3, 5), (0, 0, 0), (0, 0, 0))
    assert not np.any(connection_coefficients(R3, flat).gamma)


@given(groups, free_jets())
def test_connection_torsion(g, jet):
    t = connection_coefficients(g, jet).torsion()
    # ∇_X Y - ∇_Y X = [X, Y]
    n1, n2, n3 = g.n
    assert t[2, 3] == pytest.approx([0, n1, 0, 0], abs=1e-13)
    assert t[3, 1] == pytest.approx([0, 0, n2, 0], abs=1e-13)
    assert t[1, 2] == pytest.approx([0, 0, 0, n3], abs=1e-13)


@pytest.mark.parametrize("case", [
    *(CaseRow(g, g, PLUS) for g in GROUPS.values()),
    CaseRow(E11, E11, SignPattern.parse("+--")),
    CaseRow(SL2R, SU2, SignPattern.parse("--+")),
])
@given(jet=free_jets())
def test_ricci_formulas_match_oracle(case, jet):
    printed = ricci_components(case, jet).as_array()
    diag, full = _oracle_diag(case, jet)
    scale = max(1.0, float(np.max(np.abs(diag))))
    assert np.max(np.abs(printed - diag)) <= 1e-12 * scale
    assert np.max(np.abs(full - np.diag(diag))) <= 1e-12 * scale


def test_ricci_examples():
    jet = make_jet(FlowConfig(E11), FlowState(0, 0.4, 1.9, 2.6))
    r = ricci_components(CaseRow(E11, E11, PLUS), jet)
    assert r.R22 == pytest.approx(-2.0, abs=1e-13)
    assert (r.R00, r.R11, r.R33) == pytest.approx((0, 0, 0), abs=1e-13)
    jet = make_jet(FlowConfig(H3), FlowState(0, 1, 1, 1))
    assert ricci_components(CaseRow(H3, H3, PLUS), jet).max_abs() == 0


@given(groups, coef, coef, coef)
def test_static_reduces_to_three_dimensional_ricci(g, a, b, c):
    jet = FlowJet(FlowState(0, a, b, c), (0, 0, 0), (0, 0, 0))
    r = ricci_components(CaseRow(g, g, PLUS), jet).as_array()
    assert r[0] == 0
    assert r[1:] == pytest.approx(left_invariant_ricci(g.n, (a * a, b * b, c * c)), rel=1e-13, abs=1e-14)


def test_unsupported_signs():
    jet = FlowJet(FlowState(0, 1, 2, 3), (0, 0, 0), (0, 0, 0))
    with pytest.raises(UnsupportedSignatureError):
        ricci_components(CaseRow(H3, H3, SignPattern.parse("+--")), jet)
    with pytest.raises(UnsupportedSignatureError):
        sectional_curvatures(CaseRow(SU2, SU2, PLUS), jet)


@pytest.mark.parametrize("case", [
    CaseRow(H3, H3, PLUS),
    CaseRow(E11, E11, SignPattern.parse("+--")),
    CaseRow(E2, E2, PLUS),
])
@given(a=coef, b=coef, c=coef)
def test_sectional_formulas_match_oracle(case, a, b, c):
    jet = make_jet(FlowConfig(case.flow_group), FlowState(0, a, b, c))
    closed = sectional_curvatures(case, jet).as_dict()
    oracle = oracle_riemann(jet_from_flow(case.group, jet, case.signs)).sectional_all()
    for key, v in closed.items():
        assert v == pytest.approx(oracle[key], rel=1e-11, abs=1e-11)


def test_sectional_examples():
    jet = make_jet(FlowConfig(H3), FlowState(0, 1, 1, 1))
    k = sectional_curvatures(CaseRow(H3, H3, PLUS), jet)
    assert (k.K01, k.K02, k.K03) == (-1, 0.5, 0.5)
    jet = make_jet(FlowConfig(E11), FlowState(0, 1.7, 0.6, 1.7))
    k = sectional_curvatures(CaseRow(E11, E11, SignPattern.parse("+--")), jet)
    assert all(v == 0 for v in k.as_dict().values())
    assert sectional_from_ratio(E2, 2.0, 1.0).K02 == pytest.approx(9 / 8)


@pytest.mark.parametrize("group", [E11, E2])
@given(a=coef, b=coef, c=coef)
def test_ratio_form_agrees(group, a, b, c):
    signs = SignPattern.parse("+--") if group == E11 else PLUS
    jet = make_jet(FlowConfig(group), FlowState(0, a, b, c))
    direct = sectional_curvatures(CaseRow(group, group, signs), jet).as_dict()
    ratio = sectional_from_ratio(group, a / c, b).as_dict()
    for key, v in direct.items():
        assert v == pytest.approx(ratio[key], rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("case, init", [
    (CaseRow(H3, H3, PLUS), (1, 2, 3)),
    (CaseRow(SL2R, SU2, SignPattern.parse("--+")), (1, 1, 2)),
    (CaseRow(E11, E11, SignPattern.parse("+--")), (2, 1, 1)),
    (CaseRow(E2, E2, PLUS), (0.7, 1.3, 2.0)),
    (CaseRow(SU2, SU2, PLUS), (2.8, 2.9, 3.0)),
])
def test_verify_table1(case, init):
    assert case in table1_cases()
    traj = integrate(FlowConfig(case.flow_group), FlowState(0, *init), 5.0)
    rep = verify_ricci_flat(case, traj)
    assert rep.passed and rep.expected_flat
    assert rep.max_ricci_abs < 1e-8 and rep.oracle_max_abs < 1e-8
    assert len(rep.sample_times) == 50


def test_verify_controls():
    traj = integrate(FlowConfig(E11), FlowState(0, 2, 1, 1), 5.0)
    rep = verify_ricci_flat(CaseRow(E11, E11, PLUS), traj)
    assert rep.passed and not rep.expected_flat
    assert max(abs(v + 2) for v in rep.components["R22"]) <= 1e-10
    traj = integrate(FlowConfig(SL2R), FlowState(0, 1, 1.5, 2), 5.0)
    rep = verify_ricci_flat(CaseRow(SL2R, SL2R, PLUS), traj)
    assert rep.passed and rep.max_ricci_abs > 0.1


def test_verify_requires_matching_flow():
    traj = integrate(FlowConfig(SL2R), FlowState(0, 1, 1, 2), 1.0)
    with pytest.raises(ConfigurationError):
        verify_ricci_flat(CaseRow(SL2R, SU2, SignPattern.parse("--+")), traj)
    traj = integrate(FlowConfig(H3, "backward"), FlowState(0, 1, 1, 2), 1.0)
    with pytest.raises(ConfigurationError):
        verify_ricci_flat(CaseRow(H3, H3, PLUS), traj)


def test_verify_stays_clear_of_degeneration():
    traj = integrate(FlowConfig(SU2), FlowState(0, 0.5, 3.0, 2.7), 5.0)
    rep = verify_ricci_flat(CaseRow(SU2, SU2, PLUS), traj)
    assert rep.terminated == "blow_up_detected"
    assert rep.passed and rep.notes
    assert rep.sample_times[-1] < traj.t_stop


def test_report_json():
    traj = integrate(FlowConfig(H3), FlowState(0, 1, 2, 3), 1.0)
    d = json.loads(verify_ricci_flat(CaseRow(H3, H3, PLUS), traj, n_samples=5).to_json())
    assert d["pass"] is True and d["case"]["group"] == "H3"
    assert set(d["components"]) == {"R00", "R11", "R22", "R33"}
    assert len(d["samples"]) == 5


@given(groups, st.sampled_from(["+++", "+--", "-+-", "--+", "-++", "---"]), free_jets(),
       st.sampled_from([1.0, 2.0]))
def test_r00_for_every_sign_pattern(g, signs, jet, scale):
    (a, b, c), (dda, ddb, ddc) = jet.state.coeffs, jet.d2
    m = jet_from_flow(g, jet, signs)
    m = type(m)(m.group, m.signs, m.f, m.df, m.ddf, scale)
    r00 = oracle_riemann(m).ricci()[0, 0]
    assert r00 == pytest.approx(-dda / a - ddb / b - ddc / c, rel=1e-11, abs=1e-11)


@pytest.mark.parametrize("case, init", [
    (CaseRow(E11, E11, SignPattern.parse("+--")), (2, 1, 1)),
    (CaseRow(E11, E11, SignPattern.parse("+--")), (0.5, 3, 2.5)),
    (CaseRow(E2, E2, PLUS), (0.7, 1.3, 2.0)),
    (CaseRow(E2, E2, PLUS), (2.5, 0.6, 1.2)),
])
def test_ricci_flat_but_curved(case, init):
    traj = integrate(FlowConfig(case.flow_group), FlowState(0, *init), 5.0)
    assert verify_ricci_flat(case, traj).passed
    for jet in traj.samples:
        k = sectional_curvatures(case, jet)
        oracle = oracle_riemann(jet_from_flow(case.group, jet, case.signs)).sectional_all()
        assert k.K02 > 0
        assert k.K02 == pytest.approx(oracle[(0, 2)], rel=1e-10)


@pytest.mark.parametrize("init", [(1, 2, 3), (3.0, 0.5, 0.5), (0.6, 1.0, 2.5)])
def test_h3_curvature_decays(init):
    case = CaseRow(H3, H3, PLUS)
    traj = integrate(FlowConfig(H3), FlowState(0, *init), 200.0)
    times = np.geomspace(1.0, 200.0, 40)
    ks = np.array([[abs(v) for v in sectional_curvatures(case, traj.jet_at(t)).as_dict().values()]
                   for t in times])
    assert np.all(np.diff(ks, axis=0) < 0)
    k0 = max(abs(v) for v in sectional_curvatures(case, traj.samples[0]).as_dict().values())
    assert ks[-1].max() < 1e-3 * k0


@pytest.mark.parametrize("case, init", [
    (CaseRow(E11, E11, SignPattern.parse("+--")), (1.7, 0.6, 1.7)),
    (CaseRow(E2, E2, PLUS), (1.0, 2.0, 1.0)),
    (CaseRow(E2, E2, PLUS), (0.4, 0.9, 0.4)),
])
def test_equal_outer_coefficients_are_flat(case, init):
    traj = integrate(FlowConfig(case.flow_group), FlowState(0, *init), 5.0)
    for jet in traj.samples:
        assert jet.state.a == jet.state.c
        assert all(v == 0 for v in sectional_curvatures(case, jet).as_dict().values())
        R = oracle_riemann(jet_from_flow(case.group, jet, case.signs)).R
        assert np.max(np.abs(R)) < 1e-12
