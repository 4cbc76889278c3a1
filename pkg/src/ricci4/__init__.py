"""Ricci flow of left-invariant metrics on 3D unimodular Lie groups and the
Ricci-flat cohomogeneity-one 4-metrics built from them."""

from .exceptions import (
    ConfigurationError,
    DegenerateRelationError,
    DomainError,
    Ricci4Error,
    SingularMetricError,
    UnknownSignatureError,
    UnsupportedGroupError,
    UnsupportedSignatureError,
)
from .flow import (
    FlowConfig,
    FlowJet,
    FlowState,
    conserved_quantities,
    heisenberg_blowup_time,
    heisenberg_closed_form,
    left_invariant_ricci,
    make_jet,
    ratio_relation,
    reduce_state,
    reduced_rhs,
    ricci_rhs,
)
from .integrator import (
    IntegratorSettings,
    Trajectory,
    check_invariants,
    estimate_blowup,
    integrate,
)
from .lie_catalog import (
    E2,
    E11,
    GROUPS,
    H3,
    R3,
    SL2R,
    SU2,
    CaseRow,
    GroupSpec,
    SignPattern,
    get_group,
    group_from_signature,
    milnor_constants,
    table1_case,
    table1_cases,
)
from .oracle import FrameMetricJet, jet_from_flow, oracle_ricci, oracle_riemann, oracle_sectional
from .spacetime import (
    connection_coefficients,
    ricci_components,
    sectional_curvatures,
    verify_ricci_flat,
)
from .special import (
    constant_curvature_family,
    eguchi_hanson_jet,
    hyperkahler_residuals,
    solve_closure,
    taub_nut_jet,
    verify_backward_flow,
    verify_modified_flow,
)

__version__ = "0.1.0"
