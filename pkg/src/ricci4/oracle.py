"""Frame curvature engine for ``dt² + Σ εᵢ fᵢ(t)² (θⁱ)²``.

Works on the frame ``{F0 = ∂/∂t, F1, F2, F3}``.  The connection comes from
Koszul's formula using only the bracket constants and the diagonal metric;
curvature is ``R(X,Y)Z = ∇X∇Y Z - ∇Y∇X Z - ∇[X,Y] Z``.  Nothing in this
module looks at the closed-form component formulas in ``spacetime``.

Index conventions: ``gamma[i, j, k]`` is the ``F_k`` component of
``∇_{F_i} F_j`` and ``R[a, b, c, d]`` the ``F_d`` component of
``R(F_a, F_b) F_c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import SingularMetricError
from .flow import FlowJet
from .lie_catalog import ALL_PLUS, GroupSpec, SignPattern, get_group

__all__ = [
    "FrameMetricJet",
    "RiemannComponents",
    "structure_constants",
    "oracle_connection",
    "oracle_riemann",
    "oracle_ricci",
    "oracle_sectional",
    "finite_difference_jet",
    "jet_from_flow",
]


@dataclass(frozen=True)
class FrameMetricJet:
    """Coefficients ``f = (a, b, c)`` and their first two t-derivatives.

    ``bracket_scale`` multiplies the group's Milnor constants; the SU(2)
    coframe with ``dθⁱ = 2 θʲ∧θᵏ`` is ``bracket_scale=2``.
    """

    group: GroupSpec
    signs: SignPattern
    f: tuple
    df: tuple
    ddf: tuple
    bracket_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "group", get_group(self.group))
        object.__setattr__(self, "signs", SignPattern.parse(self.signs))

    @property
    def n(self) -> tuple:
        return tuple(self.bracket_scale * v for v in self.group.n)


def jet_from_flow(group, jet: FlowJet, signs=ALL_PLUS, bracket_scale: float = 1.0) -> FrameMetricJet:
    return FrameMetricJet(group, signs, jet.state.coeffs, tuple(jet.d1), tuple(jet.d2), bracket_scale)


def structure_constants(n) -> np.ndarray:
    """``C[i, j, k]``: ``[F_i, F_j] = Σ_k C[i, j, k] F_k`` on the 4-frame."""
    C = np.zeros((4, 4, 4))
    for (i, j, k), v in zip(((2, 3, 1), (3, 1, 2), (1, 2, 3)), n):
        C[i, j, k] = v
        C[j, i, k] = -v
    return C


def _metric_diagonals(m: FrameMetricJet):
    f = np.asarray(m.f, dtype=float)
    df = np.asarray(m.df, dtype=float)
    ddf = np.asarray(m.ddf, dtype=float)
    if np.any(f == 0):
        raise SingularMetricError(f"metric coefficient vanished: f = {tuple(f)}")
    eps = np.asarray(m.signs.eps, dtype=float)
    g = np.concatenate([[1.0], eps * f * f])
    dg = np.concatenate([[0.0], 2 * eps * f * df])
    ddg = np.concatenate([[0.0], 2 * eps * (df * df + f * ddf)])
    return g, dg, ddg


def _koszul_numerator(g, dg, C) -> np.ndarray:
    """``N[i, j, k] = 2 g_kk Γ^k_ij`` for a diagonal metric whose entries
    depend on t only (so only ``F0`` differentiates them)."""
    N = np.zeros((4, 4, 4))
    # X g(Y,Z) + Y g(X,Z) - Z g(X,Y)
    for j in range(4):
        N[0, j, j] += dg[j]
        N[j, 0, j] += dg[j]
        N[j, j, 0] -= dg[j]
    # g([X,Y],Z) - g([X,Z],Y) - g([Y,Z],X)
    N += np.einsum("ijk,k->ijk", C, g)
    N -= np.einsum("ikj,j->ijk", C, g)
    N -= np.einsum("jki,i->ijk", C, g)
    return N


def _connection_and_derivative(m: FrameMetricJet):
    g, dg, ddg = _metric_diagonals(m)
    C = structure_constants(m.n)
    N = _koszul_numerator(g, dg, C)
    # N is linear in (g, dg), so its t-derivative is N evaluated at (dg, ddg)
    dN = _koszul_numerator(dg, ddg, C)
    gamma = N / (2 * g)
    dgamma = dN / (2 * g) - N * dg / (2 * g * g)
    return gamma, dgamma, C, g


def oracle_connection(m: FrameMetricJet) -> np.ndarray:
    """Connection coefficients ``gamma[i, j, k]`` from Koszul's formula."""
    return _connection_and_derivative(m)[0]


@dataclass(frozen=True)
class RiemannComponents:
    R: np.ndarray  # R[a, b, c, d]: F_d component of R(F_a, F_b) F_c
    g: np.ndarray  # metric diagonal on the frame

    @property
    def lowered(self) -> np.ndarray:
        """``<R(F_a, F_b) F_c, F_d>``."""
        return self.R * self.g[None, None, None, :]

    def ricci(self) -> np.ndarray:
        """``Ric(F_b, F_c) = trace(X -> R(X, F_b) F_c)``."""
        return np.einsum("abca->bc", self.R)

    def sectional(self, i: int, j: int) -> float:
        gi, gj = self.g[i], self.g[j]
        return float(self.R[i, j, j, i] * gi / (gi * gj))

    def sectional_all(self) -> dict:
        return {(i, j): self.sectional(i, j) for i in range(4) for j in range(i + 1, 4)}


def oracle_riemann(m: FrameMetricJet) -> RiemannComponents:
    gamma, dgamma, C, g = _connection_and_derivative(m)
    R = np.zeros((4, 4, 4, 4))
    # F0 is the only frame field that differentiates the (t-dependent) Γ's
    R[0] += dgamma
    R[:, 0] -= dgamma
    R += np.einsum("bce,aed->abcd", gamma, gamma)
    R -= np.einsum("ace,bed->abcd", gamma, gamma)
    R -= np.einsum("abe,ecd->abcd", C, gamma)
    return RiemannComponents(R, g)


def oracle_ricci(m: FrameMetricJet) -> np.ndarray:
    return oracle_riemann(m).ricci()


def oracle_sectional(m: FrameMetricJet) -> dict:
    return oracle_riemann(m).sectional_all()


# pilot step for the fourth difference behind scale="auto"
_PILOT_STEP = 1e-3


def _local_time_scale(coeffs, t: float, f0: np.ndarray) -> float:
    """Smallest ``(|f| / |f''''|)^(1/4)`` over the components, capped at 1."""
    h = _PILOT_STEP
    fm2, fm1, fp1, fp2 = (np.asarray(coeffs(t + k * h), dtype=float) for k in (-2, -1, 1, 2))
    d4 = np.abs(fm2 - 4 * fm1 + 6 * f0 - 4 * fp1 + fp2) / h**4
    with np.errstate(divide="ignore"):
        tau = (np.abs(f0) / d4) ** 0.25
    return float(min(1.0, np.min(tau)))


def finite_difference_jet(
    coeffs: Callable[[float], tuple],
    t: float,
    scale: float | str = 1.0,
    h1: float | None = None,
    h2: float | None = None,
    order: int = 2,
) -> tuple:
    """Central differences ``(f, f', f'')`` of a coefficient function.

    ``order=2`` uses the 3-point stencils, ``order=4`` the 5-point ones.
    Default steps are ``u^(1/(p+1))·scale`` for ``f'`` and
    ``u^(1/(p+2))·scale`` for ``f''`` (``u`` the unit roundoff, ``p`` the
    order), the error-balancing choices when ``scale`` is the time over
    which ``f`` changes appreciably.  ``scale="auto"`` estimates that time as
    ``(|f| / |f''''|)^(1/4)`` from a pilot fourth difference, so
    fast-varying stretches get shorter steps.
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order!r}")
    u = np.finfo(float).eps
    f0 = np.asarray(coeffs(t), dtype=float)
    if scale == "auto":
        scale = _local_time_scale(coeffs, t, f0)
    elif isinstance(scale, str):
        raise ValueError(f"scale must be a number or 'auto', got {scale!r}")
    h1 = h1 if h1 is not None else u ** (1 / (order + 1)) * scale
    h2 = h2 if h2 is not None else u ** (1 / (order + 2)) * scale

    def at(h):
        return np.asarray(coeffs(t + h), dtype=float)

    if order == 2:
        d1 = (at(h1) - at(-h1)) / (2 * h1)
        d2 = (at(h2) - 2 * f0 + at(-h2)) / (h2 * h2)
    else:
        d1 = (8 * (at(h1) - at(-h1)) - (at(2 * h1) - at(-2 * h1))) / (12 * h1)
        d2 = (16 * (at(h2) + at(-h2)) - (at(2 * h2) + at(-2 * h2)) - 30 * f0) / (12 * h2 * h2)
    return tuple(f0), tuple(d1), tuple(d2)
