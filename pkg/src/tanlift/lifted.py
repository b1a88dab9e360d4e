"""Control systems with a complete-lift drift and vertical-lift controls.

The base trajectory is fixed by the drift; controls shape the fiber
component only.  The endpoint map has a closed form: the initial fiber
is pushed by the flow differential and each control channel contributes
the time integral of its transported direction.  Controllability along
the endpoint fiber reduces to the rank of the transported directions,
with an iterated-bracket sufficient criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .controls import ControlSignal
from .errors import AlignmentError, TargetBaseError, UnreachableTargetError
from .flows import (
    DEFAULT_CONFIG,
    FlowResult,
    IntegratorConfig,
    TangentTrajectory,
    integrate_fixed,
    pullback_vector,
)
from .lifts import base_lie_bracket
from .manifold import DEFAULT_DERIV_STEP, BasePoint, ChartManifold, TangentPoint, VectorField
from .subspace import DEFAULT_RANK_TOL, SubspaceBasis, span_basis

_BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class LiftedSystem:
    """dv/dt = Y^c(v) + sum_i u_i Xi^v(v) on the tangent bundle."""

    manifold: ChartManifold
    drift: VectorField
    controls: tuple

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        if len(self.controls) < 1:
            raise ValueError("need at least one control field")
        for f in (self.drift, *self.controls):
            if f.manifold.dim != self.manifold.dim:
                raise ValueError(f"field {f.name} has wrong dimension")

    @property
    def control_dim(self) -> int:
        return len(self.controls)


@dataclass(frozen=True)
class TransportOperatorGrid:
    """Discretized control-to-fiber transport data on a uniform grid.

    ``transported[k, i]`` is control direction i pulled back to the
    initial tangent space at node time ``times[k]``; ``columns[k, i]``
    is the same vector pushed forward to the endpoint fiber (the
    integrand of the transport operator).  ``flow`` carries the node
    states and flow Jacobians of the single integration pass behind
    both.
    """

    system: LiftedSystem
    x0: BasePoint
    horizon: float
    times: np.ndarray
    transported: np.ndarray
    columns: np.ndarray
    flow: FlowResult

    @property
    def grid_segments(self) -> int:
        return len(self.times) - 1

    @property
    def endpoint_jacobian(self) -> np.ndarray:
        return self.flow.jacobians[-1]


@dataclass(frozen=True)
class AdCriterionResult:
    """Rank report of the iterated-bracket directions at the base point."""

    basis: SubspaceBasis
    satisfied: bool
    depth: int
    k_used: int
    k_max: int
    saturated: bool


@dataclass(frozen=True)
class ControllabilityReport:
    """Full fiberwise-controllability diagnosis of a lifted system."""

    horizon: float
    grid_segments: int
    anchor: TangentPoint
    s_t_basis: SubspaceBasis
    image_basis: SubspaceBasis
    ad: AdCriterionResult
    verdict_transport: bool
    verdict_ad: bool
    cond_flow_differential: float
    caveat: Optional[str] = None


def _joint_rhs(sys: LiftedSystem, deriv_step: float):
    n = sys.manifold.dim

    def rhs(t, z):
        x = z[:n]
        J = z[n:].reshape(n, n)
        return np.concatenate([sys.drift.at(x), (sys.drift.jacobian_at(x, deriv_step) @ J).ravel()])

    return rhs


def _even_substeps(span: float, cfg: IntegratorConfig) -> int:
    n_sub = max(2, cfg.steps_for(span))
    return n_sub + (n_sub % 2)


def _simpson_weights(n_sub: int, h: float) -> np.ndarray:
    w = np.ones(n_sub + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _transport_segments(sys: LiftedSystem, x0: BasePoint, boundaries: np.ndarray, cfg: IntegratorConfig):
    """One joint flow pass with per-segment Simpson transport integrals.

    Returns (x_T, J_T, Z, node_times, node_x, node_J) where
    Z[k, i] = integral over segment k of the pulled-back direction i, in
    the initial tangent space; push by J_T to land in the endpoint fiber.
    Node arrays hold the values at the segment boundaries only.
    """
    n = sys.manifold.dim
    m = sys.control_dim
    rhs = _joint_rhs(sys, DEFAULT_DERIV_STEP)
    x = x0.coords.copy()
    J = np.eye(n)
    K = len(boundaries) - 1
    Z = np.zeros((K, m, n))
    node_x = [x.copy()]
    node_J = [J.copy()]
    for k in range(K):
        a, b = boundaries[k], boundaries[k + 1]
        n_sub = _even_substeps(b - a, cfg)
        z0 = np.concatenate([x, J.ravel()])
        _, rows = integrate_fixed(rhs, z0, a, b, n_sub)
        pulled = np.empty((n_sub + 1, m, n))
        for j in range(n_sub + 1):
            xj = rows[j, :n]
            sys.manifold.check(xj)
            Jj = rows[j, n:].reshape(n, n)
            for i, X in enumerate(sys.controls):
                pulled[j, i] = pullback_vector(Jj, X.at(xj))
        weights = _simpson_weights(n_sub, (b - a) / n_sub)
        Z[k] = np.tensordot(weights, pulled, axes=(0, 0))
        x = rows[-1, :n]
        J = rows[-1, n:].reshape(n, n)
        node_x.append(x.copy())
        node_J.append(J.copy())
    return x, J, Z, np.asarray(boundaries, float), np.array(node_x), np.array(node_J)


def simulate_lifted_ode(
    sys: LiftedSystem,
    v0: TangentPoint,
    u: Optional[ControlSignal],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    horizon: Optional[float] = None,
) -> TangentTrajectory:
    """Direct RK4 integration on the tangent bundle.

    The base block obeys dx/dt = Y(x) regardless of the control; the
    fiber obeys dy/dt = J_Y(x) y + sum_i u_i Xi(x).  Steps never
    straddle a control segment boundary.
    """
    T = u.horizon if u is not None else horizon
    if T is None:
        raise ValueError("need a control signal or an explicit horizon")
    if u is not None and u.channels != sys.control_dim:
        raise ValueError(f"control has {u.channels} channels, system expects {sys.control_dim}")
    n = sys.manifold.dim
    boundaries = u.boundaries if u is not None else np.array([0.0, T])
    times = [np.zeros(1)]
    bases = [v0.base.coords[None, :].copy()]
    fibers = [v0.fiber[None, :].copy()]
    state = np.concatenate([v0.base.coords, v0.fiber])
    for k in range(len(boundaries) - 1):
        a, b = boundaries[k], boundaries[k + 1]
        u_seg = u.values[k] if u is not None else None

        def rhs(t, z):
            x, y = z[:n], z[n:]
            ydot = sys.drift.jacobian_at(x) @ y
            if u_seg is not None:
                for ui, X in zip(u_seg, sys.controls):
                    ydot = ydot + ui * X.at(x)
            return np.concatenate([sys.drift.at(x), ydot])

        seg_times, rows = integrate_fixed(rhs, state, a, b, cfg.steps_for(b - a))
        times.append(seg_times[1:])
        bases.append(rows[1:, :n])
        fibers.append(rows[1:, n:])
        state = rows[-1]
    return TangentTrajectory(
        manifold=sys.manifold,
        times=np.concatenate(times),
        bases=np.concatenate(bases, axis=0),
        fibers=np.concatenate(fibers, axis=0),
    )


def endpoint_closed_form(
    sys: LiftedSystem,
    v0: TangentPoint,
    u: Optional[ControlSignal],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    horizon: Optional[float] = None,
) -> TangentPoint:
    """Endpoint of the lifted system from its explicit representation.

    The base lands on the drift flow; the fiber is the flow differential
    applied to the initial fiber plus, per control segment and channel,
    the segment's constant input times the Simpson integral of the
    transported direction.  Control segments define the quadrature
    segmentation, so piecewise-constant inputs are handled exactly up to
    flow and quadrature error.
    """
    T = u.horizon if u is not None else horizon
    if T is None:
        raise ValueError("need a control signal or an explicit horizon")
    if u is not None and u.channels != sys.control_dim:
        raise ValueError(f"control has {u.channels} channels, system expects {sys.control_dim}")
    boundaries = u.boundaries if u is not None else np.array([0.0, T])
    x_T, J_T, Z, *_ = _transport_segments(sys, v0.base, boundaries, cfg)
    fiber = J_T @ v0.fiber
    if u is not None:
        for k in range(u.segments):
            for i in range(u.channels):
                fiber = fiber + u.values[k, i] * (J_T @ Z[k, i])
    return TangentPoint(BasePoint(sys.manifold, x_T), fiber)


def build_transport_grid(
    sys: LiftedSystem,
    x0: BasePoint,
    T: float,
    N: int,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> TransportOperatorGrid:
    """Transported directions sampled at N+1 uniform nodes of [0, T].

    One forward pass integrates the flow and its differential; node
    Jacobians are then reused for every pullback instead of
    re-integrating per node.
    """
    if N < 2:
        raise ValueError("need at least 2 grid segments")
    if T <= 0:
        raise ValueError("horizon must be positive")
    boundaries = np.linspace(0.0, T, N + 1)
    _, J_T, _, node_times, node_x, node_J = _transport_segments(sys, x0, boundaries, cfg)
    n = sys.manifold.dim
    m = sys.control_dim
    transported = np.empty((N + 1, m, n))
    columns = np.empty((N + 1, m, n))
    for k in range(N + 1):
        for i, X in enumerate(sys.controls):
            transported[k, i] = pullback_vector(node_J[k], X.at(node_x[k]))
            columns[k, i] = J_T @ transported[k, i]
    flow_result = FlowResult(
        manifold=sys.manifold, times=node_times, states=node_x, jacobians=node_J
    )
    return TransportOperatorGrid(
        system=sys,
        x0=x0,
        horizon=T,
        times=node_times,
        transported=transported,
        columns=columns,
        flow=flow_result,
    )


def _segment_quadrature(columns: np.ndarray, k0: int, span: int, h: float) -> np.ndarray:
    """Integral of the column interpolant over ``span`` grid intervals from node k0.

    Composite Simpson when the span is even; a single interval falls
    back to the trapezoid rule, an odd span to Simpson plus one
    trapezoid tail.
    """
    if span % 2 == 0:
        w = _simpson_weights(span, h)
        return np.tensordot(w, columns[k0 : k0 + span + 1], axes=(0, 0))
    if span == 1:
        return 0.5 * h * (columns[k0] + columns[k0 + 1])
    head = _segment_quadrature(columns, k0, span - 1, h)
    return head + 0.5 * h * (columns[k0 + span - 1] + columns[k0 + span])


def apply_LT(grid: TransportOperatorGrid, u: ControlSignal) -> np.ndarray:
    """Discretized transport operator: control signal to endpoint-fiber vector.

    Linear in the control by construction.  Control segments must align
    with the grid (segment boundaries on grid nodes) or refine it (a
    whole number of control segments per grid interval, integrated
    against the linear interpolant of the columns); anything else is an
    alignment error.
    """
    if u.channels != grid.system.control_dim:
        raise ValueError(f"control has {u.channels} channels, system expects {grid.system.control_dim}")
    if abs(u.horizon - grid.horizon) > _BOUNDARY_RTOL * max(1.0, grid.horizon):
        raise AlignmentError(
            f"control horizon {u.horizon} does not match grid horizon {grid.horizon}"
        )
    N = grid.grid_segments
    N_u = u.segments
    n = grid.system.manifold.dim
    out = np.zeros(n)
    if N % N_u == 0:
        span = N // N_u
        h = grid.horizon / N
        for seg in range(N_u):
            seg_integral = _segment_quadrature(grid.columns, seg * span, span, h)
            out += np.tensordot(u.values[seg], seg_integral, axes=(0, 0))
        return out
    if N_u % N == 0:
        per = N_u // N
        hg = grid.horizon / N
        hu = grid.horizon / N_u
        for k in range(N):
            c0 = grid.columns[k]
            slope = (grid.columns[k + 1] - grid.columns[k]) / hg
            for q in range(per):
                a = q * hu
                b = a + hu
                moment0 = b - a
                moment1 = 0.5 * (b * b - a * a)
                piece = c0 * moment0 + slope * moment1
                out += np.tensordot(u.values[k * per + q], piece, axes=(0, 0))
        return out
    raise AlignmentError(
        f"{N_u} control segments neither align with nor refine the {N}-segment grid"
    )


def S_T_span(
    sys: LiftedSystem,
    x0: BasePoint,
    T: float,
    N: int = 64,
    tol: float = DEFAULT_RANK_TOL,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> SubspaceBasis:
    """Span of the transported control directions sampled at the grid nodes.

    The continuum span is sampled at N+1 node times, so the reported
    rank can only understate the true one; a full-rank answer is
    therefore reliable while a deficient one is grid-dependent.
    """
    if N < sys.manifold.dim:
        raise ValueError("grid must have at least dim segments to resolve full rank")
    grid = build_transport_grid(sys, x0, T, N, cfg)
    vectors = grid.transported.reshape(-1, sys.manifold.dim)
    return span_basis(vectors, tol)


def ad_criterion(
    sys: LiftedSystem,
    x0: BasePoint,
    k_max: Optional[int] = None,
    tol: float = DEFAULT_RANK_TOL,
) -> AdCriterionResult:
    """Rank of the iterated brackets of the drift with each control field.

    Iterates ad_Y^k Xi(x0) for k = 0..k_max (default 2*dim), stopping
    early once the rank fills the tangent space or stalls for two
    consecutive depths.  A full rank is sufficient for fiberwise
    controllability at every positive horizon.
    """
    dim = sys.manifold.dim
    if k_max is None:
        k_max = 2 * dim
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    vectors = []
    ranks = []
    current = list(sys.controls)
    k_used = 0
    saturated = False
    for k in range(k_max + 1):
        if k > 0:
            current = [base_lie_bracket(sys.drift, B) for B in current]
        vectors.extend(B.at(x0) for B in current)
        basis = span_basis(vectors, tol)
        ranks.append(basis.rank)
        k_used = k
        if basis.rank == dim:
            break
        if k >= 2 and ranks[-1] == ranks[-2] == ranks[-3]:
            saturated = True
            break
    final_rank = ranks[-1]
    depth = next(k for k, r in enumerate(ranks) if r == final_rank)
    basis = span_basis(vectors, tol)
    return AdCriterionResult(
        basis=basis,
        satisfied=basis.rank == dim,
        depth=depth,
        k_used=k_used,
        k_max=k_max,
        saturated=saturated,
    )


def fiber_controllability_report(
    sys: LiftedSystem,
    v0: TangentPoint,
    T: float,
    N: int = 64,
    k_max: Optional[int] = None,
    tol: float = DEFAULT_RANK_TOL,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> ControllabilityReport:
    """Assemble the reachable-set anchor, both rank tests, and verdicts.

    The transport verdict is the necessary-and-sufficient test (rank of
    the sampled transported directions); the bracket verdict is the
    sufficient criterion.  The anchor plus the image basis describe the
    reachable affine subspace of the endpoint fiber.
    """
    dim = sys.manifold.dim
    grid = build_transport_grid(sys, v0.base, T, max(N, dim), cfg)
    s_t_basis = span_basis(grid.transported.reshape(-1, dim), tol)
    image_basis = span_basis(grid.columns.reshape(-1, dim), tol)
    ad = ad_criterion(sys, v0.base, k_max, tol)
    J_T = grid.endpoint_jacobian
    anchor = TangentPoint(grid.flow.final_point, J_T @ v0.fiber)
    verdict_transport = s_t_basis.spans_dimension(dim)
    caveat = None
    if not verdict_transport:
        caveat = (
            f"grid-sampled: span sampled at {grid.grid_segments + 1} node times; "
            "a negative verdict can understate the rank of the continuum span"
        )
    return ControllabilityReport(
        horizon=T,
        grid_segments=grid.grid_segments,
        anchor=anchor,
        s_t_basis=s_t_basis,
        image_basis=image_basis,
        ad=ad,
        verdict_transport=verdict_transport,
        verdict_ad=ad.satisfied,
        cond_flow_differential=float(np.linalg.cond(J_T)),
        caveat=caveat,
    )


def steer_lifted(
    sys: LiftedSystem,
    v0: TangentPoint,
    target: TangentPoint,
    T: float,
    N: int = 64,
    tol: float = 1e-8,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    base_tol: float = 1e-6,
) -> ControlSignal:
    """Piecewise-constant control reaching a target tangent vector at time T.

    The target base must sit on the drift trajectory (the control cannot
    move it).  The fiber defect relative to the drift-transported
    initial fiber is solved by least squares against the per-segment
    transport integrals, giving the minimum-norm N-segment control.
    """
    boundaries = np.linspace(0.0, T, N + 1)
    x_T, J_T, Z, *_ = _transport_segments(sys, v0.base, boundaries, cfg)
    base_err = float(np.linalg.norm(target.base.coords - x_T))
    if base_err > base_tol:
        raise TargetBaseError(
            "base trajectory is fixed by the drift: target base "
            f"{target.base.coords.tolist()} is {base_err:.3e} away from the drift endpoint "
            f"{x_T.tolist()}"
        )
    m = sys.control_dim
    n = sys.manifold.dim
    M = np.empty((n, N * m))
    for k in range(N):
        for i in range(m):
            M[:, k * m + i] = J_T @ Z[k, i]
    defect = target.fiber - J_T @ v0.fiber
    alpha, *_ = np.linalg.lstsq(M, defect, rcond=None)
    residual = float(np.linalg.norm(M @ alpha - defect))
    if residual > tol * (1.0 + np.linalg.norm(defect)):
        raise UnreachableTargetError(
            f"fiber defect is not in the image of the transport operator "
            f"(residual {residual:.3e})",
            residual,
        )
    return ControlSignal(horizon=T, values=alpha.reshape(N, m))
