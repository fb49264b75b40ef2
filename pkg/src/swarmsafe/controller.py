"""Per-robot safety-filtered tracking controller and its centralized baseline.

Each robot solves a tiny QP in (u_x, u_y, s): minimize ||u||^2 + slack_penalty*s^2
subject to

* a soft tracking row: the local Lyapunov decrease condition
  clf_gain * V_i + dV_i/dt(u) <= s, where V_i is the squared L2 mismatch
  between the target profile and the robot's neighborhood density;
* a hard safety row: the local barrier condition
  cbf_gain * h_i + dh_i/dt(u, worst-case neighbors) >= delta_i, where
  h_i is the robot's share of the squared-density budget on the danger set;
* the velocity box |u|_inf <= u_max and s >= 0.

Neighbors' actions are unknown at decision time, so the safety row charges
each neighbor its worst admissible velocity (the barrier-rate minimizer over
the velocity box — a vertex, because the rate is linear in the velocity).
When even the robot's own best response cannot keep the worst-case rate
nonnegative, the row is relaxed by exactly that deficit (delta_i < 0), which
keeps the QP feasible at the robot's safest velocity by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qp
from .errors import DimensionError, ParameterError
from .fields import density_rate, sum_densities
from .grid import Grid, Operators, RegionMask, integrate_region

# Fraction of u_max used for the default diffusion coefficient; keeps ~99% of
# the diffusion-induced motion within the velocity bound.
DEFAULT_DIFFUSION_FACTOR = 0.045

# Linear coefficients at or below this magnitude are treated as "no preference"
# when picking an extreme velocity, and the component is set to 0 instead of a
# box vertex.
COEFFICIENT_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ControllerParams:
    """Gains and limits shared by every robot in a run.

    `diffusion=None` selects the default DEFAULT_DIFFUSION_FACTOR * u_max;
    `cbf_gain_global=None` reuses `cbf_gain` for swarm-level checks.
    """

    n_robots: int
    u_max: float
    safety_threshold: float          # total squared-density budget on the danger set
    clf_gain: float = 1.0            # tracking aggressiveness
    cbf_gain: float = 1.0            # per-robot barrier decay rate
    slack_penalty: float = 10.0      # weight on the tracking slack
    diffusion: float | None = None
    cbf_gain_global: float | None = None

    def __post_init__(self):
        if self.n_robots < 1:
            raise ParameterError("n_robots must be at least 1")
        if not self.u_max >= 0.0:
            raise ParameterError("u_max must be nonnegative")
        if not self.safety_threshold > 0.0:
            raise ParameterError("safety_threshold must be positive")
        if self.clf_gain < 0.0 or self.cbf_gain < 0.0:
            raise ParameterError("gains must be nonnegative")
        if not self.slack_penalty > 0.0:
            raise ParameterError("slack_penalty must be positive (the QP needs a "
                                 "strictly convex objective)")
        if self.diffusion is None:
            object.__setattr__(self, "diffusion", DEFAULT_DIFFUSION_FACTOR * self.u_max)
        elif self.diffusion < 0.0:
            raise ParameterError("diffusion must be nonnegative")
        if self.cbf_gain_global is None:
            object.__setattr__(self, "cbf_gain_global", self.cbf_gain)
        elif self.cbf_gain_global < 0.0:
            raise ParameterError("cbf_gain_global must be nonnegative")


@dataclass(frozen=True)
class ControlDecision:
    """One robot's decision plus the quantities that explain it."""

    velocity: np.ndarray       # shape (2,), |.|_inf <= u_max
    slack: float               # tracking-row slack, >= 0
    barrier: float             # local barrier h_i at decision time
    tracking_error: float      # local Lyapunov value V_i
    threat: float              # worst-case barrier pressure from neighbors
    self_rate: float           # best barrier rate the robot can contribute alone
    relaxation: float          # min(0, threat + self_rate); < 0 only when cornered


@dataclass(frozen=True)
class NeighborThreat:
    """Worst-case assessment of the neighbors' next move."""

    threat: float              # cbf_gain * h_i + sum of per-neighbor worst rates
    velocities: np.ndarray     # (n_neighbors, 2) chosen adversarial velocities
    rate_fields: tuple | None  # per-neighbor density rates at those velocities


def local_barrier(neighborhood_field, degree, params: ControllerParams,
                  grid: Grid, mask: RegionMask) -> float:
    """Robot's share of the safety budget minus its neighborhood's danger mass.

    h_i = degree * threshold / n_robots - int_danger (neighborhood density)^2.
    """
    if not 1 <= degree <= params.n_robots:
        raise ParameterError(f"neighborhood size {degree} outside 1..{params.n_robots}")
    f = np.asarray(neighborhood_field, dtype=np.float64)
    share = degree * params.safety_threshold / params.n_robots
    return share - integrate_region(grid, f * f, mask)


def local_lyapunov(neighborhood_field, target_field, grid: Grid) -> float:
    """Squared L2 mismatch between the target profile and the neighborhood density."""
    w = np.asarray(target_field, dtype=np.float64) - np.asarray(neighborhood_field,
                                                                dtype=np.float64)
    if w.shape != (grid.n_cells,):
        raise DimensionError("field length does not match the grid")
    return grid.cell * grid.cell * float(w @ w)


def _rate_coefficients(field, mask_weights, mask: RegionMask, grid: Grid,
                       ops: Operators, diffusion):
    """Barrier-rate contribution of one robot's density as a linear form in u.

    Returns (cx, cy, c0) with  -2 * int_danger w * rate(u) = cx*ux + cy*uy + c0.
    """
    rows = mask.indices
    gx = ops.grad_x.apply_rows(field, rows)
    gy = ops.grad_y.apply_rows(field, rows)
    gl = ops.laplacian.apply_rows(field, rows)
    two_l2 = 2.0 * grid.cell * grid.cell
    cx = two_l2 * float(mask_weights @ gx)
    cy = two_l2 * float(mask_weights @ gy)
    c0 = -two_l2 * diffusion * float(mask_weights @ gl)
    return cx, cy, c0


def _extreme_velocity(cx, cy, u_max, direction):
    """Box vertex minimizing (direction=-1) or maximizing (+1) cx*ux + cy*uy.

    Components with |coefficient| <= COEFFICIENT_TIE_TOL carry no preference
    and are set to 0 so ties resolve deterministically.
    """
    ux = 0.0 if abs(cx) <= COEFFICIENT_TIE_TOL else direction * (u_max if cx > 0 else -u_max)
    uy = 0.0 if abs(cy) <= COEFFICIENT_TIE_TOL else direction * (u_max if cy > 0 else -u_max)
    return ux, uy


def worst_case_neighbor_rate(neighbor_fields, neighborhood_field,
                             params: ControllerParams, grid: Grid, mask: RegionMask,
                             ops: Operators, include_fields: bool = True) -> NeighborThreat:
    """Minimize the neighbors' combined barrier rate over their velocity boxes.

    The rate is linear in each neighbor's velocity, so the minimum decouples
    per neighbor and lands on a box vertex (or 0 in a tied component).
    """
    nbh = np.asarray(neighborhood_field, dtype=np.float64)
    degree = len(neighbor_fields) + 1
    h_i = local_barrier(nbh, degree, params, grid, mask)
    threat = params.cbf_gain * h_i
    weights = nbh[mask.indices]
    velocities = np.zeros((len(neighbor_fields), 2))
    rates = [] if include_fields else None
    for k, f in enumerate(neighbor_fields):
        cx, cy, c0 = _rate_coefficients(f, weights, mask, grid, ops, params.diffusion)
        ux, uy = _extreme_velocity(cx, cy, params.u_max, -1)
        velocities[k] = (ux, uy)
        threat += cx * ux + cy * uy + c0
        if include_fields:
            rates.append(density_rate(f, (ux, uy), params.diffusion, ops))
    return NeighborThreat(threat=threat, velocities=velocities,
                          rate_fields=tuple(rates) if include_fields else None)


def best_self_rate(own_field, neighborhood_field, params: ControllerParams,
                   grid: Grid, mask: RegionMask, ops: Operators):
    """Best barrier rate the robot can produce alone, and the velocity achieving it.

    Mirror image of the per-neighbor worst case: same linear form, maximized.
    """
    weights = np.asarray(neighborhood_field, dtype=np.float64)[mask.indices]
    cx, cy, c0 = _rate_coefficients(own_field, weights, mask, grid, ops, params.diffusion)
    ux, uy = _extreme_velocity(cx, cy, params.u_max, +1)
    return cx * ux + cy * uy + c0, np.array([ux, uy])


def decide(own_field, neighbor_fields, target_field, params: ControllerParams,
           grid: Grid, mask: RegionMask, ops: Operators) -> ControlDecision:
    """Solve one robot's safety-filtered tracking QP on a frozen snapshot."""
    own = np.asarray(own_field, dtype=np.float64)
    nbh = sum_densities(grid, [own, *neighbor_fields])
    degree = len(neighbor_fields) + 1
    h_i = local_barrier(nbh, degree, params, grid, mask)
    v_i = local_lyapunov(nbh, target_field, grid)

    assessment = worst_case_neighbor_rate(neighbor_fields, nbh, params, grid, mask,
                                          ops, include_fields=False)
    threat = assessment.threat
    self_rate, u_safest = best_self_rate(own, nbh, params, grid, mask, ops)
    relaxation = min(0.0, threat + self_rate)

    two_l2 = 2.0 * grid.cell * grid.cell
    mismatch = np.asarray(target_field, dtype=np.float64) - nbh
    gx = ops.grad_x.apply(own)
    gy = ops.grad_y.apply(own)
    gl = ops.laplacian.apply(own)
    track_row = (
        np.array([two_l2 * float(mismatch @ gx), two_l2 * float(mismatch @ gy), -1.0]),
        two_l2 * params.diffusion * float(mismatch @ gl) - params.clf_gain * v_i,
    )

    # Safety row: cbf_gain*h_i + own rate + worst-case neighbor rates >= relaxation.
    # The cbf_gain*h_i term cancels against its copy inside `threat`.
    weights_mask = nbh[mask.indices]
    cbx, cby, cb0 = _rate_coefficients(own, weights_mask, mask, grid, ops,
                                       params.diffusion)
    safety_a = np.array([-cbx, -cby, 0.0])
    if relaxation < 0.0:
        # Cornered: the relaxation makes the row bind exactly at the robot's
        # safest velocity. Algebraically the rhs is cb0 + threat - relaxation,
        # but that subtraction cancels O(|threat|) terms and can leave the row
        # infeasible by rounding when its coefficients are tiny, so evaluate
        # the rhs as the row's own value at u_safest instead (bit-identical to
        # the solver's feasibility check).
        safety_b = float(safety_a @ np.array([u_safest[0], u_safest[1], 0.0]))
    else:
        safety_b = cb0 + threat
    safety_row = (safety_a, safety_b)

    problem = qp.QPProblem(
        weights=np.array([1.0, 1.0, params.slack_penalty]),
        rows=(track_row, safety_row),
        lower=np.array([-params.u_max, -params.u_max, 0.0]),
        upper=np.array([params.u_max, params.u_max, np.inf]),
    )
    solution = qp.solve(problem)
    velocity = np.clip(solution.z[:2], -params.u_max, params.u_max)
    return ControlDecision(
        velocity=velocity,
        slack=float(solution.z[2]),
        barrier=h_i,
        tracking_error=v_i,
        threat=threat,
        self_rate=self_rate,
        relaxation=relaxation,
    )


@dataclass(frozen=True)
class CentralizedDecision:
    """Result of the all-knowing baseline controller."""

    velocities: np.ndarray     # (n_robots, 2)
    slack: float
    objective: float


def centralized_control(fields, target_field, params: ControllerParams, grid: Grid,
                        mask: RegionMask, ops: Operators) -> CentralizedDecision:
    """One QP over every robot's velocity plus a shared tracking slack.

    The safety row here is hard (no relaxation): with global knowledge the
    problem either has a safe answer or is genuinely infeasible, and the
    latter raises :class:`swarmsafe.errors.InfeasibleProblem`.
    """
    n = len(fields)
    if n != params.n_robots:
        raise ParameterError(f"{n} fields given for n_robots={params.n_robots}")
    total = sum_densities(grid, fields)
    mismatch = np.asarray(target_field, dtype=np.float64) - total
    v_global = grid.cell * grid.cell * float(mismatch @ mismatch)
    h_global = params.safety_threshold - integrate_region(grid, total * total, mask)

    two_l2 = 2.0 * grid.cell * grid.cell
    weights_mask = total[mask.indices]
    dim = 2 * n + 1
    track = np.zeros(dim)
    track[-1] = -1.0
    track_rhs = -params.clf_gain * v_global
    safety = np.zeros(dim)
    safety_rhs = params.cbf_gain_global * h_global
    for i, f in enumerate(fields):
        x = np.asarray(f, dtype=np.float64)
        gx = ops.grad_x.apply(x)
        gy = ops.grad_y.apply(x)
        gl = ops.laplacian.apply(x)
        track[2 * i] = two_l2 * float(mismatch @ gx)
        track[2 * i + 1] = two_l2 * float(mismatch @ gy)
        track_rhs += two_l2 * params.diffusion * float(mismatch @ gl)
        cx, cy, c0 = _rate_coefficients(x, weights_mask, mask, grid, ops,
                                        params.diffusion)
        safety[2 * i] = -cx
        safety[2 * i + 1] = -cy
        safety_rhs += c0

    weights = np.ones(dim)
    weights[-1] = params.slack_penalty
    lower = np.full(dim, -params.u_max)
    upper = np.full(dim, params.u_max)
    lower[-1] = 0.0
    upper[-1] = np.inf
    problem = qp.QPProblem(
        weights=weights,
        rows=((track, track_rhs), (safety, safety_rhs)),
        lower=lower,
        upper=upper,
    )
    solution = qp.solve(problem)
    velocities = np.clip(solution.z[:-1].reshape(n, 2), -params.u_max, params.u_max)
    return CentralizedDecision(velocities=velocities, slack=float(solution.z[-1]),
                               objective=solution.objective)
