"""Swarm-level diagnostics and offline verification of the safety bounds.

The controllers act on local, possibly noisy information; the verifiers here
replay each step with true positions, the controllers' own neighbor graph,
and the velocities actually applied, and check the sufficient conditions that
make the local barriers imply the global one:

* swarm bound: the mass non-neighbors push toward the danger set, summed over
  robots, stays below the global barrier decay budget plus what every robot
  could contribute alone;
* individual bound: the per-robot version of the same comparison;
* neighbor proximity: on the danger set, neighborhoods outweigh their
  complements in L2 — the "neighbors stay closer to danger than strangers"
  condition.

All three report (lhs, rhs) so margins can be logged per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import ControllerParams, best_self_rate
from .fields import density_rate, sum_densities
from .grid import Grid, Operators, RegionMask, integrate_region


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def global_metrics(fields, target_field, safety_threshold, grid: Grid,
                   mask: RegionMask):
    """(tracking error, barrier) of the whole swarm against the target profile."""
    total = sum_densities(grid, fields)
    mismatch = np.asarray(target_field, dtype=np.float64) - total
    tracking = grid.cell * grid.cell * float(mismatch @ mismatch)
    barrier = safety_threshold - integrate_region(grid, total * total, mask)
    return tracking, barrier


def _neighborhood_sums(fields, neighbor_sets, grid: Grid):
    """Per-robot neighborhood and complement density sums (no cancellation)."""
    inside = []
    outside = []
    for ns in neighbor_sets:
        inside.append(sum_densities(grid, [fields[j] for j in ns.neighbors]))
        outside.append(sum_densities(grid, [fields[j] for j in ns.non_neighbors]))
    return inside, outside


def local_values(fields, neighbor_sets, target_field, params: ControllerParams,
                 grid: Grid, mask: RegionMask):
    """Per-robot barrier and tracking values in the verification universe."""
    target = np.asarray(target_field, dtype=np.float64)
    barriers = np.empty(len(fields))
    tracking = np.empty(len(fields))
    inside, _ = _neighborhood_sums(fields, neighbor_sets, grid)
    for i, ns in enumerate(neighbor_sets):
        share = ns.degree * params.safety_threshold / params.n_robots
        barriers[i] = share - integrate_region(grid, inside[i] * inside[i], mask)
        mismatch = target - inside[i]
        tracking[i] = grid.cell * grid.cell * float(mismatch @ mismatch)
    return barriers, tracking


def verify_swarm_bound(fields, neighbor_sets, commands, params: ControllerParams,
                       grid: Grid, mask: RegionMask, ops: Operators) -> BoundCheck:
    """Swarm-level sufficient condition for the global barrier to keep decaying
    no faster than its budget, evaluated with the applied velocities."""
    total = sum_densities(grid, fields)
    h_global = params.safety_threshold - integrate_region(grid, total * total, mask)
    inside, outside = _neighborhood_sums(fields, neighbor_sets, grid)
    two_l2 = 2.0 * grid.cell * grid.cell
    lhs = 0.0
    rhs = params.cbf_gain_global * h_global
    for i, f in enumerate(fields):
        rate = density_rate(f, commands[i], params.diffusion, ops)
        lhs += two_l2 * float(rate[mask.indices] @ outside[i][mask.indices])
        rhs += best_self_rate(f, inside[i], params, grid, mask, ops)[0]
    return BoundCheck(lhs=lhs, rhs=rhs)


def verify_individual_bounds(fields, neighbor_sets, commands,
                             params: ControllerParams, grid: Grid, mask: RegionMask,
                             ops: Operators) -> np.ndarray:
    """Margins (rhs - lhs) of the per-robot sufficient bound; >= 0 means it holds."""
    total = sum_densities(grid, fields)
    inside, outside = _neighborhood_sums(fields, neighbor_sets, grid)
    two_l2 = 2.0 * grid.cell * grid.cell
    share = params.safety_threshold / params.n_robots
    margins = np.empty(len(fields))
    for i, f in enumerate(fields):
        rate = density_rate(f, commands[i], params.diffusion, ops)
        lhs = two_l2 * float(rate[mask.indices] @ outside[i][mask.indices])
        crowding = integrate_region(grid, np.asarray(f) * total, mask)
        rhs = params.cbf_gain_global * (share - crowding)
        rhs += best_self_rate(f, inside[i], params, grid, mask, ops)[0]
        margins[i] = rhs - lhs
    return margins


def verify_neighbor_proximity(fields, neighbor_sets, grid: Grid,
                              mask: RegionMask) -> BoundCheck:
    """L2 comparison on the danger set: do neighborhoods outweigh their
    complements in aggregate?"""
    inside, outside = _neighborhood_sums(fields, neighbor_sets, grid)
    lhs = 0.0
    rhs = 0.0
    for i in range(len(fields)):
        lhs += np.sqrt(integrate_region(grid, outside[i] * outside[i], mask))
        rhs += np.sqrt(integrate_region(grid, inside[i] * inside[i], mask))
    return BoundCheck(lhs=float(lhs), rhs=float(rhs))


@dataclass
class StepMetrics:
    """Everything logged for one simulation step (pre-move snapshot)."""

    step: int
    t: float
    tracking_error: float            # global V against the target
    barrier: float                   # global h; >= 0 means safe
    local_barrier_sum: float
    local_barriers: np.ndarray
    local_tracking: np.ndarray
    relaxations: np.ndarray          # per-robot safety-row relaxation (decisions)
    threats: np.ndarray              # per-robot worst-case neighbor pressure
    self_rates: np.ndarray           # per-robot best own barrier rate
    swarm_bound: BoundCheck
    individual_margins: np.ndarray
    proximity: BoundCheck
    collision_stops: tuple


def csv_header(n_robots):
    cols = [
        "step", "t", "tracking_error", "barrier", "local_barrier_sum",
        "swarm_bound_lhs", "swarm_bound_rhs", "individual_margin_min",
        "proximity_lhs", "proximity_rhs", "collision_stops",
    ]
    for i in range(n_robots):
        cols.extend([
            f"barrier_{i}", f"tracking_{i}", f"relaxation_{i}",
            f"threat_{i}", f"self_rate_{i}",
        ])
    return cols


def _fmt(x):
    return format(float(x), ".17g")


def csv_row(sm: StepMetrics):
    row = [
        str(sm.step), _fmt(sm.t), _fmt(sm.tracking_error), _fmt(sm.barrier),
        _fmt(sm.local_barrier_sum), _fmt(sm.swarm_bound.lhs), _fmt(sm.swarm_bound.rhs),
        _fmt(sm.individual_margins.min() if sm.individual_margins.size else 0.0),
        _fmt(sm.proximity.lhs), _fmt(sm.proximity.rhs), str(len(sm.collision_stops)),
    ]
    for i in range(sm.local_barriers.size):
        row.extend([
            _fmt(sm.local_barriers[i]), _fmt(sm.local_tracking[i]),
            _fmt(sm.relaxations[i]), _fmt(sm.threats[i]), _fmt(sm.self_rates[i]),
        ])
    return row
