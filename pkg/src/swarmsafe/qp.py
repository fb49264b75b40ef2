"""Exact solver for small strictly convex quadratic programs.

Problems have the form

    minimize    sum_k w_k * z_k**2          (all w_k > 0)
    subject to  a_r . z <= b_r              (general rows)
                lo_k <= z_k <= hi_k         (boxes; +-inf allowed)

The strictly convex objective makes the optimum unique, which keeps both
solution paths deterministic:

* dimension <= 3 (the per-robot controller): enumerate working sets in
  size-then-lexicographic order, solve each equality-constrained KKT system,
  and accept the first primal- and dual-feasible candidate. Every accepted
  candidate is the same optimum; the ordering only decides which working set
  gets reported at degenerate vertices.

* larger dimensions (the centralized controller, up to 64 variables): a dual
  active-set method starting from the unconstrained minimum z = 0. It needs
  no feasible starting point and certifies infeasibility by running out of
  dual ascent directions on a violated constraint.

Constraint indexing used in solutions and errors: general rows first in the
order given, then lower bounds for each variable with a finite lower bound
(ascending variable index), then finite upper bounds likewise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InfeasibleProblem, ParameterError

_PRIMAL_TOL = 1e-9
_DUAL_TOL = 1e-9
_MAX_DIM = 64
_ENUM_DIM = 3


@dataclass(frozen=True, eq=False)
class QPProblem:
    """Diagonal-objective QP; see module docstring for the exact form."""

    weights: np.ndarray
    rows: tuple
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ParameterError("weights must be a nonempty 1-D array")
        if w.size > _MAX_DIM:
            raise ParameterError(f"problem dimension {w.size} exceeds {_MAX_DIM}")
        if not np.all(np.isfinite(w)) or not np.all(w > 0.0):
            raise ParameterError("objective weights must be finite and positive")
        if lo.shape != w.shape or hi.shape != w.shape:
            raise ParameterError("box bounds must match the problem dimension")
        if np.any(lo > hi):
            raise ParameterError("every lower bound must not exceed its upper bound")
        rows = tuple((np.asarray(a, dtype=float), float(b)) for a, b in self.rows)
        for a, b in rows:
            if a.shape != w.shape:
                raise ParameterError("constraint row length must match the dimension")
            if not np.all(np.isfinite(a)) or not np.isfinite(b):
                raise ParameterError("constraint rows must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True, eq=False)
class QPSolution:
    z: np.ndarray
    objective: float
    active_set: tuple          # folded constraint indices tight at the optimum
    multipliers: np.ndarray    # one per folded constraint, >= 0
    kkt_residual: float


def fold_constraints(problem: QPProblem):
    """All constraints as rows C z <= d plus human-readable labels."""
    n = problem.dim
    rows = [a for a, _ in problem.rows]
    rhs = [b for _, b in problem.rows]
    labels = [f"row{r}" for r in range(len(rows))]
    eye = np.eye(n)
    for k in range(n):
        if np.isfinite(problem.lower[k]):
            rows.append(-eye[k])
            rhs.append(-float(problem.lower[k]))
            labels.append(f"lower{k}")
    for k in range(n):
        if np.isfinite(problem.upper[k]):
            rows.append(eye[k])
            rhs.append(float(problem.upper[k]))
            labels.append(f"upper{k}")
    if rows:
        C = np.vstack(rows)
        d = np.asarray(rhs, dtype=float)
    else:
        C = np.zeros((0, n))
        d = np.zeros(0)
    return C, d, labels


@lru_cache(maxsize=None)
def _working_sets(n_constraints, max_size):
    sets = []
    for size in range(min(n_constraints, max_size) + 1):
        sets.extend(itertools.combinations(range(n_constraints), size))
    return tuple(sets)


def _row_tols(d):
    return _PRIMAL_TOL * (1.0 + np.abs(d))


def _solve_enumeration(w, C, d, labels):
    n = w.size
    m = d.size
    H = np.diag(2.0 * w)
    tols = _row_tols(d)
    best_violation = np.inf
    best_constraint = 0
    fallback = None            # best primal-feasible candidate that failed the
    fallback_objective = np.inf  # dual test (degenerate corner cases)
    for subset in _working_sets(m, n):
        q = len(subset)
        if q == 0:
            z = np.zeros(n)
            mu = np.zeros(0)
        else:
            idx = list(subset)
            A = C[idx]
            K = np.zeros((n + q, n + q))
            K[:n, :n] = H
            K[:n, n:] = A.T
            K[n:, :n] = A
            rhs = np.concatenate([np.zeros(n), d[idx]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(sol)):
                continue
            z = sol[:n]
            mu = sol[n:]
        slack = C @ z - d if m else np.zeros(0)
        worst = float((slack / (1.0 + np.abs(d))).max()) if m else 0.0
        if worst < best_violation:
            best_violation = worst
            best_constraint = int(np.argmax(slack - tols)) if m else 0
        if m and np.any(slack > tols):
            continue
        multipliers = np.zeros(m)
        if q:
            multipliers[list(subset)] = mu
        if q and np.any(mu < -_DUAL_TOL * (1.0 + np.abs(mu).max())):
            # Primal-feasible but not provably optimal. At degenerate corners
            # (more tight constraints than variables) every enumerable working
            # set can fail the sign test even though one of them produces the
            # true minimizer, so keep the cheapest such point as a fallback.
            objective = float(w @ (z * z))
            if objective < fallback_objective:
                fallback_objective = objective
                fallback = (z, np.maximum(multipliers, 0.0))
            continue
        return z, multipliers
    if fallback is not None:
        return fallback
    raise InfeasibleProblem(
        f"empty feasible set; most violated constraint is {labels[best_constraint]} "
        f"(relative violation {best_violation:.3e})",
        constraint=labels[best_constraint],
        violation=best_violation,
    )


def _solve_dual_active_set(w, C, d, labels):
    """Dual active-set iteration from the unconstrained minimum z = 0."""
    n = w.size
    m = d.size
    hinv = 0.5 / w                      # H = 2 diag(w)
    z = np.zeros(n)
    active: list[int] = []
    mult: list[float] = []
    tols = _row_tols(d)
    guard = 50 * (m + 2)
    for _ in range(guard):
        slack = C @ z - d if m else np.zeros(0)
        if not m or np.all(slack <= tols):
            multipliers = np.zeros(m)
            for k, v in zip(active, mult):
                multipliers[k] = v
            return z, multipliers
        p = int(np.argmax(slack))
        cp = C[p]
        u_p = 0.0
        for _ in range(guard):
            if active:
                N = C[active]                       # (q, n)
                S = (N * hinv) @ N.T
                r = np.linalg.solve(S, (N * hinv) @ cp)
                dz = -hinv * (cp - N.T @ r)
            else:
                r = np.zeros(0)
                dz = -hinv * cp
            kappa = float(-cp @ dz)                 # curvature along the dual step
            scale = float(cp @ (hinv * cp)) + 1e-300
            viol = float(cp @ z - d[p])
            if kappa <= 1e-13 * scale:
                # cp lies in the span of the active normals: dual-only step
                movable = r > 1e-12
                if not np.any(movable):
                    raise InfeasibleProblem(
                        f"empty feasible set; constraint {labels[p]} cannot be "
                        f"satisfied (violation {viol:.3e})",
                        constraint=labels[p],
                        violation=viol,
                    )
                ratios = np.where(movable, np.asarray(mult) / np.where(movable, r, 1.0),
                                  np.inf)
                j = int(np.argmin(ratios))
                t1 = float(ratios[j])
                mult = list(np.asarray(mult) - t1 * r)
                u_p += t1
                del active[j], mult[j]
                continue
            t2 = viol / kappa
            if active:
                movable = r > 1e-12
                ratios = np.where(movable, np.asarray(mult) / np.where(movable, r, 1.0),
                                  np.inf)
                j = int(np.argmin(ratios)) if np.any(movable) else -1
                t1 = float(ratios[j]) if j >= 0 else np.inf
            else:
                j, t1 = -1, np.inf
            if t2 <= t1:
                z = z + t2 * dz
                if active:
                    mult = list(np.asarray(mult) - t2 * r)
                u_p += t2
                active.append(p)
                mult.append(u_p)
                break
            z = z + t1 * dz
            mult = list(np.asarray(mult) - t1 * r)
            u_p += t1
            del active[j], mult[j]
    raise RuntimeError("dual active-set iteration did not converge")


def solve(problem: QPProblem) -> QPSolution:
    """Solve the QP; raises :class:`InfeasibleProblem` when no point satisfies
    every constraint."""
    w = problem.weights
    C, d, labels = fold_constraints(problem)
    if problem.dim <= _ENUM_DIM:
        z, multipliers = _solve_enumeration(w, C, d, labels)
    else:
        z, multipliers = _solve_dual_active_set(w, C, d, labels)
    m = d.size
    if m:
        slack = C @ z - d
        tols = _row_tols(d)
        if np.any(slack > tols):
            raise RuntimeError("solver returned an infeasible point")
        active = tuple(int(k) for k in np.flatnonzero(np.abs(slack) <= tols))
        residual = float(np.abs(2.0 * w * z + C.T @ multipliers).max())
    else:
        active = ()
        residual = float(np.abs(2.0 * w * z).max())
    objective = float(np.sum(w * z * z))
    return QPSolution(z=z, objective=objective, active_set=active,
                      multipliers=multipliers, kkt_residual=residual)
