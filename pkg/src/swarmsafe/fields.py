"""Gaussian density synthesis and the advection-diffusion density rate.

Each robot is represented by an unnormalised Gaussian bump (peak value 1) on
the torus grid; the swarm density is the plain sum of the bumps. A robot's
density evolves by transport under its commanded velocity plus isotropic
diffusion, which on the grid is the linear rate

    rate(u) = -(u_x * Gx + u_y * Gy) f + diffusion * L f

with Gx/Gy/L the central-difference operators from :mod:`swarmsafe.grid`.
The rate is linear in u, which the controller exploits heavily.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterError
from .grid import Grid, Operators, integrate


@dataclass(frozen=True)
class GaussianShape:
    """Positive-definite quadratic form exp(-0.5 d'Pd) shared by all robots.

    P = [[pxx, pxy], [pxy, pyy]] acts as a precision matrix: larger entries
    make a narrower bump. Stored as the three defining entries so the
    dataclass stays hashable and comparable.
    """

    pxx: float
    pxy: float
    pyy: float

    def __post_init__(self):
        det = self.pxx * self.pyy - self.pxy * self.pxy
        if not (self.pxx > 0.0 and self.pyy > 0.0 and det > 0.0):
            raise ParameterError(
                f"precision matrix [[{self.pxx}, {self.pxy}], [{self.pxy}, {self.pyy}]] "
                "is not positive definite"
            )

    @classmethod
    def isotropic(cls, precision) -> "GaussianShape":
        return cls(float(precision), 0.0, float(precision))

    @classmethod
    def from_matrix(cls, matrix) -> "GaussianShape":
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise ParameterError("precision matrix must be 2x2")
        if abs(m[0, 1] - m[1, 0]) > 1e-12 * (1.0 + abs(m[0, 1])):
            raise ParameterError("precision matrix must be symmetric")
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 1]))

    def matrix(self) -> np.ndarray:
        return np.array([[self.pxx, self.pxy], [self.pxy, self.pyy]])

    def covariance(self) -> np.ndarray:
        """Inverse of the precision matrix (used for localisation noise)."""
        return np.linalg.inv(self.matrix())


def robot_density(grid: Grid, center, shape: GaussianShape) -> np.ndarray:
    """Gaussian bump of peak value 1 centered at `center`, wrapped on the torus."""
    c = np.asarray(center, dtype=float)
    if c.shape != (2,) or not np.all(np.isfinite(c)):
        raise ParameterError("robot center must be a finite 2-vector")
    return kernels.gaussian_field(
        grid.nx, grid.ny, grid.cell, grid.origin[0], grid.origin[1],
        c[0], c[1], shape.pxx, shape.pxy, shape.pyy,
    )


def sum_densities(grid: Grid, fields) -> np.ndarray:
    """Sum of per-robot fields; an empty list gives the zero field."""
    out = np.zeros(grid.n_cells)
    for f in fields:
        x = np.asarray(f, dtype=np.float64)
        if x.shape != (grid.n_cells,):
            raise DimensionError(
                f"field of length {x.size} does not match {grid.n_cells}-cell grid"
            )
        out += x
    return out


def density_rate(field, velocity, diffusion, ops: Operators) -> np.ndarray:
    """Time derivative of one robot's density under velocity + diffusion.

    Linear in `velocity`; entries sum to ~0 (mass is conserved) because every
    stencil's columns sum to zero.
    """
    if diffusion < 0.0:
        raise ParameterError("diffusion coefficient must be nonnegative")
    u = np.asarray(velocity, dtype=float)
    if u.shape != (2,) or not np.all(np.isfinite(u)):
        raise ParameterError("velocity must be a finite 2-vector")
    x = np.asarray(field, dtype=np.float64)
    rate = ops.laplacian.apply(x)
    rate *= diffusion
    rate -= u[0] * ops.grad_x.apply(x)
    rate -= u[1] * ops.grad_y.apply(x)
    return rate


def target_density(grid: Grid, center, shape: GaussianShape, n_robots: int,
                   robot_shape: GaussianShape, mass_scale: float = 1.0) -> np.ndarray:
    """Gaussian target profile scaled to hold the whole swarm's mass.

    The amplitude is chosen so the discrete integral equals
    ``mass_scale * n_robots`` times the integral of a single robot bump
    (evaluated at the same center); ``mass_scale=0`` gives the zero field.
    """
    if n_robots < 1:
        raise ParameterError("n_robots must be at least 1")
    if mass_scale < 0.0:
        raise ParameterError("mass_scale must be nonnegative")
    unit = robot_density(grid, center, robot_shape)
    profile = robot_density(grid, center, shape)
    amplitude = mass_scale * n_robots * integrate(grid, unit) / integrate(grid, profile)
    return amplitude * profile
