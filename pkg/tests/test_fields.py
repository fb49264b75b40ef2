"""Gaussian density synthesis and the advection-diffusion rate."""

import math

import numpy as np
import pytest

from swarmsafe.errors import DimensionError, ParameterError
from swarmsafe.fields import (GaussianShape, density_rate, robot_density,
                              sum_densities, target_density)
from swarmsafe.grid import Grid, build_operators, integrate

import oracles


@pytest.fixture(scope="module")
def grid():
    return Grid(nx=24, ny=20, cell=0.1, origin=(-1.15, -0.95))


@pytest.fixture(scope="module")
def ops(grid):
    return build_operators(grid)


# ----------------------------------------------------------------------
# shapes
# ----------------------------------------------------------------------
def test_shape_isotropic():
    s = GaussianShape.isotropic(4.0)
    np.testing.assert_array_equal(s.matrix(), [[4.0, 0.0], [0.0, 4.0]])


def test_shape_requires_positive_definite():
    with pytest.raises(ParameterError):
        GaussianShape(1.0, 2.0, 1.0)      # determinant negative
    with pytest.raises(ParameterError):
        GaussianShape(-1.0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        GaussianShape(0.0, 0.0, 1.0)


def test_shape_from_matrix():
    s = GaussianShape.from_matrix([[2.0, 0.5], [0.5, 3.0]])
    assert (s.pxx, s.pxy, s.pyy) == (2.0, 0.5, 3.0)
    with pytest.raises(ParameterError):
        GaussianShape.from_matrix([[2.0, 0.5], [0.4, 3.0]])   # asymmetric
    with pytest.raises(ParameterError):
        GaussianShape.from_matrix(np.eye(3))


def test_shape_covariance_inverts_precision():
    s = GaussianShape(2.0, 0.5, 3.0)
    np.testing.assert_allclose(s.covariance() @ s.matrix(), np.eye(2), atol=1e-14)


# ----------------------------------------------------------------------
# densities
# ----------------------------------------------------------------------
def test_robot_density_peak_at_center(grid):
    center = grid.cell_center(grid.flatten(7, 9))
    f = robot_density(grid, center, GaussianShape.isotropic(9.0))
    k = int(np.argmax(f))
    assert k == grid.flatten(7, 9)
    assert f[k] == 1.0                      # exp(0) exactly
    assert np.all(f > 0.0) and np.all(f <= 1.0)


def test_robot_density_matches_formula(grid):
    shape = GaussianShape(6.0, 1.5, 10.0)
    center = np.array([0.32, -0.41])
    f = robot_density(grid, center, shape)
    p = shape.matrix()
    for k in (0, 57, 301, grid.n_cells - 1):
        d = grid.min_image(grid.cell_center(k), center)
        assert f[k] == pytest.approx(math.exp(-0.5 * d @ p @ d), rel=1e-12)


def test_robot_density_wraps(grid):
    # a robot at the domain edge produces the same field as its translate
    # by one period
    shape = GaussianShape.isotropic(12.0)
    p = np.asarray(grid.lower_corner)
    f1 = robot_density(grid, p, shape)
    f2 = robot_density(grid, p + np.array(grid.extent), shape)
    np.testing.assert_allclose(f1, f2, rtol=1e-12, atol=0)


def test_robot_density_rejects_bad_center(grid):
    with pytest.raises(ParameterError):
        robot_density(grid, (0.0, 0.0, 0.0), GaussianShape.isotropic(1.0))
    with pytest.raises(ParameterError):
        robot_density(grid, (np.nan, 0.0), GaussianShape.isotropic(1.0))


def test_sum_densities(grid):
    f1 = robot_density(grid, (0.0, 0.0), GaussianShape.isotropic(5.0))
    f2 = robot_density(grid, (0.3, 0.1), GaussianShape.isotropic(5.0))
    np.testing.assert_array_equal(sum_densities(grid, [f1, f2]), f1 + f2)
    np.testing.assert_array_equal(sum_densities(grid, []), np.zeros(grid.n_cells))
    with pytest.raises(DimensionError):
        sum_densities(grid, [np.zeros(3)])


# ----------------------------------------------------------------------
# rate
# ----------------------------------------------------------------------
def test_density_rate_matches_roll_reference(grid, ops):
    f = robot_density(grid, (0.2, -0.1), GaussianShape.isotropic(8.0))
    u = np.array([0.4, -0.7])
    rate = density_rate(f, u, 0.03, ops)
    expect = oracles.roll_density_rate(f.reshape(grid.ny, grid.nx), u, 0.03,
                                       grid.cell).ravel()
    np.testing.assert_allclose(rate, expect, rtol=1e-12, atol=1e-13)


def test_density_rate_linear_in_velocity(grid, ops):
    f = robot_density(grid, (0.0, 0.0), GaussianShape.isotropic(8.0))
    base = density_rate(f, (0.0, 0.0), 0.02, ops)
    ra = density_rate(f, (0.5, 0.0), 0.02, ops) - base
    rb = density_rate(f, (0.0, -0.3), 0.02, ops) - base
    combined = density_rate(f, (2.0 * 0.5, -0.3), 0.02, ops) - base
    np.testing.assert_allclose(combined, 2.0 * ra + rb, rtol=1e-11, atol=1e-13)


def test_density_rate_conserves_mass(grid, ops):
    f = robot_density(grid, (0.14, 0.33), GaussianShape.isotropic(10.0))
    rate = density_rate(f, (0.9, -0.6), 0.05, ops)
    scale = float(np.abs(rate).sum())
    assert abs(math.fsum(rate.tolist())) <= 1e-12 * scale


def test_density_rate_validation(grid, ops):
    f = np.zeros(grid.n_cells)
    with pytest.raises(ParameterError):
        density_rate(f, (0.0, 0.0), -0.1, ops)
    with pytest.raises(ParameterError):
        density_rate(f, (0.0, np.inf), 0.1, ops)
    with pytest.raises(ParameterError):
        density_rate(f, (0.0, 0.0, 0.0), 0.1, ops)


# ----------------------------------------------------------------------
# target profile
# ----------------------------------------------------------------------
def test_target_density_holds_swarm_mass(grid):
    robot = GaussianShape.isotropic(16.0)
    wide = GaussianShape.isotropic(4.0)
    target = target_density(grid, (0.1, 0.2), wide, 7, robot)
    unit = robot_density(grid, (0.1, 0.2), robot)
    assert integrate(grid, target) == pytest.approx(7 * integrate(grid, unit),
                                                    rel=1e-12)


def test_target_density_mass_scale(grid):
    robot = GaussianShape.isotropic(16.0)
    wide = GaussianShape.isotropic(4.0)
    base = target_density(grid, (0.0, 0.0), wide, 5, robot)
    scaled = target_density(grid, (0.0, 0.0), wide, 5, robot, mass_scale=1.5)
    np.testing.assert_allclose(scaled, 1.5 * base, rtol=1e-12)
    zero = target_density(grid, (0.0, 0.0), wide, 5, robot, mass_scale=0.0)
    np.testing.assert_array_equal(zero, np.zeros(grid.n_cells))


def test_target_density_validation(grid):
    shape = GaussianShape.isotropic(4.0)
    with pytest.raises(ParameterError):
        target_density(grid, (0, 0), shape, 0, shape)
    with pytest.raises(ParameterError):
        target_density(grid, (0, 0), shape, 3, shape, mass_scale=-1.0)
