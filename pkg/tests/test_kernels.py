"""Backend selection and compiled/NumPy kernel parity."""

import numpy as np
import pytest

from swarmsafe import kernels
from swarmsafe.errors import ParameterError
from swarmsafe.grid import Grid, build_operators

HAVE_COMPILED = "compiled" in kernels.available()
needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled kernel core not built")


@pytest.fixture
def restore_backend():
    before = kernels.active()
    yield
    kernels.use(before)


def test_available_contains_numpy():
    assert "numpy" in kernels.available()


def test_use_roundtrip(restore_backend):
    previous = kernels.use("numpy")
    assert kernels.active() == "numpy"
    kernels.use(previous)
    assert kernels.active() == previous


def test_use_rejects_unknown():
    with pytest.raises(ParameterError):
        kernels.use("fortran")


@needs_compiled
def test_gaussian_field_backend_parity(restore_backend):
    args = (23, 17, 0.11, -1.2, -0.9, 0.37, -0.21, 7.0, 1.2, 11.0)
    kernels.use("numpy")
    a = kernels.gaussian_field(*args)
    kernels.use("compiled")
    b = kernels.gaussian_field(*args)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


@needs_compiled
def test_matvec_backend_parity(restore_backend):
    rng = np.random.default_rng(11)
    grid = Grid(nx=13, ny=9, cell=0.13)
    ops = build_operators(grid)
    x = rng.standard_normal(grid.n_cells)
    rows = np.array([3, 40, 77], dtype=np.int64)
    for op in (ops.grad_x, ops.grad_y, ops.laplacian):
        kernels.use("numpy")
        full_np = op.apply(x)
        part_np = op.apply_rows(x, rows)
        kernels.use("compiled")
        full_c = op.apply(x)
        part_c = op.apply_rows(x, rows)
        np.testing.assert_allclose(full_c, full_np, rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(part_c, part_np, rtol=1e-14, atol=1e-15)


@needs_compiled
def test_compiled_accepts_readonly_arrays():
    # operators freeze their arrays; the compiled kernels must accept them
    grid = Grid(nx=5, ny=5, cell=0.2)
    op = build_operators(grid).laplacian
    assert not op.data.flags.writeable
    x = np.ones(grid.n_cells)
    x.setflags(write=False)
    before = kernels.use("compiled")
    try:
        out = op.apply(x)
    finally:
        kernels.use(before)
    # accumulation order differs from numpy's pairwise dot, so a constant
    # vector cancels to rounding noise rather than exactly zero
    np.testing.assert_allclose(out, np.zeros(grid.n_cells), atol=1e-12)
