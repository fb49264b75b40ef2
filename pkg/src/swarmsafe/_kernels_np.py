"""NumPy implementations of the numerical kernels.

These mirror the compiled versions in ``_core.pyx`` operation for operation
(same wrap rule, same parenthesisation of the quadratic form) so the two
backends agree to rounding error.
"""

import numpy as np


def gaussian_field(nx, ny, cell, ox, oy, cx, cy, pxx, pxy, pyy):
    """Unnormalised Gaussian exp(-0.5 d'Pd) sampled at every cell center.

    The displacement d from the center (cx, cy) to each cell center uses the
    minimum-image rule on the (nx*cell, ny*cell) torus.
    """
    lx = nx * cell
    ly = ny * cell
    dx = ox + cell * np.arange(nx) - cx
    dx -= lx * np.rint(dx / lx)
    dy = oy + cell * np.arange(ny) - cy
    dy -= ly * np.rint(dy / ly)
    s = 2.0 * pxy
    quad = pxx * (dx * dx)[None, :] + s * (dy[:, None] * dx[None, :]) + pyy * (dy * dy)[:, None]
    return np.exp(-0.5 * quad).ravel()


def uniform_matvec(indices, data, x):
    """Apply a sparse operator stored as fixed-width (rows, k) index/value arrays."""
    return (data * x[indices]).sum(axis=1)


def uniform_rows_matvec(indices, data, x, rows):
    """Rows `rows` of the same product, without touching the other rows."""
    sel = indices[rows]
    return (data[rows] * x[sel]).sum(axis=1)
