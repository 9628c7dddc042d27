"""Reference-triangle quadrature and P2/P1 shape functions."""

import numpy as np

# Degree-5 seven-point rule (Radon), barycentric points, weights summing to 1.
_s15 = np.sqrt(15.0)
_r1 = (6.0 - _s15) / 21.0
_r2 = (6.0 + _s15) / 21.0
_w1 = (155.0 - _s15) / 1200.0
_w2 = (155.0 + _s15) / 1200.0
TRI5_POINTS = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [1 - 2 * _r1, _r1, _r1],
        [_r1, 1 - 2 * _r1, _r1],
        [_r1, _r1, 1 - 2 * _r1],
        [1 - 2 * _r2, _r2, _r2],
        [_r2, 1 - 2 * _r2, _r2],
        [_r2, _r2, 1 - 2 * _r2],
    ]
)
TRI5_WEIGHTS = np.array([9.0 / 40.0, _w1, _w1, _w1, _w2, _w2, _w2])

# local P2 node order: three vertices, then midpoints of (0,1), (1,2), (2,0)
P2_EDGES = ((0, 1), (1, 2), (2, 0))

GAUSS1D_POINTS, GAUSS1D_WEIGHTS = np.polynomial.legendre.leggauss(4)
# mapped to [0, 1]
GAUSS1D_POINTS = 0.5 * (GAUSS1D_POINTS + 1.0)
GAUSS1D_WEIGHTS = 0.5 * GAUSS1D_WEIGHTS


def p2_values(lam):
    """P2 basis values at barycentric points ``lam`` (..., 3) -> (..., 6)."""
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    return np.stack(
        [l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0],
        axis=-1,
    )


def p2_dlam(lam):
    """Derivatives of the P2 basis w.r.t. barycentrics: (..., 6, 3)."""
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    z = np.zeros_like(l0)
    rows = [
        [4 * l0 - 1, z, z],
        [z, 4 * l1 - 1, z],
        [z, z, 4 * l2 - 1],
        [4 * l1, 4 * l0, z],
        [z, 4 * l2, 4 * l1],
        [4 * l2, z, 4 * l0],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def p2_edge_values(s):
    """1D P2 values on an edge parameterized by s in [0, 1]: (start, end, mid)."""
    s = np.asarray(s, dtype=float)
    return np.stack([(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)], axis=-1)


def barycentric_gradients(p):
    """Gradients of the barycentric coordinates of triangles ``p`` (M, 3, 2).

    Returns ``(grad (M, 3, 2), area (M,))``.
    """
    x0, y0 = p[:, 0, 0], p[:, 0, 1]
    x1, y1 = p[:, 1, 0], p[:, 1, 1]
    x2, y2 = p[:, 2, 0], p[:, 2, 1]
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    g = np.empty((p.shape[0], 3, 2))
    g[:, 0, 0] = (y1 - y2) / det
    g[:, 0, 1] = (x2 - x1) / det
    g[:, 1, 0] = (y2 - y0) / det
    g[:, 1, 1] = (x0 - x2) / det
    g[:, 2, 0] = (y0 - y1) / det
    g[:, 2, 1] = (x1 - x0) / det
    return g, 0.5 * det
