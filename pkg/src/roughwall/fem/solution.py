"""Finite-element solutions: pointwise evaluation and horizontal averages."""

from __future__ import annotations

import numpy as np

from ..errors import KernelNotNormalized, SegmentOutsideMesh
from .locate import Locator, horizontal_pieces
from .quadrature import GAUSS1D_POINTS, GAUSS1D_WEIGHTS, barycentric_gradients, p2_dlam, p2_values

QUANTITIES = ("u1", "u2", "p", "du1dx1", "du1dx2", "du2dx1", "du2dx2")

_G8, _W8 = np.polynomial.legendre.leggauss(8)
_G8 = 0.5 * (_G8 + 1.0)
_W8 = 0.5 * _W8


class FlowSolution:
    """Velocity on P2 nodes and pressure on vertices for one mesh."""

    def __init__(self, space, x, problem=None, history=None, options=None):
        self.space = space
        self.mesh = space.mesh
        self.x = np.asarray(x, dtype=float)
        self.x.setflags(write=False)
        self.problem = problem
        self.history = list(history or [])
        self.options = options
        self._locator = None
        self._grads = None
        self._bnd_edges = None

    # -- raw coefficients --------------------------------------------------
    @property
    def u1(self):
        return self.x[: self.space.n2]

    @property
    def u2(self):
        return self.x[self.space.n2: 2 * self.space.n2]

    @property
    def p(self):
        return self.x[2 * self.space.n2:]

    @property
    def viscosity(self):
        return None if self.problem is None else self.problem.viscosity

    @property
    def residual(self):
        return self.history[-1] if self.history else 0.0

    @property
    def newton_iterations(self):
        return max(0, len(self.history) - 1)

    def scaled(self, c):
        """Copy with velocity and pressure multiplied by ``c``."""
        return FlowSolution(self.space, c * self.x, self.problem, self.history, self.options)

    # -- location ----------------------------------------------------------
    @property
    def locator(self):
        if self._locator is None:
            self._locator = Locator(self.mesh.vertices, self.mesh.triangles)
        return self._locator

    def _grad_lambda(self):
        if self._grads is None:
            self._grads = barycentric_gradients(self.mesh.vertices[self.mesh.triangles])[0]
        return self._grads

    def wrap(self, x):
        """Map abscissae into the periodic window (identity for non-periodic meshes)."""
        x = np.asarray(x, dtype=float)
        if self.mesh.period is None:
            return x
        x0, x1 = self.mesh.x_range
        out = x0 + np.mod(x - x0, self.mesh.period)
        # keep the right end instead of folding it onto the left
        return np.where(np.isclose(x, x1, rtol=0.0, atol=1e-13 * max(1.0, abs(x1))), x, out)

    def _at(self, tri, lam, quantity):
        sp_ = self.space
        if quantity == "p":
            return np.einsum("ni,ni->n", self.p[self.mesh.triangles[tri]], lam)
        comp = {"u1": 0, "u2": 1, "du1dx1": 0, "du1dx2": 0, "du2dx1": 1, "du2dx2": 1}[quantity]
        coef = self.x[comp * sp_.n2 + sp_.cell_dofs[tri]]
        if quantity in ("u1", "u2"):
            return np.einsum("ni,ni->n", coef, p2_values(lam))
        d = 0 if quantity.endswith("dx1") else 1
        g = np.einsum("nil,nl->ni", p2_dlam(lam), self._grad_lambda()[tri][:, :, d])
        return np.einsum("ni,ni->n", coef, g)

    def evaluate(self, points, quantity="u1"):
        pts = np.array(np.atleast_2d(points), dtype=float)
        pts[:, 0] = self.wrap(pts[:, 0])
        tri, lam = self.locator.locate(pts)
        return self._at(tri, lam, quantity)

    def try_evaluate(self, points, quantity="u1"):
        """Like ``evaluate`` but NaN for points outside the mesh."""
        pts = np.array(np.atleast_2d(points), dtype=float)
        pts[:, 0] = self.wrap(pts[:, 0])
        tri = self.locator.find(pts)
        out = np.full(pts.shape[0], np.nan)
        ok = tri >= 0
        if ok.any():
            lam = self.locator.barycentric(tri[ok], pts[ok])
            out[ok] = self._at(tri[ok], lam, quantity)
        return out

    def velocity(self, points):
        return np.stack([self.evaluate(points, "u1"), self.evaluate(points, "u2")], axis=-1)

    def velocity_gradient(self, points):
        """``G[n, c, d] = du_c/dx_d``."""
        names = (("du1dx1", "du1dx2"), ("du2dx1", "du2dx2"))
        return np.stack([np.stack([self.evaluate(points, q) for q in row], -1) for row in names], -2)

    # -- horizontal integrals ----------------------------------------------
    def _boundary_edge_counts(self):
        if self._bnd_edges is None:
            counts = np.bincount(self.space.tri_edges.ravel(), minlength=self.space.edges.shape[0])
            self._bnd_edges = {(int(a), int(b)): 1 for a, b in self.space.edges[counts == 1]}
        return self._bnd_edges

    def _segments(self, x, length):
        """Split ``[x, x + length]`` into pieces inside the periodic window."""
        if self.mesh.period is None:
            return [(x, x + length)]
        x0, x1 = self.mesh.x_range
        per = self.mesh.period
        start = x0 + np.mod(x - x0, per)
        remaining = length
        out = []
        while remaining > 1e-14 * max(1.0, length):
            end = min(start + remaining, x1)
            out.append((start, end))
            remaining -= end - start
            start = x0
        return out

    def line_integral(self, y, x, length, quantity="u1", weight=None, npts=None):
        """``int_x^{x+length} weight(s) q(s, y) ds`` split at element boundaries."""
        if not length > 0:
            raise SegmentOutsideMesh("segment length must be positive", length=length)
        gp, gw = (GAUSS1D_POINTS, GAUSS1D_WEIGHTS) if weight is None else (_G8, _W8)
        total = 0.0
        covered = 0.0
        shift = 0.0
        for a, b in self._segments(x, length):
            tris, xa, xb = horizontal_pieces(self.mesh.vertices, self.mesh.triangles, y, a, b,
                                             self._boundary_edge_counts())
            if tris.size:
                h = xb - xa
                s = xa[:, None] + gp[None, :] * h[:, None]
                tri = np.repeat(tris, gp.size)
                pts = np.stack([s.ravel(), np.full(s.size, y)], 1)
                lam = self.locator.barycentric(tri, pts)
                val = self._at(tri, lam, quantity).reshape(s.shape)
                if weight is not None:
                    # weights are defined on the unwrapped segment
                    val = val * weight(s - a + x + shift)
                total += float(np.sum(val * gw[None, :] * h[:, None]))
                covered += float(h.sum())
            shift += b - a
        if abs(covered - length) > 1e-9 * max(length, 1e-300):
            raise SegmentOutsideMesh("segment is not inside the mesh", y=float(y), x=float(x),
                                     length=float(length), covered=covered)
        return total

    def line_average(self, y, x, length, quantity="u1"):
        return self.line_integral(y, x, length, quantity) / length

    def divergence_residual(self):
        """max_a |int psi_a div u| after identifying periodic pressure nodes."""
        from .assemble import ElementData

        ed = ElementData(self.space)
        cd = self.space.cell_dofs
        n2 = self.space.n2
        div = (np.einsum("mqi,mi->mq", ed.grad[..., 0], self.u1[cd])
               + np.einsum("mqi,mi->mq", ed.grad[..., 1], self.u2[cd]))
        loc = np.einsum("mq,qa,mq->ma", ed.W, ed.psi, div)
        r = np.bincount(self.mesh.triangles.ravel(), weights=loc.ravel(), minlength=self.space.nv)
        if self.mesh.periodic_pairs is not None:
            pv = self.mesh.periodic_pairs
            r[pv[:, 0]] += r[pv[:, 1]]
            r[pv[:, 1]] = 0.0
        return float(np.abs(r).max())


# ---------------------------------------------------------------------------
# functional interface


def eval_velocity(solution, point):
    return solution.velocity(np.asarray(point, dtype=float).reshape(1, 2))[0]


def eval_velocity_gradient(solution, point):
    return solution.velocity_gradient(np.asarray(point, dtype=float).reshape(1, 2))[0]


def _field_integral(field, x, y, length, quantity, weight=None, n_sub=64):
    if isinstance(field, FlowSolution):
        return field.line_integral(y, x, length, quantity, weight=weight)
    # plain callable f(x, y): composite Gauss
    edges = np.linspace(x, x + length, n_sub + 1)
    h = np.diff(edges)
    s = edges[:-1, None] + _G8[None, :] * h[:, None]
    val = np.asarray(field(s, np.full_like(s, y)), dtype=float)
    if weight is not None:
        val = val * weight(s)
    return float(np.sum(val * _W8[None, :] * h[:, None]))


def line_average(field, x, y, length, quantity="u1"):
    """Mean of ``field`` over ``[x, x + length] x {y}``."""
    return _field_integral(field, x, y, length, quantity) / length


def box_kernel(t):
    return np.ones_like(np.asarray(t, dtype=float))


def bump_kernel(order=2, cancel_second_moment=False):
    """Polynomial bump on [0, 1] with unit mass, symmetric about 1/2.

    Symmetry removes the first moment; ``cancel_second_moment`` also removes
    the second moment about the centre.
    """
    q = int(order)
    nodes, weights = np.polynomial.legendre.leggauss(40)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    base = (t * (1 - t)) ** q
    if not cancel_second_moment:
        c = 1.0 / np.sum(w * base)
        return lambda s: c * (np.clip(np.asarray(s, float) * (1 - np.asarray(s, float)), 0, None)) ** q
    m0 = np.sum(w * base)
    m2 = np.sum(w * base * (t - 0.5) ** 2)
    m4 = np.sum(w * base * (t - 0.5) ** 4)
    # (a + b (t - 1/2)^2) base: mass 1, second moment 0
    a, b = np.linalg.solve([[m0, m2], [m2, m4]], [1.0, 0.0])

    def k(s):
        s = np.asarray(s, dtype=float)
        return (a + b * (s - 0.5) ** 2) * np.clip(s * (1 - s), 0, None) ** q

    return k


def check_kernel(kernel, tol=1e-8):
    t, w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, 1.0, 65)
    h = np.diff(edges)
    s = edges[:-1, None] + 0.5 * (t[None, :] + 1.0) * h[:, None]
    mass = float(np.sum(np.asarray(kernel(s)) * 0.5 * w[None, :] * h[:, None]))
    if abs(mass - 1.0) > tol:
        raise KernelNotNormalized(f"kernel mass is {mass:.12g}, expected 1", mass=mass)
    return mass


def kernel_average(field, x, y, length, kernel, quantity="u1"):
    """``int K(s) field(s, y) ds`` with ``K(s) = kernel((s - x)/L)/L``."""
    check_kernel(kernel)

    def weight(s):
        return np.asarray(kernel((s - x) / length), dtype=float) / length

    return _field_integral(field, x, y, length, quantity, weight=weight)
