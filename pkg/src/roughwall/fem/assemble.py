"""Vectorized assembly of the Taylor-Hood Navier-Stokes system.

All element contributions live on one fixed CSR pattern; values are summed
with ``np.bincount`` so the result does not depend on anything but the mesh
ordering.
"""

import numpy as np
import scipy.sparse as sp

from .quadrature import (GAUSS1D_POINTS, GAUSS1D_WEIGHTS, TRI5_POINTS, TRI5_WEIGHTS,
                         barycentric_gradients, p2_dlam, p2_edge_values, p2_values)
from .problem import SlipRobin
from ..errors import NonPositiveSlip


class ElementData:
    def __init__(self, space):
        mesh = space.mesh
        p = mesh.vertices[mesh.triangles]
        gl, area = barycentric_gradients(p)
        self.area = area
        self.phi = p2_values(TRI5_POINTS)  # (Q, 6)
        dl = p2_dlam(TRI5_POINTS)  # (Q, 6, 3)
        self.grad = np.einsum("qil,mld->mqid", dl, gl)  # (M, Q, 6, 2)
        self.W = area[:, None] * TRI5_WEIGHTS[None, :]  # (M, Q)
        self.xq = np.einsum("ql,mld->mqd", TRI5_POINTS, p)  # (M, Q, 2)
        self.psi = TRI5_POINTS  # P1 values (Q, 3)


class Assembler:
    def __init__(self, space, problem):
        self.space = space
        self.problem = problem
        self.ed = ElementData(space)
        n2 = space.n2
        N = space.n_dofs
        self.N = N
        cd = space.cell_dofs  # (M, 6)
        pd = 2 * n2 + space.mesh.triangles  # (M, 3)
        M = cd.shape[0]
        ri = np.broadcast_to(cd[:, :, None], (M, 6, 6)).ravel()
        ci = np.broadcast_to(cd[:, None, :], (M, 6, 6)).ravel()
        rp = np.broadcast_to(pd[:, :, None], (M, 3, 6)).ravel()
        cu = np.broadcast_to(cd[:, None, :], (M, 3, 6)).ravel()
        rows = []
        cols = []
        for c in range(2):
            for e in range(2):
                rows.append(ri + c * n2)
                cols.append(ci + e * n2)
        for d in range(2):
            rows.append(rp)
            cols.append(cu + d * n2)
            rows.append(cu + d * n2)
            cols.append(rp)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        keys = rows.astype(np.int64) * N + cols
        uniq, inv = np.unique(keys, return_inverse=True)
        self.keys = uniq
        self.inv = inv.ravel()
        self.nnz = uniq.size
        r = uniq // N
        self.indices = (uniq % N).astype(np.int64)
        self.indptr = np.searchsorted(r, np.arange(N + 1)).astype(np.int64)
        self._block = M * 36
        self._pblock = M * 18

    def _matrix(self, data):
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.N, self.N))

    def _positions(self, rows, cols):
        k = rows.astype(np.int64) * self.N + cols
        return np.searchsorted(self.keys, k)

    # -- linear part -------------------------------------------------------
    def linear(self):
        ed = self.ed
        nu = self.problem.viscosity
        A = nu * np.einsum("mq,mqid,mqjd->mij", ed.W, ed.grad, ed.grad).ravel()
        zero = np.zeros_like(A)
        B = [-np.einsum("mq,qa,mqi->mai", ed.W, ed.psi, ed.grad[..., d]).ravel() for d in range(2)]
        # the (velocity row, pressure col) block is enumerated with the same (a, i)
        # layout, so it takes identical values (symmetric saddle point)
        parts = [A, zero, zero, A]
        for d in range(2):
            parts.append(B[d])
            parts.append(B[d])
        vals = np.concatenate(parts)
        data = np.bincount(self.inv, weights=vals, minlength=self.nnz)
        self._add_robin(data)
        return self._matrix(data)

    def _add_robin(self, data):
        sp_ = self.space
        nu = self.problem.viscosity
        for bc in self.problem.bcs:
            if not isinstance(bc, SlipRobin):
                continue
            e = sp_.mesh.edges_with_tag(bc.tag)
            if e.size == 0:
                continue
            v = sp_.mesh.vertices
            pa, pb = v[e[:, 0]], v[e[:, 1]]
            length = np.linalg.norm(pb - pa, axis=1)
            xq = pa[:, None, 0] + GAUSS1D_POINTS[None, :] * (pb - pa)[:, None, 0]
            alpha = bc.alpha(xq)
            if np.any(~(alpha > 0)):
                raise NonPositiveSlip("slip coefficient must be positive on the slip wall",
                                      tag=bc.tag, min_alpha=float(np.nanmin(alpha)))
            phi = p2_edge_values(GAUSS1D_POINTS)  # (G, 3)
            w = nu * length[:, None] * GAUSS1D_WEIGHTS[None, :] / alpha  # (E, G)
            loc = np.einsum("eg,gi,gj->eij", w, phi, phi)
            dofs = np.stack([e[:, 0], e[:, 1], sp_.nv + sp_.edge_index(e)], 1)
            r = np.broadcast_to(dofs[:, :, None], loc.shape).ravel()
            c = np.broadcast_to(dofs[:, None, :], loc.shape).ravel()
            pos = self._positions(r, c)
            data += np.bincount(pos, weights=loc.ravel(), minlength=self.nnz)

    def load(self):
        ed = self.ed
        x, y = ed.xq[..., 0].ravel(), ed.xq[..., 1].ravel()
        f = np.asarray(self.problem.force(x, y), dtype=float).reshape(2, *ed.W.shape)
        F = np.zeros(self.N)
        n2 = self.space.n2
        cd = self.space.cell_dofs
        for c in range(2):
            loc = np.einsum("mq,qi,mq->mi", ed.W, ed.phi, f[c])
            F[c * n2:(c + 1) * n2] = np.bincount(cd.ravel(), weights=loc.ravel(), minlength=n2)
        return F

    def pressure_mass(self):
        """Vector of ``int psi_a`` over the domain (full numbering)."""
        m = np.zeros(self.N)
        tri = self.space.mesh.triangles
        m[2 * self.space.n2:] = np.bincount(tri.ravel(), weights=np.repeat(self.ed.area / 3.0, 3),
                                            minlength=self.space.nv)
        return m

    # -- convection --------------------------------------------------------
    def convection(self, x, jacobian=True):
        """Residual ``int (u.grad)u . v`` and its Jacobian at ``x``."""
        ed = self.ed
        n2 = self.space.n2
        cd = self.space.cell_dofs
        Ue = np.stack([x[cd], x[n2 + cd]], axis=-1)  # (M, 6, 2)
        uq = np.einsum("qi,mic->mqc", ed.phi, Ue)
        gu = np.einsum("mqid,mic->mqcd", ed.grad, Ue)  # du_c/dx_d
        adv = np.einsum("mqd,mqcd->mqc", uq, gu)
        R = np.zeros(self.N)
        for c in range(2):
            loc = np.einsum("mq,qi,mq->mi", ed.W, ed.phi, adv[..., c])
            R[c * n2:(c + 1) * n2] = np.bincount(cd.ravel(), weights=loc.ravel(), minlength=n2)
        if not jacobian:
            return R, None
        ugrad = np.einsum("mqd,mqjd->mqj", uq, ed.grad)  # u . grad phi_j
        J1 = np.einsum("mq,qi,mqj->mij", ed.W, ed.phi, ugrad)
        WPP = np.einsum("mq,qi,qj->mqij", ed.W, ed.phi, ed.phi)
        parts = []
        for c in range(2):
            for e in range(2):
                blk = np.einsum("mqij,mq->mij", WPP, gu[..., c, e])
                if c == e:
                    blk = blk + J1
                parts.append(blk.ravel())
        vals = np.concatenate(parts + [np.zeros(4 * self._pblock)])
        data = np.bincount(self.inv, weights=vals, minlength=self.nnz)
        return R, self._matrix(data)
