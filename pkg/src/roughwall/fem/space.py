"""Taylor-Hood P2/P1 degree-of-freedom layout.

Scalar P2 nodes are the mesh vertices followed by the edge midpoints.  The
full unknown vector is ``[u1 (n2), u2 (n2), p (nv)]``.
"""

import numpy as np

from .quadrature import P2_EDGES


class TaylorHoodSpace:
    def __init__(self, mesh):
        self.mesh = mesh
        tri = mesh.triangles
        nv = mesh.n_vertices
        local = np.concatenate([tri[:, list(e)] for e in P2_EDGES])
        local.sort(axis=1)
        edges, inv = np.unique(local, axis=0, return_inverse=True)
        self.edges = edges
        self.tri_edges = inv.ravel().reshape(3, -1).T
        self.nv = nv
        self.n2 = nv + edges.shape[0]
        self.cell_dofs = np.hstack([tri, nv + self.tri_edges])
        v = mesh.vertices
        self.nodes = np.vstack([v, 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])])
        self._edge_keys = edges[:, 0] * nv + edges[:, 1]

    @property
    def n_dofs(self):
        return 2 * self.n2 + self.nv

    def edge_index(self, pairs):
        """Global edge ids of vertex pairs (any orientation)."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        a = pairs.min(axis=1)
        b = pairs.max(axis=1)
        keys = a * self.nv + b
        idx = np.searchsorted(self._edge_keys, keys)
        return idx

    def tag_nodes(self, tag):
        """Scalar P2 node ids lying on boundary edges with ``tag``."""
        e = self.mesh.edges_with_tag(tag)
        if e.size == 0:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([e.ravel(), self.nv + self.edge_index(e)]))

    def periodic_map(self):
        """Pairs ``(master, slave)`` of scalar P2 nodes and of P1 vertices."""
        mesh = self.mesh
        if mesh.periodic_pairs is None:
            empty = np.zeros((0, 2), dtype=np.int64)
            return empty, empty
        pv = mesh.periodic_pairs
        to_master = dict(zip(pv[:, 1].tolist(), pv[:, 0].tolist()))
        right = mesh.edges_with_tag("PeriodicRight")
        m_edges = np.array([[to_master[int(a)], to_master[int(b)]] for a, b in right], dtype=np.int64).reshape(-1, 2)
        mid = np.stack([self.nv + self.edge_index(m_edges), self.nv + self.edge_index(right)], 1)
        return np.vstack([pv, mid]), pv
