"""Point location and horizontal-line intersection on triangle meshes."""

import numpy as np

from ..errors import PointOutsideMesh


class Locator:
    """Bucket grid over triangle bounding boxes.

    ``find`` returns, for every query point, the lowest-index triangle that
    contains it (within a relative barycentric tolerance), or -1.
    """

    def __init__(self, vertices, triangles, tol=1e-10):
        self.vertices = vertices
        self.triangles = triangles
        self.tol = tol
        p = vertices[triangles]
        self.lo = p.min(axis=1)
        self.hi = p.max(axis=1)
        x0, y0 = vertices.min(axis=0)
        x1, y1 = vertices.max(axis=0)
        span = np.array([max(x1 - x0, 1e-300), max(y1 - y0, 1e-300)])
        m = triangles.shape[0]
        # roughly two triangles per bucket, shaped after the median element
        ext = np.median(self.hi - self.lo, axis=0)
        ext = np.maximum(ext, span / 4096.0)
        nb = np.maximum(1, np.minimum(np.ceil(span / ext).astype(int), 4096))
        while nb[0] * nb[1] > 4 * m and nb.max() > 1:
            nb = np.maximum(1, nb // 2)
        self.origin = np.array([x0, y0])
        self.nb = nb
        self.h = span / nb
        ilo = self._bucket_index(self.lo)
        ihi = self._bucket_index(self.hi)
        counts = (ihi[:, 0] - ilo[:, 0] + 1) * (ihi[:, 1] - ilo[:, 1] + 1)
        tri_ids = np.repeat(np.arange(m), counts)
        # enumerate covered buckets per triangle
        start = np.repeat(np.cumsum(counts) - counts, counts)
        local = np.arange(tri_ids.size) - start
        wx = (ihi[:, 0] - ilo[:, 0] + 1)[tri_ids]
        bx = ilo[tri_ids, 0] + local % wx
        by = ilo[tri_ids, 1] + local // wx
        bucket = bx * nb[1] + by
        order = np.lexsort((tri_ids, bucket))
        self.bucket_tris = tri_ids[order]
        sorted_b = bucket[order]
        self.bucket_start = np.searchsorted(sorted_b, np.arange(nb[0] * nb[1] + 1))

    def _bucket_index(self, pts):
        idx = np.floor((pts - self.origin) / self.h).astype(int)
        return np.clip(idx, 0, self.nb - 1)

    def barycentric(self, tri, pts):
        p = self.vertices[self.triangles[tri]]
        v0 = p[..., 1, :] - p[..., 0, :]
        v1 = p[..., 2, :] - p[..., 0, :]
        r = pts - p[..., 0, :]
        det = v0[..., 0] * v1[..., 1] - v0[..., 1] * v1[..., 0]
        l1 = (r[..., 0] * v1[..., 1] - r[..., 1] * v1[..., 0]) / det
        l2 = (v0[..., 0] * r[..., 1] - v0[..., 1] * r[..., 0]) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)

    def find(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.full(pts.shape[0], -1, dtype=np.int64)
        b = self._bucket_index(pts)
        bid = b[:, 0] * self.nb[1] + b[:, 1]
        order = np.argsort(bid, kind="stable")
        sb = bid[order]
        bounds = np.flatnonzero(np.diff(sb)) + 1
        groups = np.split(order, bounds)
        for grp in groups:
            if grp.size == 0:
                continue
            k = bid[grp[0]]
            cand = self.bucket_tris[self.bucket_start[k]:self.bucket_start[k + 1]]
            if cand.size == 0:
                continue
            q = pts[grp]
            lam = self.barycentric(cand[None, :], q[:, None, :])
            inside = np.all(lam >= -self.tol, axis=-1)
            hit = inside.any(axis=1)
            first = np.argmax(inside, axis=1)
            out[grp[hit]] = cand[first[hit]]
        return out

    def locate(self, pts):
        """Triangle ids and barycentric coordinates; raises when any point is outside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        tri = self.find(pts)
        if np.any(tri < 0):
            bad = pts[np.argmax(tri < 0)]
            raise PointOutsideMesh(f"point ({bad[0]:.6g}, {bad[1]:.6g}) is outside the mesh",
                                   point=[float(bad[0]), float(bad[1])])
        lam = self.barycentric(tri, pts)
        return tri, lam


def horizontal_pieces(vertices, triangles, y, a, b, edge_owner_count=None, tol=1e-12):
    """Intersections of the segment ``[a, b] x {y}`` with the triangles.

    Returns ``(tri_ids, xa, xb)`` of non-degenerate pieces.  When the line runs
    along a mesh edge, the triangle above the edge is used unless the edge is on
    the boundary.
    """
    p = vertices[triangles]
    ys = p[:, :, 1]
    scale = max(1.0, float(np.abs(vertices).max()))
    etol = tol * scale
    cand = np.flatnonzero((ys.min(axis=1) <= y + etol) & (ys.max(axis=1) >= y - etol)
                          & (p[:, :, 0].min(axis=1) <= b) & (p[:, :, 0].max(axis=1) >= a))
    tri_out, xa_out, xb_out = [], [], []
    for t in cand:
        q = p[t]
        on = np.abs(q[:, 1] - y) <= etol
        xs = []
        if on.sum() == 2:
            k_off = int(np.flatnonzero(~on)[0])
            above = q[k_off, 1] > y
            if not above:
                # keep the lower triangle only if the edge is a boundary edge
                i0, i1 = [int(triangles[t, k]) for k in np.flatnonzero(on)]
                key = (min(i0, i1), max(i0, i1))
                if edge_owner_count is None or edge_owner_count.get(key, 2) != 1:
                    continue
            xs = list(q[on, 0])
        elif on.sum() == 3:
            continue
        else:
            for i in range(3):
                p0, p1 = q[i], q[(i + 1) % 3]
                d0, d1 = p0[1] - y, p1[1] - y
                if abs(d0) <= etol:
                    xs.append(p0[0])
                if (d0 < -etol and d1 > etol) or (d0 > etol and d1 < -etol):
                    s = d0 / (d0 - d1)
                    xs.append(p0[0] + s * (p1[0] - p0[0]))
        if len(xs) < 2:
            continue
        lo, hi = max(min(xs), a), min(max(xs), b)
        if hi - lo > etol:
            tri_out.append(t)
            xa_out.append(lo)
            xb_out.append(hi)
    return np.asarray(tri_out, dtype=np.int64), np.asarray(xa_out), np.asarray(xb_out)
