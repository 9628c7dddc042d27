"""Mapped structured triangulations of channel, step, micro and cell domains.

All rough walls are graphs ``x2 = w(x1)``, so every domain is a union of
logically rectangular blocks whose bottom row follows the wall.  Blocks are
glued by merging coincident vertices; quadrilaterals are split into
triangles with a union-jack pattern so that no triangle has two edges on a
block corner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .errors import MeshError

TAGS = (
    "NoSlipWall",
    "SlipWall",
    "Top",
    "Inflow",
    "Outflow",
    "PeriodicLeft",
    "PeriodicRight",
    "FreeStreamTop",
    "MicroLeft",
    "MicroRight",
)


@dataclass
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    periodic_pairs: Optional[np.ndarray] = None
    period: Optional[float] = None
    x_range: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_cells(self):
        return int(self.triangles.shape[0])

    @property
    def n_vertices(self):
        return int(self.vertices.shape[0])

    def edges_with_tag(self, tag):
        return self.boundary_edges[self.boundary_tags == tag]

    def tags(self):
        return sorted(set(self.boundary_tags.tolist()))

    def signed_areas(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def bottom_polyline(self, tags=("NoSlipWall", "SlipWall")):
        """Boundary edges with the given tags whose outward side faces down."""
        mask = np.isin(self.boundary_tags, tags)
        return self.boundary_edges[mask]

    # -- serialization -----------------------------------------------------
    def to_dict(self):
        d = {
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "triangles": self.triangles.astype(int).tolist(),
            "boundary": [[int(a), int(b), str(t)] for (a, b), t in zip(self.boundary_edges, self.boundary_tags)],
        }
        if self.periodic_pairs is not None:
            d["periodic_pairs"] = self.periodic_pairs.astype(int).tolist()
            d["period"] = self.period
            d["x_range"] = list(self.x_range)
        return d

    @classmethod
    def from_dict(cls, d):
        bnd = d.get("boundary", [])
        pairs = d.get("periodic_pairs")
        return cls(
            vertices=np.asarray(d["vertices"], dtype=float).reshape(-1, 2),
            triangles=np.asarray(d["triangles"], dtype=np.int64).reshape(-1, 3),
            boundary_edges=np.asarray([[a, b] for a, b, _ in bnd], dtype=np.int64).reshape(-1, 2),
            boundary_tags=np.asarray([t for _, _, t in bnd], dtype=object),
            periodic_pairs=None if pairs is None else np.asarray(pairs, dtype=np.int64).reshape(-1, 2),
            period=d.get("period"),
            x_range=None if d.get("x_range") is None else tuple(d["x_range"]),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=None, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# domain descriptors


@dataclass(frozen=True)
class ChannelDomain:
    """Channel ``x0 <= x1 <= x1_end``, wall below, ``top(x1)`` above."""

    x0: float = 0.0
    x1: float = 1.0
    top: Union[float, Callable] = 1.0
    periodic: bool = True
    slip_window: Optional[tuple] = None

    def top_height(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.top):
            return np.asarray(self.top(x), dtype=float)
        return np.full_like(x, float(self.top))

    @property
    def length(self):
        return self.x1 - self.x0


@dataclass(frozen=True)
class BFSDomain:
    """Backward-facing step with outline (0,2),(0,1),(s,1),(s,0),(L,0),(L,2)."""

    inlet_length: float = 5.0
    step_height: float = 1.0
    length: float = 23.0
    height: float = 2.0
    slip_window: Optional[tuple] = (6.0, 16.0)


def curved_top(x):
    """Upper wall of the non-square channel."""
    return 0.5 - 0.125 * np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# 1D node distributions


def geometric_levels(n, ratio=1.0):
    """``n`` intervals on [0, 1] with consecutive spacing ratio ``ratio``."""
    if n < 1:
        raise MeshError("need at least one interval")
    if abs(ratio - 1.0) < 1e-14:
        return np.linspace(0.0, 1.0, n + 1)
    h = np.cumsum(ratio ** np.arange(n))
    return np.concatenate(([0.0], h / h[-1]))


def split_levels(n, split, frac=0.5):
    """Levels on [0, 1] with about ``frac * n`` uniform rows below ``split``.

    The remaining rows grow geometrically from the uniform spacing so the
    transition is smooth.
    """
    if not 0.0 < split < 1.0:
        return geometric_levels(n)
    n_lo = max(1, int(round(frac * n)))
    n_hi = n - n_lo
    lo = np.linspace(0.0, split, n_lo + 1)
    if n_hi == 0:
        return lo / split
    h0 = split / n_lo
    rest = 1.0 - split
    if rest <= h0 * n_hi or n_hi == 1:
        hi = np.linspace(split, 1.0, n_hi + 1)
    else:
        r_max = max(10.0, rest / h0 + 2.0)
        r = brentq(lambda r: h0 * (r ** n_hi - 1.0) / (r - 1.0) - rest, 1.0 + 1e-12, r_max)
        steps = h0 * r ** np.arange(1, n_hi + 1)
        steps *= rest / steps.sum()
        hi = split + np.cumsum(steps)
        hi[-1] = 1.0
        hi = np.concatenate(([split], hi))
    return np.concatenate((lo, hi[1:]))


def graded_nodes(a, b, h_start, h_end):
    """Nodes on [a, b] whose spacing varies geometrically from ``h_start`` to ``h_end``."""
    length = b - a
    if length <= 0:
        raise MeshError("empty interval")
    h_mean = 0.5 * (h_start + h_end)
    n = max(1, int(math.ceil(length / h_mean)))
    if n == 1:
        return np.array([a, b])
    r = (h_end / h_start) ** (1.0 / (n - 1))
    steps = h_start * r ** np.arange(n)
    steps *= length / steps.sum()
    x = a + np.concatenate(([0.0], np.cumsum(steps)))
    x[-1] = b
    return x


# ---------------------------------------------------------------------------
# block construction


@dataclass
class _Block:
    X: np.ndarray
    Y: np.ndarray
    tags: dict


def _tri_area(P, t):
    p = P[t]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]


def _block_triangles(nx, ny, offset, P=None):
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i = i.ravel()
    j = j.ravel()

    def vid(ii, jj):
        return offset + ii * (ny + 1) + jj

    a = vid(i, j)
    b = vid(i + 1, j)
    c = vid(i + 1, j + 1)
    d = vid(i, j + 1)
    # union jack: diagonal direction flips per quadrant so each corner is cut
    flip = (i < nx / 2.0) ^ (j < ny / 2.0)
    if P is not None:
        # on strongly skewed quads only one diagonal gives two valid triangles
        la, lb, lc, ld = a - offset, b - offset, c - offset, d - offset
        ok_flip = np.minimum(_tri_area(P, np.stack([la, lb, ld], 1)), _tri_area(P, np.stack([lb, lc, ld], 1)))
        ok_keep = np.minimum(_tri_area(P, np.stack([la, lb, lc], 1)), _tri_area(P, np.stack([la, lc, ld], 1)))
        switch = np.where(flip, (ok_flip <= 0) & (ok_keep > 0), (ok_keep <= 0) & (ok_flip > 0))
        flip = flip ^ switch
    t1 = np.where(flip[:, None], np.stack([a, b, d], 1), np.stack([a, b, c], 1))
    t2 = np.where(flip[:, None], np.stack([b, c, d], 1), np.stack([a, c, d], 1))
    return np.concatenate([t1, t2])


def _block_sides(nx, ny, offset):
    def vid(ii, jj):
        return offset + ii * (ny + 1) + jj

    ii = np.arange(nx)
    jj = np.arange(ny)
    return {
        "bottom": np.stack([vid(ii, 0), vid(ii + 1, 0)], 1),
        "top": np.stack([vid(ii + 1, ny), vid(ii, ny)], 1),
        "left": np.stack([vid(0, jj + 1), vid(0, jj)], 1),
        "right": np.stack([vid(nx, jj), vid(nx, jj + 1)], 1),
    }


def _assemble_blocks(blocks, tol=1e-10):
    coords = []
    tris = []
    side_edges = []
    side_tags = []
    offset = 0
    for blk in blocks:
        nx, ny = blk.X.shape[0] - 1, blk.X.shape[1] - 1
        if nx < 1 or ny < 1:
            raise MeshError("block needs at least one cell per direction")
        P = np.stack([blk.X.ravel(), blk.Y.ravel()], 1)
        coords.append(P)
        tris.append(_block_triangles(nx, ny, offset, P))
        for side, edges in _block_sides(nx, ny, offset).items():
            tag = blk.tags.get(side)
            if tag is None:
                continue
            side_edges.append(edges)
            side_tags.append(tag)
        offset += (nx + 1) * (ny + 1)
    pts = np.concatenate(coords)
    # merge coincident vertices (glue lines between blocks)
    scale = max(1.0, float(np.abs(pts).max()))
    keys = np.round(pts / (tol * scale)).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first)
    remap_unique = np.empty_like(order)
    remap_unique[order] = np.arange(order.size)
    vmap = remap_unique[inverse]
    vertices = pts[np.sort(first)]
    triangles = vmap[np.concatenate(tris)]

    # boundary edges: block-side edges owned by a single triangle
    count = _edge_counts(triangles)
    b_edges = []
    b_tags = []
    for edges, tag in zip(side_edges, side_tags):
        e = vmap[edges]
        for (p, q) in e:
            key = (min(p, q), max(p, q))
            if count.get(key, 0) != 1:
                continue
            if callable(tag):
                mid = 0.5 * (vertices[p] + vertices[q])
                t = tag(mid[0], mid[1])
            else:
                t = tag
            b_edges.append((p, q))
            b_tags.append(t)
    return vertices, triangles, np.asarray(b_edges, dtype=np.int64).reshape(-1, 2), np.asarray(b_tags, dtype=object)


def _edge_counts(triangles):
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e.sort(axis=1)
    uniq, cnt = np.unique(e, axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(uniq, cnt)}


def _finish(vertices, triangles, b_edges, b_tags, periodic=None, meta=None):
    mesh = TriangleMesh(vertices, triangles.astype(np.int64), b_edges, b_tags, meta=meta or {})
    area = mesh.signed_areas()
    if np.any(area <= 0.0):
        bad = int(np.argmin(area))
        raise MeshError("degenerate or inverted triangle", triangle=bad, area=float(area[bad]))
    if periodic is not None:
        x0, x1 = periodic
        _pair_periodic(mesh, x0, x1)
    return mesh


def _pair_periodic(mesh, x0, x1, tol=1e-12):
    v = mesh.vertices
    left = np.unique(mesh.edges_with_tag("PeriodicLeft").ravel())
    right = np.unique(mesh.edges_with_tag("PeriodicRight").ravel())
    left = left[np.argsort(v[left, 1])]
    right = right[np.argsort(v[right, 1])]
    if left.size != right.size:
        raise MeshError("periodic sides have different vertex counts")
    dy = np.abs(v[left, 1] - v[right, 1])
    if left.size and dy.max() > tol * max(1.0, np.abs(v[:, 1]).max()):
        raise MeshError("periodic sides are not vertically matched", max_mismatch=float(dy.max()))
    mesh.periodic_pairs = np.stack([left, right], 1)
    mesh.period = float(x1 - x0)
    mesh.x_range = (float(x0), float(x1))


def _column_block(xs, bottom, top, levels, tags, xs_top=None):
    """Mapped block between ``bottom(x)`` and ``top(x)`` with vertical levels.

    With ``xs_top`` the grid lines run from ``(xs[i], bottom)`` to
    ``(xs_top[i], top)`` instead of being vertical.
    """
    xs = np.asarray(xs, dtype=float)
    xt = xs if xs_top is None else np.asarray(xs_top, dtype=float)
    lev = np.asarray(levels, dtype=float)
    wb = np.asarray(bottom(xs), dtype=float)
    wt = np.asarray(top(xt), dtype=float)
    if np.any(wt - wb <= 0.0):
        raise MeshError("wall intersects the domain top")
    X = xs[:, None] + (xt - xs)[:, None] * lev[None, :]
    Y = wb[:, None] + (wt - wb)[:, None] * lev[None, :]
    return _Block(X, Y, tags)


def arclength_nodes(wall, a, b, n, kinks=(), oversample=64):
    """``n + 1`` nodes on [a, b] evenly spaced in arc length along the wall graph.

    Steep parts of the wall get more nodes; each kink in ``kinks`` is moved
    onto its nearest interior node.
    """
    gap = 1e-6 * (b - a) / n
    inner = [k for k in kinks if a + gap < k < b - gap]
    xf = np.union1d(np.linspace(a, b, n * oversample + 1), inner)
    yf = np.asarray(wall(xf), dtype=float)
    arc = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(xf), np.diff(yf)))))
    x = np.interp(np.linspace(0.0, arc[-1], n + 1), arc, xf)
    x[0], x[-1] = a, b
    free = np.ones(n + 1, dtype=bool)
    free[[0, -1]] = False
    for k in inner:
        if not free.any():
            break
        d = np.where(free, np.abs(x - k), np.inf)
        i = int(np.argmin(d))
        x[i] = k
        free[i] = False
    if np.any(np.diff(x) <= 0):
        raise MeshError("wall too coarse for arc-length sampling; raise the resolution")
    return x


def wall_nodes(profile, wall, a, b, n, sampling):
    if sampling == "uniform":
        return np.linspace(a, b, n + 1)
    if sampling == "arclength":
        return arclength_nodes(wall, a, b, n, profile.kinks(a, b) if profile is not None else ())
    raise MeshError(f"unknown wall sampling {sampling!r}")


def _bottom_tagger(window, inside="SlipWall", outside="NoSlipWall"):
    if window is None:
        return inside
    a, b = window

    def tag(x, y):
        return inside if a - 1e-12 <= x <= b + 1e-12 else outside

    return tag


def _side_tags(domain):
    if domain.periodic:
        return "PeriodicLeft", "PeriodicRight"
    return "Inflow", "Outflow"


def _cells_from_target(target, aspect):
    if target is None:
        return None
    n = target / 2.0
    ny = max(2, int(round(math.sqrt(n / aspect))))
    nx = max(2, int(round(n / ny)))
    return nx, ny


# ---------------------------------------------------------------------------
# public generators


def mesh_macro(domain, target_cells=None, nx=None, ny=None, levels=None, bfs_spacing=None):
    """Coarse mesh of the smooth macro domain (flat bottom on ``x2 = 0``)."""
    if isinstance(domain, BFSDomain):
        return _mesh_bfs(domain, wall=None, spacing=bfs_spacing or {})
    top_mean = float(np.mean(domain.top_height(np.linspace(domain.x0, domain.x1, 101))))
    if top_mean <= 0 or np.any(domain.top_height(np.linspace(domain.x0, domain.x1, 101)) <= 0):
        raise MeshError("domain height must be positive")
    if nx is None or ny is None:
        guess = _cells_from_target(target_cells if target_cells is not None else 3200, top_mean / domain.length)
        nx = nx or guess[0]
        ny = ny or guess[1]
    if nx < 2 or ny < 2:
        raise MeshError("need at least 2 cells per direction")
    xs = np.linspace(domain.x0, domain.x1, nx + 1)
    lev = np.linspace(0.0, 1.0, ny + 1) if levels is None else levels
    left, right = _side_tags(domain)
    tags = {
        "bottom": _bottom_tagger(domain.slip_window, "SlipWall", "NoSlipWall"),
        "top": "NoSlipWall",
        "left": left,
        "right": right,
    }
    blk = _column_block(xs, lambda x: np.zeros_like(x), domain.top_height, lev, tags)
    v, t, e, g = _assemble_blocks([blk])
    return _finish(v, t, e, g, periodic=(domain.x0, domain.x1) if domain.periodic else None,
                   meta={"kind": "macro"})


def mesh_rough_dns(profile, domain, wall_resolution=16, rows=40, wall=None, split_height=None,
                   bfs_spacing=None, sampling="uniform"):
    """Boundary-fitted mesh of the rough domain.

    The bottom boundary is the polyline through ``wall`` sampled at
    ``wall_resolution`` points per roughness wavelength.
    """
    if wall_resolution < 8:
        raise MeshError("wall_resolution must be at least 8")
    wall = wall if wall is not None else profile.wall
    if isinstance(domain, BFSDomain):
        sp = dict(bfs_spacing or {})
        sp.setdefault("rough_dx", profile.wavelength / wall_resolution)
        return _mesh_bfs(domain, wall=wall, spacing=sp)
    n = int(round(domain.length / profile.wavelength * wall_resolution))
    xt = np.linspace(domain.x0, domain.x1, n + 1)
    xs = wall_nodes(profile, wall, domain.x0, domain.x1, n, sampling)
    top_mean = float(np.mean(domain.top_height(xs)))
    split = split_height if split_height is not None else 4.0 * profile.epsilon
    lev = split_levels(rows, split / top_mean, 0.5)
    left, right = _side_tags(domain)
    tags = {"bottom": "NoSlipWall", "top": "NoSlipWall", "left": left, "right": right}
    blk = _column_block(xs, wall, domain.top_height, lev, tags, xs_top=xt)
    v, t, e, g = _assemble_blocks([blk])
    return _finish(v, t, e, g, periodic=(domain.x0, domain.x1) if domain.periodic else None,
                   meta={"kind": "dns"})


def _mesh_bfs(domain, wall=None, spacing=None):
    sp = {
        "rough_dx": 0.1,
        "far_dx": 0.3,
        "inlet_dx": 0.25,
        "corner_dx": None,
        "lower_rows": 20,
        "upper_rows": 14,
        "wall_ratio": 1.12,
    }
    sp.update(spacing or {})
    s = domain.inlet_length
    h = domain.step_height
    L = domain.length
    H = domain.height
    a, b = domain.slip_window if domain.slip_window is not None else (s, L)
    fine = sp["rough_dx"]
    corner = sp["corner_dx"] or min(fine, 0.05)
    # x nodes after the step: fine over the rough window, graded outside
    pre = graded_nodes(s, a, corner, fine) if a > s else np.array([s])
    mid = np.linspace(a, b, int(round((b - a) / fine)) + 1)
    post = graded_nodes(b, L, fine, sp["far_dx"]) if L > b else np.array([L])
    xs = np.unique(np.concatenate([pre, mid, post]))
    xin = graded_nodes(0.0, s, sp["inlet_dx"], corner)
    r = sp["wall_ratio"]
    lower = geometric_levels(sp["lower_rows"], r)
    # upper channel levels cluster towards both walls
    nu = sp["upper_rows"]
    half = geometric_levels(nu // 2, r)
    upper = np.concatenate([0.5 * half, 1.0 - 0.5 * half[::-1][1:]]) if nu >= 2 else np.array([0.0, 1.0])
    wall_fn = wall if wall is not None else (lambda x: np.zeros_like(np.asarray(x, float)))
    window = domain.slip_window if wall is None else None
    bottom_tag = _bottom_tagger(window, "SlipWall", "NoSlipWall") if window is not None else "NoSlipWall"
    lower_blk = _column_block(xs, wall_fn, lambda x: np.full_like(x, h), lower,
                              {"bottom": bottom_tag, "left": "NoSlipWall", "right": "Outflow"})
    upper_blk = _column_block(xs, lambda x: np.full_like(x, h), lambda x: np.full_like(x, H), upper,
                              {"top": "NoSlipWall", "right": "Outflow"})
    inlet_blk = _column_block(xin, lambda x: np.full_like(x, h), lambda x: np.full_like(x, H), upper,
                              {"bottom": "NoSlipWall", "top": "NoSlipWall", "left": "Inflow"})
    v, t, e, g = _assemble_blocks([inlet_blk, upper_blk, lower_blk])
    return _finish(v, t, e, g, meta={"kind": "bfs" if wall is None else "bfs_dns"})


def mesh_micro(profile, site, width, height, resolution=15, periodic=False, rows=None,
               grading=4.0, wall=None, tol=1e-12, sampling="uniform"):
    """Mesh of ``{site <= x1 <= site + width, wall(x1) <= x2 <= height}``.

    Rows grow geometrically so the top row is ``grading`` times the bottom one,
    independent of the row count.
    """
    wall = wall if wall is not None else profile.wall
    if not width > 0 or not height > 0:
        raise MeshError("micro width and height must be positive")
    if resolution < 2:
        raise MeshError("need at least 2 cells across the micro domain")
    xt = np.linspace(site, site + width, resolution + 1)
    xs = wall_nodes(profile, wall, site, site + width, resolution, sampling)
    w = np.asarray(wall(xs), dtype=float)
    if height <= -w.min() + 0.0 and height <= 0:
        raise MeshError("micro height below the wall")
    if np.any(w >= height):
        raise MeshError("wall intersects the micro domain top")
    if periodic and abs(w[0] - w[-1]) > tol * max(1.0, abs(height)):
        raise MeshError("wall heights differ at the micro domain sides; periodic pairing impossible",
                        left=float(w[0]), right=float(w[-1]))
    m = rows if rows is not None else 2 * resolution
    lev = geometric_levels(m, grading ** (1.0 / max(m - 1, 1)))
    left, right = ("PeriodicLeft", "PeriodicRight") if periodic else ("MicroLeft", "MicroRight")
    tags = {"bottom": "NoSlipWall", "top": "FreeStreamTop", "left": left, "right": right}
    blk = _column_block(xs, wall, lambda x: np.full_like(x, float(height)), lev, tags, xs_top=xt)
    v, t, e, g = _assemble_blocks([blk])
    return _finish(v, t, e, g, periodic=(site, site + width) if periodic else None,
                   meta={"kind": "micro", "site": float(site), "width": float(width), "height": float(height)})


def cell_levels(H, top, resolution, growth=1.15):
    """Vertical reference levels for the cell strip.

    Uniform spacing ``1/resolution`` up to the blend height ``H + 1``, then
    geometric growth.  Levels below a given height do not depend on ``top``.
    """
    zb = H + 1.0
    nb = int(math.ceil(zb * resolution))
    z = list(np.linspace(0.0, zb, nb + 1))
    dz = zb / nb
    while z[-1] < top - 1e-12:
        dz *= growth
        z.append(z[-1] + dz)
    z = np.asarray(z)
    # snap: drop the last level if it overshoots by more than half a step
    if z[-1] > top:
        if z.size > 2 and (z[-1] - top) > 0.5 * (z[-1] - z[-2]) and z[-2] > zb:
            z = z[:-1]
        z[-1] = top
    return z, zb


def mesh_cell_domain(unit_cell, truncation_height, resolution=32, growth=1.15):
    """Truncated periodic strip ``0 <= y1 <= 1, phi(y1) <= y2 <= top``."""
    H = float(unit_cell.H)
    if resolution < 8:
        raise MeshError("cell resolution must be at least 8")
    if not truncation_height > H:
        raise MeshError("truncation height must exceed the crest height", H=H, top=truncation_height)
    ys = np.linspace(0.0, 1.0, resolution + 1)
    phi = np.asarray(unit_cell(ys), dtype=float)
    phi[-1] = phi[0] if unit_cell.kinks == () else phi[-1]
    z, zb = cell_levels(H, truncation_height, resolution, growth)
    if zb >= truncation_height:
        z = np.linspace(0.0, truncation_height, max(4, int(math.ceil(truncation_height * resolution))) + 1)
        zb = truncation_height
    blend = np.clip(1.0 - z / zb, 0.0, None)
    X = np.repeat(ys[:, None], z.size, axis=1)
    Y = z[None, :] + phi[:, None] * blend[None, :]
    tags = {"bottom": "NoSlipWall", "top": "Top", "left": "PeriodicLeft", "right": "PeriodicRight"}
    v, t, e, g = _assemble_blocks([_Block(X, Y, tags)])
    return _finish(v, t, e, g, periodic=(0.0, 1.0), meta={"kind": "cell", "H": H, "top": float(truncation_height)})


# ---------------------------------------------------------------------------
# audit


def audit_mesh(mesh, tol=1e-12):
    """Return a list of invariant violations (empty when the mesh is valid)."""
    problems = []
    area = mesh.signed_areas()
    if np.any(area <= 0):
        problems.append(f"{int(np.sum(area <= 0))} triangles with non-positive area")
    counts = _edge_counts(mesh.triangles)
    if any(c > 2 for c in counts.values()):
        problems.append("edge shared by more than two triangles")
    bnd = {k for k, c in counts.items() if c == 1}
    tagged = {}
    for (a, b), t in zip(mesh.boundary_edges, mesh.boundary_tags):
        key = (min(a, b), max(a, b))
        if key in tagged:
            problems.append(f"boundary edge {key} tagged twice")
        tagged[key] = t
        if t not in TAGS:
            problems.append(f"unknown tag {t}")
    if set(tagged) != bnd:
        missing = len(bnd - set(tagged))
        extra = len(set(tagged) - bnd)
        problems.append(f"tag coverage mismatch: {missing} untagged boundary edges, {extra} tagged interior edges")
    v = mesh.vertices
    for (a, b), t in zip(mesh.boundary_edges, mesh.boundary_tags):
        if t == "SlipWall" and (abs(v[a, 1]) > tol or abs(v[b, 1]) > tol):
            problems.append("SlipWall edge off the crest plane")
            break
    if mesh.periodic_pairs is not None:
        m, s = mesh.periodic_pairs[:, 0], mesh.periodic_pairs[:, 1]
        if np.any(np.abs(v[m, 1] - v[s, 1]) > tol * max(1.0, np.abs(v[:, 1]).max())):
            problems.append("periodic pair heights differ")
        if np.any(np.abs(v[s, 0] - v[m, 0] - mesh.period) > tol * max(1.0, abs(mesh.period)) * 10):
            problems.append("periodic pair offsets differ from the period")
        if len(set(m.tolist())) != m.size or len(set(s.tolist())) != s.size or set(m.tolist()) & set(s.tolist()):
            problems.append("periodic pairing is not a bijection between disjoint sides")
    return problems
