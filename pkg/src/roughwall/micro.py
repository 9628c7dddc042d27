"""Micro problems over roughness elements: boundary data, solve, slip extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateShear, SingularConstraintSystem
from .fem import Dirichlet, FlowProblem, Periodic, SolverOptions, solve_stationary
from .mesh import mesh_micro

MODES = ("PeriodicFreeStream", "QuadraticDirichlet")

_G, _W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class Fluid:
    viscosity: float = 1.0
    forcing: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class MicroDomainSpec:
    site: float
    width: float
    height: float
    resolution: int = 15
    bc_mode: str = "PeriodicFreeStream"
    rows: Optional[int] = None
    grading: float = 4.0
    sampling: str = "uniform"

    def __post_init__(self):
        if not self.width > 0 or not self.height > 0:
            raise ValueError("micro width and height must be positive")
        if self.bc_mode not in MODES:
            raise ValueError(f"unknown micro bc mode {self.bc_mode!r}")

    @property
    def periodic(self):
        return self.bc_mode == "PeriodicFreeStream"


def _poly(c, t):
    t = np.asarray(t, dtype=float)
    return c[0] + c[1] * t + c[2] * t * t


def _poly_int(c, a, b):
    return c[0] * (b - a) + c[1] * (b * b - a * a) / 2 + c[2] * (b ** 3 - a ** 3) / 3


@dataclass
class MicroBC:
    """Boundary data for one micro domain.

    ``PeriodicFreeStream``: ``top_value`` on the top, periodic sides.
    ``QuadraticDirichlet``: quadratics in the face coordinate (x2 on the sides,
    x1 on the top), stored as ``faces[k] = (u_coeffs, v_coeffs)`` for
    k = "left", "top", "right".
    """

    mode: str
    spec: MicroDomainSpec
    top_value: tuple = (0.0, 0.0)
    faces: dict = field(default_factory=dict)
    wall_left: float = 0.0
    wall_right: float = 0.0
    targets: dict = field(default_factory=dict)

    def face_value(self, face, t):
        u, v = self.faces[face]
        return _poly(u, t), _poly(v, t)

    def net_flux(self):
        """Outward flux through the three Dirichlet faces."""
        if self.mode == "PeriodicFreeStream":
            return 0.0
        s, L, g = self.spec.site, self.spec.width, self.spec.height
        left = _poly_int(self.faces["left"][0], self.wall_left, g)
        top = _poly_int(self.faces["top"][1], s, s + L)
        right = _poly_int(self.faces["right"][0], self.wall_right, g)
        return -left + top + right

    def constraint_residuals(self):
        """The 18 defining conditions as ``name -> residual``."""
        if self.mode != "QuadraticDirichlet":
            return {}
        s, L, g = self.spec.site, self.spec.width, self.spec.height
        T = self.targets
        u1, v1 = self.faces["left"]
        u2, v2 = self.faces["top"]
        u3, v3 = self.faces["right"]
        wl, wr = self.wall_left, self.wall_right
        return {
            "u1_noslip": _poly(u1, wl),
            "v1_noslip": _poly(v1, wl),
            "u3_noslip": _poly(u3, wr),
            "v3_noslip": _poly(v3, wr),
            "flux_left": _poly_int(u1, wl, g) - T["flux_left"],
            "flux_top": _poly_int(v2, s, s + L) - T["flux_top"],
            "flux_right": _poly_int(u3, wr, g) - T["flux_right"],
            "u1_corner": _poly(u1, g) - T["U_left_top"][0],
            "u2_left": _poly(u2, s) - T["U_left_top"][0],
            "v1_corner": _poly(v1, g) - T["U_left_top"][1],
            "v2_left": _poly(v2, s) - T["U_left_top"][1],
            "u2_right": _poly(u2, s + L) - T["U_right_top"][0],
            "u3_corner": _poly(u3, g) - T["U_right_top"][0],
            "v2_right": _poly(v2, s + L) - T["U_right_top"][1],
            "v3_corner": _poly(v3, g) - T["U_right_top"][1],
            "v1_mid": _poly(v1, g / 2) - T["U_left_mid"][1],
            "u2_mid": _poly(u2, s + L / 2) - T["U_top_mid"][0],
            "v3_mid": _poly(v3, g / 2) - T["U_right_mid"][1],
        }

    def dirichlet_conditions(self):
        if self.mode == "PeriodicFreeStream":
            return [Dirichlet("FreeStreamTop", tuple(float(v) for v in self.top_value))]

        def side(face):
            def value(x, y):
                u, v = self.face_value(face, y)
                return np.stack([u, v])
            return value

        def top(x, y):
            u, v = self.face_value("top", x)
            return np.stack([u, v])

        return [Dirichlet("MicroLeft", side("left")), Dirichlet("MicroRight", side("right")),
                Dirichlet("FreeStreamTop", top)]

    def to_dict(self):
        d = {"mode": self.mode, "site": self.spec.site, "width": self.spec.width, "height": self.spec.height}
        if self.mode == "PeriodicFreeStream":
            d["top_value"] = [float(v) for v in self.top_value]
        else:
            d["faces"] = {k: [list(map(float, u)), list(map(float, v))] for k, (u, v) in self.faces.items()}
            d["net_flux"] = float(self.net_flux())
        return d


def build_free_stream_bc(macro, spec):
    """Top value = mean of the macro U1 over ``[s, s+L] x {gamma}``."""
    ubar = macro.line_average(spec.height, spec.site, spec.width, "u1")
    return MicroBC("PeriodicFreeStream", spec, top_value=(float(ubar), 0.0))


def _side_flux(macro, x, lo, hi, comp, n_sub=16):
    """``int_lo^hi U_comp(x, t) dt`` by composite Gauss along a vertical line."""
    if hi <= lo:
        return 0.0
    edges = np.linspace(lo, hi, n_sub + 1)
    h = np.diff(edges)
    t = edges[:-1, None] + 0.5 * (_G[None, :] + 1.0) * h[:, None]
    pts = np.stack([np.full(t.size, x), t.ravel()], 1)
    val = macro.evaluate(pts, comp).reshape(t.shape)
    return float(np.sum(val * 0.5 * _W[None, :] * h[:, None]))


def _fit(rows, rhs):
    A = np.asarray(rows, dtype=float)
    b = np.asarray(rhs, dtype=float)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularConstraintSystem("quadratic constraint system is singular", condition=float(cond))
    c = np.linalg.solve(A, b)
    # one step of refinement keeps the residuals at round-off level
    c += np.linalg.solve(A, b - A @ c)
    return c


def _point_row(t):
    return [1.0, t, t * t]


def _int_row(a, b):
    return [b - a, (b * b - a * a) / 2, (b ** 3 - a ** 3) / 3]


def build_quadratic_bc(macro, spec, profile):
    """Quadratic Dirichlet data on the left, top and right faces (18 conditions)."""
    s, L, g = spec.site, spec.width, spec.height
    wl = float(profile.wall(s))
    wr = float(profile.wall(s + L))
    pts = np.array([[s, g], [s + L, g], [s + L / 2, g], [s, g / 2], [s + L, g / 2]])
    U = macro.velocity(pts)
    T = {
        "U_left_top": U[0], "U_right_top": U[1], "U_top_mid": U[2],
        "U_left_mid": U[3], "U_right_mid": U[4],
    }
    # macro fluxes over the parts of the faces inside the macro domain (x2 >= 0)
    q_left = _side_flux(macro, s, max(wl, 0.0), g, "u1")
    q_right = _side_flux(macro, s + L, max(wr, 0.0), g, "u1")
    q_top = macro.line_integral(g, s, L, "u2")
    # distribute the discrete divergence residual by face length: zero net flux
    lens = np.array([g - wl, L, g - wr])
    resid = -q_left + q_top + q_right
    q_left += resid * lens[0] / lens.sum()
    q_top -= resid * lens[1] / lens.sum()
    q_right -= resid * lens[2] / lens.sum()
    T.update(flux_left=q_left, flux_top=q_top, flux_right=q_right)

    u1 = _fit([_point_row(wl), _int_row(wl, g), _point_row(g)], [0.0, q_left, U[0, 0]])
    v1 = _fit([_point_row(wl), _point_row(g), _point_row(g / 2)], [0.0, U[0, 1], U[3, 1]])
    u2 = _fit([_point_row(s), _point_row(s + L), _point_row(s + L / 2)], [U[0, 0], U[1, 0], U[2, 0]])
    v2 = _fit([_point_row(s), _point_row(s + L), _int_row(s, s + L)], [U[0, 1], U[1, 1], q_top])
    u3 = _fit([_point_row(wr), _int_row(wr, g), _point_row(g)], [0.0, q_right, U[1, 0]])
    v3 = _fit([_point_row(wr), _point_row(g), _point_row(g / 2)], [0.0, U[1, 1], U[4, 1]])
    faces = {"left": (u1, v1), "top": (u2, v2), "right": (u3, v3)}
    return MicroBC("QuadraticDirichlet", spec, faces=faces, wall_left=wl, wall_right=wr, targets=T)


def build_micro_bc(macro, spec, profile):
    if spec.bc_mode == "PeriodicFreeStream":
        return build_free_stream_bc(macro, spec)
    return build_quadratic_bc(macro, spec, profile)


def micro_mesh(spec, profile):
    return mesh_micro(profile, spec.site, spec.width, spec.height, resolution=spec.resolution,
                      periodic=spec.periodic, rows=spec.rows, grading=spec.grading,
                      sampling=spec.sampling)


def solve_micro(spec, bc, profile, fluid=Fluid(), options=None, mesh=None):
    mesh = mesh if mesh is not None else micro_mesh(spec, profile)
    bcs = [Dirichlet("NoSlipWall")]
    if bc.mode == "PeriodicFreeStream":
        bcs.append(Periodic())
    bcs += bc.dirichlet_conditions()
    problem = FlowProblem(mesh, fluid.viscosity, tuple(fluid.forcing), bcs, pressure_gauge="ZeroMean")
    return solve_stationary(problem, options or SolverOptions())


def extract_slip(micro, spec, rel_tol=1e-12):
    """Ratio of the mean velocity to the mean shear on ``[s, s+L] x {0}``."""
    s, L = spec.site, spec.width
    num = micro.line_average(0.0, s, L, "u1")
    den = micro.line_average(0.0, s, L, "du1dx2")
    coef = np.asarray(micro.u1)
    scale = float(np.max(np.abs(coef))) / spec.height if coef.size else 0.0
    if scale == 0.0 or abs(den) <= rel_tol * scale:
        raise DegenerateShear("mean shear on the crest line vanishes", site=s, shear=float(den), scale=scale)
    return float(num / den)
