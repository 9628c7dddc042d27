"""Experiment cases: DNS, no-slip and HMM runs, comparison metrics, data export."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .coupling import HMMConfig, MacroSetup, run_hmm, solve_macro
from .errors import ConfigError, GridMismatch, NoReattachment, RoughWallError
from .fem import Dirichlet, FlowProblem, Periodic, SolverOptions, ZeroStress, solve_stationary
from .geometry import make_profile, periodic_taper
from .mesh import BFSDomain, ChannelDomain, curved_top, mesh_macro, mesh_rough_dns
from .micro import Fluid, MicroDomainSpec

log = logging.getLogger(__name__)

CASES = ("periodic_channel", "sawtooth_wavy", "modulated_channel", "quasi_periodic_channel",
         "backward_facing_step")

N_SAMPLES = 400


@dataclass(frozen=True)
class ExperimentCase:
    case_id: str
    epsilon: float
    nu: float
    forcing: tuple
    sites: tuple
    bc_mode: str
    heights: tuple
    profile_kind: str
    micro_width: float
    micro_height: float
    micro_resolution: int
    micro_rows: Optional[int] = None
    macro_nx: int = 40
    macro_ny: int = 40
    dns_wall_resolution: int = 16
    dns_rows: int = 40
    top: str = "flat"  # "flat" or "curved"
    tol: Optional[float] = None  # default epsilon**2
    kind: str = "PiecewiseLinear"
    window: Optional[tuple] = None
    taper_width: Optional[float] = None  # closes non-periodic walls in the periodic DNS
    dns_split: Optional[float] = None  # height of the refined DNS layer, default 2 epsilon
    wall_sampling: str = "uniform"  # "arclength" puts more wall nodes on steep parts
    reynolds: float = 150.0  # BFS only: mean inflow speed times step height over nu
    bfs_macro_dx: float = 0.2
    bfs_dns_rows: tuple = (20, 14)
    threads: int = 1
    x_range: Optional[tuple] = None
    probe_height: Optional[float] = None

    @property
    def is_bfs(self):
        return self.case_id == "backward_facing_step"

    @property
    def tolerance(self):
        return self.tol if self.tol is not None else self.epsilon ** 2

    def to_dict(self):
        return asdict(self)


def _heights(eps, extra=()):
    return tuple([eps / 4, eps / 2, eps, 2 * eps, 4 * eps, *extra])


def default_case(case_id, epsilon=None, nu=None):
    """Case parameters; ``epsilon`` and ``nu`` override the defaults."""
    if case_id not in CASES:
        raise ConfigError(f"unknown case {case_id!r}", choices=list(CASES))
    if case_id == "backward_facing_step":
        eps = 0.1 if epsilon is None else float(epsilon)
        lam = 2.5 * eps
        return ExperimentCase(
            case_id, eps, 0.1 if nu is None else float(nu), (0.0, 0.0), (7.5, 13.5),
            "QuadraticDirichlet", _heights(eps, (0.55,)), "bfs_patch", lam, 4 * eps, 20, 40,
            window=(6.0, 16.0), x_range=(5.0, 23.0), probe_height=eps)
    eps = 0.025 if epsilon is None else float(epsilon)
    nu = 1.0 if nu is None else float(nu)
    common = dict(epsilon=eps, nu=nu, forcing=(1.0, 0.0), heights=_heights(eps),
                  micro_width=eps, micro_height=4 * eps, x_range=(0.0, 1.0))
    if case_id == "periodic_channel":
        return ExperimentCase(case_id, sites=(0.0,), bc_mode="PeriodicFreeStream",
                              profile_kind="sinusoidal", micro_resolution=15, **common)
    if case_id == "sawtooth_wavy":
        return ExperimentCase(case_id, sites=(0.0, 0.25, 0.5, 0.75, 1.0), bc_mode="PeriodicFreeStream",
                              profile_kind="sawtooth", micro_resolution=16, micro_rows=28,
                              macro_nx=30, macro_ny=31, dns_wall_resolution=24, dns_rows=40, top="curved",
                              wall_sampling="arclength", **common)
    if case_id == "modulated_channel":
        return ExperimentCase(case_id, sites=(0.0, 0.15, 0.35, 0.525, 0.675, 0.875, 0.975),
                              bc_mode="PeriodicFreeStream", profile_kind="modulated_sinusoidal",
                              micro_resolution=15, **common)
    common["micro_width"] = 5 * eps
    return ExperimentCase(case_id, sites=(0.481561,), bc_mode="QuadraticDirichlet",
                          profile_kind="quasi_periodic", micro_resolution=70, micro_rows=36,
                          macro_ny=41, dns_rows=51, taper_width=2 * eps, **common)


def case_from_config(data):
    """Case from a config mapping with sections geometry, fluid, roughness, hmm, output.

    Missing entries fall back to the defaults of ``geometry.case``.
    """
    try:
        geo = dict(data.get("geometry", {}))
        flu = dict(data.get("fluid", {}))
        rough = dict(data.get("roughness", {}))
        hmm = dict(data.get("hmm", {}))
        out = dict(data.get("output", {}))
        case = default_case(geo.pop("case"), rough.pop("epsilon", None), flu.pop("nu", None))
        updates = {}
        for sec in (geo, flu, rough, hmm, out):
            updates.update(sec)
        names = {f.name for f in fields(ExperimentCase)}
        bad = set(updates) - names
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}", keys=sorted(bad))
        for k, v in list(updates.items()):
            if isinstance(v, list):
                updates[k] = tuple(v)
        return replace(case, **updates)
    except KeyError as exc:
        raise ConfigError(f"missing config entry {exc}") from None


def case_to_config(case):
    d = case.to_dict()
    sections = {
        "geometry": ["case_id", "top", "macro_nx", "macro_ny", "dns_wall_resolution", "dns_rows",
                     "bfs_macro_dx", "bfs_dns_rows", "taper_width", "wall_sampling",
                     "dns_split"],
        "fluid": ["nu", "forcing", "reynolds"],
        "roughness": ["epsilon", "profile_kind"],
        "hmm": ["sites", "bc_mode", "micro_width", "micro_height", "micro_resolution", "micro_rows",
                "tol", "kind", "window", "threads"],
        "output": ["heights", "x_range", "probe_height"],
    }
    cfg = {k: {n: d[n] for n in v} for k, v in sections.items()}
    cfg["geometry"]["case"] = cfg["geometry"].pop("case_id")
    return cfg


# ---------------------------------------------------------------------------
# building blocks


def case_profile(case):
    if case.is_bfs:
        return make_profile("bfs_patch", case.epsilon, window=case.window)
    return make_profile(case.profile_kind, case.epsilon)


def case_domain(case):
    if case.is_bfs:
        return BFSDomain(slip_window=case.window)
    top = curved_top if case.top == "curved" else 1.0
    return ChannelDomain(top=top, periodic=True)


def _bfs_inflow(case):
    mean = case.reynolds * case.nu / 1.0
    h = 1.0  # step height is the Reynolds length

    def value(x, y):
        y = np.asarray(y, dtype=float)
        t = (y - h) / h
        return np.stack([6.0 * mean * t * (1.0 - t), np.zeros_like(y)])

    return value


def far_field_bcs(case):
    """Conditions on every tag except the rough/slip wall."""
    if case.is_bfs:
        return (Dirichlet("Inflow", _bfs_inflow(case)), Dirichlet("NoSlipWall"), ZeroStress("Outflow"))
    return (Periodic(), Dirichlet("NoSlipWall"))


def dns_mesh(case, profile=None):
    profile = profile or case_profile(case)
    wall = None
    if case.taper_width:
        wall = periodic_taper(profile.wall, 0.0, 1.0, case.taper_width)
    if case.is_bfs:
        lo, up = case.bfs_dns_rows
        return mesh_rough_dns(profile, case_domain(case), case.dns_wall_resolution,
                              bfs_spacing={"lower_rows": lo, "upper_rows": up})
    return mesh_rough_dns(profile, case_domain(case), case.dns_wall_resolution, case.dns_rows, wall=wall,
                          split_height=case.dns_split or 2 * case.epsilon, sampling=case.wall_sampling)


def macro_mesh(case):
    if case.is_bfs:
        return mesh_macro(case_domain(case), bfs_spacing={"rough_dx": case.bfs_macro_dx})
    dom = replace(case_domain(case), slip_window=None)
    return mesh_macro(dom, nx=case.macro_nx, ny=case.macro_ny)


def solve_dns(case, options=None, mesh=None):
    mesh = mesh or dns_mesh(case)
    problem = FlowProblem(mesh, case.nu, tuple(case.forcing), list(far_field_bcs(case)))
    return solve_stationary(problem, options or SolverOptions())


def hmm_config(case, options=None):
    spec = MicroDomainSpec(case.sites[0], case.micro_width, case.micro_height, case.micro_resolution,
                           case.bc_mode, rows=case.micro_rows, sampling=case.wall_sampling)
    return HMMConfig(tuple(case.sites), case.tolerance, case.epsilon, spec, kind=case.kind,
                     window=case.window, period=None if case.is_bfs else 1.0,
                     threads=case.threads, options=options or SolverOptions())


def macro_setup(case, mesh=None):
    mesh = mesh or macro_mesh(case)
    bcs = far_field_bcs(case)
    interval = case.window if case.window is not None else case.x_range
    return MacroSetup(mesh, Fluid(case.nu, tuple(case.forcing)), bcs, tuple(interval))


# ---------------------------------------------------------------------------
# profile tables and metrics


@dataclass
class ProfileTable:
    x1: np.ndarray
    height: np.ndarray
    u1: np.ndarray
    du1dx2: np.ndarray

    @classmethod
    def empty(cls):
        z = np.zeros(0)
        return cls(z, z, z, z)

    def heights(self):
        return list(dict.fromkeys(self.height.tolist()))

    def group(self, h):
        m = self.height == h
        return self.x1[m], self.u1[m], self.du1dx2[m]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "height", "u1", "du1dx2"])
        for row in zip(self.x1, self.height, self.u1, self.du1dx2):
            w.writerow([format(float(v), ".15g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["x1", "height", "u1", "du1dx2"]:
            raise ConfigError("not a profile table")
        data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, 4)
        return cls(*(data[:, i].copy() for i in range(4)))


def sample_profiles(solution, heights, x_range, n=N_SAMPLES):
    """u1 and du1/dx2 on ``n`` uniform x1 samples per height (NaN outside the mesh)."""
    xs = np.linspace(x_range[0], x_range[1], n)
    X, Hh, U, S = [], [], [], []
    for h in heights:
        pts = np.stack([xs, np.full(n, float(h))], 1)
        X.append(xs)
        Hh.append(np.full(n, float(h)))
        U.append(solution.try_evaluate(pts, "u1"))
        S.append(solution.try_evaluate(pts, "du1dx2"))
    if not X:
        return ProfileTable.empty()
    return ProfileTable(np.concatenate(X), np.concatenate(Hh), np.concatenate(U), np.concatenate(S))


def field_error(reference, candidate, quantity="u1"):
    """Relative L2 error per height; points where the reference is undefined are skipped."""
    if reference.heights() != candidate.heights():
        raise GridMismatch("tables have different heights")
    out = {}
    for h in reference.heights():
        xr, ur, sr = reference.group(h)
        xc, uc, sc = candidate.group(h)
        if xr.shape != xc.shape or np.any(np.abs(xr - xc) > 1e-12):
            raise GridMismatch("tables have different x1 samples", height=h)
        ref, cand = (ur, uc) if quantity == "u1" else (sr, sc)
        ok = np.isfinite(ref) & np.isfinite(cand)
        denom = float(np.linalg.norm(ref[ok]))
        diff = float(np.linalg.norm(cand[ok] - ref[ok]))
        out[h] = diff / denom if denom > 0 else (0.0 if diff == 0 else math.inf)
    return out


def _shear_fn(solution):
    if hasattr(solution, "evaluate"):
        return lambda x, y: solution.evaluate(np.stack([x, np.full_like(x, y)], 1), "du1dx2")
    return lambda x, y: np.asarray(solution(x, np.full_like(x, y)), dtype=float)


def recirculation_length(solution, step_corner, probe_height, x_end=None, n=2000, tol=1e-10):
    """Distance from the step corner to the first negative-to-positive shear change.

    ``solution`` is a FlowSolution or a callable ``shear(x1, x2)``.
    """
    x0, y0 = map(float, step_corner)
    if x_end is None:
        x_end = float(solution.space.nodes[:, 0].max()) if hasattr(solution, "space") else x0 + 1.0
    y = y0 + float(probe_height)
    f = _shear_fn(solution)
    # start just after the corner to stay off the vertical wall
    xs = np.linspace(x0 + 1e-9 * max(1.0, abs(x0)), x_end, n)
    vals = f(xs, y)
    neg = False
    for i in range(n - 1):
        if vals[i] < 0:
            neg = True
        if neg and vals[i] < 0 <= vals[i + 1]:
            a, b = xs[i], xs[i + 1]
            fa = vals[i]
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = float(f(np.array([m]), y)[0])
                if (fm < 0) == (fa < 0):
                    a, fa = m, fm
                else:
                    b = m
            return 0.5 * (a + b) - x0
    raise NoReattachment("shear does not change sign from negative to positive", probe_height=y)


# ---------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentResult:
    case: ExperimentCase
    report: dict
    tables: dict
    solutions: dict = field(default_factory=dict, repr=False)
    hmm_report: object = None


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except RoughWallError as exc:
        exc.context.setdefault("stage", name)
        raise


def run_experiment(case, options=None, keep_solutions=False):
    options = options or SolverOptions()
    profile = case_profile(case)
    dmesh = _stage("dns", dns_mesh, case, profile)
    dns = _stage("dns", solve_dns, case, options, dmesh)
    setup = macro_setup(case)
    noslip = _stage("noslip", solve_macro, setup.mesh, None, setup.fluid, setup.bcs, options)
    U, law, rep = _stage("hmm", run_hmm, hmm_config(case, options), setup, profile)
    sols = {"dns": dns, "noslip": noslip, "hmm": U}
    tables = {k: sample_profiles(v, case.heights, case.x_range) for k, v in sols.items()}
    errors = {m: field_error(tables["dns"], tables[m]) for m in ("noslip", "hmm")}
    shear = {m: field_error(tables["dns"], tables[m], "du1dx2") for m in ("noslip", "hmm")}
    final = list(law.raw)
    spread = (max(final) - min(final)) / max(final) if max(final) > 0 else 0.0
    micro = rep.micro_cells
    report = {
        "case": case.case_id,
        "config": case_to_config(case),
        "errors_u1": {m: {repr(h): e for h, e in v.items()} for m, v in errors.items()},
        "errors_shear": {m: {repr(h): e for h, e in v.items()} for m, v in shear.items()},
        "slip": {"sites": list(case.sites), "alpha": final, "spread": spread,
                 "history": rep.alpha_history, "differences": rep.differences,
                 "law": law.to_dict()},
        "iterations": rep.iterations,
        "loop_passes": rep.loop_passes,
        "cells": {"dns": dmesh.n_cells, "macro": setup.mesh.n_cells, "micro": micro,
                  "ratio": (setup.mesh.n_cells + sum(micro)) / dmesh.n_cells},
        "solver": {"newton_tol": options.newton_tol, "newton_max_iter": options.newton_max_iter,
                   "quadrature_order": options.quadrature_order,
                   "newton_iterations": {k: v.newton_iterations for k, v in sols.items()}},
    }
    if case.is_bfs:
        corner = (5.0, 0.0)

        def lengths(h):
            out = {}
            for k, v in sols.items():
                try:
                    out[k] = recirculation_length(v, corner, h)
                except NoReattachment:
                    out[k] = None
            return out

        report["recirculation"] = lengths(case.probe_height)
        # sensitivity to the probe offset, inside and above the roughness layer
        eps = case.epsilon
        report["recirculation_by_height"] = {repr(h): lengths(h) for h in (eps / 4, eps / 2, eps, 2 * eps)}
        report["reynolds"] = {"value": case.reynolds, "length": "step height 1",
                              "velocity": "mean inflow speed", "inflow_mean": case.reynolds * case.nu}
    return ExperimentResult(case, report, tables, sols if keep_solutions else {}, rep)


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def export_profiles(tables, path, report=None):
    """Write ``<model>.csv`` per table (and ``report.json``) into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(tables):
        p = out / f"{name}.csv"
        p.write_text(tables[name].to_csv())
        written.append(p)
    if report is not None:
        p = out / "report.json"
        p.write_text(report_json(report))
        written.append(p)
    return written
