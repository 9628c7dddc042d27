"""Slip laws, the macro wall-law solve, and the HMM fixed-point loop."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (EmptySamples, MaxIterationsExceeded, NonMonotoneSites, NonPositiveSlip,
                     RoughWallError)
from .fem import Dirichlet, FlowProblem, SlipRobin, SolverOptions, solve_stationary
from .micro import Fluid, MicroDomainSpec, build_micro_bc, extract_slip, micro_mesh, solve_micro

log = logging.getLogger(__name__)

KINDS = ("PiecewiseLinear", "PiecewiseConstant", "CubicMonotone")


@dataclass(frozen=True)
class SlipLaw:
    """Interpolated slip coefficient ``alpha(x1)``.

    ``values`` are the (floored) site values the law passes through; ``raw``
    keeps what the micro solves returned.  With a window ``[a, b]`` the law
    has zero knots at ``a`` and ``b`` and vanishes outside.  With a period the
    samples are extended periodically.
    """

    sites: tuple
    values: tuple
    kind: str = "PiecewiseLinear"
    window: Optional[tuple] = None
    floor: float = 0.0
    period: Optional[float] = None
    raw: tuple = ()

    def _knots(self):
        s = np.asarray(self.sites, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if self.window is not None:
            a, b = self.window
            keep = (s > a) & (s < b)
            s = np.concatenate(([a], s[keep], [b]))
            v = np.concatenate(([0.0], v[keep], [0.0]))
        elif self.period is not None and s.size > 1:
            P = self.period
            # one ghost sample on each side, skipping a site that duplicates s0 + P
            right = s[0] + P
            if abs(s[-1] - right) > 1e-12 * P:
                s = np.concatenate(([s[-1] - P], s, [right]))
                v = np.concatenate(([v[-1]], v, [v[0]]))
        return s, v

    def _raw_eval(self, x):
        s, v = self._knots()
        if s.size == 1:
            return np.full_like(x, v[0])
        if self.kind == "PiecewiseLinear":
            return np.interp(x, s, v)
        if self.kind == "PiecewiseConstant":
            # nearest site; ties go left
            mid = 0.5 * (s[1:] + s[:-1])
            return v[np.searchsorted(mid, x, side="left")]
        xc = np.clip(x, s[0], s[-1])
        out = PchipInterpolator(s, v, extrapolate=False)(xc)
        # the cubic form reproduces knot values only up to round-off; make it exact
        i = np.clip(np.searchsorted(s, xc), 0, s.size - 1)
        hit = s[i] == xc
        out[hit] = v[i[hit]]
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        xe = x
        if self.period is not None and self.window is None:
            s0, s1 = self.sites[0], self.sites[-1]
            xe = np.where((x < s0) | (x > s1), s0 + np.mod(x - s0, self.period), x)
        out = self._raw_eval(xe)
        if self.floor > 0:
            out = np.maximum(out, self.floor)
        if self.window is not None:
            a, b = self.window
            out = np.where((x >= a) & (x <= b), out, 0.0)
        return float(out[0]) if scalar else out

    def to_dict(self):
        return {"sites": list(self.sites), "values": list(self.values), "raw": list(self.raw),
                "kind": self.kind, "window": list(self.window) if self.window else None,
                "floor": self.floor, "period": self.period}


def build_slip_law(samples, kind="PiecewiseLinear", window=None, floor=0.0, period=None):
    """Slip law through ``samples = [(s_j, alpha_j), ...]``; values below ``floor`` are raised."""
    samples = list(samples)
    if not samples:
        raise EmptySamples("slip law needs at least one sample")
    if kind not in KINDS:
        raise ValueError(f"unknown interpolant kind {kind!r}")
    s = np.array([float(a) for a, _ in samples])
    raw = np.array([float(b) for _, b in samples])
    if np.any(np.diff(s) <= 0):
        raise NonMonotoneSites("slip sites must be strictly increasing", sites=s.tolist())
    if window is not None:
        a, b = map(float, window)
        if not (a < s[0] and s[-1] < b):
            raise ValueError("sites must lie strictly inside the window")
        window = (a, b)
    vals = np.maximum(raw, floor) if floor > 0 else raw
    return SlipLaw(tuple(s.tolist()), tuple(vals.tolist()), kind, window, float(floor),
                   None if period is None else float(period), tuple(raw.tolist()))


def solve_macro(mesh, slip, fluid=Fluid(), bcs=(), options=None, initial=None, floor=None):
    """Macro solve with the wall law on ``SlipWall``; ``slip=None`` means no-slip there.

    ``floor`` (if given) raises the law to at least that value on the wall;
    without it a non-positive slip raises NonPositiveSlip.
    """
    if slip is None:
        wall = Dirichlet("SlipWall")
    else:
        law = slip
        if floor is not None:
            law = lambda x, _s=slip: np.maximum(np.asarray(_s(x), dtype=float), floor)
        else:
            edges = mesh.edges_with_tag("SlipWall")
            if len(edges):
                xs = mesh.vertices[np.unique(np.asarray(edges).ravel()), 0]
                if np.any(np.asarray(law(xs)) <= 0):
                    raise NonPositiveSlip("slip law is not positive on the slip wall")
        wall = SlipRobin("SlipWall", law)
    problem = FlowProblem(mesh, fluid.viscosity, fluid.forcing, [wall, *bcs])
    return solve_stationary(problem, options or SolverOptions(), initial=initial)


@dataclass(frozen=True)
class MacroSetup:
    """Macro mesh plus the boundary conditions on every tag except ``SlipWall``."""

    mesh: object
    fluid: Fluid = Fluid()
    bcs: tuple = ()
    wall_interval: tuple = (0.0, 1.0)


@dataclass(frozen=True)
class HMMConfig:
    sites: tuple
    tol: float
    epsilon: float
    micro: MicroDomainSpec = None  # template; site is replaced per micro domain
    kind: str = "PiecewiseLinear"
    window: Optional[tuple] = None
    period: Optional[float] = None
    floor: Optional[float] = None  # default 1e-4 * epsilon
    max_iter: int = 10
    threads: int = 1
    min_separation: Optional[float] = None  # default epsilon
    options: SolverOptions = SolverOptions()

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not self.sites:
            raise EmptySamples("no micro sites")
        s = np.asarray(self.sites, dtype=float)
        if np.any(np.diff(s) <= 0):
            raise NonMonotoneSites("micro sites must be strictly increasing", sites=s.tolist())
        sep = self.min_separation if self.min_separation is not None else self.epsilon
        if s.size > 1 and np.min(np.diff(s)) < sep * (1 - 1e-12):
            raise ValueError(f"micro sites closer than {sep}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @property
    def slip_floor(self):
        return self.floor if self.floor is not None else 1e-4 * self.epsilon

    def spec(self, site):
        return replace(self.micro, site=float(site))


@dataclass
class HMMReport:
    iterations: int
    loop_passes: int
    laws: list = field(default_factory=list)
    alpha_history: list = field(default_factory=list)  # raw per-site values, one list per pass
    differences: list = field(default_factory=list)
    macro_cells: int = 0
    micro_cells: list = field(default_factory=list)
    macro_solves: int = 0

    @property
    def final_law(self):
        return self.laws[-1]

    @property
    def cells(self):
        return self.macro_cells + sum(self.micro_cells)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "loop_passes": self.loop_passes,
            "alpha_history": self.alpha_history,
            "differences": self.differences,
            "final_law": self.final_law.to_dict(),
            "macro_cells": self.macro_cells,
            "micro_cells": self.micro_cells,
            "macro_solves": self.macro_solves,
        }


def micro_stage(macro_solution, config, profile, fluid, threads=None):
    """Project, solve and extract at every site; returns (alphas, micro solutions)."""
    def one(j_site):
        j, site = j_site
        spec = config.spec(site)
        try:
            bc = build_micro_bc(macro_solution, spec, profile)
            sol = solve_micro(spec, bc, profile, fluid, config.options, mesh=micro_mesh(spec, profile))
            return extract_slip(sol, spec), sol
        except RoughWallError as exc:
            exc.context.setdefault("site_index", j)
            exc.context.setdefault("site", float(site))
            raise

    n = threads or config.threads
    items = list(enumerate(config.sites))
    if n > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, items))  # map keeps site order
    else:
        results = [one(it) for it in items]
    return [r[0] for r in results], [r[1] for r in results]


def run_hmm(config, macro, profile):
    """Fixed-point coupling of the macro wall-law problem and the micro solves.

    Returns ``(U, law, report)``.  ``report.iterations`` counts slip updates
    of the macro solution: it is ``loop_passes - 1`` when the first test fails
    and 1 when the loop exits on the first test.
    """
    floor = config.slip_floor
    a, b = macro.wall_interval
    probe = np.linspace(a, b, 1000)
    U = solve_macro(macro.mesh, None, macro.fluid, macro.bcs, config.options)
    solves = 1
    prev = np.zeros_like(probe)
    report = HMMReport(iterations=0, loop_passes=0, macro_cells=macro.mesh.n_cells)
    k = 0
    while True:
        k += 1
        if k > config.max_iter:
            raise MaxIterationsExceeded("HMM loop did not converge", iterations=k - 1,
                                        difference=report.differences[-1])
        alphas, micros = micro_stage(U, config, profile, macro.fluid)
        law = build_slip_law(zip(config.sites, alphas), config.kind, config.window, floor, config.period)
        report.laws.append(law)
        report.alpha_history.append([float(v) for v in alphas])
        report.micro_cells = [m.mesh.n_cells for m in micros]
        cur = np.asarray(law(probe))
        diff = float(np.max(np.abs(cur - prev)))
        report.differences.append(diff)
        log.info("hmm pass %d: alpha %s, change %.3e", k, alphas, diff)
        if diff < config.tol:
            break
        U = solve_macro(macro.mesh, law, macro.fluid, macro.bcs, config.options, initial=U)
        solves += 1
        prev = cur
    # the post-loop solve, also when the loop exits on its first test
    U = solve_macro(macro.mesh, law, macro.fluid, macro.bcs, config.options, initial=U)
    solves += 1
    report.loop_passes = k
    report.iterations = k - 1 if k > 1 else 1
    report.macro_solves = solves
    return U, law, report
