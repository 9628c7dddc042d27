"""Periodic homogenization cell problem and the slip constant chi-bar.

The corrector solves a Stokes problem on the truncated strip above one
roughness period, with ``chi = (-phi, 0)`` on the wall, periodic sides and a
shear-free top.  Far from the wall ``chi`` tends to the horizontal constant
``(chibar, 0)``; the homogenized slip coefficient is ``scale * (chibar + H)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, TruncationTooLow
from .fem import Dirichlet, FlowProblem, Periodic, SolverOptions, solve_stationary
from .mesh import mesh_cell_domain


@dataclass
class CellSolution:
    chi: object  # FlowSolution of the corrector (pressure is pi)
    chibar: float
    H: float
    truncation_height: float
    decay_samples: list = field(default_factory=list)
    slice_means: dict = field(default_factory=dict)
    top_vertical_mean: float = 0.0
    resolution: int = 0

    @property
    def pi(self):
        return self.chi.p

    @property
    def slip_constant(self):
        """``chibar + H``, the slip length in units of the wavelength."""
        return self.chibar + self.H

    @property
    def n_cells(self):
        return self.chi.mesh.n_cells


def _wall_data(x, y):
    # on wall nodes y is the (polyline) wall height, so chi1 = -phi exactly there
    y = np.asarray(y, dtype=float)
    return np.stack([-y, np.zeros_like(y)])


def slice_oscillation(sol, y, n=256):
    xs = (np.arange(n) + 0.5) / n
    vals = sol.evaluate(np.stack([xs, np.full(n, y)], 1), "u1")
    return float(np.max(np.abs(vals - vals.mean())))


def solve_cell_problem(unit_cell, truncation_height=8.0, resolution=32, viscosity=1.0,
                       growth=1.15, n_slices=None, options=None):
    H = float(unit_cell.H)
    top = float(truncation_height)
    if top <= H + 1.0:
        raise TruncationTooLow(f"truncation height {top} must exceed H + 1 = {H + 1.0}",
                               H=H, truncation_height=top)
    mesh = mesh_cell_domain(unit_cell, top, resolution=resolution, growth=growth)
    problem = FlowProblem(
        mesh,
        viscosity=viscosity,
        forcing=(0.0, 0.0),
        bcs=[
            Periodic(),
            Dirichlet("NoSlipWall", _wall_data),
            Dirichlet("Top", (0.0, 0.0), components=(1,)),
        ],
        pressure_gauge="ZeroMean",
        convection=False,
    )
    sol = solve_stationary(problem, options or SolverOptions())
    chibar = sol.line_average(top, 0.0, 1.0, "u1")
    top_v = sol.line_average(top, 0.0, 1.0, "u2")
    # decay samples on slices above the crest
    n_slices = n_slices or max(8, int(np.ceil(2 * (top - H))))
    levels = H + (top - H) * (np.arange(1, n_slices + 1) / n_slices) ** 1.5
    levels[-1] = top
    samples = [(float(y), slice_oscillation(sol, y)) for y in levels]
    means = {}
    for y in (H + 1.0, H + 2.0, top):
        if y <= top:
            means[float(y)] = sol.line_average(y, 0.0, 1.0, "u1")
    return CellSolution(sol, float(chibar), H, top, samples, means, float(top_v), resolution)


@dataclass
class DecayReport:
    rate: float
    residual: float
    used: int
    samples: list
    no_decay_needed: bool = False


def decay_check(solution, floor=1e-9):
    """Fit ``log(oscillation) ~ c - rate * y2`` over the slices above the crest.

    Slices whose oscillation is below ``floor`` times the largest one are at
    round-off level and are left out of the fit.
    """
    above = [(y, o) for y, o in solution.decay_samples if y > solution.H]
    if len(above) < 4:
        raise InsufficientSamples("need at least 4 slices above the crest", available=len(above))
    ys = np.array([y for y, _ in above])
    osc = np.array([o for _, o in above])
    peak = float(osc.max())
    scale = max(abs(solution.chibar), solution.H, 1e-300)
    if peak <= 1e-13 * scale:
        return DecayReport(float("inf"), 0.0, 0, above, no_decay_needed=True)
    keep = osc > floor * peak
    if keep.sum() < 2:
        keep[:2] = True
    A = np.stack([np.ones(int(keep.sum())), -ys[keep]], 1)
    coef, *_ = np.linalg.lstsq(A, np.log(osc[keep]), rcond=None)
    fit = A @ coef
    resid = float(np.sqrt(np.mean((fit - np.log(osc[keep])) ** 2)))
    return DecayReport(float(coef[1]), resid, int(keep.sum()), above)


def richardson_chibar(unit_cell, heights=(8.0, 16.0), resolutions=(32, 64), order=2.0):
    """Reference chi-bar: extrapolate in resolution at each height, then compare heights.

    Returns ``(value, details)`` where ``value`` uses the tallest truncation.
    """
    details = {}
    best = {}
    for h in heights:
        vals = [solve_cell_problem(unit_cell, h, r).chibar for r in resolutions]
        r = resolutions[1] / resolutions[0]
        ext = vals[1] + (vals[1] - vals[0]) / (r ** order - 1.0)
        details[float(h)] = {"values": vals, "extrapolated": ext}
        best[float(h)] = ext
    value = best[float(max(heights))]
    details["truncation_spread"] = abs(best[float(heights[0])] - best[float(heights[-1])])
    return value, details
