"""Rough-wall profiles.

Every profile describes a wall ``x2 = w(x1)`` lying on or below the crest
plane ``x2 = 0``.  The macroscopic slip boundary is always that plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import RoughWallError

KINDS = (
    "flat",
    "sinusoidal",
    "sawtooth",
    "modulated_sinusoidal",
    "quasi_periodic",
    "bfs_patch",
    "tabulated",
)

SQRT2_2PI = math.sqrt(2.0) * 2.0 * math.pi


class ProfileError(RoughWallError, ValueError):
    code = "profile_error"


def default_modulation(x):
    """Smooth amplitude used for the modulated channel, values in [0.5, 1.5]."""
    return np.sin(SQRT2_2PI * np.asarray(x, dtype=float)) ** 2 + 0.5


@dataclass(frozen=True)
class RoughnessProfile:
    kind: str
    epsilon: float
    wavelength: float
    depth: float
    modulation: Optional[Callable] = None
    window: Optional[tuple] = None
    table: Optional[tuple] = field(default=None, repr=False)
    ramp: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProfileError(f"unknown profile kind {self.kind!r}")
        if not self.epsilon > 0:
            raise ProfileError("epsilon must be positive")
        if not self.wavelength > 0:
            raise ProfileError("wavelength must be positive")
        if not 0.0 <= self.ramp < 1.0:
            raise ProfileError("ramp fraction must lie in [0, 1)")

    # -- evaluation --------------------------------------------------------
    def base_wall(self, x):
        """Wall height without the modulation factor."""
        x = np.asarray(x, dtype=float)
        eps, lam, d = self.epsilon, self.wavelength, self.depth
        if self.kind == "flat":
            return np.zeros_like(x)
        if self.kind in ("sinusoidal", "modulated_sinusoidal"):
            return 0.5 * eps * d * (np.cos(2.0 * np.pi * x / lam) - 1.0)
        if self.kind == "sawtooth":
            return -d * eps * _saw_drop(x / lam, self.ramp)
        if self.kind == "quasi_periodic":
            return eps / 3.0 * (np.sin(SQRT2_2PI * x / eps) + np.sin(2.0 * np.pi * x / eps) - 2.25)
        if self.kind == "bfs_patch":
            a, b = self.window
            w = 0.5 * eps * d * (np.cos(2.0 * np.pi * x / lam) - 1.0)
            return np.where((x >= a) & (x <= b), w, 0.0)
        xs, ws = self.table
        return np.interp(x, xs, ws)

    def beta(self, x):
        if self.modulation is None:
            return np.ones_like(np.asarray(x, dtype=float))
        return np.asarray(self.modulation(x), dtype=float)

    def wall(self, x):
        w = self.base_wall(x)
        if self.modulation is not None:
            w = self.beta(x) * w
        return w

    def __call__(self, x):
        return self.wall(x)

    @property
    def periodic(self):
        return self.kind in ("flat", "sinusoidal", "sawtooth")

    @property
    def max_depth(self):
        """Upper bound of ``-wall`` over the whole line."""
        if self.kind == "flat":
            return 0.0
        if self.kind == "tabulated":
            return float(max(0.0, -np.min(self.table[1])))
        scale = 1.0
        if self.modulation is default_modulation:
            scale = 1.5
        elif self.modulation is not None:
            xs = np.linspace(0.0, 1.0, 20001)
            scale = float(np.max(np.abs(self.beta(xs))))
        return self.epsilon * self.depth * scale

    def wall_min(self, a, b):
        """Global minimum of the wall over ``[a, b]`` and its location."""
        if b < a:
            raise ProfileError("empty interval")
        n = max(64, int(math.ceil(64 * (b - a) / self.wavelength)) + 1)
        xs = np.linspace(a, b, n)
        ws = self.wall(xs)
        i = int(np.argmin(ws))
        best_x, best_w = float(xs[i]), float(ws[i])
        if self.kind not in ("sawtooth", "tabulated", "flat"):
            lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
            if hi > lo:
                res = minimize_scalar(lambda t: float(self.wall(t)), bounds=(lo, hi),
                                      method="bounded", options={"xatol": 1e-13})
                if res.fun < best_w:
                    best_x, best_w = float(res.x), float(res.fun)
        return best_w, best_x

    def kinks(self, a, b):
        """Corner locations of the wall inside [a, b] (sawtooth only)."""
        if self.kind != "sawtooth":
            return ()
        lam = self.wavelength
        k0, k1 = int(math.floor(a / lam)) - 1, int(math.ceil(b / lam)) + 1
        pts = [k * lam for k in range(k0, k1 + 1)]
        if self.ramp > 0:
            pts += [(k + 1.0 - self.ramp) * lam for k in range(k0, k1 + 1)]
        return tuple(sorted(p for p in pts if a <= p <= b))

    # -- unit cell ---------------------------------------------------------
    def unit_cell(self):
        """Unit-cell shape for the homogenization cell problem.

        Returns ``(phi, H)`` with ``phi`` defined on ``[0, 1)`` in units of the
        wavelength, so that ``wall(x) = wavelength * (phi(x / wavelength) - H)``
        (without modulation).  Non-periodic kinds have no unit cell.
        """
        lam = self.wavelength
        amp = self.epsilon * self.depth / lam
        if self.kind == "flat":
            return UnitCell(lambda y: np.zeros_like(np.asarray(y, float)), 0.0, "flat")
        if self.kind in ("sinusoidal", "modulated_sinusoidal"):
            return sinusoidal_cell(amp)
        if self.kind == "bfs_patch":
            return sinusoidal_cell(amp)
        if self.kind == "sawtooth":
            return sawtooth_cell(amp, self.ramp)
        raise ProfileError(f"{self.kind} roughness has no periodic unit cell")


@dataclass(frozen=True)
class UnitCell:
    """Shape ``phi`` of one roughness period on [0, 1) with crest height ``H``."""

    phi: Callable
    H: float
    name: str = "custom"
    kinks: tuple = ()

    def __call__(self, y):
        return self.phi(y)


def sinusoidal_cell(amplitude=1.0):
    def phi(y):
        y = np.asarray(y, dtype=float)
        return 0.5 * amplitude * (1.0 + np.cos(2.0 * np.pi * y))

    return UnitCell(phi, float(amplitude), "sinusoidal")


def _saw_drop(t, ramp):
    """Depth fraction of the sawtooth at phase ``t``: 0 at the crest, 1 at the trough.

    With ``ramp > 0`` the vertical cliff is replaced by a linear rise over the
    last ``ramp`` fraction of the period.
    """
    t = np.asarray(t, dtype=float)
    f = t - np.floor(t)
    if ramp <= 0.0:
        return f
    return np.where(f <= 1.0 - ramp, f / (1.0 - ramp), (1.0 - f) / ramp)


def sawtooth_cell(amplitude=0.75, ramp=1.0 / 16.0):
    def phi(y):
        return amplitude * (1.0 - _saw_drop(y, ramp))

    kinks = (1.0,) if ramp <= 0.0 else ()
    return UnitCell(phi, float(amplitude), "sawtooth", kinks=kinks)


def constant_cell(c):
    return UnitCell(lambda y: np.full_like(np.asarray(y, float), float(c)), float(c), "constant")


def flat_cell():
    return UnitCell(lambda y: np.zeros_like(np.asarray(y, float)), 0.0, "flat")


def make_profile(kind, epsilon, **params):
    """Build a profile by kind name.

    Recognised parameters: ``wavelength``, ``depth``, ``modulation`` (callable
    or ``"default"``), ``window`` (for ``bfs_patch``), ``x``/``w`` samples
    (for ``tabulated``), ``ramp`` (sawtooth rise fraction, default 1/16; 0 gives
    the exact vertical cliff).
    """
    if kind not in KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}")
    if epsilon is None or not epsilon > 0:
        raise ProfileError("epsilon must be positive")
    depth_default = {
        "flat": 0.0,
        "sinusoidal": 1.0,
        "sawtooth": 0.75,
        "modulated_sinusoidal": 1.0,
        "quasi_periodic": 4.25 / 3.0,
        "bfs_patch": 1.0,
        "tabulated": 0.0,
    }[kind]
    wavelength = params.get("wavelength")
    if wavelength is None:
        wavelength = 2.5 * epsilon if kind == "bfs_patch" else epsilon
    if not wavelength > 0:
        raise ProfileError("wavelength must be positive")
    depth = float(params.get("depth", depth_default))
    modulation = params.get("modulation")
    if kind == "modulated_sinusoidal" and modulation in (None, "default"):
        modulation = default_modulation
    elif modulation == "default":
        modulation = default_modulation
    window = None
    if kind == "bfs_patch":
        window = tuple(float(v) for v in params.get("window", (6.0, 16.0)))
        if window[1] <= window[0]:
            raise ProfileError("bfs window must satisfy a < b")
    ramp = float(params.get("ramp", 1.0 / 16.0 if kind == "sawtooth" else 0.0))
    table = None
    if kind == "tabulated":
        xs = np.asarray(params.get("x", ()), dtype=float)
        ws = np.asarray(params.get("w", ()), dtype=float)
        if xs.size < 2 or xs.size != ws.size:
            raise ProfileError("tabulated profile needs at least 2 matching samples")
        if np.any(np.diff(xs) <= 0):
            raise ProfileError("tabulated abscissae must be strictly increasing")
        if np.any(ws > 1e-14):
            raise ProfileError("tabulated wall must lie on or below the crest plane")
        table = (tuple(xs.tolist()), tuple(ws.tolist()))
        depth = float(-ws.min() / epsilon)
    return RoughnessProfile(kind, float(epsilon), float(wavelength), depth,
                            modulation=modulation, window=window, table=table, ramp=ramp)


def eval_wall(profile, x1, interval=None):
    """Wall height at ``x1``; with ``interval=(a, b)`` also return the minimum there."""
    w = profile.wall(x1)
    if interval is None:
        return w
    return w, profile.wall_min(*interval)[0]


def periodic_taper(wall, x0, x1, width):
    """Blend ``wall`` near ``x1`` so that it matches its value at ``x0``.

    Used to close non-periodic walls on periodic domains.  The correction is a
    smoothstep over ``[x1 - width, x1]`` and vanishes elsewhere.
    """
    jump = float(wall(x0) - wall(x1))

    def tapered(x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - (x1 - width)) / width, 0.0, 1.0)
        s = t * t * (3.0 - 2.0 * t)
        return np.minimum(wall(x) + jump * s, 0.0)

    return tapered
