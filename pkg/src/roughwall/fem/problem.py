"""Problem description: boundary conditions, forcing and solver settings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import BoundaryConditionError, GaugeError


@dataclass(frozen=True)
class Dirichlet:
    """Prescribed velocity on ``tag``; ``value`` is a 2-vector or ``f(x, y) -> (2, n)``.

    ``components`` restricts the constraint, e.g. ``(1,)`` for u2 only.
    """

    tag: str
    value: Union[Sequence[float], Callable] = (0.0, 0.0)
    components: tuple = (0, 1)

    def evaluate(self, x, y):
        if callable(self.value):
            out = np.asarray(self.value(x, y), dtype=float)
        else:
            out = np.asarray(self.value, dtype=float).reshape(2, 1)
        return np.broadcast_to(out, (2, np.size(x))).astype(float)


@dataclass(frozen=True)
class Periodic:
    tags: tuple = ("PeriodicLeft", "PeriodicRight")


@dataclass(frozen=True)
class SlipRobin:
    """Navier slip ``u1 = alpha du1/dn``, ``u2 = 0`` on a flat horizontal tag."""

    tag: str
    slip: Union[float, Callable]

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.slip):
            return np.asarray(self.slip(x), dtype=float) * np.ones_like(x)
        return np.full_like(x, float(self.slip))


@dataclass(frozen=True)
class ZeroStress:
    tag: str


@dataclass
class FlowProblem:
    mesh: object
    viscosity: float = 1.0
    forcing: Union[Sequence[float], Callable] = (0.0, 0.0)
    bcs: list = field(default_factory=list)
    pressure_gauge: Optional[str] = "ZeroMean"
    convection: bool = True

    def force(self, x, y):
        if callable(self.forcing):
            out = np.asarray(self.forcing(x, y), dtype=float)
        else:
            out = np.asarray(self.forcing, dtype=float).reshape(2, 1)
        return np.broadcast_to(out, (2, np.size(x)))

    def validate(self):
        if not self.viscosity > 0:
            raise BoundaryConditionError("viscosity must be positive")
        covered = {}
        for bc in self.bcs:
            tags = bc.tags if isinstance(bc, Periodic) else (bc.tag,)
            for t in tags:
                if t in covered:
                    raise BoundaryConditionError(f"tag {t} covered by more than one condition", tag=t)
                covered[t] = bc
        present = set(self.mesh.tags())
        missing = present - set(covered)
        if missing:
            raise BoundaryConditionError(f"tags without a boundary condition: {sorted(missing)}",
                                         tags=sorted(missing))
        if any(isinstance(bc, Periodic) for bc in self.bcs) and self.mesh.periodic_pairs is None:
            raise BoundaryConditionError("periodic condition on a mesh without periodic pairing")
        has_outflow = any(isinstance(bc, ZeroStress) and bc.tag in present for bc in self.bcs)
        if self.pressure_gauge not in ("ZeroMean", None):
            raise GaugeError(f"unknown pressure gauge {self.pressure_gauge!r}")
        if self.pressure_gauge is None and not has_outflow:
            raise GaugeError("no pressure gauge and no zero-stress boundary")
        return has_outflow


@dataclass(frozen=True)
class SolverOptions:
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    quadrature_order: int = 5
    linear_solver: str = "auto"
    permc_spec: str = "COLAMD"
    continuation_steps: int = 6  # fallback when Newton from the initial guess fails

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be at least 1")
        if self.quadrature_order not in (4, 5):
            raise ValueError("supported quadrature orders: 4, 5 (both use the 7-point degree-5 rule)")
