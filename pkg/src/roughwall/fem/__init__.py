"""Taylor-Hood finite elements for stationary incompressible flow."""

from .problem import Dirichlet, FlowProblem, Periodic, SlipRobin, SolverOptions, ZeroStress
from .solution import (FlowSolution, box_kernel, bump_kernel, check_kernel, eval_velocity,
                       eval_velocity_gradient, kernel_average, line_average)
from .solver import build_reduction, solve_stationary
from .space import TaylorHoodSpace

__all__ = [
    "Dirichlet", "FlowProblem", "Periodic", "SlipRobin", "SolverOptions", "ZeroStress",
    "FlowSolution", "box_kernel", "bump_kernel", "check_kernel", "eval_velocity",
    "eval_velocity_gradient", "kernel_average", "line_average", "build_reduction",
    "solve_stationary", "TaylorHoodSpace",
]
