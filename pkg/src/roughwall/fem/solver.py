"""Stokes initial guess followed by Newton iterations on the reduced system."""

import logging

import numpy as np
import scipy.sparse as sp

from ..errors import NewtonDivergence
from . import linalg
from .assemble import Assembler
from .problem import Dirichlet, Periodic, SlipRobin, SolverOptions
from .solution import FlowSolution
from .space import TaylorHoodSpace

log = logging.getLogger(__name__)


def build_reduction(space, problem, pin_pressure=False):
    """Map ``x = P y + g`` from reduced unknowns to the full vector.

    Dirichlet dofs have zero rows in ``P`` and their values in ``g``; periodic
    slaves copy their master column.  The first condition listed for a dof wins.
    ``pin_pressure`` fixes the first free pressure vertex at zero.
    """
    N = space.n_dofs
    n2 = space.n2
    fixed = np.zeros(N, dtype=bool)
    g = np.zeros(N)
    for bc in problem.bcs:
        if isinstance(bc, Dirichlet):
            nodes = space.tag_nodes(bc.tag)
            if nodes.size == 0:
                continue
            xy = space.nodes[nodes]
            val = bc.evaluate(xy[:, 0], xy[:, 1])
            comps = bc.components
        elif isinstance(bc, SlipRobin):
            nodes = space.tag_nodes(bc.tag)
            val = np.zeros((2, nodes.size))
            comps = (1,)
        else:
            continue
        for c in comps:
            dof = c * n2 + nodes
            new = ~fixed[dof]
            g[dof[new]] = val[c][new]
            fixed[dof[new]] = True

    masters = np.zeros(0, dtype=np.int64)
    slaves = np.zeros(0, dtype=np.int64)
    if any(isinstance(bc, Periodic) for bc in problem.bcs):
        p2, p1 = space.periodic_map()
        masters = np.concatenate([p2[:, 0], n2 + p2[:, 0], 2 * n2 + p1[:, 0]])
        slaves = np.concatenate([p2[:, 1], n2 + p2[:, 1], 2 * n2 + p1[:, 1]])
        either = fixed[masters] | fixed[slaves]
        val = np.where(fixed[masters], g[masters], g[slaves])
        g[masters[either]] = val[either]
        g[slaves[either]] = val[either]
        fixed[masters[either]] = True
        fixed[slaves[either]] = True

    is_slave = np.zeros(N, dtype=bool)
    is_slave[slaves] = True
    if pin_pressure:
        cand = np.flatnonzero(~fixed[2 * n2:] & ~is_slave[2 * n2:])
        if cand.size:
            fixed[2 * n2 + cand[0]] = True
    independent = ~fixed & ~is_slave
    red = np.full(N, -1, dtype=np.int64)
    red[independent] = np.arange(int(independent.sum()))
    live = ~fixed[slaves]
    red[slaves[live]] = red[masters[live]]
    rows = np.flatnonzero(red >= 0)
    P = sp.csr_matrix((np.ones(rows.size), (rows, red[rows])), shape=(N, int(independent.sum())))
    return P, g, fixed


def _solve(A, b, options):
    return linalg.solve(A, b, options.linear_solver, options.permc_spec)


def solve_stationary(problem, options=None, initial=None):
    """Solve the stationary Navier-Stokes (or Stokes) problem.

    Newton starts from the Stokes solution unless ``initial`` (a FlowSolution
    on the same mesh, or a full vector) is given.
    """
    options = options or SolverOptions()
    has_outflow = problem.validate()
    space = TaylorHoodSpace(problem.mesh)
    asm = Assembler(space, problem)
    K = asm.linear()
    F = asm.load()
    # zero-mean gauge: pin one pressure value, shift afterwards (a bordered
    # multiplier row is dense and wrecks the fill of the factorization)
    gauge = not has_outflow
    P, g, fixed = build_reduction(space, problem, pin_pressure=gauge)
    Pt = P.T.tocsr()
    n_red = P.shape[1]
    mass = asm.pressure_mass()

    def finish(z, theta=1.0):
        x = P @ z + theta * g
        if gauge:
            x[2 * space.n2:] -= (mass @ x) / mass.sum()
        return FlowSolution(space, x, problem, history=history, options=options)

    def residual(z, theta, conv=None):
        x = P @ z + theta * g
        R = K @ x - theta * F
        if conv is not None:
            R = R + conv
        return Pt @ R

    def system(J):
        return (Pt @ J @ P).tocsr()

    A0 = system(K)
    rhs = -residual(np.zeros(n_red), 1.0)
    ref = float(np.linalg.norm(rhs))
    history = []
    if ref == 0.0:
        history.append(0.0)
        return finish(np.zeros(n_red))

    if initial is None:
        z0 = _solve(A0, rhs, options)
    else:
        x0 = initial.x if isinstance(initial, FlowSolution) else np.asarray(initial, dtype=float)
        z0 = _least_restrict(P, x0 - g)

    if not problem.convection:
        history.append(float(np.linalg.norm(residual(z0, 1.0))) / ref)
        return finish(z0)

    def newton(z, theta):
        def conv_residual(z):
            Rc, _ = asm.convection(P @ z + theta * g, jacobian=False)
            return residual(z, theta, Rc)

        scale = theta * ref
        r = conv_residual(z)
        rn = float(np.linalg.norm(r))
        r_start = rn
        history.append(rn / scale)
        it = 0
        while rn > options.newton_tol * scale:
            # give up early on blow-up so the continuation fallback starts sooner
            if it >= options.newton_max_iter or not np.isfinite(rn) or rn > 1e6 * r_start:
                raise NewtonDivergence("Newton iteration did not converge", iterations=it,
                                       relative_residual=rn / scale, load_factor=theta)
            _, Jc = asm.convection(P @ z + theta * g, jacobian=True)
            dz = _solve(system(K + Jc), -r, options)
            z_new = z + dz
            r_new = conv_residual(z_new)
            rn_new = float(np.linalg.norm(r_new))
            if not rn_new < rn:
                z_half = z + 0.5 * dz
                r_half = conv_residual(z_half)
                rn_half = float(np.linalg.norm(r_half))
                if rn_half < rn_new:
                    z_new, r_new, rn_new = z_half, r_half, rn_half
            z, r, rn = z_new, r_new, rn_new
            it += 1
            history.append(rn / scale)
            log.debug("newton %d: relative residual %.3e", it, rn / scale)
        return z

    try:
        return finish(newton(z0, 1.0))
    except NewtonDivergence:
        if options.continuation_steps < 2:
            raise
    # load continuation: scale all data by theta = 1/n, 2/n, ..., 1; each
    # step starts from the previous solution (the first from Stokes)
    n = options.continuation_steps
    log.info("Newton from the initial guess failed; continuation in %d steps", n)
    history.clear()
    z = (z0 if initial is None else _solve(A0, rhs, options)) / n
    prev = 0.0
    for k in range(1, n + 1):
        theta = k / n
        if prev > 0:
            z = z * (theta / prev)
        z = newton(z, theta)
        prev = theta
    return finish(z)


def _least_restrict(P, x):
    """Reduced coordinates of a full vector (mean over copies of each column)."""
    counts = np.asarray(P.sum(axis=0)).ravel()
    counts[counts == 0] = 1.0
    return (P.T @ x) / counts
