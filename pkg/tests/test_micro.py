import numpy as np
import pytest

from roughwall.errors import DegenerateShear
from roughwall.fem import Dirichlet, FlowProblem, Periodic, SlipRobin, solve_stationary
from roughwall.geometry import make_profile
from roughwall.mesh import ChannelDomain, mesh_macro
from roughwall.micro import (Fluid, MicroBC, MicroDomainSpec, build_free_stream_bc, build_micro_bc,
                             build_quadratic_bc, extract_slip, solve_micro)

EPS = 0.025


@pytest.fixture(scope="module")
def couette():
    # linear shear U = (x2, 0): exact on any mesh
    mesh = mesh_macro(ChannelDomain(), nx=8, ny=8)
    bcs = [Periodic(), Dirichlet("SlipWall"), Dirichlet("NoSlipWall", (1.0, 0.0))]
    return solve_stationary(FlowProblem(mesh, 1.0, (0.0, 0.0), bcs))


@pytest.fixture(scope="module")
def poiseuille():
    mesh = mesh_macro(ChannelDomain(), nx=10, ny=10)
    bcs = [Periodic(), Dirichlet("SlipWall"), Dirichlet("NoSlipWall")]
    return solve_stationary(FlowProblem(mesh, 1.0, (1.0, 0.0), bcs))


def test_spec_validation():
    with pytest.raises(ValueError):
        MicroDomainSpec(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        MicroDomainSpec(0.0, 1.0, 1.0, bc_mode="Other")
    assert MicroDomainSpec(0.0, 1.0, 1.0).periodic


def test_free_stream_value(poiseuille):
    spec = MicroDomainSpec(0.3, EPS, 0.1)
    bc = build_free_stream_bc(poiseuille, spec)
    assert bc.top_value[0] == pytest.approx(0.1 * 0.9 / 2, abs=1e-12)
    assert bc.net_flux() == 0.0 and bc.constraint_residuals() == {}


def test_quadratic_reproduces_couette(couette):
    spec = MicroDomainSpec(0.4, EPS, 4 * EPS, bc_mode="QuadraticDirichlet")
    bc = build_quadratic_bc(couette, spec, make_profile("flat", EPS))
    t = np.linspace(0, 4 * EPS, 7)
    u, v = bc.face_value("left", t)
    assert np.allclose(u, t, atol=1e-13) and np.allclose(v, 0, atol=1e-13)
    u, v = bc.face_value("top", 0.4 + t / 4)
    assert np.allclose(u, 4 * EPS, atol=1e-13)


def test_quadratic_constraints_with_rough_wall(poiseuille):
    spec = MicroDomainSpec(0.31, 2.5 * EPS, 4 * EPS, bc_mode="QuadraticDirichlet")
    bc = build_micro_bc(poiseuille, spec, make_profile("sawtooth", EPS))
    assert bc.wall_left < 0 and bc.wall_right < 0
    res = bc.constraint_residuals()
    assert len(res) == 18
    assert max(map(abs, res.values())) < 1e-12
    assert abs(bc.net_flux()) < 1e-13
    d = bc.to_dict()
    assert set(d["faces"]) == {"left", "top", "right"}


def test_flat_micro_recovers_no_slip(poiseuille):
    # over a flat wall the micro slip is zero
    prof = make_profile("flat", EPS)
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS, 6)
    sol = solve_micro(spec, build_micro_bc(poiseuille, spec, prof), prof, Fluid(1.0, (1.0, 0.0)))
    assert abs(extract_slip(sol, spec)) < 1e-10


@pytest.mark.parametrize("mode", ["PeriodicFreeStream", "QuadraticDirichlet"])
def test_sinusoid_slip_close_to_homogenized(poiseuille, oracles, mode):
    prof = make_profile("sinusoidal", EPS)
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS, 15, bc_mode=mode)
    sol = solve_micro(spec, build_micro_bc(poiseuille, spec, prof), prof, Fluid(1.0, (1.0, 0.0)))
    ref = EPS * (oracles["sinusoidal_cell"]["chibar"] + 1.0)
    assert extract_slip(sol, spec) == pytest.approx(ref, rel=0.25)


def test_degenerate_shear():
    prof = make_profile("sinusoidal", EPS)
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS, 6)
    sol = solve_micro(spec, MicroBC("PeriodicFreeStream", spec, top_value=(0.0, 0.0)), prof)
    with pytest.raises(DegenerateShear):
        extract_slip(sol, spec)
