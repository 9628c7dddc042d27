"""Property-based checks: mesh invariants, quadratic boundary data, slip extraction, slip laws."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughwall.coupling import build_slip_law
from roughwall.fem import Dirichlet, FlowProblem, Periodic, solve_stationary
from roughwall.geometry import make_profile
from roughwall.mesh import ChannelDomain, audit_mesh, mesh_macro, mesh_micro, mesh_rough_dns
from roughwall.micro import Fluid, MicroDomainSpec, build_micro_bc, extract_slip, solve_micro

EPS = 0.025
ROUGH = ("sinusoidal", "sawtooth", "modulated_sinusoidal", "quasi_periodic")

pytestmark = pytest.mark.criterion(13)


@pytest.fixture(scope="module")
def macro():
    mesh = mesh_macro(ChannelDomain(), nx=10, ny=10)
    bcs = [Periodic(), Dirichlet("SlipWall"), Dirichlet("NoSlipWall")]
    return solve_stationary(FlowProblem(mesh, 1.0, (1.0, 0.0), bcs))


@settings(max_examples=25, deadline=None)
@given(kind=st.sampled_from(ROUGH), site=st.floats(0.0, 0.8), res=st.integers(4, 20),
       rows=st.integers(4, 30), periodic=st.booleans(), sampling=st.sampled_from(["uniform", "arclength"]))
def test_micro_mesh_invariants(kind, site, res, rows, periodic, sampling):
    prof = make_profile(kind, EPS)
    if periodic and not prof.periodic:
        periodic = False
    m = mesh_micro(prof, site, EPS, 4 * EPS, res, periodic=periodic, rows=rows, sampling=sampling)
    assert audit_mesh(m) == []


@settings(max_examples=10, deadline=None)
@given(kind=st.sampled_from(["sinusoidal", "sawtooth"]), wall_res=st.integers(8, 16), rows=st.integers(4, 16))
def test_dns_mesh_invariants(kind, wall_res, rows):
    m = mesh_rough_dns(make_profile(kind, EPS), ChannelDomain(0.0, 0.1), wall_res, rows)
    assert audit_mesh(m) == []


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(ROUGH), site=st.floats(0.0, 0.8), width=st.floats(0.5, 5.0),
       height=st.floats(2.0, 6.0))
def test_quadratic_constraints(macro, kind, site, width, height):
    spec = MicroDomainSpec(site, width * EPS, height * EPS, bc_mode="QuadraticDirichlet")
    bc = build_micro_bc(macro, spec, make_profile(kind, EPS))
    res = bc.constraint_residuals()
    assert len(res) == 18
    assert max(abs(v) for v in res.values()) <= 1e-12
    assert abs(bc.net_flux()) <= 1e-12


@pytest.fixture(scope="module")
def micro(macro):
    prof = make_profile("sinusoidal", EPS)
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS, 8)
    return solve_micro(spec, build_micro_bc(macro, spec, prof), prof, Fluid(1.0, (1.0, 0.0))), spec


@settings(max_examples=40, deadline=None)
@given(c=st.one_of(st.floats(1e-8, 1e8), st.floats(-1e8, -1e-8)))
def test_extract_slip_scale_invariance(micro, c):
    sol, spec = micro
    a = extract_slip(sol, spec)
    assert abs(extract_slip(sol.scaled(c), spec) - a) <= 1e-12 * abs(a)


@settings(max_examples=60, deadline=None)
@given(data=st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(1e-5, 1e-1)), min_size=1, max_size=8,
                     unique_by=lambda t: round(t[0], 3)),
       kind=st.sampled_from(["PiecewiseLinear", "PiecewiseConstant", "CubicMonotone"]))
def test_slip_law_interpolates(data, kind):
    data = sorted(data)
    law = build_slip_law(data, kind)
    s = np.array([d[0] for d in data])
    v = np.array([d[1] for d in data])
    assert np.allclose(law(s), v, rtol=1e-13, atol=0)
    x = np.linspace(s.min(), s.max(), 50)
    vals = law(x)
    assert np.all(vals >= v.min() * (1 - 1e-12)) and np.all(vals <= v.max() * (1 + 1e-12))


@settings(max_examples=30, deadline=None)
@given(data=st.lists(st.tuples(st.floats(0.05, 0.95), st.floats(1e-5, 1e-1)), min_size=2, max_size=6,
                     unique_by=lambda t: round(t[0], 3)))
def test_periodic_law_is_periodic(data):
    law = build_slip_law(sorted(data), period=1.0)
    x = np.linspace(0, 1, 37)
    # x + 1 is rounded, so compare at the round-off scale of the law values
    v = max(d[1] for d in data)
    assert np.allclose(law(x), law(x + 1.0), rtol=0, atol=1e-13 * v)
