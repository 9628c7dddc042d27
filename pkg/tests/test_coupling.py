import numpy as np
import pytest

from roughwall.coupling import HMMConfig, MacroSetup, build_slip_law, run_hmm, solve_macro
from roughwall.errors import EmptySamples, MaxIterationsExceeded, NonMonotoneSites, NonPositiveSlip
from roughwall.fem import Dirichlet, Periodic
from roughwall.geometry import make_profile
from roughwall.mesh import ChannelDomain, mesh_macro
from roughwall.micro import Fluid, MicroDomainSpec

EPS = 0.025


def test_linear_law_between_sites():
    law = build_slip_law([(0.0, 1.0), (1.0, 3.0)])
    assert law(0.25) == pytest.approx(1.5)
    assert law(-1.0) == 1.0 and law(2.0) == 3.0


def test_constant_law_nearest_site():
    law = build_slip_law([(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)], "PiecewiseConstant")
    assert list(law(np.array([0.4, 0.6, 1.7]))) == [1.0, 3.0, 5.0]


def test_cubic_monotone_has_no_overshoot():
    law = build_slip_law([(0, 0.0), (1, 1.0), (2, 1.0), (3, 2.0)], "CubicMonotone")
    x = np.linspace(1, 2, 101)
    assert np.allclose(law(x), 1.0)


def test_window_zero_outside():
    law = build_slip_law([(7.5, 0.02), (13.5, 0.018)], window=(6.0, 16.0))
    assert law(5.0) == 0.0 and law(17.0) == 0.0
    assert law(6.0) == 0.0 and law(16.0) == 0.0
    assert law(7.5) == pytest.approx(0.02)
    assert law(6.75) == pytest.approx(0.01)


def test_periodic_extension():
    law = build_slip_law([(0.1, 1.0), (0.6, 2.0)], period=1.0)
    assert law(1.1) == pytest.approx(1.0)
    # between the last site and the next period's first site
    assert law(0.85) == pytest.approx(1.5)
    assert law(0.0) == pytest.approx(law(1.0))


def test_floor_keeps_raw():
    law = build_slip_law([(0.0, -1e-6), (1.0, 2e-3)], floor=1e-4)
    assert law.values[0] == 1e-4 and law.raw[0] == -1e-6
    assert law(0.0) == 1e-4


def test_law_errors():
    with pytest.raises(EmptySamples):
        build_slip_law([])
    with pytest.raises(NonMonotoneSites):
        build_slip_law([(1.0, 1.0), (0.5, 1.0)])
    with pytest.raises(ValueError):
        build_slip_law([(0.0, 1.0)], window=(0.0, 1.0))
    with pytest.raises(ValueError):
        build_slip_law([(0.0, 1.0)], kind="Spline")


def _setup(nx=12, ny=12):
    mesh = mesh_macro(ChannelDomain(), nx=nx, ny=ny)
    return MacroSetup(mesh, Fluid(1.0, (1.0, 0.0)), (Periodic(), Dirichlet("NoSlipWall")))


def test_solve_macro_rejects_non_positive_law():
    st = _setup(4, 4)
    law = build_slip_law([(0.0, -1e-3), (1.0, 1e-3)])
    with pytest.raises(NonPositiveSlip):
        solve_macro(st.mesh, law, st.fluid, st.bcs)
    sol = solve_macro(st.mesh, law, st.fluid, st.bcs, floor=1e-4)
    assert sol.evaluate([[0.0, 0.0]])[0] > 0


def test_hmm_periodic_channel():
    cfg = HMMConfig((0.0,), EPS ** 2, EPS, MicroDomainSpec(0.0, EPS, 4 * EPS, 10), period=1.0)
    U, law, rep = run_hmm(cfg, _setup(), make_profile("sinusoidal", EPS))
    assert rep.iterations == 1 and rep.loop_passes == 2
    assert rep.macro_solves == 3
    assert 0.05 * EPS < law(0.5) < 0.1 * EPS
    alpha = law(0.5)
    A = 1 / (2 * (1 + alpha))
    assert U.evaluate([[0.5, 0.0]])[0] == pytest.approx(alpha * A, rel=1e-8)
    d = rep.to_dict()
    assert d["final_law"]["raw"] == list(law.raw)


def test_hmm_max_iterations():
    cfg = HMMConfig((0.0,), 1e-30, EPS, MicroDomainSpec(0.0, EPS, 4 * EPS, 6), period=1.0, max_iter=2)
    with pytest.raises(MaxIterationsExceeded):
        run_hmm(cfg, _setup(4, 4), make_profile("sinusoidal", EPS))


def test_config_validation():
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS)
    with pytest.raises(ValueError):
        HMMConfig((0.0,), 0.0, EPS, spec)
    with pytest.raises(NonMonotoneSites):
        HMMConfig((0.5, 0.1), 1e-3, EPS, spec)
    with pytest.raises(ValueError):
        HMMConfig((0.0, 0.01), 1e-3, EPS, spec)
    with pytest.raises(EmptySamples):
        HMMConfig((), 1e-3, EPS, spec)
