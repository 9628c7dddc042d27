"""Acceptance checks, one or more tests per numbered criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
PASS/FAIL per criterion.  The experiment cases are solved once per session.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from roughwall.bench import CASES, default_case, hmm_config, macro_setup, case_profile, report_json
from roughwall.cell import decay_check, solve_cell_problem
from roughwall.coupling import HMMConfig, MacroSetup, build_slip_law, run_hmm, solve_macro
from roughwall.fem import Dirichlet, FlowProblem, Periodic, SlipRobin, solve_stationary
from roughwall.geometry import constant_cell, flat_cell, make_profile, sawtooth_cell, sinusoidal_cell
from roughwall.mesh import ChannelDomain, audit_mesh, mesh_macro, mesh_micro, mesh_rough_dns
from roughwall.micro import Fluid, MicroDomainSpec, build_micro_bc, extract_slip, solve_micro

EPS = 0.025


def _channel(nx=24, ny=24, slip=None):
    mesh = mesh_macro(ChannelDomain(), nx=nx, ny=ny)
    wall = Dirichlet("SlipWall") if slip is None else SlipRobin("SlipWall", slip)
    bcs = [Periodic(), wall, Dirichlet("NoSlipWall")]
    return solve_stationary(FlowProblem(mesh, 1.0, (1.0, 0.0), bcs))


@pytest.mark.criterion(1)
def test_manufactured_poiseuille():
    t = time.perf_counter()
    sol = _channel()
    y = sol.space.nodes[:, 1]
    err = np.max(np.abs(sol.u1 - y * (1 - y) / 2))
    print(f"max nodal error {err:.2e}")
    assert err <= 1e-8
    assert np.max(np.abs(sol.u2)) <= 1e-8
    assert time.perf_counter() - t < 10


@pytest.mark.criterion(2)
def test_navier_slip_poiseuille():
    t = time.perf_counter()
    alpha = 0.0125
    sol = _channel(slip=alpha)
    A = 1 / (2 * (1 + alpha))
    y = sol.space.nodes[:, 1]
    exact = -y * y / 2 + A * y + alpha * A
    err = np.max(np.abs(sol.u1 - exact))
    print(f"max nodal error {err:.2e}")
    assert err <= 1e-8
    assert time.perf_counter() - t < 10


@pytest.mark.criterion(3)
def test_cell_bounds():
    t = time.perf_counter()
    for cell in (flat_cell(), constant_cell(0.7), sinusoidal_cell(1.0), sawtooth_cell(0.75)):
        sol = solve_cell_problem(cell, 8.0, 32)
        print(cell.name, sol.chibar, cell.H)
        assert 0.0 <= -sol.chibar <= cell.H + 1e-6
    assert time.perf_counter() - t < 30


@pytest.mark.criterion(3)
def test_constant_cell_exact():
    sol = solve_cell_problem(constant_cell(0.7), 8.0, 16)
    assert abs(-sol.chibar - 0.7) <= 1e-10
    assert np.max(np.abs(sol.chi.u1 + 0.7)) <= 1e-10


@pytest.mark.criterion(4)
def test_cell_decay_and_truncation():
    t = time.perf_counter()
    lo = solve_cell_problem(sinusoidal_cell(1.0), 8.0, 32)
    hi = solve_cell_problem(sinusoidal_cell(1.0), 16.0, 32)
    rate = decay_check(lo).rate
    gap = abs(lo.chibar - hi.chibar)
    print(f"decay rate {rate:.3f}, truncation gap {gap:.2e}")
    assert rate >= 5.0
    assert gap <= 1e-6
    assert time.perf_counter() - t < 60


def _hmm_alpha(eps, **micro):
    case = replace(default_case("periodic_channel", eps), **micro)
    _, law, _ = run_hmm(hmm_config(case), macro_setup(case), case_profile(case))
    return law.raw[0]


@pytest.mark.criterion(5)
def test_periodic_convergence(oracles):
    t = time.perf_counter()
    c = oracles["sinusoidal_cell"]
    const = c["chibar"] + c["H"]
    eps = np.array([0.1, 0.05, 0.025])
    err = np.array([abs(_hmm_alpha(e, micro_resolution=64) - e * const) for e in eps])
    slope = np.polyfit(np.log(eps), np.log(err), 1)[0]
    print("errors", err, "slope", slope)
    assert slope >= 1.2
    assert err[-1] <= 0.5 * 0.025 ** 1.5
    assert time.perf_counter() - t < 15 * 60


@pytest.mark.criterion(6)
@pytest.mark.parametrize("case_id", CASES)
def test_one_iteration(experiment, case_id):
    assert experiment(case_id).report["iterations"] == 1


@pytest.mark.criterion(7)
def test_periodic_vs_dirichlet(experiment):
    per = experiment("periodic_channel").report["slip"]["alpha"][0]
    dir_ = _hmm_alpha(EPS, bc_mode="QuadraticDirichlet")
    rel = abs(per - dir_) / max(per, dir_)
    print(f"periodic {per:.6g} quadratic {dir_:.6g} relative {rel:.4f}")
    assert rel <= 0.03


@pytest.mark.criterion(8)
def test_sawtooth_spread(experiment):
    slip = experiment("sawtooth_wavy").report["slip"]
    assert len(slip["alpha"]) == 5
    assert slip["spread"] <= 0.015


@pytest.mark.criterion(9)
def test_modulated_spread(experiment):
    slip = experiment("modulated_channel").report["slip"]
    assert len(slip["alpha"]) == 7
    assert 0.10 <= slip["spread"] <= 0.40


@pytest.mark.criterion(10)
def test_bfs_contrast_and_recirculation(experiment):
    rep = experiment("backward_facing_step").report
    a1, a2 = rep["slip"]["alpha"]
    contrast = abs(a1 - a2) / max(a1, a2)
    rec = rep["recirculation"]
    print(f"contrast {contrast:.4f}, recirculation {rec}")
    assert 0.04 <= contrast <= 0.25
    assert None not in rec.values()
    assert abs(rec["hmm"] - rec["dns"]) < abs(rec["noslip"] - rec["dns"])


@pytest.mark.criterion(11)
@pytest.mark.parametrize("case_id", CASES)
def test_accuracy_ordering(experiment, case_id):
    res = experiment(case_id)
    err = res.report["errors_u1"]
    checked = 0
    for h in res.case.heights:
        if h < res.case.epsilon:
            continue
        key = repr(h)
        print(case_id, h, err["hmm"][key], err["noslip"][key])
        assert err["hmm"][key] < err["noslip"][key]
        checked += 1
    assert checked > 0


@pytest.mark.criterion(12)
@pytest.mark.parametrize("case_id", CASES)
def test_cost_budget(experiment, case_id):
    assert experiment(case_id).report["cells"]["ratio"] <= 0.25


@pytest.mark.criterion(13)
def test_mesh_audits():
    prof = make_profile("sinusoidal", EPS)
    meshes = [
        mesh_macro(ChannelDomain(), nx=10, ny=10),
        mesh_rough_dns(prof, ChannelDomain(0.0, 0.25), 16, 12),
        mesh_micro(prof, 0.0, EPS, 4 * EPS, 8, periodic=True),
        mesh_micro(make_profile("sawtooth", EPS), 0.01, EPS, 4 * EPS, 8, sampling="arclength"),
    ]
    for m in meshes:
        assert audit_mesh(m) == []


@pytest.mark.criterion(13)
def test_quadratic_constraints_exact():
    prof = make_profile("quasi_periodic", EPS)
    macro = _channel(12, 12)
    spec = MicroDomainSpec(0.3, 5 * EPS, 4 * EPS, bc_mode="QuadraticDirichlet")
    bc = build_micro_bc(macro, spec, prof)
    res = bc.constraint_residuals()
    assert len(res) == 18
    assert max(abs(v) for v in res.values()) <= 1e-12
    assert abs(bc.net_flux()) <= 1e-12


@pytest.mark.criterion(13)
def test_extract_slip_scale_invariance():
    prof = make_profile("sinusoidal", EPS)
    macro = _channel(12, 12)
    spec = MicroDomainSpec(0.0, EPS, 4 * EPS, 8)
    sol = solve_micro(spec, build_micro_bc(macro, spec, prof), prof, Fluid())
    a = extract_slip(sol, spec)
    for c in (1e-6, 3.0, 1e5):
        assert abs(extract_slip(sol.scaled(c), spec) - a) <= 1e-12 * abs(a)


@pytest.mark.criterion(13)
def test_slip_law_interpolates():
    sites = [0.1, 0.35, 0.6, 0.9]
    vals = [1e-3, 2e-3, 1.5e-3, 4e-3]
    for kind in ("PiecewiseLinear", "PiecewiseConstant", "CubicMonotone"):
        law = build_slip_law(zip(sites, vals), kind)
        assert np.allclose(law(np.array(sites)), vals, rtol=0, atol=1e-15)


@pytest.mark.criterion(13)
def test_thread_determinism():
    case = default_case("modulated_channel")
    setup = MacroSetup(mesh_macro(ChannelDomain(slip_window=None), nx=16, ny=16),
                       Fluid(case.nu, case.forcing), macro_setup(case).bcs)
    prof = case_profile(case)
    out = []
    for threads in (1, 4):
        cfg = replace(hmm_config(case), threads=threads)
        _, _, rep = run_hmm(cfg, setup, prof)
        out.append(report_json(rep.to_dict()))
    assert out[0] == out[1]
