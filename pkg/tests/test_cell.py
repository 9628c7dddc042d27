import pytest

from roughwall.cell import decay_check, richardson_chibar, solve_cell_problem
from roughwall.errors import InsufficientSamples, TruncationTooLow
from roughwall.geometry import constant_cell, flat_cell, sinusoidal_cell


def test_flat_cell_has_zero_slip():
    sol = solve_cell_problem(flat_cell(), 4.0, 8)
    assert sol.chibar == pytest.approx(0.0, abs=1e-14)
    assert decay_check(sol).no_decay_needed


def test_constant_cell():
    sol = solve_cell_problem(constant_cell(0.5), 4.0, 8)
    assert sol.chibar == pytest.approx(-0.5, abs=1e-12)
    assert sol.slip_constant == pytest.approx(0.0, abs=1e-12)


def test_sinusoid_against_oracle(oracles):
    ref = oracles["sinusoidal_cell"]
    sol = solve_cell_problem(sinusoidal_cell(1.0), 8.0, 32)
    assert sol.chibar == pytest.approx(ref["height_8"]["values"]["32"], abs=1e-9)
    assert abs(sol.chibar - ref["chibar"]) < 2e-3
    assert abs(sol.top_vertical_mean) < 1e-10


def test_richardson_moves_towards_oracle(oracles):
    ref = oracles["sinusoidal_cell"]["chibar"]
    value, details = richardson_chibar(sinusoidal_cell(1.0), heights=(8.0,), resolutions=(16, 32))
    coarse = details[8.0]["values"][1]
    assert abs(value - ref) < abs(coarse - ref)


def test_truncation_too_low():
    with pytest.raises(TruncationTooLow):
        solve_cell_problem(sinusoidal_cell(1.0), 1.5, 8)


def test_decay_needs_samples():
    sol = solve_cell_problem(sinusoidal_cell(1.0), 4.0, 8)
    sol.decay_samples = sol.decay_samples[:2]
    with pytest.raises(InsufficientSamples):
        decay_check(sol)
