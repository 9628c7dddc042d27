import json
import math

import numpy as np
import pytest

from roughwall import bench
from roughwall.errors import ConfigError, GridMismatch, NoReattachment


@pytest.mark.parametrize("case_id", bench.CASES)
def test_default_cases_round_trip(case_id):
    case = bench.default_case(case_id)
    cfg = bench.case_to_config(case)
    assert set(cfg) == {"geometry", "fluid", "roughness", "hmm", "output"}
    back = bench.case_from_config(json.loads(json.dumps(cfg)))
    assert back == case


def test_case_defaults():
    c = bench.default_case("periodic_channel")
    assert c.tolerance == pytest.approx(0.025 ** 2)
    assert c.heights[0] == pytest.approx(0.025 / 4)
    b = bench.default_case("backward_facing_step")
    assert b.is_bfs and b.sites == (7.5, 13.5)
    assert len(bench.default_case("modulated_channel").sites) == 7
    assert len(bench.default_case("sawtooth_wavy").sites) == 5


def test_unknown_case_and_bad_config():
    with pytest.raises(ConfigError):
        bench.default_case("nope")
    cfg = bench.case_to_config(bench.default_case("periodic_channel"))
    cfg["fluid"]["bogus"] = 1
    with pytest.raises(ConfigError):
        bench.case_from_config(cfg)


def test_epsilon_override():
    c = bench.default_case("periodic_channel", 0.05, 2.0)
    assert c.epsilon == 0.05 and c.nu == 2.0 and c.micro_width == 0.05


def _table(vals, heights=(0.1, 0.2)):
    n = len(vals)
    x = np.tile(np.linspace(0, 1, n), len(heights))
    h = np.repeat(heights, n)
    u = np.tile(vals, len(heights)).astype(float)
    return bench.ProfileTable(x, h, u, 2 * u)


def test_field_error():
    ref = _table([1.0, 2.0, 2.0])
    cand = _table([1.0, 2.0, 3.0])
    err = bench.field_error(ref, cand)
    assert err[0.1] == pytest.approx(1 / 3)
    assert bench.field_error(ref, ref)[0.2] == 0.0
    ref.u1[0] = np.nan
    assert math.isfinite(bench.field_error(ref, cand)[0.1])
    with pytest.raises(GridMismatch):
        bench.field_error(ref, _table([1.0, 2.0, 3.0], (0.1,)))


def test_profile_csv_round_trip():
    t = _table([0.1, 1 / 3, 2.5e-7])
    back = bench.ProfileTable.from_csv(t.to_csv())
    assert np.allclose(back.u1, t.u1, rtol=1e-14)
    with pytest.raises(ConfigError):
        bench.ProfileTable.from_csv("a,b\n1,2\n")


def test_recirculation_from_callable():
    shear = lambda x, y: (x - 8.25) * np.ones_like(y)
    L = bench.recirculation_length(shear, (5.0, 0.0), 0.025, x_end=20.0)
    assert L == pytest.approx(3.25, abs=1e-8)
    with pytest.raises(NoReattachment):
        bench.recirculation_length(lambda x, y: np.ones_like(x), (5.0, 0.0), 0.025, x_end=20.0)


def test_cost_and_tables_for_small_case(tmp_path):
    from dataclasses import replace

    case = replace(bench.default_case("periodic_channel", 0.1), macro_nx=10, macro_ny=10,
                   dns_wall_resolution=8, dns_rows=12, micro_resolution=6)
    res = bench.run_experiment(case)
    rep = res.report
    assert rep["iterations"] == 1
    assert set(res.tables) == {"dns", "noslip", "hmm"}
    assert rep["cells"]["ratio"] == pytest.approx(
        (rep["cells"]["macro"] + sum(rep["cells"]["micro"])) / rep["cells"]["dns"])
    bench.export_profiles(res.tables, tmp_path, rep)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["dns.csv", "hmm.csv", "noslip.csv", "report.json"]
    assert json.loads((tmp_path / "report.json").read_text())["case"] == "periodic_channel"
