"""Command line interface: ``roughwall <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .cell import decay_check, solve_cell_problem
from .coupling import run_hmm, solve_macro
from .errors import ConfigError, RoughWallError
from .geometry import constant_cell, flat_cell, sawtooth_cell, sinusoidal_cell
from .micro import MicroDomainSpec, build_micro_bc, extract_slip, solve_micro

CELLS = {
    "flat": lambda: flat_cell(),
    "sinusoidal": lambda: sinusoidal_cell(1.0),
    "sawtooth": lambda: sawtooth_cell(0.75),
    "constant": lambda: constant_cell(0.7),
}


def _case(args):
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        case = bench.case_from_config(data)
    else:
        case = bench.default_case(args.case, args.eps, args.nu)
    upd = {}
    if getattr(args, "sites", None):
        upd["sites"] = tuple(float(s) for s in args.sites.split(","))
    if getattr(args, "tol", None) is not None:
        upd["tol"] = args.tol
    if getattr(args, "threads", None):
        upd["threads"] = args.threads
    return replace(case, **upd) if upd else case


def _out(args):
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_meshgen(args):
    case = _case(args)
    mesh = bench.dns_mesh(case) if args.which == "dns" else bench.macro_mesh(case)
    path = _out(args) / f"{case.case_id}_{args.which}.json"
    mesh.save(path)
    _print({"mesh": str(path), "cells": mesh.n_cells, "vertices": mesh.n_vertices})


def cmd_cell(args):
    sol = solve_cell_problem(CELLS[args.profile](), args.height, args.res)
    rep = decay_check(sol)
    _print({"chibar": sol.chibar, "H": sol.H, "decay_rate": rep.rate, "cells": sol.n_cells})
    if args.slices:
        lines = ["y2,mean_chi1,oscillation"]
        for y, osc in sol.decay_samples:
            mean = sol.chi.line_average(y, 0.0, 1.0, "u1")
            lines.append(f"{y!r},{mean!r},{osc!r}")
        Path(args.slices).write_text("\n".join(lines) + "\n")


def cmd_dns(args):
    case = _case(args)
    sol = bench.solve_dns(case)
    table = bench.sample_profiles(sol, case.heights, case.x_range)
    bench.export_profiles({"dns": table}, _out(args))
    _print({"case": case.case_id, "cells": sol.mesh.n_cells})


def cmd_micro(args):
    case = _case(args)
    profile = bench.case_profile(case)
    setup = bench.macro_setup(case)
    macro = solve_macro(setup.mesh, None, setup.fluid, setup.bcs)
    site = args.site if args.site is not None else case.sites[0]
    spec = MicroDomainSpec(site, args.width or case.micro_width, case.micro_height,
                           args.res or case.micro_resolution, args.mode or case.bc_mode,
                           rows=None if args.res else case.micro_rows)
    sol = solve_micro(spec, build_micro_bc(macro, spec, profile), profile, setup.fluid)
    alpha = extract_slip(sol, spec)
    xs = np.linspace(spec.site, spec.site + spec.width, bench.N_SAMPLES)
    heights = [h for h in case.heights if h <= spec.height]
    table = bench.sample_profiles(sol, heights, (xs[0], xs[-1]))
    bench.export_profiles({"micro": table}, _out(args))
    _print({"site": site, "alpha": alpha, "mode": spec.bc_mode, "cells": sol.mesh.n_cells})


def cmd_hmm(args):
    case = _case(args)
    U, law, rep = run_hmm(bench.hmm_config(case), bench.macro_setup(case), bench.case_profile(case))
    out = _out(args)
    table = bench.sample_profiles(U, case.heights, case.x_range)
    d = rep.to_dict()
    d["case"] = case.case_id
    bench.export_profiles({"hmm": table}, out)
    (out / "hmm_report.json").write_text(bench.report_json(d))
    _print({"alpha": list(law.raw), "iterations": rep.iterations})


def cmd_compare(args):
    ref = bench.ProfileTable.from_csv(Path(args.ref).read_text())
    cand = bench.ProfileTable.from_csv(Path(args.cand).read_text())
    err = bench.field_error(ref, cand, args.quantity)
    _print({repr(h): e for h, e in err.items()})


def cmd_run(args):
    case = _case(args)
    res = bench.run_experiment(case)
    bench.export_profiles(res.tables, _out(args), res.report)
    _print({"case": case.case_id, "errors_u1": res.report["errors_u1"],
            "alpha": res.report["slip"]["alpha"], "cell_ratio": res.report["cells"]["ratio"]})


def _case_args(p):
    p.add_argument("--case", default="periodic_channel", choices=bench.CASES)
    p.add_argument("--config", help="JSON case configuration")
    p.add_argument("--eps", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--sites", help="comma separated micro sites")
    p.add_argument("--tol", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default="out")


def build_parser():
    ap = argparse.ArgumentParser(prog="roughwall", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("meshgen", help="write a DNS or macro mesh")
    _case_args(p)
    p.add_argument("--which", choices=("dns", "macro"), default="macro")
    p.set_defaults(fn=cmd_meshgen)

    p = sub.add_parser("cell", help="solve the periodic cell problem")
    p.add_argument("--profile", choices=sorted(CELLS), default="sinusoidal")
    p.add_argument("--height", type=float, default=8.0)
    p.add_argument("--res", type=int, default=32)
    p.add_argument("--slices", help="CSV file for slice means and oscillations")
    p.set_defaults(fn=cmd_cell)

    p = sub.add_parser("dns", help="resolved simulation of a case")
    _case_args(p)
    p.set_defaults(fn=cmd_dns)

    p = sub.add_parser("micro", help="one micro solve driven by the no-slip macro flow")
    _case_args(p)
    p.add_argument("--site", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--mode", choices=("PeriodicFreeStream", "QuadraticDirichlet"))
    p.add_argument("--res", type=int)
    p.set_defaults(fn=cmd_micro)

    p = sub.add_parser("hmm", help="HMM macro solution of a case")
    _case_args(p)
    p.set_defaults(fn=cmd_hmm)

    p = sub.add_parser("compare", help="relative L2 error between two profile CSVs")
    p.add_argument("--ref", required=True)
    p.add_argument("--cand", required=True)
    p.add_argument("--quantity", choices=("u1", "du1dx2"), default="u1")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("run", help="DNS, no-slip and HMM with comparison report")
    _case_args(p)
    p.set_defaults(fn=cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.fn(args)
    except RoughWallError as exc:
        print(json.dumps(exc.record(), default=str), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(json.dumps({"error": "invalid_argument", "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
