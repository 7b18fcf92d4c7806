"""Command-line entry point: parses configs, dispatches experiments, writes artifacts.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 undecided
dynamical outcome (rerun with a larger horizon).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Optional

import numpy as np

from . import analysis, evolve, front, io, periodic, presets
from .config import ConfigError, Option, load_config, validate
from .domain import BoundaryKind, Grid, build_grid, field_from_function
from .eigen import critical_speed, cross_section_eigen, drift_eigen, truncation_limit
from .front import NewtonError
from .periodic import PeriodicSpec
from .reaction import (
    Reaction,
    ReactionError,
    make_compact_favorable,
    make_illustration,
    make_time_periodic,
)

LATERAL = {
    "neumann": BoundaryKind.NEUMANN,
    "dirichlet": BoundaryKind.DIRICHLET,
    "periodic_y": BoundaryKind.PERIODIC_Y,
}


def _reaction_schema() -> dict[str, Option]:
    return {
        "reaction.name": Option(str, "illustration",
                                choices=("illustration", "compact_favorable", "confined_strip")),
        "reaction.alpha": Option(float, 0.3),
        "reaction.L": Option(float, 5.0),
        "reaction.theta": Option(float, -2.0),
        "reaction.m": Option(float, 2.0),
        "reaction.mprime": Option(float, 2.0),
        "reaction.K": Option(float, 1.0),
    }


def _grid_schema() -> dict[str, Option]:
    return {
        "grid.X": Option(float, 20.0),
        "grid.H": Option(float, 1.0),
        "grid.nodes_per_unit": Option(float, 10.0),
        "grid.ny": Option(int, 21),
        "grid.lateral": Option(str, "neumann", choices=tuple(LATERAL)),
    }


def _common_schema() -> dict[str, Option]:
    schema = {
        "experiment": Option(str, required=True),
        "out": Option(str, "out"),
        "speed.c": Option(float, 1.0),
        "solver.tol": Option(float, 1e-8),
        "newton.tol": Option(float, 1e-10),
        "workers": Option(int, 0),  # 0 = all cores
    }
    schema.update(_reaction_schema())
    schema.update(_grid_schema())
    return schema


SCHEMAS: dict[str, dict[str, Option]] = {
    "eigen": {**_common_schema(), "eigen.R_list": Option(list, [10.0, 20.0, 40.0])},
    "front": {**_common_schema(), "front.fit_lo": Option(float, 0.5), "front.fit_hi": Option(float, 0.9)},
    "evolve": {
        **_common_schema(),
        "evolve.horizon": Option(float, 100.0),
        "evolve.sample_every": Option(float, 1.0),
        "evolve.dt": Option(float, 0.0),
        "evolve.u0_height": Option(float, 1.0),
        "evolve.u0_width": Option(float, 2.0),
    },
    "illustrate": {
        **_common_schema(),
        "illustrate.L_max": Option(float, 30.0),
        "illustrate.L_count": Option(int, 15),
        "illustrate.tol": Option(float, 0.1),
        "illustrate.dyn_X": Option(float, 30.0),
        "illustrate.horizon": Option(float, 160.0),
        "illustrate.max_horizon": Option(float, 640.0),
        "illustrate.dt": Option(float, 0.05),
    },
    "symmetry": {
        **_common_schema(),
        "symmetry.fit_lo": Option(float, 0.5),
        "symmetry.fit_hi": Option(float, 0.9),
        "symmetry.criterion_tol": Option(float, 1e-6),
    },
    "concentrate": {
        **_common_schema(),
        "concentrate.n_max": Option(int, 10),
        "concentrate.target": Option(float, -0.05),
        "concentrate.wall": Option(float, 500.0),
        "concentrate.plateau_rate": Option(float, 70.0),
    },
    "pulsate": {
        **_common_schema(),
        "pulsate.T": Option(float, 1.0),
        "pulsate.amplitude": Option(float, 0.5),
        "pulsate.steps": Option(int, 64),
        "pulsate.tol": Option(float, 1e-7),
    },
    "sweep": {
        **_common_schema(),
        "sweep.c_max_factor": Option(float, 2.0),
        "sweep.points": Option(int, 11),
        "sweep.horizon": Option(float, 120.0),
    },
}


def build_reaction(cfg: dict[str, Any]) -> Reaction:
    name = cfg["reaction.name"]
    if name == "illustration":
        return make_illustration(cfg["reaction.alpha"], cfg["reaction.L"], cfg["reaction.theta"])
    if name == "compact_favorable":
        return make_compact_favorable(
            cfg["reaction.m"], cfg["reaction.mprime"], cfg["reaction.L"], cfg["reaction.K"]
        )
    if name == "confined_strip":
        setup = presets.concentration_setup(
            c=cfg["speed.c"], wall=cfg.get("concentrate.wall", 500.0),
            plateau_rate=cfg.get("concentrate.plateau_rate", 70.0),
            target=cfg.get("concentrate.target", -0.05),
        )
        return setup.base
    raise ConfigError(f"unknown reaction name {name!r}")


def build_grid_from(cfg: dict[str, Any]) -> Grid:
    X = cfg["grid.X"]
    npu = cfg["grid.nodes_per_unit"]
    nx = max(3, int(round(2 * X * npu)) - 1)
    return build_grid(X, cfg["grid.H"], nx, cfg["grid.ny"], LATERAL[cfg["grid.lateral"]])


def cross_section_lambda(reaction: Reaction, cfg: dict[str, Any], which: str) -> Optional[float]:
    limit = getattr(reaction.growth, which)
    if limit is None:
        return None
    ny = max(cfg["grid.ny"], 21)
    bc = LATERAL[cfg["grid.lateral"]]
    if bc is BoundaryKind.PERIODIC_Y:
        bc = BoundaryKind.NEUMANN
    return cross_section_eigen(limit, ny, bc, H=cfg["grid.H"]).lambda_


def cmd_eigen(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    reaction = build_reaction(cfg)
    bc = LATERAL[cfg["grid.lateral"]]
    R_list = sorted(cfg["eigen.R_list"])
    trunc = truncation_limit(
        reaction.growth, cfg["speed.c"], R_list, cfg["grid.nodes_per_unit"], cfg["grid.ny"],
        bc, H=cfg["grid.H"], tol=cfg["solver.tol"],
    )
    grid = build_grid_from(cfg)
    lam0 = drift_eigen(grid, reaction.growth, 0.0, tol=cfg["solver.tol"]).lambda_
    c_star = critical_speed(lam0)
    writer.write_csv("lambda_R.csv", ["R", "lambda"], [(float(R), lam) for R, lam in trunc.table])
    writer.write_json(
        "eigen.json",
        io.json_safe(
            {
                "experiment": "eigen",
                "sign_convention": io.SIGN_CONVENTION,
                "reaction": reaction.name,
                "c": cfg["speed.c"],
                "lambda": trunc.lambda_limit,
                "lambda0": lam0,
                "c_star": c_star,
                "lambda_R_table": [[float(R), lam] for R, lam in trunc.table],
                "monotone": trunc.monotone,
                "last_gap": trunc.last_gap,
            }
        ),
    )
    return 0


def _front_payload(fr: front.FrontSolution, extra: dict) -> dict:
    payload = {
        "sign_convention": io.SIGN_CONVENTION,
        "residual": fr.residual,
        "mass": fr.mass,
        "c": fr.c,
        "lateral_bc": fr.bc.value,
        "positive": fr.positive,
        "tail_ok": fr.tail_ok,
        "trivial": fr.trivial,
        "iterations": fr.iterations,
        "clamp_magnitude": fr.clamp_magnitude,
    }
    payload.update(extra)
    return io.json_safe(payload)


def _front_rows(fr: front.FrontSolution):
    g = fr.U.grid
    for i in range(g.nx):
        for j in range(g.ny):
            yield (float(g.x[i]), float(g.y[j]), float(fr.U.values[i, j]))


def cmd_front(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    reaction = build_reaction(cfg)
    grid = build_grid_from(cfg)
    fr = front.solve_front(reaction, cfg["speed.c"], grid, tol=cfg["newton.tol"])
    extra: dict[str, Any] = {"experiment": "front"}
    if not fr.trivial:
        window = (cfg["front.fit_lo"], cfg["front.fit_hi"])
        try:
            extra["left_exponent"] = analysis.fit_decay(fr, "left", window).exponent
            extra["right_exponent"] = analysis.fit_decay(fr, "right", window).exponent
        except analysis.FitError:
            extra["left_exponent"] = extra["right_exponent"] = None
    else:
        extra["left_exponent"] = extra["right_exponent"] = None
    if not fr.tail_ok:
        extra["warning"] = "domain too small: outer-10% sup above 1e-6 of global sup"
        print("warning: domain too small", file=sys.stderr)
    writer.write_csv("front.csv", ["x1", "y", "U"], _front_rows(fr))
    writer.write_json("front.json", _front_payload(fr, extra))
    return 0


def cmd_evolve(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    reaction = build_reaction(cfg)
    grid = build_grid_from(cfg)
    h, w = cfg["evolve.u0_height"], cfg["evolve.u0_width"]
    u0 = field_from_function(grid, lambda x, y: h * np.exp(-((x / w) ** 2)))
    dt = cfg["evolve.dt"] if cfg["evolve.dt"] > 0 else None
    traj = evolve.run(
        reaction, cfg["speed.c"], u0, cfg["evolve.horizon"], cfg["evolve.sample_every"], dt=dt
    )
    outcome = evolve.classify(traj)
    writer.write_csv(
        "trajectory.csv",
        ["t", "sup_norm", "l1_norm", "dist_sup", "dist_l1", "tail_sup"],
        traj.rows(),
    )
    writer.write_json(
        "evolve.json",
        io.json_safe(
            {
                "experiment": "evolve",
                "outcome": outcome.value,
                "final_sup": traj.sup_norm[-1],
                "final_l1": traj.l1_norm[-1],
                "max_clamp": traj.max_clamp,
                "sup_eventually_monotone": traj.sup_eventually_monotone,
                "horizon": cfg["evolve.horizon"],
                "c": cfg["speed.c"],
            }
        ),
    )
    return 3 if outcome is evolve.Outcome.UNDECIDED else 0


def cmd_illustrate(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    setup = presets.illustration_setup(
        alpha=cfg["reaction.alpha"],
        theta=cfg["reaction.theta"],
        c=cfg["speed.c"],
        X=cfg["grid.X"],
        nodes_per_unit=cfg["grid.nodes_per_unit"],
        ny=cfg["grid.ny"],
        dyn_X=cfg["illustrate.dyn_X"],
        dyn_dt=cfg["illustrate.dt"],
        horizon=cfg["illustrate.horizon"],
        max_horizon=cfg["illustrate.max_horizon"],
    )
    L_values = np.linspace(0.0, cfg["illustrate.L_max"], cfg["illustrate.L_count"])
    table = []
    for L in L_values:
        rx = make_illustration(cfg["reaction.alpha"], float(L), cfg["reaction.theta"])
        lam = drift_eigen(setup.eigen_grid, rx.growth, cfg["speed.c"], tol=cfg["solver.tol"]).lambda_
        table.append((float(L), lam))
        if verbose:
            print(f"lambda(L={L:.3f}) = {lam:.6f}", file=sys.stderr)
    tol = cfg["illustrate.tol"]
    res_e = analysis.threshold_search(setup.problem, (0.0, cfg["illustrate.L_max"]), "eigen_sign", tol)
    res_d = analysis.threshold_search(
        setup.problem, (0.0, cfg["illustrate.L_max"]), "dynamic_outcome", tol
    )
    lams = [lam for _, lam in table]
    writer.write_csv("lambda_L.csv", ["L", "lambda"], table)
    writer.write_json(
        "lstar.json",
        io.json_safe(
            {
                "experiment": "illustrate",
                "sign_convention": io.SIGN_CONVENTION,
                "alpha": cfg["reaction.alpha"],
                "theta": cfg["reaction.theta"],
                "c": cfg["speed.c"],
                "lambda_L_table": [[L, lam] for L, lam in table],
                "lambda_monotone": bool(all(b <= a + 1e-10 for a, b in zip(lams, lams[1:]))),
                "L_star_eigen": res_e.value,
                "L_star_dynamic": res_d.value,
                "bisection_tol": tol,
                "modes_agree_within_2tol": bool(abs(res_e.value - res_d.value) <= 2 * tol),
            }
        ),
    )
    return 0


def cmd_symmetry(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    reaction = build_reaction(cfg)
    grid = build_grid_from(cfg)
    fr = front.solve_front(reaction, cfg["speed.c"], grid, tol=cfg["newton.tol"])
    if fr.trivial:
        raise NewtonError("front is trivial; symmetry analysis needs a positive front", 0.0)
    lam_alpha = cross_section_lambda(reaction, cfg, "alpha_limit")
    lam_beta = cross_section_lambda(reaction, cfg, "beta_limit")
    if lam_alpha is None or lam_beta is None:
        raise ConfigError("symmetry needs a reaction with declared x1 limits")
    rep = analysis.symmetry_report(
        fr, lam_alpha, lam_beta, cfg["speed.c"],
        criterion_tol=cfg["symmetry.criterion_tol"],
        window_fraction=(cfg["symmetry.fit_lo"], cfg["symmetry.fit_hi"]),
    )
    writer.write_csv("front.csv", ["x1", "y", "U"], _front_rows(fr))
    writer.write_json(
        "symmetry.json",
        io.json_safe(
            {
                "experiment": "symmetry",
                "sign_convention": io.SIGN_CONVENTION,
                "c": cfg["speed.c"],
                "lambda_alpha": lam_alpha,
                "lambda_beta": lam_beta,
                "left_exponent": rep.left_exponent,
                "right_exponent": rep.right_exponent,
                "left_predicted": rep.left_predicted,
                "right_predicted": rep.right_predicted,
                "criterion_lhs": rep.criterion_lhs,
                "criterion_rhs": rep.criterion_rhs,
                "verdict": rep.verdict,
                "asymmetry_sup": rep.asymmetry_sup,
                "left_r_squared": rep.left_fit.r_squared,
                "right_r_squared": rep.right_fit.r_squared,
            }
        ),
    )
    return 0


def _concentrate_task(args: tuple) -> tuple:
    cfg, n = args
    setup = presets.concentration_setup(
        c=cfg["speed.c"], wall=cfg["concentrate.wall"],
        plateau_rate=cfg["concentrate.plateau_rate"], target=cfg["concentrate.target"],
    )
    from .reaction import make_penalized

    rx_n = make_penalized(setup.base, n)
    eig_n = drift_eigen(setup.rect_grid, rx_n.growth, setup.c)
    fr = front.solve_front(rx_n, setup.c, setup.rect_grid, tol=cfg["newton.tol"], eig=eig_n)
    return n, eig_n.lambda_, fr.U.values


def _concentrate_parallel(cfg: dict[str, Any], setup) -> analysis.ConcentrationResult:
    """Worker-pool variant: each n is an independent task; results are merged
    in index order, so outputs are identical to the serial path."""
    from .front import dirichlet_front

    n_max = cfg["concentrate.n_max"]
    rect, c = setup.rect_grid, setup.c
    strip_grid, m = analysis._strip_grid_of(rect, 1.0)
    dres = dirichlet_front(setup.base, c, strip_grid, tol=cfg["newton.tol"])
    if dres.c_star is None or c >= dres.c_star:
        raise ConfigError(f"concentrate needs c < c*_Dirichlet ({dres.c_star})")
    lam_d = drift_eigen(strip_grid, setup.base.growth, c).lambda_
    ud = dres.front.U.values
    ext_cols = np.ones(rect.ny, dtype=bool)
    ext_cols[m - 1 : 2 * m] = False
    tasks = [(cfg, n) for n in range(n_max + 1)]
    with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
        raw = list(pool.map(_concentrate_task, tasks))
    records = []
    prev = None
    for n, lam_n, u in raw:
        dec = float("nan") if prev is None else float(np.min(prev - u))
        records.append(
            analysis.ConcentrationRecord(
                n=n,
                rho_n=-float(2**n),
                lambda_n=lam_n,
                sup_exterior=float(np.max(np.abs(u[:, ext_cols]))),
                dist_to_dirichlet_front=float(np.max(np.abs(u[:, m : 2 * m - 1] - ud))),
                min_decrement=dec,
            )
        )
        prev = u
    lams = [r.lambda_n for r in records]
    sups = [r.sup_exterior for r in records]
    return analysis.ConcentrationResult(
        records=records,
        lambda_d=lam_d,
        dirichlet=dres,
        final_distance=records[-1].dist_to_dirichlet_front,
        lambda_monotone=all(b >= a - 1e-10 for a, b in zip(lams, lams[1:])),
        exterior_monotone=all(b <= a + 1e-10 for a, b in zip(sups, sups[1:])),
        fronts_monotone=all(
            (math.isnan(r.min_decrement) or r.min_decrement >= -1e-10) for r in records
        ),
    )


def cmd_concentrate(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    setup = presets.concentration_setup(
        c=cfg["speed.c"], wall=cfg["concentrate.wall"],
        plateau_rate=cfg["concentrate.plateau_rate"], target=cfg["concentrate.target"],
    )
    workers = cfg["workers"] or (os.cpu_count() or 1)
    if workers > 1:
        cfg = {**cfg, "workers": workers}
        res = _concentrate_parallel(cfg, setup)
    else:
        res = analysis.concentration_sweep(
            setup.base, setup.c, cfg["concentrate.n_max"], setup.rect_grid, tol=cfg["newton.tol"]
        )
    writer.write_csv(
        "concentration.csv",
        ["n", "rho_n", "lambda_n", "sup_exterior", "dist_to_dirichlet_front", "min_decrement"],
        [
            (r.n, r.rho_n, r.lambda_n, r.sup_exterior, r.dist_to_dirichlet_front,
             0.0 if math.isnan(r.min_decrement) else r.min_decrement)
            for r in res.records
        ],
    )
    writer.write_json(
        "concentration.json",
        io.json_safe(
            {
                "experiment": "concentrate",
                "sign_convention": io.SIGN_CONVENTION,
                "c": setup.c,
                "lambda_d": res.lambda_d,
                "final_distance": res.final_distance,
                "lambda_monotone": res.lambda_monotone,
                "exterior_monotone": res.exterior_monotone,
                "fronts_monotone": res.fronts_monotone,
                "lambda_below_dirichlet": bool(all(r.lambda_n < res.lambda_d for r in res.records)),
                "n_max": cfg["concentrate.n_max"],
            }
        ),
    )
    return 0


def cmd_pulsate(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    base = make_compact_favorable(
        cfg["reaction.m"], cfg["reaction.mprime"], cfg["reaction.L"], cfg["reaction.K"]
    )
    rx = make_time_periodic(base.growth, cfg["pulsate.amplitude"], cfg["pulsate.T"])
    X = cfg["grid.X"]
    nx = max(3, int(round(2 * X * cfg["grid.nodes_per_unit"])) - 1)
    grid = build_grid(X, cfg["grid.H"], nx, cfg["grid.ny"], BoundaryKind.PERIODIC_Y)
    spec = PeriodicSpec(T=cfg["pulsate.T"], y_period=cfg["grid.H"],
                        time_steps_per_period=cfg["pulsate.steps"])
    flo = periodic.floquet_eigen(rx.growth, grid, cfg["speed.c"], spec, tol=cfg["solver.tol"])
    payload: dict[str, Any] = {
        "experiment": "pulsate",
        "sign_convention": io.SIGN_CONVENTION,
        "c": cfg["speed.c"],
        "T": cfg["pulsate.T"],
        "lambda_p": flo.lambda_p,
        "multiplier": flo.multiplier,
    }
    if flo.lambda_p >= 0:
        payload.update({"refused": True, "defect": None, "periods": None})
        writer.write_json("pulsate.json", io.json_safe(payload))
        print("extinction regime: no pulsating front (lambda_p >= 0)", file=sys.stderr)
        return 0
    pf = evolve.pulsating_front(rx, cfg["speed.c"], grid, spec, tol=cfg["pulsate.tol"])
    payload.update(
        {
            "refused": False,
            "defect": pf.defect,
            "periods": pf.periods,
            "positive": pf.positive,
            "tail_ok": pf.tail_ok,
        }
    )
    rows = []
    for i in range(grid.nx):
        for j in range(grid.ny):
            rows.append(
                (float(grid.x[i]), float(grid.y[j]))
                + tuple(float(s.values[i, j]) for s in pf.orbit)
            )
    writer.write_csv("orbit.csv", ["x1", "y", "u0", "u1", "u2", "u3"], rows)
    # space-time diagram over one final period along the mid-height row
    st_rows = []
    stepper = evolve.Stepper(rx, grid, cfg["speed.c"], spec.T / spec.time_steps_per_period,
                             s_max=rx.S)
    u = np.asarray(pf.orbit[0].values, dtype=float)
    mid = grid.mid_row
    for k in range(spec.time_steps_per_period + 1):
        t = k * stepper.dt
        for i in range(grid.nx):
            st_rows.append((t, float(grid.x[i]), float(u[i, mid])))
        if k < spec.time_steps_per_period:
            u = stepper.step(u, t)
    writer.write_csv("spacetime.csv", ["t", "x1", "u"], st_rows)
    writer.write_json("pulsate.json", io.json_safe(payload))
    return 0


def _sweep_task(args: tuple) -> tuple:
    cfg, c = args
    reaction = build_reaction(cfg)
    grid = build_grid_from(cfg)
    lam = drift_eigen(grid, reaction.growth, c, tol=cfg["solver.tol"]).lambda_
    u0 = field_from_function(grid, lambda x, y: np.exp(-((x / 2.0) ** 2)))
    traj = evolve.run(reaction, c, u0, cfg["sweep.horizon"], 2.0,
                      stop_below=5e-7, settle_rtol=1e-4)
    outcome = evolve.classify(traj)
    return c, lam, outcome.value


def cmd_sweep(cfg: dict[str, Any], writer: io.ArtifactWriter, verbose: bool) -> int:
    reaction = build_reaction(cfg)
    grid = build_grid_from(cfg)
    lam0 = drift_eigen(grid, reaction.growth, 0.0, tol=cfg["solver.tol"]).lambda_
    c_star = critical_speed(lam0)
    c_max = cfg["sweep.c_max_factor"] * (c_star if c_star else 1.0)
    cs = np.linspace(0.0, c_max, cfg["sweep.points"])
    tasks = [(cfg, float(c)) for c in cs]
    workers = cfg["workers"] or (os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(t) for t in tasks]
    writer.write_csv("phase.csv", ["c", "lambda", "outcome"], results)
    writer.write_json(
        "sweep.json",
        io.json_safe(
            {
                "experiment": "sweep",
                "sign_convention": io.SIGN_CONVENTION,
                "lambda0": lam0,
                "c_star": c_star,
                "points": cfg["sweep.points"],
            }
        ),
    )
    return 3 if any(r[2] == "undecided" for r in results) else 0


COMMANDS = {
    "eigen": cmd_eigen,
    "front": cmd_front,
    "evolve": cmd_evolve,
    "illustrate": cmd_illustrate,
    "symmetry": cmd_symmetry,
    "concentrate": cmd_concentrate,
    "pulsate": cmd_pulsate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Numerical laboratory for forced-speed reaction-diffusion fronts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--workers", type=int, default=None, help="parallel worker count")
        p.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        raw = load_config(args.config)
        schema = SCHEMAS[args.command]
        cfg = validate(raw, schema, args.command)
        if cfg["experiment"] != args.command:
            raise ConfigError(
                f"config experiment {cfg['experiment']!r} does not match subcommand {args.command!r}"
            )
        if args.workers is not None:
            cfg["workers"] = args.workers
        out_dir = args.out or cfg["out"]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    writer = io.ArtifactWriter(out_dir)
    try:
        code = COMMANDS[args.command](cfg, writer, args.verbose)
    except ConfigError as exc:
        writer.discard()
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ReactionError as exc:
        writer.discard()
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError) as exc:
        # RuntimeError covers every solver failure (ConvergenceError,
        # NewtonError, InstabilityError, ...) plus iteration-level aborts
        writer.discard()
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    writer.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
