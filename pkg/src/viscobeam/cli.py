"""Command-line front end.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure
(the blowup time is reported in the message).  Machine-readable results go to
stdout or to the requested files; the one-line run summary goes to stderr.
Report subcommands render a PNG figure next to each delimited output file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import figures, reports
from .attractor import connection_graph, simulate_decomposition
from .config import ConfigError, load_config
from .dynamics import NumericalBlowup, simulate
from .spectral import BeamParams
from .statics import bifurcation_sweep, enumerate_equilibria, static_residual
from .stability import estimate_decay_rate, stability_map
from .statics import critical_load


def _summary(msg: str):
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="viscobeam",
                                description="extensible viscoelastic beam toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("statics", help="enumerate steady states")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--json", action="store_true", help="compact JSON output")

    b = sub.add_parser("bifurcation", help="branch table over an axial-load range")
    b.add_argument("--k", type=float, required=True)
    b.add_argument("--beta-min", type=float, required=True)
    b.add_argument("--beta-max", type=float, required=True)
    b.add_argument("--steps", type=int, required=True)
    b.add_argument("--out", type=Path, required=True)

    sim = sub.add_parser("simulate", help="integrate one configuration")
    sim.add_argument("--config", type=Path, required=True)
    sim.add_argument("--out", type=Path, required=True, help="output directory")

    st = sub.add_parser("stability", help="stability analyses")
    st_sub = st.add_subparsers(dest="stability_command", required=True)
    sm = st_sub.add_parser("map", help="region map over a (k, beta) grid")
    sm.add_argument("--k-min", type=float, required=True)
    sm.add_argument("--k-max", type=float, required=True)
    sm.add_argument("--beta-min", type=float, required=True)
    sm.add_argument("--beta-max", type=float, required=True)
    sm.add_argument("--steps", type=int, required=True)
    sm.add_argument("--out", type=Path, required=True)
    sr = st_sub.add_parser("rate", help="fit the energy decay rate of a run")
    sr.add_argument("--config", type=Path, required=True)
    sr.add_argument("--window", type=str, default="0.25:0.9",
                    help="fit window as fractions A:B of the run")

    at = sub.add_parser("attractor", help="attractor structure")
    at_sub = at.add_subparsers(dest="attractor_command", required=True)
    ag = at_sub.add_parser("graph", help="heteroclinic connection graph")
    ag.add_argument("--config", type=Path, required=True)
    ag.add_argument("--eps", type=float, default=1e-2)
    ag.add_argument("--tmax", type=float, default=500.0)
    ag.add_argument("--tol", type=float, default=1e-2)
    ag.add_argument("--out", type=Path, required=True)

    ve = sub.add_parser("verify", help="verification runs")
    ve_sub = ve.add_subparsers(dest="verify_command", required=True)
    vd = ve_sub.add_parser("decomposition", help="co-integrated decaying+compact split")
    vd.add_argument("--config", type=Path, required=True)
    vd.add_argument("--out", type=Path, required=True)

    return p


def _cmd_statics(args) -> int:
    params = BeamParams(beta=args.beta, k=args.k)
    stat = enumerate_equilibria(params)
    residuals = [static_residual(eq.state, params) for eq in stat.equilibria]
    doc = {
        "beta": args.beta,
        "k": args.k,
        "beta_c": critical_load(args.k),
        "classification": stat.classification,
        "n_star": stat.n_star,
        "equilibria": [
            {"n": eq.n, "sign": eq.sign, "amplitude": eq.amplitude}
            for eq in stat.equilibria
        ],
        "families": [
            {"i": f.i, "j": f.j, "level": f.level} for f in stat.families
        ],
        "max_residual": max(residuals) if residuals else 0.0,
    }
    print(json.dumps(doc, indent=None if args.json else 2))
    _summary(
        f"statics: {stat.classification}, {len(stat.equilibria)} equilibria, "
        f"{len(stat.families)} families, n_star={stat.n_star}"
    )
    return 0


def _cmd_bifurcation(args) -> int:
    branch_rows, family_rows = bifurcation_sweep(
        args.k, args.beta_min, args.beta_max, args.steps
    )
    reports.write_branch_csv(args.out, branch_rows)
    fam_path = reports.family_csv_path(args.out)
    reports.write_family_csv(fam_path, family_rows)
    fig_path = args.out.with_suffix(".png")
    figures.save_bifurcation_figure(branch_rows, family_rows, args.k, fig_path)
    live = {n for _, n, _, _ in branch_rows if n > 0}
    _summary(
        f"bifurcation: {len(branch_rows)} branch rows (modes {sorted(live)}), "
        f"{len(family_rows)} family rows -> {args.out}, {fam_path}, {fig_path}"
    )
    return 0


def _cmd_simulate(args) -> int:
    run = load_config(args.config)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = simulate(run.params, run.kernel, run.initial, run.integrator)
    reports.write_trajectory_csv(out_dir / "trajectory.csv", traj)
    reports.write_json(out_dir / "final_state.json", traj.final_state)
    reports.write_json(out_dir / "effective_config.json", run.to_dict())
    figures.save_trajectory_figure(traj, out_dir / "trajectory.png")
    _summary(
        f"simulate: {len(traj)} rows to t={traj.t[-1]:g}, "
        f"energy {traj.energy[0]:.6g} -> {traj.energy[-1]:.6g} -> {out_dir}"
    )
    return 0


def _cmd_stability_map(args) -> int:
    ks = np.linspace(args.k_min, args.k_max, args.steps + 1)
    betas = np.linspace(args.beta_min, args.beta_max, args.steps + 1)
    verdicts = stability_map(ks, betas)
    reports.write_map_csv(args.out, verdicts)
    fig_path = args.out.with_suffix(".png")
    figures.save_map_figure(verdicts, fig_path)
    gap = sum(1 for v in verdicts if v.region == "gap")
    _summary(
        f"stability map: {len(verdicts)} cells ({gap} gap) -> {args.out}, {fig_path}"
    )
    return 0


def _cmd_stability_rate(args) -> int:
    run = load_config(args.config)
    try:
        a, b = (float(x) for x in args.window.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad --window {args.window!r}: expected A:B") from exc
    traj = simulate(run.params, run.kernel, run.initial, run.integrator)
    fit = estimate_decay_rate(traj, window=(a, b))
    print(json.dumps(reports.rate_report(fit)))
    _summary(f"stability rate: {fit.rate:.6g} (residual {fit.residual:.3g}) "
             f"on t in [{fit.window[0]:g}, {fit.window[1]:g}]")
    return 0


def _cmd_attractor_graph(args) -> int:
    run = load_config(args.config)
    graph = connection_graph(
        run.params, run.kernel, run.integrator, perturb_eps=args.eps,
        t_max=args.tmax, tol=args.tol, n_modes=run.modes,
    )
    reports.write_json(args.out, reports.graph_document(graph))
    fig_path = args.out.with_suffix(".png")
    figures.save_graph_figure(graph, fig_path)
    _summary(
        f"attractor graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges, "
        f"{len(graph.returned)} returns, {len(graph.unresolved)} unresolved "
        f"-> {args.out}, {fig_path}"
    )
    return 0


def _cmd_verify_decomposition(args) -> int:
    run = load_config(args.config)
    split = simulate_decomposition(run.initial, run.params, run.kernel, run.integrator)
    reports.write_split_csv(args.out, split)
    fig_path = args.out.with_suffix(".png")
    figures.save_split_figure(split, fig_path)
    _summary(
        f"verify decomposition: max sum defect {split.sum_error.max():.3e}, "
        f"decaying part {split.norm_v_h0[0]:.4g} -> {split.norm_v_h0[-1]:.4g} "
        f"-> {args.out}, {fig_path}"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; map to the invalid-input code
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "statics":
            return _cmd_statics(args)
        if args.command == "bifurcation":
            return _cmd_bifurcation(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "stability":
            if args.stability_command == "map":
                return _cmd_stability_map(args)
            return _cmd_stability_rate(args)
        if args.command == "attractor":
            return _cmd_attractor_graph(args)
        if args.command == "verify":
            return _cmd_verify_decomposition(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except NumericalBlowup as exc:
        _summary(f"numerical failure: {exc}")
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        _summary(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
