"""Deterministic file output: CSV tables and JSON documents.

Every float in a CSV is printed with 17 significant digits so identical
configurations produce byte-identical files; JSON floats use Python's exact
shortest round-trip representation.
"""

from __future__ import annotations

import json
from pathlib import Path

from .attractor import ConnectionGraph, SplitTrajectory
from .dynamics import MONITOR_COLUMNS, Trajectory
from .stability import DecayFit


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n")


def write_branch_csv(path, branch_rows):
    lines = ["beta,n,a_plus,a_minus"]
    for beta, n, a_plus, a_minus in branch_rows:
        lines.append(f"{fmt(beta)},{n},{fmt(a_plus)},{fmt(a_minus)}")
    _write_lines(path, lines)


def write_family_csv(path, family_rows):
    lines = ["beta,i,j,level"]
    for beta, i, j, level in family_rows:
        lines.append(f"{fmt(beta)},{i},{j},{fmt(level)}")
    _write_lines(path, lines)


def family_csv_path(branch_path) -> Path:
    p = Path(branch_path)
    return p.with_name(p.stem + "_families" + (p.suffix or ".csv"))


def write_trajectory_csv(path, traj: Trajectory):
    lines = ["t," + ",".join(MONITOR_COLUMNS)]
    cols = [traj.monitors[name] for name in MONITOR_COLUMNS]
    for i in range(len(traj)):
        lines.append(",".join([fmt(float(traj.t[i]))] + [fmt(float(c[i])) for c in cols]))
    _write_lines(path, lines)


def write_map_csv(path, verdicts):
    lines = ["k,beta,beta_c,beta_bar,nu,region"]
    for v in verdicts:
        lines.append(
            f"{fmt(v.k)},{fmt(v.beta)},{fmt(v.beta_c)},{fmt(v.beta_bar)},{fmt(v.nu)},{v.region}"
        )
    _write_lines(path, lines)


def write_split_csv(path, split: SplitTrajectory):
    lines = ["t,norm_u,norm_v_H0,norm_w_H2,sum_error"]
    for i in range(split.t.size):
        lines.append(",".join(fmt(float(v)) for v in (
            split.t[i], split.norm_u[i], split.norm_v_h0[i],
            split.norm_w_h2[i], split.sum_error[i],
        )))
    _write_lines(path, lines)


def rate_report(fit: DecayFit) -> dict:
    return {"rate": fit.rate, "residual": fit.residual,
            "window": [fit.window[0], fit.window[1]]}


def graph_document(graph: ConnectionGraph) -> dict:
    def probe(p):
        return {"src": p.src, "mode": p.mode, "sign": p.sign, "eps": p.eps,
                "t_end": p.t_end, "final_dist": p.final_dist, "nearest": p.nearest}

    return {
        "nodes": [
            {"id": n.id, "n": n.n, "sign": n.sign, "amplitude": n.amplitude,
             "lyapunov": n.lyapunov}
            for n in graph.nodes
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "mode": e.mode, "sign": e.sign,
             "eps": e.eps, "t_transit": e.t_transit, "final_dist": e.final_dist}
            for e in graph.edges
        ],
        "unresolved": [probe(p) for p in graph.unresolved],
        "returned": [probe(p) for p in graph.returned],
    }


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
