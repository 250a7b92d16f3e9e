"""Headless matplotlib rendering of the report tables.

Each report subcommand drops a PNG next to its delimited output; matplotlib
is imported lazily with the Agg backend so library users never pay for it.
"""

from __future__ import annotations

from collections import defaultdict


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_bifurcation_figure(branch_rows, family_rows, k, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    branches = defaultdict(list)
    for beta, n, a_plus, a_minus in branch_rows:
        branches[n].append((beta, a_plus, a_minus))
    for n in sorted(branches):
        rows = sorted(branches[n])
        betas = [r[0] for r in rows]
        if n == 0:
            ax.plot(betas, [0.0] * len(betas), "k-", lw=1.2, label="straight state")
            continue
        ax.plot(betas, [r[1] for r in rows], lw=1.4, label=f"mode {n}")
        ax.plot(betas, [r[2] for r in rows], lw=1.4, color=ax.lines[-1].get_color())
    seen = set()
    for beta, i, j, level in family_rows:
        if (i, j) not in seen:
            seen.add((i, j))
            ax.axvline(beta, color="gray", ls=":", lw=1.0)
            ax.text(beta, ax.get_ylim()[1] * 0.9, f"family ({i},{j})",
                    rotation=90, fontsize=8, va="top")
    ax.set_xlabel(r"axial load $\beta$")
    ax.set_ylabel("equilibrium amplitude")
    ax.set_title(f"Buckled branches, k = {k:g}")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_trajectory_figure(traj, path):
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    m = traj.monitors
    ax1.plot(traj.t, m["E_cal"], label="energy")
    ax1.plot(traj.t, m["L"], label="Lyapunov")
    ax1.plot(traj.t, m["E_aug"], label="augmented energy", ls="--", lw=1.0)
    positive = (m["E_cal"] > 0).all() and (m["L"] > 0).all()
    if positive:
        ax1.set_yscale("log")
    ax1.set_ylabel("monitor value")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.plot(traj.t, m["norm_u2"], label=r"$\|u\|_2^2$")
    ax2.plot(traj.t, m["norm_ut"], label=r"$\|u_t\|^2$")
    ax2.plot(traj.t, m["norm_eta_mu"], label="memory norm$^2$")
    ax2.set_xlabel("t")
    ax2.set_ylabel("squared norms")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_map_figure(verdicts, path):
    plt = _plt()
    import numpy as np

    ks = sorted({v.k for v in verdicts})
    betas = sorted({v.beta for v in verdicts})
    codes = {"exponential": 0, "gap": 1, "buckled": 2, "boundary": 3}
    grid = np.full((len(betas), len(ks)), np.nan)
    k_idx = {k: i for i, k in enumerate(ks)}
    b_idx = {b: i for i, b in enumerate(betas)}
    for v in verdicts:
        grid[b_idx[v.beta], k_idx[v.k]] = codes[v.region]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(ks, betas, grid, cmap="viridis", vmin=0, vmax=3, shading="auto")
    kk = np.array(ks, dtype=float)
    ax.plot(kk, [-v for v in _curve(verdicts, "beta_c")], "w-", lw=1.4, label=r"$-\beta_c(k)$")
    ax.plot(kk, [-v for v in _curve(verdicts, "beta_bar")], "w--", lw=1.4, label=r"$-\bar\beta(k)$")
    ax.set_xlabel("foundation stiffness k")
    ax.set_ylabel(r"axial load $\beta$")
    ax.set_title("stability regions (0 exp / 1 gap / 2 buckled / 3 boundary)")
    fig.colorbar(mesh, ax=ax, shrink=0.85)
    ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _curve(verdicts, attr):
    by_k = {}
    for v in verdicts:
        by_k[v.k] = getattr(v, attr)
    return [by_k[k] for k in sorted(by_k)]


def save_split_figure(split, path):
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.semilogy(split.t, split.norm_u, label="full state (H0, squared)")
    ax1.semilogy(split.t, split.norm_v_h0, label="decaying part (H0, squared)")
    ax1.semilogy(split.t, split.norm_w_h2, label="compact part (H2, squared)")
    ax1.set_ylabel("squared norms")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.semilogy(split.t, split.sum_error + 1e-300)
    ax2.set_xlabel("t")
    ax2.set_ylabel("sum defect |v+w-u|")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_graph_figure(graph, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.5, 5))
    xs = {n.id: n.amplitude for n in graph.nodes}
    ys = {n.id: n.lyapunov for n in graph.nodes}
    ax.scatter(list(xs.values()), list(ys.values()), s=70, zorder=3, color="tab:blue")
    for n in graph.nodes:
        ax.annotate(n.id, (xs[n.id], ys[n.id]), textcoords="offset points",
                    xytext=(6, 6), fontsize=9)
    for e in graph.edges:
        ax.annotate(
            "", xy=(xs[e.dst], ys[e.dst]), xytext=(xs[e.src], ys[e.src]),
            arrowprops=dict(arrowstyle="-|>", color="tab:red", lw=1.4),
        )
    ax.set_xlabel("physical amplitude")
    ax.set_ylabel("Lyapunov value")
    ax.set_title("heteroclinic connections")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
