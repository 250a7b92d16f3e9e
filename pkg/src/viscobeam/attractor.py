"""Numerical realization of the attractor structure.

Two artifacts: (1) the decaying + compact decomposition of the solution
operator, co-integrated so that the split parts sum to the full solution to
roundoff, and (2) the heteroclinic connection graph between equilibria, which
realizes the attractor as the unstable manifold of the stationary set.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .spectral import (
    PI2,
    PI4,
    BeamParams,
    MemoryKernel,
    ModalState,
    half_power_vector,
    lambda_vector,
)
from .statics import enumerate_equilibria
from .dynamics import (
    ConfigError,
    InitialData,
    IntegratorConfig,
    lyapunov,
    run_with_callback,
    _check_finite,
)


@dataclass(frozen=True)
class SplitConstants:
    """Shift constants making the decaying part coercive.

    gamma = max(1, beta^2/2 + 1) keeps x^2/2 + beta x + gamma >= 1 for all
    spectral values x; alpha = gamma - k, clamped to >= 1 (enlarging gamma
    accordingly, preserving gamma = alpha + k).  m is the closed-form
    supremum of (x^2 + beta x + gamma)/x^2 over x >= pi^2.
    """

    alpha: float
    gamma: float
    m: float


def decomposition_constants(beta: float, k: float, n_modes: int = 64) -> SplitConstants:
    gamma = max(1.0, beta * beta / 2.0 + 1.0)
    alpha = gamma - k
    if alpha < 1.0:
        alpha = 1.0
        gamma = alpha + k
    m = max(1.0, 1.0 + (beta * PI2 + gamma) / PI4)
    # mode-wise verification of the two-sided bound for the first n_modes
    x = half_power_vector(n_modes)
    q = x * x + beta * x + gamma
    if np.any(q < 0.5 * x * x - 1e-9) or np.any(q > m * x * x + 1e-9 * m):
        raise AssertionError("shift constants fail the two-sided spectral bound")
    return SplitConstants(alpha=alpha, gamma=gamma, m=m)


@dataclass
class SplitTrajectory:
    """Co-integrated full/decaying/compact systems on a shared time grid.

    norm_u and norm_v_h0 are SQUARED weighted norms of the full and decaying
    states; norm_w_h2 is the squared higher-order norm of the compact state.
    sum_error is the (non-squared) defect of v + w - u, with the history
    defect measured through its mu-averaged first moment (a Cauchy-Schwarz
    lower bound that vanishes identically under exact co-integration).
    """

    t: np.ndarray
    u_c: np.ndarray
    u_cdot: np.ndarray
    v_c: np.ndarray
    v_cdot: np.ndarray
    w_c: np.ndarray
    w_cdot: np.ndarray
    norm_u: np.ndarray
    norm_v_h0: np.ndarray
    norm_w_h2: np.ndarray
    sum_error: np.ndarray
    constants: SplitConstants


def simulate_decomposition(init: InitialData, params: BeamParams,
                           kernel: MemoryKernel, cfg: IntegratorConfig) -> SplitTrajectory:
    """Advance the full system together with its decaying + compact split.

    The decaying part starts from the full initial data and carries the extra
    restoring term alpha*v; the compact part starts from zero and is forced by
    alpha*v (plus the lateral load).  All three systems share every RK4 stage
    and, crucially, the scalar stiffness coefficient beta + ||u||_1^2 is
    evaluated from the full system's stage values, which makes the pair (v, w)
    linear and their sum satisfy the full system's recursion exactly.
    """
    if kernel is None or kernel.kind != "exponential":
        raise ConfigError("the decomposition runs on the exponential-kernel moment form")
    cfg.validate(init.n_modes, kernel)
    consts = decomposition_constants(params.beta, params.k, max(init.n_modes, 16))
    alpha = consts.alpha

    n = init.n_modes
    dt = cfg.dt
    lam = lambda_vector(n)
    lam2 = lam * lam
    n2pi2 = half_power_vector(n)
    stiff = lam + params.k
    f = params.f_vector(n)
    beta = params.beta
    delta, kappa = kernel.delta, kernel.kappa

    hist0 = init.history_moments(kernel)
    y = np.zeros((12, n))
    y[0], y[1], y[2], y[3] = init.c0, init.cdot0, hist0.w, hist0.m
    y[4], y[5], y[6], y[7] = init.c0, init.cdot0, hist0.w, hist0.m
    # compact part starts from rest with empty history

    k1 = np.empty_like(y); k2 = np.empty_like(y)
    k3 = np.empty_like(y); k4 = np.empty_like(y)

    def rhs(state, out):
        cu, vu, wu, mu = state[0], state[1], state[2], state[3]
        cv, vv, wx, mx = state[4], state[5], state[6], state[7]
        cw, vw, wz, mz = state[8], state[9], state[10], state[11]
        nl = (beta + n2pi2 @ (cu * cu)) * n2pi2
        out[0] = vu
        out[1] = f - stiff * cu - nl * cu - lam * wu
        out[2] = kappa * vu - delta * wu
        out[3] = 2.0 * (vu * wu) - delta * mu
        out[4] = vv
        out[5] = -(stiff + alpha) * cv - nl * cv - lam * wx
        out[6] = kappa * vv - delta * wx
        out[7] = 2.0 * (vv * wx) - delta * mx
        out[8] = vw
        out[9] = f - stiff * cw - nl * cw - lam * wz + alpha * cv
        out[10] = kappa * vw - delta * wz
        out[11] = 2.0 * (vw * wz) - delta * mz

    rows = []

    def emit(step):
        t = step * dt
        _check_finite(t, y)
        rows.append((t, y.copy()))

    n_steps = cfg.n_steps()
    se = int(cfg.sample_every)
    emit(0)
    with np.errstate(all="ignore"):
        for step in range(1, n_steps + 1):
            rhs(y, k1)
            rhs(y + (0.5 * dt) * k1, k2)
            rhs(y + (0.5 * dt) * k2, k3)
            rhs(y + dt * k3, k4)
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % se == 0 or step == n_steps:
                emit(step)

    t = np.array([r[0] for r in rows])
    states = np.stack([r[1] for r in rows])  # (R, 12, n)
    u_c, u_v, u_w, u_m = states[:, 0], states[:, 1], states[:, 2], states[:, 3]
    v_c, v_v, v_w, v_m = states[:, 4], states[:, 5], states[:, 6], states[:, 7]
    w_c, w_v, w_w, w_m = states[:, 8], states[:, 9], states[:, 10], states[:, 11]

    def h0_sq(c, v, m):
        return (c * c) @ lam + (v * v).sum(axis=1) + m @ lam

    norm_u = h0_sq(u_c, u_v, u_m)
    norm_v = h0_sq(v_c, v_v, v_m)
    norm_w_h2 = (w_c * w_c) @ lam2 + (w_v * w_v) @ lam + w_m @ lam2

    dc = v_c + w_c - u_c
    dv = v_v + w_v - u_v
    dw = v_w + w_w - u_w
    sum_err = np.sqrt(
        (dc * dc) @ lam + (dv * dv).sum(axis=1) + ((dw * dw) @ lam) / kappa
    )
    return SplitTrajectory(
        t=t, u_c=u_c, u_cdot=u_v, v_c=v_c, v_cdot=v_v, w_c=w_c, w_cdot=w_v,
        norm_u=norm_u, norm_v_h0=norm_v, norm_w_h2=norm_w_h2,
        sum_error=sum_err, constants=consts,
    )


# ---------------------------------------------------------------------------
# heteroclinic connection graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphNode:
    id: str
    n: int
    sign: int
    amplitude: float
    lyapunov: float
    c: np.ndarray


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    mode: int
    sign: int
    eps: float
    t_transit: float
    final_dist: float


@dataclass(frozen=True)
class ProbeOutcome:
    """A trajectory that came back to its source, or ran out of time."""

    src: str
    mode: int
    sign: int
    eps: float
    t_end: float
    final_dist: float
    nearest: str


@dataclass
class ConnectionGraph:
    nodes: list
    edges: list
    returned: list    # probes that settled back on their source equilibrium
    unresolved: list  # probes not classified by t_max


def _worker_count(max_workers: int | None) -> int:
    cap = os.environ.get("BEAM_THREADS")
    if max_workers is None:
        max_workers = min(4, os.cpu_count() or 1)
    if cap:
        try:
            max_workers = min(max_workers, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, max_workers)


def connection_graph(params: BeamParams, kernel: MemoryKernel,
                     cfg: IntegratorConfig, perturb_eps: float = 1e-2,
                     t_max: float = 500.0, tol: float = 1e-2,
                     rel_tol: float = 1e-9, n_modes: int | None = None,
                     max_workers: int | None = None) -> ConnectionGraph:
    """Probe every equilibrium along its candidate unstable directions.

    Each equilibrium is nudged by perturb_eps on the modal coefficients of
    modes 1 .. n_star + 1 (the straight state's unstable directions plus one
    stable control probe), both signs, with zero velocity and history.  The
    endpoint is classified by the nearest equilibrium in the energy norm once
    the kinetic and memory content has died down; integration exits early as
    soon as a trajectory is within tol/10 of some equilibrium.
    """
    stationary = enumerate_equilibria(params, rel_tol)
    if stationary.classification == "infinite":
        raise ValueError(
            "resonant load: the stationary set is an infinite family, "
            "no finite connection graph exists"
        )
    n_star = stationary.n_star
    probe_modes = list(range(1, n_star + 2))
    size = n_modes or max(2, n_star + 1, max(eq.n for eq in stationary.equilibria))

    def pad(c):
        out = np.zeros(size)
        out[: c.size] = c
        return out

    nodes = []
    for eq in stationary.equilibria:
        c = pad(eq.state.c)
        nodes.append(GraphNode(
            id=eq.label, n=eq.n, sign=eq.sign, amplitude=eq.amplitude,
            lyapunov=lyapunov(ModalState(c, np.zeros(size)), None, params),
            c=c,
        ))

    lam = lambda_vector(size)
    node_cs = np.stack([node.c for node in nodes])
    run_cfg = replace(cfg, t_final=t_max)
    settle_dist = tol / 10.0

    def run_probe(task):
        node_idx, mode, sign = task
        c0 = node_cs[node_idx].copy()
        c0[mode - 1] += sign * perturb_eps
        init = InitialData(c0, np.zeros(size))
        result = {"stopped": False, "t": t_max, "dist": math.inf, "nearest": -1,
                  "settled": False}

        def on_row(t, c, v, _w, eta_sq, _j):
            diff = node_cs - c
            d2 = (diff * diff) @ lam + float(v @ v) + eta_sq
            i = int(np.argmin(d2))
            d = math.sqrt(float(d2[i]))
            settled = math.sqrt(float(v @ v)) + math.sqrt(max(eta_sq, 0.0)) <= tol
            result.update(t=t, dist=d, nearest=i, settled=settled)
            if d <= settle_dist:
                result["stopped"] = True
                return True
            return False

        run_with_callback(params, kernel, init, run_cfg, on_row)
        return result

    tasks = [(i, mode, sign)
             for i in range(len(nodes)) for mode in probe_modes for sign in (+1, -1)]
    workers = _worker_count(max_workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_probe, tasks))
    else:
        results = [run_probe(t) for t in tasks]

    edges, returned, unresolved = [], [], []
    for (node_idx, mode, sign), res in zip(tasks, results):
        src = nodes[node_idx].id
        resolved = res["stopped"] or (res["dist"] <= tol and res["settled"])
        if not resolved:
            unresolved.append(ProbeOutcome(
                src=src, mode=mode, sign=sign, eps=perturb_eps,
                t_end=res["t"], final_dist=res["dist"],
                nearest=nodes[res["nearest"]].id if res["nearest"] >= 0 else "",
            ))
            continue
        dst = nodes[res["nearest"]].id
        if dst == src:
            returned.append(ProbeOutcome(
                src=src, mode=mode, sign=sign, eps=perturb_eps,
                t_end=res["t"], final_dist=res["dist"], nearest=dst,
            ))
        else:
            edges.append(GraphEdge(
                src=src, dst=dst, mode=mode, sign=sign, eps=perturb_eps,
                t_transit=res["t"], final_dist=res["dist"],
            ))
    return ConnectionGraph(nodes=nodes, edges=edges, returned=returned,
                           unresolved=unresolved)
