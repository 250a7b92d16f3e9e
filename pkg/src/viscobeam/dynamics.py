"""Time integration of the beam-with-memory system and its energy monitors.

The modal equations of motion are

    cddot_n + lambda_n c_n + lambda_n int mu(s) eta_n(t,s) ds
            + (beta + sum_m m^2 pi^2 c_m^2) n^2 pi^2 c_n + k c_n = f_n,

coupled to the exact history transport d_t eta = -d_s eta + d_t u.  Two
backends advance this system:

* ``ode_reduction`` (exponential kernels): the weighted history moments
  w_n = int mu eta_n ds and m_n = int mu eta_n^2 ds close into the ODEs

      wdot_n = -delta w_n + kappa cdot_n,
      mdot_n = -delta m_n + 2 cdot_n w_n,

  which follow exactly from the transport equation, eta(0) = 0 and
  mu' = -delta mu by parts.  The full system is advanced with classical RK4.

* ``history_quadrature``: eta_n(t, s) = c_n(t) - c_n(t - s) is reconstructed
  along characteristics from a ring buffer of past displacements on a uniform
  s-grid; the memory integral is a trapezoid quadrature on [0, s_max] plus the
  kernel's analytic tail times the oldest buffered value.  Time stepping is
  Stoermer leapfrog with the memory force held at whole steps.

Stability bounds enforced at configuration time (linear, CFL-type): the
leapfrog scheme requires dt * sqrt(lambda_N) <= 2, the RK4 moment scheme
dt * sqrt(lambda_N) <= 2 sqrt(2) (its imaginary-axis limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    LAMBDA_1,
    PI2,
    BeamParams,
    HistoryState,
    MemoryKernel,
    ModalState,
    half_power_vector,
    lambda_vector,
    memory_norm_sq,
    modal_norms,
)

BACKENDS = ("ode_reduction", "history_quadrature")

MONITOR_COLUMNS = (
    "E_cal", "E_aug", "L", "Phi",
    "norm_u", "norm_u1", "norm_u2", "norm_ut", "norm_eta_mu", "J_eta",
)

BLOWUP_LIMIT = 1e12


class NumericalBlowup(RuntimeError):
    """State became non-finite (or absurdly large) during integration."""

    def __init__(self, t: float):
        self.t = float(t)
        super().__init__(f"numerical blowup at t={t:.6g}")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    backend: str = "ode_reduction"
    dt: float = 1e-3
    t_final: float = 10.0
    sample_every: int = 10
    s_max_tol: float = 1e-8    # tail-mass tolerance for the quadrature window
    ds: float | None = None    # s-grid step; defaults to dt, must be a multiple of dt

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive")
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise ConfigError("t_final must be positive")
        if int(self.sample_every) < 1:
            raise ConfigError("sample_every must be >= 1")
        if not (0 < self.s_max_tol < 1):
            raise ConfigError("s_max_tol must lie in (0, 1)")

    @property
    def ds_value(self) -> float:
        return self.dt if self.ds is None else self.ds

    @property
    def s_stride(self) -> int:
        """Integer ratio ds/dt: past values exist only at whole time steps."""
        ratio = self.ds_value / self.dt
        stride = round(ratio)
        if stride < 1 or abs(ratio - stride) > 1e-9 * max(1.0, ratio):
            raise ConfigError("ds must be a positive integer multiple of dt")
        return stride

    def n_steps(self) -> int:
        n = round(self.t_final / self.dt)
        return max(1, int(n))

    def validate(self, n_modes: int, kernel: MemoryKernel | None):
        _ = self.s_stride
        omega_max = n_modes * n_modes * PI2  # sqrt(lambda_N)
        limit = 2.0 * math.sqrt(2.0) if self.backend == "ode_reduction" else 2.0
        if self.dt * omega_max > limit * (1 + 1e-12):
            raise ConfigError(
                f"dt={self.dt:g} exceeds the stability bound {limit / omega_max:.3e} "
                f"for N={n_modes} on backend {self.backend!r}"
            )
        if self.backend == "ode_reduction" and kernel is not None and kernel.kind != "exponential":
            raise ConfigError("ode_reduction requires an exponential kernel")


@dataclass(frozen=True)
class InitialData:
    """Modal initial data plus an optional tabulated initial history.

    A missing table means the beam sat at its initial deflection for all
    past times, hence eta0 = 0.  A table eta0[j, n] gives eta at s = j * ds.
    """

    c0: np.ndarray
    cdot0: np.ndarray
    eta0: np.ndarray | None = None
    eta0_ds: float | None = None

    def __post_init__(self):
        c0 = np.atleast_1d(np.asarray(self.c0, dtype=float)).copy()
        v0 = np.atleast_1d(np.asarray(self.cdot0, dtype=float)).copy()
        if c0.shape != v0.shape or c0.ndim != 1:
            raise ConfigError("c0 and cdot0 must be 1-D arrays of equal length")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "cdot0", v0)
        if self.eta0 is not None:
            table = np.atleast_2d(np.asarray(self.eta0, dtype=float)).copy()
            if table.shape[1] != c0.size:
                raise ConfigError("eta0 table width must equal the number of modes")
            if not np.allclose(table[0], 0.0, atol=1e-12):
                raise ConfigError("eta0 must vanish at s = 0")
            if self.eta0_ds is None or self.eta0_ds <= 0:
                raise ConfigError("eta0 tables need a positive eta0_ds")
            object.__setattr__(self, "eta0", table)

    @property
    def n_modes(self) -> int:
        return self.c0.size

    def history_moments(self, kernel: MemoryKernel | None) -> HistoryState:
        if kernel is None or self.eta0 is None:
            return HistoryState.zero_moments(self.n_modes)
        return HistoryState.moments_from_table(self.eta0, self.eta0_ds, kernel)

    def eta0_at(self, s: np.ndarray) -> np.ndarray:
        """Initial history resampled on the integrator s-grid (held past the table)."""
        s = np.asarray(s, dtype=float)
        if self.eta0 is None:
            return np.zeros((s.size, self.n_modes))
        idx = np.rint(s / self.eta0_ds).astype(int)
        aligned = np.abs(idx * self.eta0_ds - s) <= 1e-9 * np.maximum(1.0, s)
        if not np.all(aligned):
            raise ConfigError("eta0 table must be sampled on the integrator s-grid")
        idx = np.minimum(idx, self.eta0.shape[0] - 1)
        return self.eta0[idx]


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: ModalState
    monitors: dict


@dataclass
class Trajectory:
    """Monitor rows of one run; all norm columns hold SQUARED norms."""

    t: np.ndarray
    c: np.ndarray
    cdot: np.ndarray
    w_mom: np.ndarray
    monitors: dict
    params: BeamParams
    kernel: MemoryKernel | None
    cfg: IntegratorConfig
    phi_eps: float
    final_state: dict

    def __len__(self):
        return self.t.size

    @property
    def energy(self) -> np.ndarray:
        return self.monitors["E_cal"]

    @property
    def lyapunov(self) -> np.ndarray:
        return self.monitors["L"]

    def sample(self, i: int) -> TrajectorySample:
        return TrajectorySample(
            t=float(self.t[i]),
            state=ModalState(self.c[i], self.cdot[i]),
            monitors={k: float(v[i]) for k, v in self.monitors.items()},
        )

    def __iter__(self):
        return (self.sample(i) for i in range(len(self)))


# ---------------------------------------------------------------------------
# monitors
# ---------------------------------------------------------------------------


def default_phi_eps(k: float) -> float:
    """Monitor choice for the perturbation weight: 0.5 min(1, k), or 0.5 at k=0."""
    return 0.5 * min(1.0, k) if k > 0 else 0.5


def energy(state: ModalState, history: HistoryState | None = None,
           kernel: MemoryKernel | None = None) -> float:
    """Total energy ||u||_2^2 + ||u_t||^2 + ||eta||_mu^2 (squared norms)."""
    _, _, h2 = modal_norms(state)
    ut = float(np.dot(state.cdot, state.cdot))
    mem = memory_norm_sq(history, kernel) if history is not None and kernel is not None else 0.0
    return h2 + ut + mem


def augmented_energy(state: ModalState, history: HistoryState | None,
                     params: BeamParams, kernel: MemoryKernel | None = None) -> float:
    l2, h1, _ = modal_norms(state)
    e = energy(state, history, kernel)
    return e + 0.5 * (params.beta + h1) ** 2 + params.k * l2


def lyapunov(state: ModalState, history: HistoryState | None,
             params: BeamParams, kernel: MemoryKernel | None = None) -> float:
    """Lyapunov functional: augmented energy minus twice the load work."""
    f = params.f_vector(state.n_modes)
    return augmented_energy(state, history, params, kernel) - 2.0 * float(f @ state.c)


def perturbed_energy(state: ModalState, history: HistoryState | None,
                     params: BeamParams, eps: float,
                     kernel: MemoryKernel | None = None,
                     energy_bound_c: float | None = None) -> tuple:
    """Energy shifted by eps <u_t, u> and its two-sided comparison constants.

    Returns (value, m0, m1, m2) with m0 * E_cal <= value <= m1 * E_cal + m2.
    Requires 0 <= eps < 2 and, for k > 0, eps < 2k.  At k = 0 the foundation
    term is absent from the augmented energy and the Young split leaves
    m0 = 1 - eps/2 (the displacement penalty is absorbed through Poincare).

    The additive constant m2 = (|beta| + C / pi^2)^2 / 2 needs the uniform
    energy bound C; when not supplied it is computed for the trajectory
    starting at the given state.
    """
    k = params.k
    if not (0.0 <= eps < 2.0):
        raise ValueError("eps must lie in [0, 2)")
    if k > 0 and eps >= 2.0 * k:
        raise ValueError("eps must be < 2k when k > 0")
    value = augmented_energy(state, history, params, kernel) + eps * float(
        np.dot(state.cdot, state.c)
    )
    m0 = 1.0 - eps / 2.0 if k == 0 else min(1.0 - eps / 2.0, 1.0 - eps / (2.0 * k))
    m1 = 2.0 + (k + eps / 2.0) / LAMBDA_1 + eps / 2.0
    if energy_bound_c is None:
        l0 = lyapunov(state, history, params, kernel)
        f2 = params.f_norm_sq()
        energy_bound_c = l0 if f2 == 0.0 else 2.0 * l0 + 4.0 * f2 / LAMBDA_1
    c_bar = abs(params.beta) + energy_bound_c / PI2
    m2 = 0.5 * c_bar * c_bar
    return value, m0, m1, m2


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


def _check_finite(t, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)) or np.abs(a).max(initial=0.0) > BLOWUP_LIMIT:
            raise NumericalBlowup(t)


def _run_moment(params: BeamParams, kernel: MemoryKernel | None,
                init: InitialData, cfg: IntegratorConfig, row_cb) -> dict:
    """RK4 on (c, cdot[, w, m]); calls row_cb(t, c, v, eta_sq, J) at samples."""
    n = init.n_modes
    dt = cfg.dt
    lam = lambda_vector(n)
    n2pi2 = half_power_vector(n)
    stiff = lam + params.k
    f = params.f_vector(n)
    beta = params.beta
    memory = kernel is not None
    if memory:
        delta, kappa = kernel.delta, kernel.kappa
        hist0 = init.history_moments(kernel)
        y = np.array([init.c0, init.cdot0, hist0.w, hist0.m])
    else:
        y = np.array([init.c0, init.cdot0])

    rows = 4 if memory else 2
    k1 = np.empty((rows, n)); k2 = np.empty_like(k1)
    k3 = np.empty_like(k1); k4 = np.empty_like(k1)
    scratch = np.empty_like(k1)
    coef = np.empty(n); tmp = np.empty(n)

    if memory:
        def rhs(state, out):
            c, v, w, m = state
            s_nl = beta + n2pi2 @ (c * c)
            out[0] = v
            np.multiply(n2pi2, s_nl, out=coef)
            np.add(coef, stiff, out=coef)
            np.multiply(coef, c, out=out[1])
            np.multiply(lam, w, out=tmp)
            out[1] += tmp
            out[1] -= f
            out[1] *= -1.0
            np.multiply(v, kappa, out=out[2])
            np.multiply(w, delta, out=tmp)
            out[2] -= tmp
            np.multiply(v, w, out=out[3])
            out[3] *= 2.0
            np.multiply(m, delta, out=tmp)
            out[3] -= tmp
    else:
        def rhs(state, out):
            c, v = state
            s_nl = beta + n2pi2 @ (c * c)
            out[0] = v
            np.multiply(n2pi2, s_nl, out=coef)
            np.add(coef, stiff, out=coef)
            np.multiply(coef, c, out=out[1])
            out[1] -= f
            out[1] *= -1.0

    def emit(step) -> bool:
        t = step * dt
        _check_finite(t, y)
        if memory:
            w_row = y[2].copy()
            eta_sq = float(lam @ y[3])
            j_val = delta * eta_sq
        else:
            w_row = np.zeros(n)
            eta_sq = 0.0
            j_val = 0.0
        return bool(row_cb(t, y[0].copy(), y[1].copy(), w_row, eta_sq, j_val))

    n_steps = cfg.n_steps()
    se = int(cfg.sample_every)
    half_dt = 0.5 * dt
    sixth_dt = dt / 6.0
    stop = emit(0)
    with np.errstate(all="ignore"):
        for step in range(1, n_steps + 1):
            if stop:
                break
            rhs(y, k1)
            np.multiply(k1, half_dt, out=scratch); scratch += y
            rhs(scratch, k2)
            np.multiply(k2, half_dt, out=scratch); scratch += y
            rhs(scratch, k3)
            np.multiply(k3, dt, out=scratch); scratch += y
            rhs(scratch, k4)
            # y += dt/6 (k1 + 2 k2 + 2 k3 + k4), reusing k2 as the accumulator
            k2 += k3; k2 *= 2.0; k2 += k1; k2 += k4
            k2 *= sixth_dt
            y += k2
            if step % se == 0 or step == n_steps:
                stop = emit(step)

    snap = {"t": n_steps * dt, "c": y[0].tolist(), "cdot": y[1].tolist()}
    if memory:
        snap["w"] = y[2].tolist()
        snap["m"] = y[3].tolist()
    return snap


def _run_history(params: BeamParams, kernel: MemoryKernel | None,
                 init: InitialData, cfg: IntegratorConfig, row_cb) -> dict:
    """Leapfrog with a ring buffer of past displacements on the s-grid."""
    n = init.n_modes
    dt = cfg.dt
    lam = lambda_vector(n)
    n2pi2 = half_power_vector(n)
    stiff = lam + params.k
    f = params.f_vector(n)
    beta = params.beta

    memory = kernel is not None
    if memory:
        ds = cfg.ds_value
        stride = cfg.s_stride
        s_max = max(kernel.window_for_tail(cfg.s_max_tol), ds)
        j_max = int(math.ceil(s_max / ds - 1e-12))
        s_grid = np.arange(j_max + 1) * ds
        mu = kernel.mu_on_grid(s_grid)
        qw = np.full(j_max + 1, ds); qw[0] = qw[-1] = 0.5 * ds
        qmu = qw * mu
        qmu_rev = qmu[::-1].copy()
        q_total = float(qmu.sum())
        tail = kernel.tail_mass(j_max * ds)
        # ring buffer: entry for age j*ds sits at row (pos - j) mod (j_max + 1);
        # pre-filling with c0 - eta0(s) makes the characteristics exact for s > t
        eta0 = init.eta0_at(s_grid)
        buf = np.empty((j_max + 1, n))
        buf[0] = init.c0
        if j_max > 0:
            buf[1:] = (init.c0 - eta0[1:])[::-1]
        buf_sq = buf * buf
        pos = 0

        def weighted_sums(arr):
            split = j_max - pos
            return qmu_rev[split:] @ arr[: pos + 1] + qmu_rev[:split] @ arr[pos + 1:]

        def memory_terms(c):
            oldest = buf[(pos + 1) % (j_max + 1)]
            s1 = weighted_sums(buf) + tail * oldest
            w_mom = (q_total + tail) * c - s1
            s2 = weighted_sums(buf_sq) + tail * oldest * oldest
            m_mom = (q_total + tail) * (c * c) - 2.0 * c * s1 + s2
            return w_mom, m_mom
    else:
        def memory_terms(c):
            z = np.zeros_like(c)
            return z, z

    def accel(c, w_mom):
        s_nl = beta + n2pi2 @ (c * c)
        return f - stiff * c - s_nl * (n2pi2 * c) - lam * w_mom

    n_steps = cfg.n_steps()
    se = int(cfg.sample_every)
    c_cur = init.c0.copy()
    v0 = init.cdot0.copy()
    c_prev = None

    stop = False
    with np.errstate(all="ignore"):
        for step in range(0, n_steps + 1):
            w_mom, m_mom = memory_terms(c_cur)
            a = accel(c_cur, w_mom)
            if step == 0:
                c_next = c_cur + dt * v0 + (0.5 * dt * dt) * a
                v_cur = v0
            else:
                c_next = 2.0 * c_cur - c_prev + (dt * dt) * a
                v_cur = (c_next - c_prev) / (2.0 * dt)
            if step % se == 0 or step == n_steps:
                t = step * dt
                _check_finite(t, c_cur, v_cur, m_mom)
                eta_sq = float(lam @ m_mom)
                j_val = kernel.delta * eta_sq if memory else 0.0
                stop = bool(row_cb(t, c_cur.copy(), v_cur.copy(), w_mom.copy(), eta_sq, j_val))
                if stop or step == n_steps:
                    break
            if memory and (step + 1) % stride == 0:
                pos = (pos + 1) % (j_max + 1)
                buf[pos] = c_next
                buf_sq[pos] = c_next * c_next
            c_prev, c_cur = c_cur, c_next

    snap = {"t": min(step, n_steps) * dt, "c": c_cur.tolist(), "cdot": v_cur.tolist()}
    if memory:
        ages = np.arange(j_max + 1)
        order = (pos - ages) % (j_max + 1)
        snap["ds"] = ds
        snap["past"] = buf[order].tolist()
    return snap


def _assemble_trajectory(t, c, v, w_mom, eta_sq, j_val, params, kernel, cfg,
                         phi_eps, final_state) -> Trajectory:
    n = c.shape[1]
    n2pi2 = half_power_vector(n)
    lam = lambda_vector(n)
    f = params.f_vector(n)
    c2 = c * c
    norm_u = c2.sum(axis=1)
    norm_u1 = c2 @ n2pi2
    norm_u2 = c2 @ lam
    norm_ut = (v * v).sum(axis=1)
    e_cal = norm_u2 + norm_ut + eta_sq
    e_aug = e_cal + 0.5 * (params.beta + norm_u1) ** 2 + params.k * norm_u
    lyap = e_aug - 2.0 * (c @ f)
    phi = e_aug + phi_eps * (v * c).sum(axis=1)
    monitors = {
        "E_cal": e_cal, "E_aug": e_aug, "L": lyap, "Phi": phi,
        "norm_u": norm_u, "norm_u1": norm_u1, "norm_u2": norm_u2,
        "norm_ut": norm_ut, "norm_eta_mu": eta_sq, "J_eta": j_val,
    }
    return Trajectory(
        t=t, c=c, cdot=v, w_mom=w_mom, monitors=monitors, params=params,
        kernel=kernel, cfg=cfg, phi_eps=phi_eps, final_state=final_state,
    )


def simulate(params: BeamParams, kernel: MemoryKernel | None,
             init: InitialData, cfg: IntegratorConfig,
             phi_eps: float | None = None) -> Trajectory:
    """Integrate and collect monitor rows.

    Raises NumericalBlowup (with the failure time) if the state leaves the
    finite range.  The Phi monitor uses phi_eps, defaulting to 0.5 min(1, k).
    """
    cfg.validate(init.n_modes, kernel)
    if phi_eps is None:
        phi_eps = default_phi_eps(params.k)

    ts, cs, vs, ws, etas, js = [], [], [], [], [], []

    def collect(t, c, v, w, eta_sq, j_val):
        ts.append(t); cs.append(c); vs.append(v); ws.append(w)
        etas.append(eta_sq); js.append(j_val)
        return False

    runner = _run_moment if cfg.backend == "ode_reduction" else _run_history
    final = runner(params, kernel, init, cfg, collect)
    return _assemble_trajectory(
        np.asarray(ts), np.vstack(cs), np.vstack(vs), np.vstack(ws),
        np.asarray(etas), np.asarray(js), params, kernel, cfg, phi_eps, final,
    )


def simulate_batch(params: BeamParams, kernel: MemoryKernel | None,
                   inits, cfg: IntegratorConfig,
                   phi_eps: float | None = None) -> list:
    """Advance several independent runs of one configuration in lockstep.

    All runs share params, kernel and cfg and differ only in their initial
    data (zero initial history only); the RK4 stages are evaluated on stacked
    arrays, which amortizes the per-step dispatch cost across runs.  Returns
    one Trajectory per initial state, identical to serial simulate() output
    up to roundoff ordering.  Moment backend only.
    """
    inits = list(inits)
    if not inits:
        return []
    if cfg.backend != "ode_reduction":
        raise ConfigError("simulate_batch runs on the ode_reduction backend")
    n = inits[0].n_modes
    for init in inits:
        if init.n_modes != n:
            raise ConfigError("all batched runs must share the truncation order")
        if init.eta0 is not None:
            raise ConfigError("batched runs support zero initial history only")
    cfg.validate(n, kernel)
    if phi_eps is None:
        phi_eps = default_phi_eps(params.k)

    r = len(inits)
    dt = cfg.dt
    lam = lambda_vector(n)
    n2pi2 = half_power_vector(n)
    stiff = lam + params.k
    f = params.f_vector(n)
    beta = params.beta
    memory = kernel is not None
    rows = 4 if memory else 2
    y = np.zeros((rows, r, n))
    for i, init in enumerate(inits):
        y[0, i] = init.c0
        y[1, i] = init.cdot0
    if memory:
        delta, kappa = kernel.delta, kernel.kappa

    k1 = np.empty_like(y); k2 = np.empty_like(y)
    k3 = np.empty_like(y); k4 = np.empty_like(y)
    scratch = np.empty_like(y)

    def rhs(state, out):
        c, v = state[0], state[1]
        s_nl = (c * c) @ n2pi2 + beta          # (r,)
        coef = stiff + s_nl[:, None] * n2pi2   # (r, n)
        out[0] = v
        out[1] = f - coef * c
        if memory:
            w, m = state[2], state[3]
            out[1] -= lam * w
            out[2] = kappa * v - delta * w
            out[3] = 2.0 * (v * w) - delta * m

    ts, cs, vs, ws, etas, js = [], [], [], [], [], []

    def emit(step):
        t = step * dt
        _check_finite(t, y)
        ts.append(t)
        cs.append(y[0].copy())
        vs.append(y[1].copy())
        if memory:
            ws.append(y[2].copy())
            etas.append(y[3] @ lam)
            js.append(delta * (y[3] @ lam))
        else:
            ws.append(np.zeros((r, n)))
            etas.append(np.zeros(r))
            js.append(np.zeros(r))

    n_steps = cfg.n_steps()
    se = int(cfg.sample_every)
    emit(0)
    with np.errstate(all="ignore"):
        for step in range(1, n_steps + 1):
            rhs(y, k1)
            np.multiply(k1, 0.5 * dt, out=scratch); scratch += y
            rhs(scratch, k2)
            np.multiply(k2, 0.5 * dt, out=scratch); scratch += y
            rhs(scratch, k3)
            np.multiply(k3, dt, out=scratch); scratch += y
            rhs(scratch, k4)
            k2 += k3; k2 *= 2.0; k2 += k1; k2 += k4
            k2 *= dt / 6.0
            y += k2
            if step % se == 0 or step == n_steps:
                emit(step)

    t = np.asarray(ts)
    c_all = np.stack(cs)        # (rows_out, r, n)
    v_all = np.stack(vs)
    w_all = np.stack(ws)
    eta_all = np.stack(etas)    # (rows_out, r)
    j_all = np.stack(js)
    out = []
    for i in range(r):
        snap = {"t": n_steps * dt, "c": y[0, i].tolist(), "cdot": y[1, i].tolist()}
        if memory:
            snap["w"] = y[2, i].tolist()
            snap["m"] = y[3, i].tolist()
        out.append(_assemble_trajectory(
            t, c_all[:, i], v_all[:, i], w_all[:, i], eta_all[:, i], j_all[:, i],
            params, kernel, cfg, phi_eps, snap,
        ))
    return out


def run_with_callback(params: BeamParams, kernel: MemoryKernel | None,
                      init: InitialData, cfg: IntegratorConfig, row_cb) -> dict:
    """Low-level entry: row_cb(t, c, cdot, eta_norm_sq, J) -> stop flag."""
    cfg.validate(init.n_modes, kernel)
    runner = _run_moment if cfg.backend == "ode_reduction" else _run_history
    return runner(params, kernel, init, cfg, row_cb)
