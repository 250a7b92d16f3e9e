"""Stability thresholds, coercivity, uniform energy bounds, decay-rate fits.

Exponential decay of the straight state holds exactly for axial loads above
-beta_bar(k), where beta_bar equals the critical load beta_c(k) up to
k = lambda_1 and 2 sqrt(k) beyond it.  The two curves split for k > lambda_1
(AM-GM: mu_n(k) >= 2 sqrt(k)), opening a gap band in which the straight state
is unique but no longer exponentially stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import LAMBDA_1, PI2, BeamParams, MemoryKernel, ModalState
from .statics import StationarySet, critical_load
from .dynamics import InitialData, Trajectory, lyapunov


def exponential_threshold(k: float) -> float:
    """beta_bar(k): critical load for k <= lambda_1, else 2 sqrt(k).

    Continuous at k = lambda_1 where both branches give 2 pi^2; at k = 0 it
    reduces to beta_c(0) = pi^2, the first eigenvalue of the half-power
    operator.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k <= LAMBDA_1:
        return critical_load(k)
    return 2.0 * math.sqrt(k)


def coercivity(beta: float, k: float) -> float:
    """Sharp constant nu(beta, k) with <Lu, u> >= nu ||u||_2^2.

    Obtained by relaxing the spectral variable x = sqrt(lambda) >= pi^2 in
    g(x) = 1 + beta/x + k/x^2 and minimizing in closed form; nu > 0 exactly
    when beta > -beta_bar(k).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if beta >= 0:
        return 1.0  # g decreases to its infimum 1 as x -> infinity
    if 2.0 * k <= -beta * PI2:
        return 1.0 + beta / PI2 + k / (PI2 * PI2)  # minimum on the boundary x = pi^2
    return 1.0 - beta * beta / (4.0 * k)  # interior vertex x = 2k/|beta|


def uniform_energy_bound(init: InitialData, params: BeamParams,
                         kernel: MemoryKernel | None = None) -> float:
    """Uniform bound C with E_cal(t) <= C along the trajectory from init.

    For f = 0 the Lyapunov decrease gives the sharp C = L(0); otherwise the
    Young split with eps = lambda_1 / 2 yields C = 2 L(0) + 4 ||f||^2 / lambda_1.
    """
    state = ModalState(init.c0, init.cdot0)
    hist = init.history_moments(kernel)
    l0 = lyapunov(state, hist, params, kernel)
    f2 = params.f_norm_sq()
    if f2 == 0.0:
        return l0
    return 2.0 * l0 + 4.0 * f2 / LAMBDA_1


def absorbing_radius(params: BeamParams, stationary: StationarySet) -> float:
    """Radius R0 = 1 + sqrt(2K + 4||f||^2/lambda_1), K = 1 + sup_S Lyapunov.

    The coercivity bound behind the square root is the same eps = lambda_1/2
    split as in uniform_energy_bound.  Over an ellipse family the Lyapunov
    value is affine in the squared amplitudes, so its supremum sits at one of
    the two pure-mode endpoints, evaluated here in closed form.
    """
    values = [lyapunov(eq.state, None, params) for eq in stationary.equilibria]
    for fam in stationary.families:
        for theta in (0.0, math.pi / 2.0):
            member = fam.member(theta)
            values.append(lyapunov(member, None, params))
    k_const = 1.0 + max(values)
    f2 = params.f_norm_sq()
    return 1.0 + math.sqrt(2.0 * k_const + 4.0 * f2 / LAMBDA_1)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    residual: float
    window: tuple  # (t0, t1) actually used


def fit_log_slope(t: np.ndarray, values: np.ndarray,
                  window: tuple = (0.25, 0.9)) -> DecayFit:
    """Least-squares decay rate of a positive signal on a window fraction.

    rate = -slope of the log-linear fit; residual is the RMS deviation from
    the fitted line.  Returns rate = +inf if the signal underflows to zero
    inside the window.
    """
    a, b = window
    if not (0.0 <= a < b <= 1.0):
        raise ValueError("window fractions must satisfy 0 <= a < b <= 1")
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    t0 = t[0] + a * (t[-1] - t[0])
    t1 = t[0] + b * (t[-1] - t[0])
    mask = (t >= t0) & (t <= t1)
    if mask.sum() < 2:
        raise ValueError("window contains fewer than two samples")
    tw, ew = t[mask], values[mask]
    if np.any(ew <= 0.0):
        return DecayFit(rate=math.inf, residual=math.nan, window=(float(t0), float(t1)))
    log_e = np.log(ew)
    slope, intercept = np.polyfit(tw, log_e, 1)
    resid = log_e - (slope * tw + intercept)
    rms = float(np.sqrt(np.mean(resid * resid)))
    return DecayFit(rate=float(-slope), residual=rms, window=(float(t0), float(t1)))


def estimate_decay_rate(traj: Trajectory, window: tuple = (0.25, 0.9)) -> DecayFit:
    """Decay rate of the total energy along a trajectory (see fit_log_slope).

    The default window skips the early transient where the decay prefactor
    pollutes the slope.
    """
    return fit_log_slope(traj.t, traj.energy, window)


@dataclass(frozen=True)
class StabilityVerdict:
    beta: float
    k: float
    beta_c: float
    beta_bar: float
    nu: float
    region: str  # exponential | gap | buckled | boundary


def classify(beta: float, k: float) -> StabilityVerdict:
    bc = critical_load(k)
    bb = exponential_threshold(k)
    nu = coercivity(beta, k)
    if beta == -bb or beta == -bc:
        region = "boundary"
    elif beta > -bb:
        region = "exponential"
    elif beta <= -bc:
        region = "buckled"
    else:
        region = "gap"  # only reachable when beta_bar < beta_c, i.e. k > lambda_1
    return StabilityVerdict(beta=float(beta), k=float(k), beta_c=bc, beta_bar=bb,
                            nu=nu, region=region)


def stability_map(k_values, beta_values) -> list:
    """Grid of verdicts, k-major then beta (matches the map CSV row order)."""
    return [classify(float(b), float(k)) for k in k_values for b in beta_values]
