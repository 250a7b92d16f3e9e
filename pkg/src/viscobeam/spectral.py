"""Modal core for the hinged extensible beam on (0, 1).

Everything downstream works on the L2-orthonormal eigenbasis
e_n(x) = sqrt(2) sin(n pi x) of the fourth-order operator with hinged ends,
whose eigenvalues are lambda_n = n^4 pi^4.  The half-power operator
(-d_xx) has spectrum n^2 pi^2 on the same basis, so the weighted norms
used throughout are plain weighted sums of squared coefficients.

Conventions fixed here and relied on everywhere else:

* "norms" are returned SQUARED (the energy identities are all quadratic);
* a physical deflection amplitude A on mode n corresponds to the modal
  coefficient c_n = A / sqrt(2);
* memory histories eta(s) = u(t) - u(t - s) are represented either by their
  mu-weighted moments (exponential kernels) or by a sampled past-displacement
  buffer on a uniform s-grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PI = math.pi
PI2 = PI * PI            # first eigenvalue of -d_xx (hinged ends)
PI4 = PI2 * PI2
LAMBDA_1 = PI4           # smallest eigenvalue of d_xxxx


def eigenvalue(n: int) -> float:
    """Eigenvalue n^4 pi^4 of the fourth-order operator, n >= 1."""
    n = int(n)
    if n < 1:
        raise ValueError("mode index must be a positive integer")
    return float(n) ** 4 * PI4


def mode_numbers(n_modes: int) -> np.ndarray:
    return np.arange(1, int(n_modes) + 1, dtype=float)


def lambda_vector(n_modes: int) -> np.ndarray:
    """(lambda_1, ..., lambda_N)."""
    return mode_numbers(n_modes) ** 4 * PI4


def half_power_vector(n_modes: int) -> np.ndarray:
    """Spectrum (n^2 pi^2) of -d_xx, i.e. sqrt(lambda_n)."""
    return mode_numbers(n_modes) ** 2 * PI2


# ---------------------------------------------------------------------------
# parameter and kernel types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BeamParams:
    """Axial load beta (positive in stretching), foundation stiffness k >= 0,
    and the modal components of the static lateral load."""

    beta: float
    k: float
    f_modes: tuple = ()

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if not (math.isfinite(self.k) and self.k >= 0.0):
            raise ValueError("foundation stiffness k must be >= 0")
        object.__setattr__(self, "f_modes", tuple(float(v) for v in self.f_modes))

    def f_vector(self, n_modes: int) -> np.ndarray:
        """Load components padded with zeros up to the truncation order."""
        if len(self.f_modes) > n_modes:
            raise ValueError(
                f"f_modes has {len(self.f_modes)} entries, truncation is {n_modes}"
            )
        f = np.zeros(n_modes)
        f[: len(self.f_modes)] = self.f_modes
        return f

    def f_norm_sq(self) -> float:
        return float(sum(v * v for v in self.f_modes))

    @property
    def homogeneous(self) -> bool:
        return all(v == 0.0 for v in self.f_modes)


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class MemoryKernel:
    """Fading-memory kernel mu(s) with decay rate delta and total mass kappa.

    The exponential kind is mu(s) = kappa * delta * exp(-delta s), for which
    mu' + delta mu = 0 holds exactly.  The tabulated kind carries samples on a
    uniform s-grid and is accepted only if it decays at least at rate delta in
    the discrete forward-difference sense and carries the declared mass.
    """

    kind: str
    delta: float
    kappa: float
    ds: float | None = None
    samples: tuple = ()

    DECAY_TOL = 1e-9     # per-sample slack in the discrete decay inequality
    MASS_RTOL = 0.01     # trapezoid mass must match kappa within 1%

    @classmethod
    def exponential(cls, delta: float, kappa: float) -> "MemoryKernel":
        if delta <= 0 or kappa <= 0:
            raise KernelError("delta and kappa must be positive")
        return cls(kind="exponential", delta=float(delta), kappa=float(kappa))

    @classmethod
    def tabulated(cls, delta: float, kappa: float, ds: float, values) -> "MemoryKernel":
        if delta <= 0 or kappa <= 0:
            raise KernelError("delta and kappa must be positive")
        if ds <= 0:
            raise KernelError("sample spacing ds must be positive")
        mu = np.asarray(values, dtype=float)
        if mu.ndim != 1 or mu.size < 2:
            raise KernelError("tabulated kernel needs a 1-D table with >= 2 samples")
        if np.any(mu < 0):
            raise KernelError("kernel samples must be nonnegative")
        diff = np.diff(mu)
        if np.any(diff > 0):
            raise KernelError("kernel samples must be nonincreasing")
        # discrete decay hypothesis: (mu_{i+1} - mu_i)/ds + delta mu_i <= tol
        lhs = diff / ds + delta * mu[:-1]
        if np.any(lhs > cls.DECAY_TOL):
            raise KernelError(
                "table violates the decay hypothesis: max slack "
                f"{float(lhs.max()):.3e} exceeds {cls.DECAY_TOL:.1e}"
            )
        mass = float(np.trapz(mu, dx=ds))
        if abs(mass - kappa) > cls.MASS_RTOL * kappa:
            raise KernelError(
                f"trapezoid mass {mass:.6g} differs from kappa={kappa:.6g} by more than 1%"
            )
        return cls(
            kind="tabulated",
            delta=float(delta),
            kappa=float(kappa),
            ds=float(ds),
            samples=tuple(float(v) for v in mu),
        )

    @property
    def s_end(self) -> float:
        """Last tabulated abscissa (tabulated kind only)."""
        if self.kind != "tabulated":
            raise KernelError("s_end is defined for tabulated kernels only")
        return (len(self.samples) - 1) * self.ds

    def mu_on_grid(self, s: np.ndarray) -> np.ndarray:
        """mu evaluated on the given abscissas (zero beyond a table's end)."""
        s = np.asarray(s, dtype=float)
        if self.kind == "exponential":
            return self.kappa * self.delta * np.exp(-self.delta * s)
        table = np.asarray(self.samples)
        grid = np.arange(table.size) * self.ds
        return np.interp(s, grid, table, right=0.0)

    def neg_mu_prime_on_grid(self, s: np.ndarray) -> np.ndarray:
        """-mu' on the given abscissas; forward differences for tables."""
        s = np.asarray(s, dtype=float)
        if self.kind == "exponential":
            return self.delta * self.mu_on_grid(s)
        table = np.asarray(self.samples)
        d = np.empty_like(table)
        d[:-1] = -np.diff(table) / self.ds
        d[-1] = d[-2]
        grid = np.arange(table.size) * self.ds
        return np.interp(s, grid, d, right=0.0)

    def tail_mass(self, s_max: float) -> float:
        """Integral of mu over (s_max, infinity)."""
        if self.kind == "exponential":
            return self.kappa * math.exp(-self.delta * s_max)
        if s_max >= self.s_end:
            return 0.0
        grid = np.arange(len(self.samples)) * self.ds
        table = np.asarray(self.samples)
        keep = grid >= s_max
        s_tail = np.concatenate(([s_max], grid[keep]))
        mu_tail = np.concatenate(([float(np.interp(s_max, grid, table))], table[keep]))
        return float(np.trapz(mu_tail, s_tail))

    def window_for_tail(self, tol: float) -> float:
        """Smallest s_max with tail mass <= tol * kappa."""
        if self.kind == "exponential":
            return math.log(1.0 / tol) / self.delta
        return self.s_end


# ---------------------------------------------------------------------------
# modal state and history
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModalState:
    """Truncated modal displacement and velocity coefficients."""

    c: np.ndarray
    cdot: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float)).copy()
        v = np.atleast_1d(np.asarray(self.cdot, dtype=float)).copy()
        if c.shape != v.shape or c.ndim != 1:
            raise ValueError("c and cdot must be 1-D arrays of equal length")
        c.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "cdot", v)

    @property
    def n_modes(self) -> int:
        return self.c.size

    @classmethod
    def zero(cls, n_modes: int) -> "ModalState":
        return cls(np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def from_amplitude(cls, n: int, amplitude: float, n_modes: int | None = None) -> "ModalState":
        """Single-mode state with the given physical amplitude on mode n."""
        size = int(n_modes) if n_modes is not None else int(n)
        if size < n:
            raise ValueError("truncation order smaller than requested mode")
        c = np.zeros(size)
        c[n - 1] = amplitude / math.sqrt(2.0)
        return cls(c, np.zeros(size))


def modal_norms(state: ModalState) -> tuple:
    """Squared L2, H1, H2 norms of the displacement: weighted coefficient sums."""
    c2 = state.c * state.c
    n2pi2 = half_power_vector(state.n_modes)
    l2 = float(c2.sum())
    h1 = float((n2pi2 * c2).sum())
    h2 = float((n2pi2 * n2pi2 * c2).sum())
    return l2, h1, h2


def evaluate_physical(state: ModalState, x):
    """Deflection u(x) = sum c_n sqrt(2) sin(n pi x) for x in [0, 1]."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0.0) or np.any(x_arr > 1.0):
        raise ValueError("x must lie in [0, 1]")
    n = mode_numbers(state.n_modes)
    phases = np.multiply.outer(x_arr, n) * PI
    values = math.sqrt(2.0) * np.sin(phases) @ state.c
    return float(values) if np.isscalar(x) or x_arr.ndim == 0 else values


class HistoryError(ValueError):
    pass


@dataclass(frozen=True)
class HistoryState:
    """Relative-displacement history eta(s) = u(t) - u(t - s).

    Moment form (exponential kernels): per-mode first and second weighted
    moments w_n = int mu eta_n ds and m_n = int mu eta_n^2 ds.

    Sampled form: uniform s-grid of step ds with values[j] holding the modal
    displacement at t - j*ds; entries older than the elapsed time carry the
    initial history instead, so eta_n(s_j) = values[0, n] - values[j, n] is
    exact along characteristics.  eta(0) = 0 is built into both forms.
    """

    kind: str
    w: np.ndarray | None = None
    m: np.ndarray | None = None
    ds: float | None = None
    values: np.ndarray | None = None

    @classmethod
    def zero_moments(cls, n_modes: int) -> "HistoryState":
        return cls.moments(np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def moments(cls, w, m) -> "HistoryState":
        w = np.asarray(w, dtype=float).copy()
        m = np.asarray(m, dtype=float).copy()
        if w.shape != m.shape or w.ndim != 1:
            raise HistoryError("w and m must be 1-D arrays of equal length")
        if np.any(m < -1e-12 * (1.0 + np.abs(m).max(initial=0.0))):
            raise HistoryError("second moments m_n must be nonnegative")
        np.maximum(m, 0.0, out=m)
        w.setflags(write=False)
        m.setflags(write=False)
        return cls(kind="moment", w=w, m=m)

    @classmethod
    def moments_from_table(cls, eta0: np.ndarray, ds: float, kernel: MemoryKernel) -> "HistoryState":
        """Weighted moments of a tabulated initial history (tail held constant)."""
        eta0 = np.atleast_2d(np.asarray(eta0, dtype=float))
        s = np.arange(eta0.shape[0]) * ds
        mu = kernel.mu_on_grid(s)
        wq = np.full(s.size, ds)
        wq[0] = wq[-1] = 0.5 * ds
        tail = kernel.tail_mass(s[-1])
        w = (wq * mu) @ eta0 + tail * eta0[-1]
        m = (wq * mu) @ (eta0 * eta0) + tail * eta0[-1] ** 2
        return cls.moments(w, m)

    @classmethod
    def sampled(cls, ds: float, values: np.ndarray) -> "HistoryState":
        values = np.atleast_2d(np.asarray(values, dtype=float)).copy()
        if ds <= 0:
            raise HistoryError("ds must be positive")
        values.setflags(write=False)
        return cls(kind="sampled", ds=float(ds), values=values)

    @property
    def n_modes(self) -> int:
        if self.kind == "moment":
            return self.w.size
        return self.values.shape[1]

    def eta_table(self) -> np.ndarray:
        """eta_n(s_j) reconstructed from a sampled buffer."""
        if self.kind != "sampled":
            raise HistoryError("eta_table requires the sampled form")
        return self.values[0] - self.values

    def s_grid(self) -> np.ndarray:
        if self.kind != "sampled":
            raise HistoryError("s_grid requires the sampled form")
        return np.arange(self.values.shape[0]) * self.ds


def _sampled_weighted_sum(history: HistoryState, weights: np.ndarray, tail_weight: float) -> float:
    """sum_n lambda_n * (quadrature of weights * eta_n^2 + tail term)."""
    eta = history.eta_table()
    lam = lambda_vector(history.n_modes)
    per_mode = weights @ (eta * eta) + tail_weight * eta[-1] ** 2
    return float(lam @ per_mode)


def _trapezoid_weights(n_points: int, ds: float) -> np.ndarray:
    w = np.full(n_points, ds)
    w[0] = w[-1] = 0.5 * ds
    return w


def memory_norm_sq(history: HistoryState, kernel: MemoryKernel) -> float:
    """Weighted history norm: int mu(s) ||eta(s)||_2^2 ds."""
    if history.kind == "moment":
        lam = lambda_vector(history.n_modes)
        return float(lam @ history.m)
    s = history.s_grid()
    mu = kernel.mu_on_grid(s)
    wq = _trapezoid_weights(s.size, history.ds)
    return _sampled_weighted_sum(history, wq * mu, kernel.tail_mass(s[-1]))


def dissipation_functional(history: HistoryState, kernel: MemoryKernel) -> float:
    """-int mu'(s) ||eta(s)||_2^2 ds, the instantaneous Lyapunov decay rate.

    For exponential kernels mu' = -delta mu exactly, so the value is
    delta * memory_norm_sq; tabulated kernels use forward differences of the
    table, which inherits the decay inequality sample by sample.
    """
    if kernel.kind == "exponential" or history.kind == "moment":
        return kernel.delta * memory_norm_sq(history, kernel)
    s = history.s_grid()
    neg_dmu = kernel.neg_mu_prime_on_grid(s)
    wq = _trapezoid_weights(s.size, history.ds)
    # tail: mu' = -delta*mu would make the tail delta*tail_mass; a table has no tail
    return _sampled_weighted_sum(history, wq * neg_dmu, 0.0)
