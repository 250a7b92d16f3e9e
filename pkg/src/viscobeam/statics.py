"""Closed-form steady-state analysis: critical loads, resonances, equilibria.

The homogeneous static problem

    u'''' - (beta + ||u'||^2) u'' + k u = 0,   hinged ends,

is solved exactly on the sine basis.  Mode n buckles when beta drops below
-mu_n(k) with mu_n(k) = k/(n^2 pi^2) + n^2 pi^2, and the critical load
beta_c(k) = min_n mu_n(k) is piecewise linear in k.  When k/pi^4 = i^2 j^2
for integers i < j two thresholds coincide and a whole ellipse of two-mode
equilibria appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    PI2,
    PI4,
    BeamParams,
    ModalState,
    half_power_vector,
    lambda_vector,
    modal_norms,
)

RESIDUAL_TOL = 1e-10        # closed-form equilibria must satisfy this
FAMILY_RESIDUAL_TOL = 1e-8  # sampled resonant-family members
AMPLITUDE_CLAMP = 1e-12     # sweep amplitudes below this are written as 0


def buckling_load(k: float, n: int) -> float:
    """Per-mode buckling threshold mu_n(k) = k/(n^2 pi^2) + n^2 pi^2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = int(n)
    if n < 1:
        raise ValueError("mode index must be >= 1")
    n2pi2 = n * n * PI2
    return k / n2pi2 + n2pi2


def critical_mode(k: float) -> int:
    """The mode n_k minimizing mu_n(k): (n-1)^2 n^2 <= k/pi^4 < n^2 (n+1)^2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    r = k / PI4
    n = 1
    while n * n * (n + 1) * (n + 1) <= r:
        n += 1
    return n


def critical_load(k: float) -> float:
    """Euler critical load beta_c(k) = min_n mu_n(k)."""
    return buckling_load(k, critical_mode(k))


def resonant_pairs(k: float, rel_tol: float = 1e-9) -> list:
    """All mode pairs (i, j), i < j, with mu_i(k) = mu_j(k) within rel_tol.

    Coincidence requires k/pi^4 = i^2 j^2, so j is bounded by
    ceil(sqrt(k/pi^4)) + 1.  Returns [(i, j, mu)] sorted by mu.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    r = k / PI4
    if r <= 0:
        return []
    j_max = math.ceil(math.sqrt(r)) + 1
    pairs = []
    for j in range(2, j_max + 1):
        for i in range(1, j):
            target = (i * j) ** 2
            if abs(r - target) <= rel_tol * target:
                pairs.append((i, j, buckling_load(k, i)))
    pairs.sort(key=lambda p: p[2])
    return pairs


def resonance(k: float, rel_tol: float = 1e-9):
    """Smallest non-simple threshold: (i, j, mu_m) or None if k is non-resonant."""
    pairs = resonant_pairs(k, rel_tol)
    return pairs[0] if pairs else None


def resonance_from_ratio(ratio: int):
    """Exact-integer entry point: k = ratio * pi^4."""
    ratio = int(ratio)
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    return resonance(ratio * PI4, rel_tol=0.0)


def buckled_mode_count(beta: float, k: float) -> int:
    """n_star = #{n : beta + mu_n(k) < 0}; finite since mu_n -> infinity."""
    if beta >= 0:
        return 0
    count = 0
    n = 1
    # mu_n >= n^2 pi^2, so no mode beyond sqrt(-beta)/pi can be buckled
    n_max = math.ceil(math.sqrt(-beta) / math.pi) + 1
    while n <= n_max:
        if beta + buckling_load(k, n) < 0:
            count += 1
        n += 1
    return count


@dataclass(frozen=True)
class Equilibrium:
    """A single stationary solution A sin(n pi x); n = 0 encodes the null state."""

    n: int
    sign: int                 # +1, -1, or 0 for the null state
    amplitude: float          # physical amplitude A_n (0 for the null state)
    state: ModalState

    @property
    def label(self) -> str:
        if self.sign == 0:
            return "0"
        return f"{self.n}{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class ResonantFamily:
    """Ellipse of two-mode equilibria a sin(i pi x) + b sin(j pi x).

    Members satisfy (i^2 pi^2 / 2) a^2 + (j^2 pi^2 / 2) b^2 = level with
    level = -(beta + mu_i(k)) > 0: per-mode balance forces
    ||u'||^2 = -(beta + mu_i) for both modes simultaneously.
    """

    i: int
    j: int
    level: float

    @property
    def ellipse_coefficients(self) -> tuple:
        return (self.i * self.i * PI2 / 2.0, self.j * self.j * PI2 / 2.0)

    def member(self, theta: float, n_modes: int | None = None) -> ModalState:
        """Family member at ellipse angle theta."""
        ci, cj = self.ellipse_coefficients
        a = math.sqrt(self.level / ci) * math.cos(theta)
        b = math.sqrt(self.level / cj) * math.sin(theta)
        size = int(n_modes) if n_modes is not None else self.j
        c = np.zeros(size)
        c[self.i - 1] = a / math.sqrt(2.0)
        c[self.j - 1] = b / math.sqrt(2.0)
        return ModalState(c, np.zeros(size))


@dataclass(frozen=True)
class StationarySet:
    classification: str              # "null_only" | "finite" | "infinite"
    equilibria: tuple
    families: tuple
    n_star: int
    degenerate_levels: bool = False  # >= 3 modes sharing one threshold within tolerance

    def __post_init__(self):
        if self.classification == "finite" and len(self.equilibria) != 2 * self.n_star + 1:
            raise ValueError("finite stationary set must hold 2 n_star + 1 members")


def branch_amplitude(beta: float, k: float, n: int) -> float:
    """A_n = (1/(n pi)) sqrt(-2 (beta + mu_n(k))); 0 at or above the threshold."""
    gap = beta + buckling_load(k, n)
    if gap >= 0:
        return 0.0
    a = math.sqrt(-2.0 * gap) / (n * math.pi)
    return 0.0 if a < AMPLITUDE_CLAMP else a


def _single_mode_equilibrium(beta: float, k: float, n: int, sign: int, n_modes: int) -> Equilibrium:
    amp = sign * branch_amplitude(beta, k, n)
    return Equilibrium(
        n=n, sign=sign, amplitude=amp, state=ModalState.from_amplitude(n, amp, n_modes)
    )


def enumerate_equilibria(params: BeamParams, rel_tol: float = 1e-9,
                         n_modes: int | None = None) -> StationarySet:
    """Exact stationary set of the homogeneous static problem.

    beta >= -beta_c(k): the null state only.  Resonant k with beta below the
    smallest non-simple threshold: infinitely many solutions, reported as the
    simple branches plus one ellipse family per non-simple level below -beta.
    Otherwise: the null state plus the 2 n_star buckled pairs.
    """
    if not params.homogeneous:
        raise ValueError("nonzero lateral load is unsupported in statics")
    beta, k = params.beta, params.k
    n_star = buckled_mode_count(beta, k)
    pairs = resonant_pairs(k, rel_tol)

    live_pairs = [(i, j, mu) for (i, j, mu) in pairs if beta + mu < 0]
    # distinct thresholds can only be shared by a single (i, j) pair; flag any
    # tolerance-induced grouping of three or more modes
    level_modes: dict = {}
    for i, j, mu in live_pairs:
        key = round(mu / max(rel_tol, 1e-15))
        level_modes.setdefault(key, set()).update((i, j))
    degenerate = any(len(v) > 2 for v in level_modes.values())

    resonant_modes = {n for (i, j, _) in live_pairs for n in (i, j)}
    simple_buckled = [
        n for n in range(1, _mode_search_bound(beta, k) + 1)
        if beta + buckling_load(k, n) < 0 and n not in resonant_modes
    ]
    size = n_modes or max([1] + simple_buckled + [j for (_, j, _) in live_pairs])

    zero = Equilibrium(n=0, sign=0, amplitude=0.0, state=ModalState.zero(size))
    if beta >= -critical_load(k):
        return StationarySet("null_only", (zero,), (), n_star)

    equilibria = [zero]
    for n in simple_buckled:
        equilibria.append(_single_mode_equilibrium(beta, k, n, +1, size))
        equilibria.append(_single_mode_equilibrium(beta, k, n, -1, size))

    if live_pairs:
        families = tuple(
            ResonantFamily(i=i, j=j, level=-(beta + mu)) for (i, j, mu) in live_pairs
        )
        return StationarySet("infinite", tuple(equilibria), families, n_star, degenerate)

    return StationarySet("finite", tuple(equilibria), (), n_star)


def _mode_search_bound(beta: float, k: float) -> int:
    if beta >= 0:
        return 1
    return math.ceil(math.sqrt(-beta) / math.pi) + 1


def static_residual(state: ModalState, params: BeamParams) -> float:
    """l2 norm of the modal residual of the static equation.

    r_n = lambda_n c_n + (beta + ||u||_1^2) n^2 pi^2 c_n + k c_n - f_n;
    serves as the independent oracle for every equilibrium claim.
    """
    c = state.c
    n = c.size
    lam = lambda_vector(n)
    n2pi2 = half_power_vector(n)
    _, h1, _ = modal_norms(state)
    r = lam * c + (params.beta + h1) * n2pi2 * c + params.k * c - params.f_vector(n)
    return float(np.sqrt(np.dot(r, r)))


def bifurcation_sweep(k: float, beta_min: float, beta_max: float, steps: int,
                      rel_tol: float = 1e-9) -> tuple:
    """Branch table over an axial-load range.

    Returns (branch_rows, family_rows): branch_rows holds (beta, n, A+, A-)
    for the zero branch (n = 0) and every live simple branch; family_rows
    holds (beta, i, j, level) markers for non-simple thresholds, which are
    emitted instead of branches at resonant k.
    """
    if not beta_min < beta_max:
        raise ValueError("beta_min must be < beta_max")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    betas = np.linspace(beta_min, beta_max, steps + 1)
    pairs = resonant_pairs(k, rel_tol)
    resonant_modes = {n for (i, j, _) in pairs for n in (i, j)}

    branch_rows = []
    family_rows = []
    for beta in betas:
        beta = float(beta)
        branch_rows.append((beta, 0, 0.0, 0.0))
        for n in range(1, _mode_search_bound(beta, k) + 1):
            if beta + buckling_load(k, n) >= 0:
                continue
            if n in resonant_modes:
                continue
            a = branch_amplitude(beta, k, n)
            branch_rows.append((beta, n, a, -a))
        for i, j, mu in pairs:
            if beta + mu < 0:
                family_rows.append((beta, i, j, -(beta + mu)))
    return branch_rows, family_rows
