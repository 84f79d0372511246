"""Closed-form time evolution of mean observables and transition probabilities.

Everything here is a finite mode sum over the solved normal frequencies; no
time stepping is involved, so samples at different times are independent and
may be evaluated in any order (or in parallel) with identical results.

All probability evaluations use the amplitude form: a single sum over modes
followed by a modulus squared.  It is algebraically identical to the
double-cosine sums but costs O(N) per channel instead of O(N^2) and is better
conditioned.  Bath indices n, m are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolve import NormalModes
from .model import InitialState

__all__ = [
    "TimeGrid",
    "TimeSeries",
    "survival_amplitude",
    "p_omega_omega",
    "p_omega_n",
    "p_nm",
    "mean_subsystem_occupation",
    "mean_bath_occupation",
    "mean_bath_occupations",
    "mean_position",
    "mean_momentum_tilde",
    "rotation_coefficients",
    "theta_profile",
    "long_time_average_survival",
    "asymptotic_mean_occupation",
    "evolve_series",
    "OBSERVABLES",
]

_TIME_CHUNK = 1_000_000  # max elements of the (T, N+1) phase matrix per slab


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid: t0 + dt * [0, count)."""

    t0: float
    dt: float
    count: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.count)


@dataclass
class TimeSeries:
    """Named observable columns over a common grid.

    Invalid samples carry NaN and valid=False; every column has grid length.
    """

    grid: TimeGrid
    columns: dict[str, np.ndarray]
    valid: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.valid is None:
            self.valid = np.ones(self.grid.count, dtype=bool)
        for name, col in self.columns.items():
            if col.shape != (self.grid.count,):
                raise ValueError(f"column {name!r} length {col.shape} != grid count")
        if self.valid.shape != (self.grid.count,):
            raise ValueError("valid flags length != grid count")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"no column {name!r}; have {sorted(self.columns)}")
        return self.columns[name]


def _times_array(t) -> tuple[np.ndarray, bool]:
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    return np.atleast_1d(ts), scalar


def _phase_matrix(modes: NormalModes, ts: np.ndarray) -> np.ndarray:
    """E[k, nu] = |Phi_nu|^2 exp(-i alpha_nu t_k)."""
    return modes.weights[None, :] * np.exp(-1j * np.outer(ts, modes.alphas))


def survival_amplitude(modes: NormalModes, t):
    """s(t) = sum_nu |Phi_nu|^2 exp(-i alpha_nu t); s(0) = 1."""
    ts, scalar = _times_array(t)
    s = _phase_matrix(modes, ts).sum(axis=1)
    return complex(s[0]) if scalar else s


def p_omega_omega(modes: NormalModes, t):
    """Survival probability |s(t)|^2."""
    s = survival_amplitude(modes, t)
    return abs(s) ** 2 if np.isscalar(s) or isinstance(s, complex) else np.abs(s) ** 2


def _check_index(modes: NormalModes, n: int) -> int:
    if not 1 <= n <= modes.model.n_osc:
        raise IndexError(f"bath index {n} outside 1..{modes.model.n_osc}")
    return n - 1


def p_omega_n(modes: NormalModes, n: int, t):
    """Transition probability between the subsystem state and bath state n."""
    j = _check_index(modes, n)
    ts, scalar = _times_array(t)
    k_col = modes.pole_ratios()[:, j]
    amp = _phase_matrix(modes, ts) @ k_col
    p = np.abs(amp) ** 2
    return float(p[0]) if scalar else p


def p_nm(modes: NormalModes, n: int, m: int, t):
    """Transition probability between bath states n and m."""
    jn = _check_index(modes, n)
    jm = _check_index(modes, m)
    k = modes.pole_ratios()
    ts, scalar = _times_array(t)
    amp = _phase_matrix(modes, ts) @ (k[:, jn] * k[:, jm])
    p = np.abs(amp) ** 2
    return float(p[0]) if scalar else p


def mean_subsystem_occupation(modes: NormalModes, init: InitialState, t):
    """<N_sub(t)> = kappa P_00(t) + sum_n P_0n(t) nbar_n, amplitude-factorized."""
    ts, scalar = _times_array(t)
    k = modes.pole_ratios()
    out = np.empty(ts.size)
    step = max(1, _TIME_CHUNK // modes.n_modes)
    for i in range(0, ts.size, step):
        sl = slice(i, min(i + step, ts.size))
        e = _phase_matrix(modes, ts[sl])
        surv = np.abs(e.sum(axis=1)) ** 2
        bath = np.abs(e @ k) ** 2 @ init.bath_occupancies
        out[sl] = init.kappa * surv + bath
    return float(out[0]) if scalar else out


def mean_bath_occupation(modes: NormalModes, init: InitialState, n: int, t):
    """<N_n(t)> = kappa P_n0(t) + sum_m P_nm(t) nbar_m."""
    j = _check_index(modes, n)
    ts, scalar = _times_array(t)
    k = modes.pole_ratios()
    e_n = _phase_matrix(modes, ts) * k[:, j][None, :]
    from_sub = np.abs(e_n.sum(axis=1)) ** 2
    from_bath = np.abs(e_n @ k) ** 2 @ init.bath_occupancies
    out = init.kappa * from_sub + from_bath
    return float(out[0]) if scalar else out


def mean_bath_occupations(modes: NormalModes, init: InitialState, t) -> np.ndarray:
    """All bath occupations at once; shape (T, N).  Cost O(N^2) per sample."""
    ts, scalar = _times_array(t)
    k = modes.pole_ratios()
    e = _phase_matrix(modes, ts)
    out = np.empty((ts.size, modes.model.n_osc))
    for j in range(modes.model.n_osc):
        e_n = e * k[:, j][None, :]
        out[:, j] = (init.kappa * np.abs(e_n.sum(axis=1)) ** 2
                     + np.abs(e_n @ k) ** 2 @ init.bath_occupancies)
    return out[0] if scalar else out


def rotation_coefficients(modes: NormalModes, t):
    """Rotation kernels a(t) = sum w cos(alpha t), b(t) = sum w sin(alpha t)."""
    ts, scalar = _times_array(t)
    s = _phase_matrix(modes, ts).sum(axis=1)
    a, b = s.real, -s.imag
    if scalar:
        return float(a[0]), float(b[0])
    return a, b


def mean_position(modes: NormalModes, x0: float, p0: float, t):
    """<X(t)> for a thermal bath (bath first moments vanish)."""
    a, b = rotation_coefficients(modes, t)
    return a * x0 + b * p0


def mean_momentum_tilde(modes: NormalModes, x0: float, p0: float, t):
    """<P(t)>/(M Omega), the momentum conjugate in rotation form."""
    a, b = rotation_coefficients(modes, t)
    return -b * x0 + a * p0


def theta_profile(modes: NormalModes) -> np.ndarray:
    """Long-time transfer profile theta_N(omega_n) = sum_nu (|Phi_nu|^2 K_nun)^2.

    Equals the time average of P_0n(t); peaks at the resonant bath frequency
    and sharpens toward a delta profile as the bath becomes dense.
    """
    k = modes.pole_ratios()
    return ((modes.weights[:, None] * k) ** 2).sum(axis=0)


def long_time_average_survival(modes: NormalModes) -> float:
    """Cesaro mean of the survival probability: sum_nu |Phi_nu|^4."""
    return float(np.sum(modes.weights**2))


def asymptotic_mean_occupation(modes: NormalModes, init: InitialState) -> float:
    """Exact long-time (Cesaro) mean of <N_sub(t)>.

    This is the non-oscillating diagonal part of the occupation double sum:
    kappa sum_nu |Phi_nu|^4 + sum_n theta_N(omega_n) nbar_n.  For a dense bath
    the first term vanishes and only the bath-transfer term survives.
    """
    return float(
        init.kappa * long_time_average_survival(modes)
        + theta_profile(modes) @ init.bath_occupancies
    )


def _series_x(modes, grid, x0, p0):
    a, b = rotation_coefficients(modes, grid.times)
    return a * x0 + b * p0


def _series_p(modes, grid, x0, p0):
    a, b = rotation_coefficients(modes, grid.times)
    return -b * x0 + a * p0


OBSERVABLES = ("P_surv", "N_omega", "N_total", "X_mean", "P_tilde_mean")


def evolve_series(
    modes: NormalModes,
    init: InitialState,
    grid: TimeGrid,
    observables,
    x0: float = 1.0,
    p0: float = 0.0,
) -> TimeSeries:
    """Evaluate the requested observable columns over the grid.

    Supported names: P_surv, N_omega, N_total, X_mean, P_tilde_mean.  N_total
    sums all bath occupations and costs O(N^2) per sample; the lighter columns
    cost O(N).  An empty selection returns an empty column set.
    """
    names = list(observables)
    unknown = [n for n in names if n not in OBSERVABLES]
    if unknown:
        raise ValueError(f"unknown observables {unknown}; supported: {OBSERVABLES}")
    ts = grid.times
    columns: dict[str, np.ndarray] = {}
    if "P_surv" in names:
        columns["P_surv"] = p_omega_omega(modes, ts)
    if "N_omega" in names or "N_total" in names:
        n_omega = mean_subsystem_occupation(modes, init, ts)
        if "N_omega" in names:
            columns["N_omega"] = n_omega
        if "N_total" in names:
            columns["N_total"] = n_omega + mean_bath_occupations(modes, init, ts).sum(axis=1)
    if "X_mean" in names:
        columns["X_mean"] = _series_x(modes, grid, x0, p0)
    if "P_tilde_mean" in names:
        columns["P_tilde_mean"] = _series_p(modes, grid, x0, p0)
    columns = {name: columns[name] for name in names if name in columns}
    return TimeSeries(grid=grid, columns=columns)
