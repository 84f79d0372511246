"""Dense-bath analytics: resolvent boundary values, decay width and shift,
quadrature survival amplitude, and long-time thermal occupancy.

The spectral density g^2(omega) lives on a finite band (omega_min, omega_max)
containing the subsystem frequency.  Principal-value integrals are evaluated
by singularity subtraction: the integrand is split into a smooth part (the
difference quotient, which has a removable singularity) plus an analytic
logarithm carrying the entire principal value.

Oscillatory time integrals use a fixed-panel Gauss rule whose panel width is
tied to 1/t.  Panel node values of the resolvent are precomputed once per
scheme (a WeightTable), so evaluating the amplitude at many times is a cheap
matrix product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .model import SpectralModel, thermal_occupancy

__all__ = [
    "ContinuumError",
    "ContinuumModel",
    "PoleEstimate",
    "ContinuumValidityReport",
    "WeightTable",
    "lorentzian_density",
    "ullersma_density",
    "density_from_discrete",
    "width_from_discrete",
    "pv_shift",
    "width",
    "resolvent_boundary",
    "pole_estimate",
    "refine_pole",
    "build_weight_table",
    "survival_amplitude_continuum",
    "khalfin_tail",
    "asymptotic_occupation",
    "validate_continuum",
]

_GAUSS_ORDER = 12
_PANEL_PHASE_LIMIT = 0.5  # refuse schemes with panel_width * t above this


class ContinuumError(RuntimeError):
    """Quadrature failure, resolution refusal, or invalid continuum model."""


@dataclass(frozen=True)
class ContinuumModel:
    """Spectral density g^2(omega) >= 0 on a finite band around omega_sub.

    ``g_sq`` must accept numpy arrays.  ``g_sq_complex``, when given, is the
    analytic continuation of the density used for second-sheet pole polishing;
    it is optional because a purely numerical density has no canonical
    continuation.
    """

    g_sq: Callable[[np.ndarray], np.ndarray]
    omega_min: float
    omega_max: float
    omega_sub: float
    beta: float
    g_sq_complex: Callable | None = None

    def __post_init__(self):
        if not self.omega_min < self.omega_sub < self.omega_max:
            raise ContinuumError(
                f"omega_sub = {self.omega_sub} must lie inside the band "
                f"({self.omega_min}, {self.omega_max})"
            )
        if self.beta <= 0:
            raise ContinuumError(f"beta must be positive, got {self.beta}")
        if float(self.g_sq(np.asarray(self.omega_sub))) <= 0:
            raise ContinuumError("spectral density must be positive at omega_sub")

    @property
    def band(self) -> float:
        return self.omega_max - self.omega_min


@dataclass(frozen=True)
class PoleEstimate:
    """Second-order pole of the continued resolvent: z0 = W + dW - i G/2."""

    delta_omega: float
    gamma: float
    z0: complex


@dataclass(frozen=True)
class ContinuumValidityReport:
    """Continuum dissipation conditions, regularized at the band edges.

    Each integral is evaluated with a relative edge margin (the continuum
    analogue of the discrete grid-spacing regulator); ``edge_growth`` measures
    how much the value moved when the margin shrank by four decades, and a
    growth beyond 5% of the bound flags the integral as divergent.
    """

    left_value: float
    right_value: float
    left_bound: float
    right_bound: float
    passes: tuple[bool, bool]
    diverged: tuple[bool, bool]
    edge_growth: tuple[float, float]

    @property
    def all_pass(self) -> bool:
        return all(self.passes)


def lorentzian_density(
    peak: float,
    half_width: float,
    omega_sub: float,
    omega_min: float,
    omega_max: float,
    beta: float = 1.0,
) -> ContinuumModel:
    """Density g^2(w) = peak * a^2 / (a^2 + (w - omega_sub)^2)."""
    if peak <= 0 or half_width <= 0:
        raise ContinuumError("peak and half_width must be positive")

    def g_sq(w):
        return peak * half_width**2 / (half_width**2 + (w - omega_sub) ** 2)

    return ContinuumModel(
        g_sq=g_sq, omega_min=omega_min, omega_max=omega_max,
        omega_sub=omega_sub, beta=beta, g_sq_complex=g_sq,
    )


def ullersma_density(
    c1: float,
    c2: float,
    omega_min: float,
    omega_max: float,
    omega_sub: float = 1.0,
    beta: float = 1.0,
) -> ContinuumModel:
    """Density with spectral strength g(w) = c1 w / sqrt(c2^2 + w^2).

    Behaves like (c1/c2)^2 w^2 at small frequencies, which controls the
    long-time power-law tail of the survival probability.
    """
    if c1 <= 0 or c2 <= 0:
        raise ContinuumError("c1 and c2 must be positive")

    def g_sq(w):
        return c1**2 * w**2 / (c2**2 + w**2)

    return ContinuumModel(
        g_sq=g_sq, omega_min=omega_min, omega_max=omega_max,
        omega_sub=omega_sub, beta=beta, g_sq_complex=g_sq,
    )


def density_from_discrete(model: SpectralModel) -> ContinuumModel:
    """Continuum density matching a discrete model: g^2(w_n) = g_n^2 / spacing.

    Interpolates g_n^2/A linearly between grid points; requires an equidistant
    bath so the density normalization is well defined.
    """
    spacing = model.uniform_spacing()
    if spacing is None:
        raise ContinuumError("discrete-to-continuum density requires an equidistant bath")
    w = model.bath_freqs
    vals = model.couplings**2 / spacing

    def g_sq(x):
        return np.interp(x, w, vals)

    return ContinuumModel(
        g_sq=g_sq, omega_min=float(w[0]), omega_max=float(w[-1]),
        omega_sub=model.omega_sub, beta=model.beta,
    )


def width_from_discrete(model: SpectralModel) -> float:
    """Decay width 2*pi*g^2(omega_sub) under the g_n^2/spacing correspondence."""
    spacing = model.uniform_spacing()
    if spacing is None:
        raise ContinuumError("width correspondence requires an equidistant bath")
    g_at = float(np.interp(model.omega_sub, model.bath_freqs, model.couplings))
    return 2.0 * math.pi * g_at**2 / spacing


def _check_quad_tol(quad_tol: float) -> None:
    if not (1e-14 < quad_tol < 1e-6):
        raise ContinuumError(f"quad_tol must lie in (1e-14, 1e-6), got {quad_tol}")


def _pv_value(cm: ContinuumModel, alpha: float, quad_tol: float) -> float:
    """PV integral of g^2(w)/(alpha - w) over the band, split at alpha."""
    g2a = float(cm.g_sq(np.asarray(alpha)))
    h = 1e-7 * cm.band

    def smooth(w):
        d = alpha - w
        if abs(d) < 1e-12 * cm.band:
            return -(float(cm.g_sq(np.asarray(alpha + h)))
                     - float(cm.g_sq(np.asarray(alpha - h)))) / (2.0 * h)
        return (float(cm.g_sq(np.asarray(w))) - g2a) / d

    i1, e1 = quad(smooth, cm.omega_min, alpha, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    i2, e2 = quad(smooth, alpha, cm.omega_max, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    achieved = e1 + e2
    value = i1 + i2 + g2a * math.log((alpha - cm.omega_min) / (cm.omega_max - alpha))
    if achieved > 50.0 * quad_tol * max(1.0, abs(value)):
        raise ContinuumError(
            f"principal-value quadrature did not converge: error estimate {achieved:.3e}"
        )
    return value


def pv_shift(cm: ContinuumModel, quad_tol: float = 1e-10) -> float:
    """Frequency shift: PV integral of g^2(w)/(omega_sub - w) over the band."""
    _check_quad_tol(quad_tol)
    return _pv_value(cm, cm.omega_sub, quad_tol)


def width(cm: ContinuumModel) -> float:
    """Decay width 2*pi*g^2(omega_sub)."""
    return 2.0 * math.pi * float(cm.g_sq(np.asarray(cm.omega_sub)))


def resolvent_boundary(
    cm: ContinuumModel, alpha: float, quad_tol: float = 1e-10, side: int = +1
) -> complex:
    """Boundary value of the inverse reduced resolvent on the band cut.

    side=+1 approaches from the upper half plane: alpha - omega_sub - PV(alpha)
    + i*pi*g^2(alpha); side=-1 gives the complex conjugate.  The jump across
    the cut (upper minus lower) is therefore 2*i*pi*g^2(alpha).
    """
    _check_quad_tol(quad_tol)
    if not cm.omega_min < alpha < cm.omega_max:
        raise ContinuumError(f"alpha = {alpha} lies outside the open band")
    if side not in (+1, -1):
        raise ContinuumError(f"side must be +1 or -1, got {side}")
    re = alpha - cm.omega_sub - _pv_value(cm, alpha, quad_tol)
    im = math.pi * float(cm.g_sq(np.asarray(alpha)))
    return complex(re, side * im)


def pole_estimate(cm: ContinuumModel, quad_tol: float = 1e-10) -> PoleEstimate:
    """Second-order pole parameters: shift from the PV integral, width 2*pi*g^2."""
    d_omega = pv_shift(cm, quad_tol)
    gamma = width(cm)
    return PoleEstimate(
        delta_omega=d_omega,
        gamma=gamma,
        z0=complex(cm.omega_sub + d_omega, -0.5 * gamma),
    )


def _panel_nodes(lo: float, hi: float, n_panels: int, order: int):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _self_energy_complex(cm: ContinuumModel, z: complex, n_panels: int = 2048) -> complex:
    """Integral of g^2(w)/(z - w) over the band for z off the real axis."""
    g2z = cm.g_sq_complex(z)
    nodes, wq = _panel_nodes(cm.omega_min, cm.omega_max, n_panels, 8)
    vals = (cm.g_sq(nodes) - g2z) / (z - nodes)
    log_term = g2z * (np.log(z - cm.omega_min) - np.log(z - cm.omega_max))
    return complex(vals @ wq + log_term)


def refine_pole(
    cm: ContinuumModel,
    start: complex | None = None,
    quad_tol: float = 1e-10,
    max_iter: int = 40,
    tol: float = 1e-12,
) -> complex:
    """Polish the second-sheet zero by damped Newton from the estimate.

    The continued function in the lower half plane is
    F(z) = z - omega_sub - Int g^2(w)/(z-w) dw + 2*pi*i*g^2(z), which requires
    an analytic continuation of the density.
    """
    if cm.g_sq_complex is None:
        raise ContinuumError("pole refinement needs an analytic density continuation")
    z = complex(start) if start is not None else pole_estimate(cm, quad_tol).z0
    scale = max(abs(z), 1.0)

    def f(zz: complex) -> complex:
        return (zz - cm.omega_sub - _self_energy_complex(cm, zz)
                + 2.0j * math.pi * cm.g_sq_complex(zz))

    fz = f(z)
    for _ in range(max_iter):
        h = 1e-7 * scale
        deriv = (f(z + h) - f(z - h)) / (2.0 * h)
        if deriv == 0:
            raise ContinuumError("pole refinement stalled: zero derivative")
        step = -fz / deriv
        for _ in range(25):
            z_new = z + step
            f_new = f(z_new)
            if abs(f_new) < abs(fz):
                break
            step *= 0.5
        else:
            break
        z, fz = z_new, f_new
        if abs(step) < tol * scale:
            break
    if z.imag >= 0:
        raise ContinuumError(f"pole refinement left the lower half plane: {z!r}")
    return z


@dataclass
class WeightTable:
    """Precomputed mode-weight density on a composite Gauss scheme.

    ``density[i]`` is g^2(a_i)/|Rinv(a_i + i0)|^2 at node a_i; integrating it
    against ``quad_weights`` gives the completeness norm, which must be 1 for
    a density with no bound states outside the band.
    """

    nodes: np.ndarray
    quad_weights: np.ndarray
    density: np.ndarray
    panel_width: float
    completeness: float


def _peak_panels(cm: ContinuumModel) -> int:
    gamma_half = math.pi * float(cm.g_sq(np.asarray(cm.omega_sub)))
    return int(math.ceil(2.0 * cm.band / gamma_half))


def _auto_panels(cm: ContinuumModel, t_max: float) -> int:
    n_phase = int(math.ceil(cm.band * max(t_max, 0.0) / 0.4)) + 1
    return max(64, _peak_panels(cm), n_phase)


def build_weight_table(
    cm: ContinuumModel,
    n_panels: int,
    order: int = _GAUSS_ORDER,
    pv_panels: int = 401,
    pv_order: int = 8,
) -> WeightTable:
    """Evaluate the weight density on all panel nodes in one vectorized pass."""
    nodes, wq = _panel_nodes(cm.omega_min, cm.omega_max, n_panels, order)
    pv_nodes, pv_w = _panel_nodes(cm.omega_min, cm.omega_max, pv_panels, pv_order)
    g2_pv = cm.g_sq(pv_nodes)
    g2_nodes = cm.g_sq(nodes)

    pv_vals = np.empty(nodes.size)
    chunk = max(1, 2_000_000 // pv_nodes.size)
    tiny = 1e-14 * cm.band
    for i in range(0, nodes.size, chunk):
        sl = slice(i, min(i + chunk, nodes.size))
        d = nodes[sl, None] - pv_nodes[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (g2_pv[None, :] - g2_nodes[sl, None]) / d
        ratio = np.where(np.abs(d) < tiny, 0.0, ratio)
        pv_vals[sl] = ratio @ pv_w
    pv_vals += g2_nodes * np.log((nodes - cm.omega_min) / (cm.omega_max - nodes))

    re = nodes - cm.omega_sub - pv_vals
    im = math.pi * g2_nodes
    density = g2_nodes / (re * re + im * im)
    completeness = float(density @ wq)
    return WeightTable(
        nodes=nodes,
        quad_weights=wq,
        density=density,
        panel_width=cm.band / n_panels,
        completeness=completeness,
    )


def survival_amplitude_continuum(
    cm: ContinuumModel,
    t,
    quad_tol: float = 1e-10,
    n_panels: int | None = None,
    table: WeightTable | None = None,
    norm_tol: float = 1e-6,
):
    """Oscillatory quadrature of the weight density times exp(-i*alpha*t).

    Panels are auto-sized from the largest requested time unless a scheme is
    supplied; a supplied scheme whose panels cannot resolve the phase
    (panel_width * t > 0.5) is refused rather than silently inaccurate.  The
    completeness norm of the scheme is checked before use.
    """
    _check_quad_tol(quad_tol)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.asarray(t).ndim == 0
    if np.any(ts < 0):
        raise ContinuumError("survival amplitude is defined for t >= 0")
    t_max = float(ts.max()) if ts.size else 0.0

    explicit = table is not None or n_panels is not None
    if table is None:
        table = build_weight_table(cm, n_panels if n_panels else _auto_panels(cm, t_max))
    if explicit and table.panel_width * t_max > _PANEL_PHASE_LIMIT:
        raise ContinuumError(
            f"panel width {table.panel_width:.3e} cannot resolve the phase at "
            f"t = {t_max:g} (limit {_PANEL_PHASE_LIMIT} per panel); increase the panel count"
        )
    if abs(table.completeness - 1.0) > norm_tol:
        raise ContinuumError(
            f"weight density integrates to {table.completeness!r}, not 1: "
            "the scheme is under-resolved or the model has bound states"
        )
    mass = table.density * table.quad_weights
    s = np.exp(-1j * np.outer(ts, table.nodes)) @ mass
    return complex(s[0]) if scalar else s


def khalfin_tail(
    cm: ContinuumModel,
    t_range: tuple[float, float],
    n_times: int = 48,
    quad_tol: float = 1e-10,
) -> float:
    """Log-log slope of the survival probability over a late-time window.

    Valid only between the memory time of the upper cutoff and the reciprocal
    lower cutoff (1/omega_max << t < 1/omega_min), where the band-edge
    contributions produce the power-law tail.
    """
    t_lo, t_hi = t_range
    if not 0 < t_lo < t_hi:
        raise ContinuumError(f"bad t_range {t_range}")
    if cm.omega_min <= 0:
        raise ContinuumError("the power-law window needs a positive lower cutoff")
    if t_lo < 5.0 / cm.omega_max or t_hi > 1.0 / cm.omega_min:
        raise ContinuumError(
            f"fit window {t_range} outside the validity range "
            f"[{5.0 / cm.omega_max:g}, {1.0 / cm.omega_min:g}]"
        )
    ts = np.geomspace(t_lo, t_hi, n_times)
    s = survival_amplitude_continuum(cm, ts, quad_tol=quad_tol)
    p = np.abs(s) ** 2
    if np.any(p <= 0):
        raise ContinuumError("survival probability underflowed in the fit window")
    slope, _ = np.polyfit(np.log(ts), np.log(p), 1)
    return float(slope)


def asymptotic_occupation(
    cm: ContinuumModel, weak_coupling: bool = False, quad_tol: float = 1e-10
) -> float:
    """Long-time subsystem occupation.

    In the vanishing-coupling limit the weight density contracts to a delta at
    omega_sub and the value is the bare thermal occupancy 1/(exp(beta W) - 1);
    at finite coupling it is the thermal occupancy averaged over the weight
    density.
    """
    _check_quad_tol(quad_tol)
    if weak_coupling:
        return thermal_occupancy(cm.beta, cm.omega_sub)
    table = build_weight_table(cm, max(64, _peak_panels(cm)))
    if abs(table.completeness - 1.0) > 1e-4:
        raise ContinuumError(
            f"weight density integrates to {table.completeness!r}; "
            "cannot form the thermal average"
        )
    occ = 1.0 / np.expm1(cm.beta * table.nodes)
    return float((table.density * occ) @ table.quad_weights)


def _edge_regular_integral(cm: ContinuumModel, side: str, margin: float,
                           quad_tol: float) -> float:
    """Integral of g^2/(distance to edge) with a relative edge margin.

    Uses the substitution u = log(distance), which removes the edge steepness.
    """
    band = cm.band
    eta = margin * band
    sign = 1.0 if side == "left" else -1.0
    edge = cm.omega_min if side == "left" else cm.omega_max

    def f(u):
        return float(cm.g_sq(np.asarray(edge + sign * math.exp(u))))

    val, err = quad(f, math.log(eta), math.log(band),
                    epsabs=quad_tol, epsrel=1e-9, limit=400)
    if not math.isfinite(val):
        raise ContinuumError(f"{side} dissipation integral is not finite")
    return val


def validate_continuum(cm: ContinuumModel, quad_tol: float = 1e-10,
                       edge_margin: float = 1e-8) -> ContinuumValidityReport:
    """Evaluate both continuum dissipation integrals against their bounds.

    The band-edge singularity is regularized with a relative margin (the
    continuum analogue of the discrete spacing regulator); an integral whose
    value keeps growing as the margin shrinks is reported as divergent, which
    counts as a condition failure.
    """
    _check_quad_tol(quad_tol)
    left_bound = cm.omega_sub - cm.omega_min
    right_bound = cm.omega_max - cm.omega_sub
    values = {}
    growth = {}
    for side in ("left", "right"):
        coarse = _edge_regular_integral(cm, side, margin=1e4 * edge_margin,
                                        quad_tol=quad_tol)
        fine = _edge_regular_integral(cm, side, margin=edge_margin, quad_tol=quad_tol)
        values[side] = fine
        growth[side] = fine - coarse
    bounds = {"left": left_bound, "right": right_bound}
    diverged = {s: growth[s] > 0.05 * bounds[s] for s in ("left", "right")}
    passes = {s: (not diverged[s]) and values[s] < bounds[s] for s in ("left", "right")}
    return ContinuumValidityReport(
        left_value=values["left"],
        right_value=values["right"],
        left_bound=left_bound,
        right_bound=right_bound,
        passes=(passes["left"], passes["right"]),
        diverged=(diverged["left"], diverged["right"]),
        edge_growth=(growth["left"], growth["right"]),
    )
