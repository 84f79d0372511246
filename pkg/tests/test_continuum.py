import math

import numpy as np
import pytest

from qbmlab import (
    ContinuumError,
    ContinuumModel,
    paper_default_model,
    solve_normal_modes,
)
from qbmlab.continuum import (
    _self_energy_complex,
    asymptotic_occupation,
    build_weight_table,
    density_from_discrete,
    khalfin_tail,
    lorentzian_density,
    pole_estimate,
    pv_shift,
    refine_pole,
    resolvent_boundary,
    survival_amplitude_continuum,
    ullersma_density,
    validate_continuum,
    width,
    width_from_discrete,
)


@pytest.fixture(scope="module")
def narrow():
    """Narrow symmetric Lorentzian density: clean pole, tiny shift."""
    return lorentzian_density(
        peak=5e-4, half_width=0.05, omega_sub=1.0, omega_min=0.5, omega_max=1.5
    )


@pytest.fixture(scope="module")
def narrow_table(narrow):
    return build_weight_table(narrow, 3500)


class TestModelValidation:
    def test_omega_sub_must_lie_in_band(self):
        with pytest.raises(ContinuumError):
            lorentzian_density(1e-3, 0.05, omega_sub=2.0, omega_min=0.5, omega_max=1.5)

    def test_density_must_be_positive_at_omega_sub(self):
        with pytest.raises(ContinuumError, match="positive"):
            ContinuumModel(
                g_sq=lambda w: np.zeros_like(np.asarray(w, float)),
                omega_min=0.5, omega_max=1.5, omega_sub=1.0, beta=1.0,
            )


class TestPvShift:
    def test_symmetric_density_gives_zero(self, narrow):
        assert abs(pv_shift(narrow)) < 1e-10

    def test_constant_density_gives_zero(self):
        cm = ContinuumModel(
            g_sq=lambda w: np.full_like(np.asarray(w, float), 0.01),
            omega_min=0.6, omega_max=1.4, omega_sub=1.0, beta=1.0,
        )
        assert abs(pv_shift(cm)) < 1e-10

    def test_linear_density_closed_form(self):
        # PV int of c*w/(W - w) over (W - h, W + h) equals -2*c*h
        c, h = 0.3, 0.25
        cm = ContinuumModel(
            g_sq=lambda w: c * np.asarray(w, float),
            omega_min=1.0 - h, omega_max=1.0 + h, omega_sub=1.0, beta=1.0,
        )
        assert pv_shift(cm) == pytest.approx(-2 * c * h, rel=1e-9)

    def test_quad_tol_domain(self, narrow):
        with pytest.raises(ContinuumError):
            pv_shift(narrow, quad_tol=1e-5)


class TestWidth:
    def test_value(self, narrow):
        assert width(narrow) == pytest.approx(2 * math.pi * 5e-4, rel=1e-14)

    def test_explicit_density(self):
        cm = ContinuumModel(
            g_sq=lambda w: np.full_like(np.asarray(w, float), 1.0 / (2 * math.pi)),
            omega_min=0.5, omega_max=1.5, omega_sub=1.0, beta=1.0,
        )
        assert width(cm) == pytest.approx(1.0, rel=1e-14)

    def test_linearity(self, narrow):
        doubled = lorentzian_density(
            peak=1e-3, half_width=0.05, omega_sub=1.0, omega_min=0.5, omega_max=1.5
        )
        assert width(doubled) == pytest.approx(2 * width(narrow), rel=1e-13)

    def test_discrete_correspondence(self):
        m = paper_default_model(32)
        a = m.uniform_spacing()
        # couplings peak at D = A, so g^2(W)/A = A
        assert width_from_discrete(m) == pytest.approx(2 * math.pi * a, rel=1e-9)


class TestResolventBoundary:
    def test_imaginary_part_by_construction(self, narrow):
        rng = np.random.default_rng(0)
        for alpha in rng.uniform(0.55, 1.45, 10):
            r = resolvent_boundary(narrow, float(alpha))
            assert r.imag == math.pi * float(narrow.g_sq(np.asarray(alpha)))

    def test_conjugacy(self, narrow):
        r_up = resolvent_boundary(narrow, 1.2)
        r_dn = resolvent_boundary(narrow, 1.2, side=-1)
        assert r_dn == r_up.conjugate()

    def test_cut_discontinuity(self, narrow):
        alpha = 0.87
        jump = resolvent_boundary(narrow, alpha) - resolvent_boundary(narrow, alpha, side=-1)
        expected = 2j * math.pi * float(narrow.g_sq(np.asarray(alpha)))
        assert jump == pytest.approx(expected, rel=1e-12)

    def test_real_part_vanishes_on_resonance_for_symmetric_density(self, narrow):
        r = resolvent_boundary(narrow, narrow.omega_sub)
        assert abs(r.real) < 1e-10

    def test_no_real_zeros_on_band(self, narrow):
        # |Rinv| >= pi g^2 > 0 everywhere on the cut
        for alpha in np.linspace(0.51, 1.49, 21):
            r = resolvent_boundary(narrow, float(alpha))
            assert abs(r) >= math.pi * float(narrow.g_sq(np.asarray(alpha)))

    def test_alpha_outside_band_rejected(self, narrow):
        with pytest.raises(ContinuumError):
            resolvent_boundary(narrow, 0.4)


class TestPole:
    def test_estimate_structure(self, narrow):
        est = pole_estimate(narrow)
        assert est.gamma == width(narrow)
        assert est.z0 == complex(1.0 + est.delta_omega, -est.gamma / 2)
        assert abs(est.delta_omega) < 1e-10  # symmetric density

    def test_refinement_stays_close_and_zeroes_f(self, narrow):
        est = pole_estimate(narrow)
        z = refine_pole(narrow)
        assert abs(z - est.z0) < 0.05 * est.gamma
        f = (z - narrow.omega_sub - _self_energy_complex(narrow, z)
             + 2j * math.pi * narrow.g_sq_complex(z))
        assert abs(f) < 1e-12

    def test_refinement_requires_continuation(self):
        cm = ContinuumModel(
            g_sq=lambda w: np.full_like(np.asarray(w, float), 0.01),
            omega_min=0.5, omega_max=1.5, omega_sub=1.0, beta=1.0,
        )
        with pytest.raises(ContinuumError, match="continuation"):
            refine_pole(cm)


class TestSurvivalAmplitude:
    def test_completeness_at_t_zero(self, narrow, narrow_table):
        assert narrow_table.completeness == pytest.approx(1.0, abs=1e-10)
        s0 = survival_amplitude_continuum(narrow, 0.0, table=narrow_table)
        assert s0 == pytest.approx(1.0 + 0.0j, abs=1e-10)

    def test_mid_time_exponential_with_residue_correction(self, narrow, narrow_table):
        gamma = width(narrow)
        z = refine_pole(narrow)
        h = 1e-6
        def f(zz):
            return (zz - narrow.omega_sub - _self_energy_complex(narrow, zz)
                    + 2j * math.pi * narrow.g_sq_complex(zz))
        residue = abs(1.0 / ((f(z + h) - f(z - h)) / (2 * h)))
        ts = np.array([200.0, 500.0, 900.0])
        s = survival_amplitude_continuum(narrow, ts, table=narrow_table)
        predicted = np.exp(-gamma * ts / 2.0) * residue
        np.testing.assert_allclose(np.abs(s), predicted, rtol=0.10)

    def test_short_time_quadratic_onset(self, narrow, narrow_table):
        ts = np.geomspace(0.02, 0.2, 25)
        s = survival_amplitude_continuum(narrow, ts, table=narrow_table)
        slope, _ = np.polyfit(np.log(ts), np.log(1.0 - np.abs(s) ** 2), 1)
        assert slope == pytest.approx(2.0, abs=0.05)

    def test_phase_resolution_refusal(self, narrow, narrow_table):
        t_bad = 1.0 / narrow_table.panel_width
        with pytest.raises(ContinuumError, match="panel"):
            survival_amplitude_continuum(narrow, t_bad, table=narrow_table)
        with pytest.raises(ContinuumError, match="panel"):
            survival_amplitude_continuum(narrow, 500.0, n_panels=100)

    def test_negative_time_rejected(self, narrow, narrow_table):
        with pytest.raises(ContinuumError):
            survival_amplitude_continuum(narrow, -1.0, table=narrow_table)


@pytest.fixture(scope="module")
def strong_ullersma():
    # coupling strong enough that the exponential is dead well inside the
    # power-law window t < 1/omega_min
    return ullersma_density(c1=0.3, c2=1.0, omega_min=1e-3, omega_max=5.0)


class TestKhalfinTail:
    def test_inverse_square_tail(self, strong_ullersma):
        slope = khalfin_tail(strong_ullersma, (100.0, 400.0))
        assert slope == pytest.approx(-2.0, abs=0.2)

    def test_amplitude_keeps_decaying(self, strong_ullersma):
        s = survival_amplitude_continuum(strong_ullersma, np.array([100.0, 400.0, 900.0]))
        mags = np.abs(s)
        assert mags[0] > mags[1] > mags[2]
        assert mags[2] < 1e-4

    def test_window_validity_enforced(self, strong_ullersma):
        with pytest.raises(ContinuumError, match="validity"):
            khalfin_tail(strong_ullersma, (0.1, 400.0))
        with pytest.raises(ContinuumError, match="validity"):
            khalfin_tail(strong_ullersma, (100.0, 5000.0))


class TestAsymptoticOccupation:
    def test_weak_coupling_value(self, narrow):
        assert asymptotic_occupation(narrow, weak_coupling=True) == pytest.approx(
            1.0 / (math.e - 1.0), rel=1e-14
        )

    def test_zero_temperature_limit(self):
        cold = lorentzian_density(
            peak=5e-4, half_width=0.05, omega_sub=1.0,
            omega_min=0.5, omega_max=1.5, beta=1e4,
        )
        assert asymptotic_occupation(cold, weak_coupling=True) < 1e-30

    def test_finite_coupling_converges_monotonically_to_weak_limit(self):
        weak_value = 1.0 / (math.e - 1.0)
        deviations = []
        for scale in (1.0, 0.5, 0.25):
            cm = lorentzian_density(
                peak=2e-3 * scale**2, half_width=0.05, omega_sub=1.0,
                omega_min=0.5, omega_max=1.5,
            )
            deviations.append(asymptotic_occupation(cm) - weak_value)
        assert all(d > 0 for d in deviations)
        assert deviations[0] > deviations[1] > deviations[2]
        assert deviations[2] < 1e-4


class TestValidateContinuum:
    def test_narrow_lorentzian_passes(self, narrow):
        report = validate_continuum(narrow)
        assert report.all_pass
        assert not any(report.diverged)

    def test_ohmic_from_zero_fails_left(self):
        ohmic = ContinuumModel(
            g_sq=lambda w: np.asarray(w, float).copy(),
            omega_min=0.0, omega_max=2.0, omega_sub=1.0, beta=1.0,
        )
        report = validate_continuum(ohmic)
        assert not report.passes[0]
        assert report.left_value == pytest.approx(2.0, rel=1e-4)

    def test_tiny_density_passes_trivially(self):
        cm = ContinuumModel(
            g_sq=lambda w: np.full_like(np.asarray(w, float), 1e-30),
            omega_min=0.5, omega_max=1.5, omega_sub=1.0, beta=1.0,
        )
        report = validate_continuum(cm)
        assert report.all_pass
        assert report.left_value < 1e-25 and report.right_value < 1e-25


class TestDiscreteContinuumConsistency:
    def test_weight_histogram_converges_to_density(self):
        sups = []
        for np1 in (32, 100):
            m = paper_default_model(np1)
            modes = solve_normal_modes(m)
            cm = density_from_discrete(m)
            table = build_weight_table(cm, max(400, 4 * np1))
            lo, hi = m.bath_freqs[0], m.bath_freqs[-1]
            pad = 0.05 * (hi - lo)
            edges = np.linspace(lo + pad, hi - pad, 9)
            sup = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                disc = modes.weights[(modes.alphas >= a) & (modes.alphas < b)].sum()
                mask = (table.nodes >= a) & (table.nodes < b)
                cont = float((table.density[mask] * table.quad_weights[mask]).sum())
                sup = max(sup, abs(disc - cont))
            sups.append(sup)
        assert sups[1] < sups[0] / 3.0

    def test_density_from_discrete_requires_equidistant(self):
        from qbmlab import SpectralModel
        m = SpectralModel(1.0, 1.0, 1.0, [0.8, 1.0, 1.3], [0.1, 0.1, 0.1])
        with pytest.raises(ContinuumError, match="equidistant"):
            density_from_discrete(m)
