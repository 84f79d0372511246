import numpy as np
import pytest

from qbmlab import (
    InitialState,
    NormalModes,
    SpectralModel,
    TimeGrid,
    asymptotic_mean_occupation,
    evolve_series,
    long_time_average_survival,
    mean_bath_occupation,
    mean_bath_occupations,
    mean_momentum_tilde,
    mean_position,
    mean_subsystem_occupation,
    p_nm,
    p_omega_n,
    p_omega_omega,
    paper_default_model,
    poincare_time,
    solve_normal_modes,
    survival_amplitude,
    theta_profile,
)
from conftest import random_model


def occupation_double_sum(modes, init, t):
    """Literal double-cosine form of the subsystem occupation (test oracle)."""
    w = modes.weights
    al = modes.alphas
    k = modes.pole_ratios()
    nbar = init.bath_occupancies
    kappa = init.kappa
    total = 0.0
    n_modes = w.size
    for mu in range(n_modes):
        for nu in range(n_modes):
            if mu <= nu:
                continue
            bracket = kappa + float((k[mu] * k[nu]) @ nbar)
            total += 2.0 * w[mu] * w[nu] * np.cos((al[mu] - al[nu]) * t) * bracket
    for nu in range(n_modes):
        total += w[nu] ** 2 * (kappa + float((k[nu] ** 2) @ nbar))
    return total


def single_mode(omega=1.0):
    """Synthetic decoupled-limit mode set: all weight on one rotation."""
    m = SpectralModel(omega, 1.0, 1.0, [omega * 2.0], [1e-8])
    return NormalModes(
        model=m,
        alphas=np.array([omega]),
        weights=np.array([1.0]),
        residuals=np.array([0.0]),
    )


def resonant_pair():
    return solve_normal_modes(SpectralModel(1.0, 1.0, 1.0, [1.0], [0.1]))


class TestSurvivalAmplitude:
    def test_t_zero_is_one(self, modes_32):
        # s(0) = sum of weights, which is 1 to solver tolerance
        assert survival_amplitude(modes_32, 0.0) == pytest.approx(1.0 + 0.0j, abs=1e-12)

    def test_modulus_bounded_by_one(self, modes_32):
        ts = np.linspace(0.0, 5000.0, 1500)
        assert np.all(np.abs(survival_amplitude(modes_32, ts)) <= 1.0 + 1e-12)

    def test_resonant_pair_closed_form(self):
        modes = resonant_pair()
        ts = np.linspace(0.0, 200.0, 500)
        expected = np.exp(-1j * ts) * np.cos(0.1 * ts)
        np.testing.assert_allclose(survival_amplitude(modes, ts), expected, atol=1e-13)

    def test_time_reversal_symmetry(self, modes_32):
        ts = np.linspace(0.5, 300.0, 80)
        np.testing.assert_allclose(
            p_omega_omega(modes_32, -ts), p_omega_omega(modes_32, ts), rtol=0, atol=1e-12
        )


class TestSurvivalProbability:
    def test_rabi_form(self):
        modes = resonant_pair()
        ts = np.linspace(0.0, 10 * np.pi / 0.1, 700)
        np.testing.assert_allclose(
            p_omega_omega(modes, ts), np.cos(0.1 * ts) ** 2, atol=1e-12
        )

    def test_cesaro_average_needs_many_recurrences(self, modes_32):
        # the dephased average emerges only over windows spanning several
        # recurrence periods; between revivals the quasi-periodic sum nearly
        # cancels and the windowed mean sits far below the diagonal term
        tp = poincare_time(modes_32).t_poincare
        ts = np.linspace(0.0, 60 * tp, 16000)
        avg = p_omega_omega(modes_32, ts).mean()
        assert avg == pytest.approx(long_time_average_survival(modes_32), rel=0.02)
        dead = np.linspace(2000.0, 8000.0, 2000)
        assert p_omega_omega(modes_32, dead).mean() < 1e-4


class TestTransitionProbabilities:
    def test_orthogonality_at_t_zero(self, modes_32):
        for n in (1, 7, 31):
            assert p_omega_n(modes_32, n, 0.0) < 1e-12
        assert p_nm(modes_32, 4, 4, 0.0) == pytest.approx(1.0, abs=1e-10)
        assert p_nm(modes_32, 4, 9, 0.0) < 1e-12

    def test_symmetry_omega_n(self, modes_32):
        # P_{0n} computed both ways: subsystem->n equals n->subsystem
        ts = np.array([3.7, 88.0])
        init0 = InitialState(1.0, np.zeros(31))
        for n in (2, 16):
            from_prob = p_omega_n(modes_32, n, ts)
            via_bath = mean_bath_occupation(modes_32, init0, n, ts)
            np.testing.assert_allclose(via_bath, from_prob, rtol=1e-12)

    def test_normalization_rows(self, modes_32):
        rng = np.random.default_rng(1)
        ts = rng.uniform(0.0, 5000.0, 100)
        p00 = p_omega_omega(modes_32, ts)
        total = p00 + sum(p_omega_n(modes_32, n, ts) for n in range(1, 32))
        np.testing.assert_allclose(total, 1.0, atol=1e-10)
        n = 7
        row = p_omega_n(modes_32, n, ts) + sum(
            p_nm(modes_32, n, m, ts) for m in range(1, 32)
        )
        np.testing.assert_allclose(row, 1.0, atol=1e-10)

    def test_index_out_of_range(self, modes_32):
        with pytest.raises(IndexError):
            p_omega_n(modes_32, 0, 1.0)
        with pytest.raises(IndexError):
            p_nm(modes_32, 1, 32, 1.0)


class TestMeanOccupations:
    def test_initial_values(self, modes_32, init_32):
        assert mean_subsystem_occupation(modes_32, init_32, 0.0) == pytest.approx(
            init_32.kappa, rel=1e-12
        )
        for n in (1, 16, 31):
            assert mean_bath_occupation(modes_32, init_32, n, 0.0) == pytest.approx(
                init_32.bath_occupancies[n - 1], rel=1e-10, abs=1e-12
            )

    def test_zero_temperature_reduces_to_survival(self, modes_32):
        init0 = InitialState(kappa=1.0, bath_occupancies=np.zeros(31))
        ts = np.linspace(0.0, 400.0, 97)
        np.testing.assert_allclose(
            mean_subsystem_occupation(modes_32, init0, ts),
            p_omega_omega(modes_32, ts),
            rtol=1e-13,
        )

    def test_double_sum_oracle_equivalence(self):
        rng = np.random.default_rng(9)
        for n_osc in (4, 16):
            m = random_model(rng, n_osc)
            modes = solve_normal_modes(m)
            init = InitialState.thermal(m)
            for t in rng.uniform(0.0, 300.0, 20):
                fast = mean_subsystem_occupation(modes, init, float(t))
                slow = occupation_double_sum(modes, init, float(t))
                assert fast == pytest.approx(slow, rel=1e-11)

    def test_conservation(self, modes_32, init_32):
        rng = np.random.default_rng(2)
        ts = rng.uniform(0.0, 5000.0, 25)
        total0 = init_32.kappa + init_32.bath_occupancies.sum()
        totals = (
            mean_subsystem_occupation(modes_32, init_32, ts)
            + mean_bath_occupations(modes_32, init_32, ts).sum(axis=1)
        )
        np.testing.assert_allclose(totals, total0, rtol=1e-9)

    def test_off_resonant_oscillator_stays_thermal(self, modes_32, init_32):
        ts = np.linspace(0.0, 2000.0, 600)
        nbar = init_32.bath_occupancies
        dev2 = np.abs(mean_bath_occupation(modes_32, init_32, 2, ts) - nbar[1]).max()
        dev16 = np.abs(mean_bath_occupation(modes_32, init_32, 16, ts) - nbar[15]).max()
        assert dev2 < 0.01
        assert dev16 > 5 * dev2  # resonant oscillator is visibly displaced


class TestMeanPosition:
    def test_initial_conditions(self, modes_32):
        assert mean_position(modes_32, 0.3, -0.7, 0.0) == pytest.approx(0.3, rel=1e-12)
        assert mean_momentum_tilde(modes_32, 0.3, -0.7, 0.0) == pytest.approx(
            -0.7, rel=1e-12
        )

    def test_single_mode_rigid_rotation(self):
        modes = single_mode(omega=1.3)
        ts = np.linspace(0.0, 40.0, 300)
        x = mean_position(modes, 1.0, 0.0, ts)
        p = mean_momentum_tilde(modes, 1.0, 0.0, ts)
        np.testing.assert_allclose(x, np.cos(1.3 * ts), atol=1e-14)
        np.testing.assert_allclose(p, -np.sin(1.3 * ts), atol=1e-14)

    def test_feeble_coupling_approaches_rotation(self):
        m = SpectralModel(1.0, 1.0, 1.0, [0.9, 1.1], [1e-8, 1e-8])
        with pytest.warns(UserWarning):
            modes = solve_normal_modes(m)
        ts = np.linspace(0.0, 20.0, 50)
        np.testing.assert_allclose(
            mean_position(modes, 1.0, 0.0, ts), np.cos(ts), atol=1e-5
        )


class TestThetaProfile:
    def test_peaks_at_resonance_and_sharpens(self):
        widths = []
        for np1 in (32, 100):
            m = paper_default_model(np1)
            modes = solve_normal_modes(m)
            th = theta_profile(modes)
            assert np.argmax(th) == (np1 - 1) // 2  # central oscillator
            above = m.bath_freqs[th > th.max() / 2]
            widths.append(above[-1] - above[0])
        assert widths[1] < 0.5 * widths[0]

    def test_asymptotic_mean_matches_long_window_average(self, modes_32, init_32):
        tp = poincare_time(modes_32).t_poincare
        ts = np.linspace(0.0, 40 * tp, 12000)
        measured = mean_subsystem_occupation(modes_32, init_32, ts).mean()
        predicted = asymptotic_mean_occupation(modes_32, init_32)
        assert measured == pytest.approx(predicted, rel=0.02)


class TestEvolveSeries:
    def test_survival_column_matches_pointwise(self):
        modes = resonant_pair()
        init = InitialState.thermal(modes.model)
        grid = TimeGrid(t0=0.0, dt=0.37, count=200)
        series = evolve_series(modes, init, grid, ["P_surv"])
        np.testing.assert_allclose(
            series.column("P_surv"), np.cos(0.1 * grid.times) ** 2, atol=1e-12
        )

    def test_total_quanta_constant(self, modes_32, init_32):
        grid = TimeGrid(t0=0.0, dt=13.0, count=150)
        series = evolve_series(modes_32, init_32, grid, ["N_omega", "N_total"])
        total = series.column("N_total")
        assert np.abs(total / total[0] - 1.0).max() < 1e-9

    def test_position_columns(self, modes_32, init_32):
        grid = TimeGrid(t0=0.0, dt=0.5, count=64)
        series = evolve_series(
            modes_32, init_32, grid, ["X_mean", "P_tilde_mean"], x0=0.2, p0=0.4
        )
        np.testing.assert_allclose(
            series.column("X_mean"), mean_position(modes_32, 0.2, 0.4, grid.times),
            rtol=1e-14,
        )

    def test_empty_selection(self, modes_32, init_32):
        grid = TimeGrid(t0=0.0, dt=1.0, count=10)
        series = evolve_series(modes_32, init_32, grid, [])
        assert series.columns == {}
        assert series.grid.count == 10

    def test_unknown_observable(self, modes_32, init_32):
        grid = TimeGrid(t0=0.0, dt=1.0, count=4)
        with pytest.raises(ValueError, match="unknown"):
            evolve_series(modes_32, init_32, grid, ["bogus"])

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(t0=0.0, dt=-1.0, count=5)
        with pytest.raises(ValueError):
            TimeGrid(t0=0.0, dt=1.0, count=0)
