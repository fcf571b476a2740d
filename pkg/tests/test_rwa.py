import numpy as np
import pytest

from qmemory.bath import (
    CorrelationKernel,
    SpectralDensity,
    discretize,
    correlation_function,
)
from qmemory.qubit import (
    AXES,
    PolarizedPair,
    bloch_from_density,
    density_from_bloch,
    l21_norm,
    reconstruct_affine_map,
    trace_distance,
)
from qmemory.rwa import (
    GammaTrajectory,
    channel_of_gamma,
    channel_series,
    fopt_of_gamma,
    nm_of_gamma,
    rates_of_gamma,
    rwa_channel_at,
    solve_gamma,
)


def make_kernel(values_fn, dt, t_final, omega_s=1.0):
    tau = np.arange(int(round(t_final / dt)) + 1) * dt
    return CorrelationKernel(
        time_grid=tau, values=values_fn(tau).astype(complex), system_frequency=omega_s
    )


def exponential_kernel_solution(t, lam=1.0, gamma0=0.2):
    """Damped-oscillator closed form for the kernel (gamma0 lam / 2) e^{-lam tau}.

    The memory equation is equivalent to G'' + lam G' + (gamma0 lam / 2) G = 0
    with G(0) = 1, G'(0) = 0.
    """
    d = np.sqrt(lam**2 - 2 * gamma0 * lam)
    return np.exp(-lam * t / 2) * (np.cosh(d * t / 2) + (lam / d) * np.sinh(d * t / 2))


class TestOracleSelfChecks:
    def test_closed_form_satisfies_ode(self):
        # independent sanity of the analytic oracle: finite differences of the
        # closed form reproduce the equivalent second-order ODE
        lam, gamma0, h = 1.0, 0.2, 1e-5
        for t in (0.5, 2.0, 7.3):
            g = exponential_kernel_solution(np.array([t - h, t, t + h]))
            d2 = (g[2] - 2 * g[1] + g[0]) / h**2
            d1 = (g[2] - g[0]) / (2 * h)
            assert abs(d2 + lam * d1 + (gamma0 * lam / 2) * g[1]) < 1e-5

    def test_closed_form_initial_conditions(self):
        h = 1e-6
        g = exponential_kernel_solution(np.array([0.0, h]))
        assert g[0] == pytest.approx(1.0)
        assert (g[1] - g[0]) / h == pytest.approx(0.0, abs=1e-5)


class TestSolveGamma:
    def test_zero_kernel_keeps_unity(self):
        ker = make_kernel(lambda t: np.zeros_like(t), 0.01, 5.0)
        traj = solve_gamma(ker, 0.01, 5.0)
        assert np.allclose(traj.values, 1.0)

    def test_exponential_kernel_against_closed_form(self):
        lam, gamma0 = 1.0, 0.2
        dt = 1e-3
        ker = make_kernel(lambda t: (gamma0 * lam / 2) * np.exp(-lam * t), dt, 20.0)
        traj = solve_gamma(ker, dt, 20.0)
        err = np.max(np.abs(traj.values - exponential_kernel_solution(traj.time_grid)))
        assert err < 1e-4

    def test_second_order_convergence(self):
        lam, gamma0 = 1.0, 0.2
        errs = []
        for dt in (8e-3, 4e-3, 2e-3):
            ker = make_kernel(lambda t: (gamma0 * lam / 2) * np.exp(-lam * t), dt, 10.0)
            traj = solve_gamma(ker, dt, 10.0)
            errs.append(
                np.max(np.abs(traj.values - exponential_kernel_solution(traj.time_grid)))
            )
        rate1 = np.log2(errs[0] / errs[1])
        rate2 = np.log2(errs[1] / errs[2])
        assert 1.7 < rate1 < 2.3
        assert 1.7 < rate2 < 2.3

    def test_single_resonant_mode_revivals(self):
        g = 0.5
        ker = make_kernel(lambda t: np.full_like(t, g * g), 1e-3, 15.0)
        traj = solve_gamma(ker, 1e-3, 15.0)
        assert np.max(np.abs(traj.values - np.cos(g * traj.time_grid))) < 1e-5
        assert traj.magnitudes.max() <= 1 + 1e-8

    def test_kernel_too_short(self):
        ker = make_kernel(lambda t: np.zeros_like(t), 0.01, 1.0)
        with pytest.raises(ValueError, match="kernel"):
            solve_gamma(ker, 0.01, 2.0)

    def test_kernel_grid_mismatch(self):
        ker = make_kernel(lambda t: np.zeros_like(t), 0.01, 1.0)
        with pytest.raises(ValueError, match="grid step"):
            solve_gamma(ker, 0.02, 0.5)

    def test_amplitude_never_exceeds_one(self):
        bath = discretize(SpectralDensity(h=1.4), 400)
        ker = correlation_function(bath, 1.0, dt=5e-3, t_final=30.0)
        traj = solve_gamma(ker, 5e-3, 30.0)
        assert traj.values[0] == 1.0
        assert traj.magnitudes.max() <= 1 + 1e-8


class TestRwaChannel:
    def test_identity_at_unity(self):
        rho = density_from_bloch([0.2, -0.4, 0.6])
        assert np.allclose(rwa_channel_at(1.0, rho), rho)

    def test_complete_decay(self):
        for p in ([0, 0, 1], [0.6, 0, 0.8], [0, 0, 0]):
            rho_t = rwa_channel_at(0.0, density_from_bloch(p))
            assert np.allclose(rho_t, np.diag([0.0, 1.0]))

    def test_imaginary_gamma_rotates_coherence(self):
        # Gamma = i sends the +x pair image to -y: rho_01 = (P_x - i P_y)/2
        rho_t = rwa_channel_at(1.0j, density_from_bloch(AXES["x"]))
        assert np.allclose(bloch_from_density(rho_t), [0.0, -1.0, 0.0], atol=1e-14)

    def test_matches_affine_reconstruction(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            gamma = (rng.normal() + 1j * rng.normal()) * 0.4
            images = {
                a: bloch_from_density(rwa_channel_at(gamma, density_from_bloch(AXES[a])))
                for a in "xyz"
            }
            images["origin"] = bloch_from_density(
                rwa_channel_at(gamma, np.eye(2, dtype=complex) / 2)
            )
            ch = reconstruct_affine_map(images)
            analytic = channel_of_gamma(gamma)
            assert np.allclose(ch.linear_part, analytic.linear_part, atol=1e-12)
            assert np.allclose(ch.offset, analytic.offset, atol=1e-12)

    def test_l21_identity(self):
        for gamma in (0.3, 0.7 + 0.1j, 0.05j):
            ch = channel_of_gamma(gamma)
            g = abs(gamma)
            assert l21_norm(ch.linear_part) == pytest.approx(g * g + 2 * g, abs=1e-12)

    def test_rejects_amplified(self):
        with pytest.raises(ValueError):
            rwa_channel_at(1.1, np.eye(2, dtype=complex) / 2)


class TestFidelity:
    def test_endpoints(self):
        assert fopt_of_gamma(1.0) == pytest.approx(1.0)
        assert fopt_of_gamma(0.0) == pytest.approx(0.5)

    def test_matches_channel_norm(self):
        for g in (0.2, 0.55, 0.9):
            ch = channel_of_gamma(g)
            assert fopt_of_gamma(g) == pytest.approx(
                0.5 + l21_norm(ch.linear_part) / 6, abs=1e-12
            )

    def test_monotone_in_amplitude(self):
        g = np.linspace(0, 1, 101)
        f = fopt_of_gamma(g)
        assert np.all(np.diff(f) > 0)


class TestNmOfGamma:
    def test_monotone_decay_gives_zero(self):
        t = np.linspace(0, 5, 200)
        traj = GammaTrajectory(time_grid=t, values=np.exp(-0.3 * t) + 0j)
        assert np.allclose(nm_of_gamma(traj), 0.0)

    def test_full_revival_counts_one(self):
        g = 0.5
        t = np.arange(0, 2 * np.pi / g + 1e-12, 2 * np.pi / g / 2000)
        traj = GammaTrajectory(time_grid=t, values=np.cos(g * t) + 0j)
        n = nm_of_gamma(traj)
        assert n[-1] == pytest.approx(1.0, abs=1e-6)
        assert np.all(np.diff(n) >= 0)

    def test_matches_distinguishability_pipeline(self):
        # equatorial-pair trace distance equals |Gamma|, so the gains ledger
        # must reproduce nm_of_gamma
        from qmemory.nm import DistinguishabilityTrace, gains_losses

        bath = discretize(SpectralDensity(h=1.4), 300)
        ker = correlation_function(bath, 1.0, dt=5e-3, t_final=25.0)
        traj = solve_gamma(ker, 5e-3, 25.0)
        pair = PolarizedPair.along(AXES["x"])
        d_vals = np.array(
            [
                trace_distance(
                    rwa_channel_at(g, pair.plus_state),
                    rwa_channel_at(g, pair.minus_state),
                )
                for g in traj.values
            ]
        )
        trace = DistinguishabilityTrace(
            direction=AXES["x"], time_grid=traj.time_grid, values=d_vals
        )
        ledger = gains_losses(trace)
        assert np.max(np.abs(ledger.gains - nm_of_gamma(traj))) < 1e-10


class TestRates:
    def test_pure_exponential_decay(self):
        t = np.arange(0, 5.0001, 1e-3)
        kappa = 0.7
        traj = GammaTrajectory(time_grid=t, values=np.exp(-kappa * t / 2) + 0j)
        rates = rates_of_gamma(traj)
        valid = rates.valid_mask
        assert np.allclose(rates.damping_rate[valid], kappa, atol=1e-6)
        assert np.allclose(rates.lamb_shift[valid], 0.0, atol=1e-9)

    def test_pure_phase(self):
        t = np.arange(0, 5.0001, 1e-3)
        delta = 0.9
        traj = GammaTrajectory(time_grid=t, values=np.exp(1j * delta * t))
        rates = rates_of_gamma(traj)
        valid = rates.valid_mask
        assert np.allclose(rates.damping_rate[valid], 0.0, atol=1e-6)
        assert np.allclose(rates.lamb_shift[valid], -2 * delta, atol=1e-6)

    def test_damping_sign_opposes_amplitude_slope(self):
        bath = discretize(SpectralDensity(h=1.4), 300)
        ker = correlation_function(bath, 1.0, dt=5e-3, t_final=25.0)
        traj = solve_gamma(ker, 5e-3, 25.0)
        rates = rates_of_gamma(traj)
        mag = traj.magnitudes
        slope = (mag[2:] - mag[:-2]) / (2 * traj.dt)
        inner = rates.valid_mask[1:-1] & (np.abs(slope) > 1e-8)
        assert np.all(
            np.sign(rates.damping_rate[1:-1][inner]) == -np.sign(slope[inner])
        )

    def test_floor_masks_small_amplitudes(self):
        t = np.arange(0, 60.0001, 1e-2)
        traj = GammaTrajectory(time_grid=t, values=np.exp(-0.5 * t) + 0j)
        rates = rates_of_gamma(traj, floor=1e-6)
        assert not rates.valid_mask[-2]
        assert np.isnan(rates.damping_rate[-2])


class TestChannelSeries:
    def test_backflow_matches_rising_fidelity(self):
        # revival dynamics: F_opt rises exactly where |Gamma| rises
        g = 0.4
        ker = make_kernel(lambda t: np.full_like(t, g * g), 1e-3, 12.0)
        traj = solve_gamma(ker, 1e-3, 12.0)
        f = fopt_of_gamma(traj.magnitudes)
        dmag = np.diff(traj.magnitudes)
        df = np.diff(f)
        big = np.abs(dmag) > 1e-9
        assert np.all(np.sign(df[big]) == np.sign(dmag[big]))

    def test_series_matches_pointwise_channel(self):
        bath = discretize(SpectralDensity(h=0.4), 200)
        ker = correlation_function(bath, 1.0, dt=0.01, t_final=5.0)
        traj = solve_gamma(ker, 0.01, 5.0)
        times, m, q = channel_series(traj, stride=10)
        for k in (0, 3, len(times) - 1):
            idx = 10 * k
            ch = channel_of_gamma(traj.values[idx])
            assert np.allclose(m[k], ch.linear_part, atol=1e-14)
            assert np.allclose(q[k], ch.offset, atol=1e-14)
