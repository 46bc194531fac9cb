import numpy as np
import pytest

import geompert as g
from geompert.oracle import RAY_FLOOR
from oracles import linear_family

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def toy_exact(qs, h=1.0, a1=1.0, a2=1.0):
    """Exact two-level spectrum from the characteristic polynomial:
    trace vanishes, so the branches are +/- sqrt((h + q^2 a2)^2 - q^2 a1^2)."""
    return np.sqrt((h + qs**2 * a2) ** 2 - qs**2 * a1**2 + 0j)


@pytest.fixture
def toy_series(toy_gens):
    return [g.build_series(toy_gens, n, 3) for n in range(2)]


class TestSweep:
    def test_toy_matches_closed_form(self, toy):
        qs = np.linspace(0.001, 0.2, 40)
        curve = g.exact_spectrum_sweep(toy, qs)
        exact = toy_exact(qs)
        assert np.abs(curve.values[1] - exact).max() < 1e-12
        assert np.abs(curve.values[0] + exact).max() < 1e-12
        assert curve.pair_margin > 2

    def test_single_origin_sample(self, toy, toy_frame):
        curve = g.exact_spectrum_sweep(toy, [0.0])
        assert np.allclose(curve.values[:, 0], toy_frame.eigenvalues, atol=1e-13)
        assert curve.pair_margin == np.inf

    def test_hermitian_closed_form(self):
        # diag(0,2) + q flip: eigenvalues 1 -/+ sqrt(1+q^2)
        ham = g.PolynomialHamiltonian([np.diag([0.0, 2.0]), SX])
        qs = np.linspace(0.01, 0.5, 20)
        curve = g.exact_spectrum_sweep(ham, qs)
        root = np.sqrt(1 + qs**2)
        assert np.abs(curve.values[0] - (1 - root)).max() < 1e-12
        assert np.abs(curve.values[1] - (1 + root)).max() < 1e-12

    def test_negative_samples_continued(self, toy):
        qs = np.linspace(-0.1, 0.1, 21)
        curve = g.exact_spectrum_sweep(toy, qs)
        exact = toy_exact(qs)
        assert np.abs(curve.values[1] - exact).max() < 1e-12

    def test_bitwise_reproducible(self, toy):
        qs = np.logspace(-4, -1, 30)
        c1 = g.exact_spectrum_sweep(toy, qs)
        c2 = g.exact_spectrum_sweep(toy, qs)
        assert np.array_equal(c1.values, c2.values)
        assert c1.pair_margin == c2.pair_margin

    def test_requires_increasing(self, toy):
        with pytest.raises(ValueError):
            g.exact_spectrum_sweep(toy, [0.1, 0.1, 0.2])

    def test_degenerate_sample_rejected(self):
        # eigenvalues q and 1-q cross at q = 1/2
        ham = g.PolynomialHamiltonian([np.diag([0.0, 1.0]), np.diag([1.0, -1.0])])
        with pytest.raises(g.DegenerateSpectrum):
            g.exact_spectrum_sweep(ham, [0.1, 0.4999999999])

    def test_ambiguous_pairing_rejected(self):
        # a coarse step across an avoided-crossing-free swap: from q=0.2 the
        # eigenvalues {0.2, 0.8} both sit 0.25 / 0.35 away from {0.45, 0.55}
        ham = g.PolynomialHamiltonian([np.diag([0.0, 1.0]), np.diag([1.0, -1.0])])
        with pytest.raises(g.PairingAmbiguous):
            g.exact_spectrum_sweep(ham, [0.2, 0.45])


class TestResidualOrder:
    def test_toy_slopes(self, toy, toy_series):
        qs = np.logspace(-3, -2, 15)
        curve = g.exact_spectrum_sweep(toy, qs)
        # odd coefficients vanish: truncating at 3 leaves a q^4 tail
        slope = g.series_residual_order(curve, toy_series[1], 1, 3, (1e-3, 1e-2))
        assert slope == pytest.approx(4.0, abs=0.15)

    def test_hermitian_parity_slope(self):
        ham = g.PolynomialHamiltonian([np.diag([0.0, 2.0]), SX])
        gens = g.solve_model(ham, 3)
        series = g.build_series(gens, 0, 2)
        qs = np.logspace(-3, -2, 15)
        curve = g.exact_spectrum_sweep(ham, qs)
        slope = g.series_residual_order(curve, series, 0, 2, (1e-3, 1e-2))
        assert slope == pytest.approx(4.0, abs=0.15)  # odd order vanishes

    def test_corrupted_coefficient_detected(self, toy, toy_gens):
        series = g.build_series(toy_gens, 1, 2)
        corrupted = g.PerturbationSeries(
            state=1,
            order=2,
            eigenvalue_corrections=series.eigenvalue_corrections + np.array([0, 0, 0.01]),
            state_corrections=series.state_corrections,
            gauge=series.gauge,
        )
        qs = np.logspace(-4, -2, 25)
        curve = g.exact_spectrum_sweep(toy, qs)
        slope = g.series_residual_order(curve, corrupted, 1, 2, (1e-4, 1e-2))
        assert slope == pytest.approx(2.0, abs=0.1)
        assert slope < 2.8  # fails the order-2 contract, as it should

    def test_floor_points_are_dropped(self, toy, toy_series):
        # at q near 1e-4 the q^4 tail sits below the 1e-14 floor; the fit
        # must still succeed on the usable upper part of the window
        qs = np.logspace(-4, -2, 25)
        curve = g.exact_spectrum_sweep(toy, qs)
        slope = g.series_residual_order(curve, toy_series[1], 1, 3, (1e-4, 1e-2))
        assert slope > 3.8

    def test_underflow_when_nothing_measurable(self, toy, toy_series):
        qs = np.logspace(-5, -4, 10)
        curve = g.exact_spectrum_sweep(toy, qs)
        with pytest.raises(g.ResidualUnderflow):
            g.series_residual_order(curve, toy_series[1], 1, 3, (1e-5, 1e-4))

    def test_sampling_density_guard(self, toy, toy_series):
        qs = np.logspace(-4, -2, 10)  # 5 per decade
        curve = g.exact_spectrum_sweep(toy, qs)
        with pytest.raises(ValueError):
            g.series_residual_order(curve, toy_series[1], 1, 2, (1e-4, 1e-2))

    def test_insufficient_series_order(self, toy, toy_series):
        qs = np.logspace(-4, -2, 25)
        curve = g.exact_spectrum_sweep(toy, qs)
        with pytest.raises(g.InsufficientOrder):
            g.series_residual_order(curve, toy_series[1], 1, 5, (1e-4, 1e-2))

    def test_ray_insufficient_order(self, toy, toy_series):
        with pytest.raises(g.InsufficientOrder):
            g.state_ray_residual(toy, toy_series[1], 1, 5, [1e-3])


class TestFiniteDifferences:
    def test_toy_second_order(self):
        # pure gain/loss perturbation: exact branch sqrt(1 - q^2), so the
        # second coefficient is -1/2 on the upper state
        ham = g.toy_model(1.0, 1.0, 0.0)
        fd = g.fd_eigenvalue_derivatives(ham, 1, 2)
        assert abs(fd - (-0.5)) < 1e-7

    def test_first_order_matches_flow_diagonal(self, rng):
        ham = linear_family(rng, 4, hermitian=True)
        frame = g.eigenframe(ham.term(0))
        a = g.double_bracket(frame, ham.term(1))
        for n in range(4):
            fd = g.fd_eigenvalue_derivatives(ham, n, 1)
            assert abs(fd - a[n, n]) < 1e-6 * max(1, abs(a[n, n]))

    def test_constant_family(self):
        ham = g.PolynomialHamiltonian([np.diag([0.0, 1.0, 2.0])])
        for k in range(1, 5):
            assert abs(g.fd_eigenvalue_derivatives(ham, 1, k)) < 1e-9

    def test_series_concordance(self, toy, toy_gens):
        for n in range(2):
            h = g.eigenvalue_corrections(toy_gens, n, 3)
            for k in (1, 2, 3):
                fd = g.fd_eigenvalue_derivatives(toy, n, k)
                assert abs(fd - h[k]) <= 1e-5 * max(1, abs(h[k]))

    def test_closed_form_curve_concordance(self, toy_gens):
        # differencing the closed-form branch directly (no eigensolver noise)
        # pins the second coefficient to ~1e-8 or better
        h = 1e-3
        f = lambda q: toy_exact(np.array([q]))[0].real

        def second(hh):
            return (f(hh) - 2 * f(0.0) + f(-hh)) / hh**2

        refined = (4 * second(h / 2) - second(h)) / 3 / 2
        series = g.eigenvalue_corrections(toy_gens, 1, 2)
        assert abs(refined - series[2]) < 1e-8

    def test_rejects_bad_order(self, toy):
        with pytest.raises(ValueError):
            g.fd_eigenvalue_derivatives(toy, 0, 5)

    def test_degenerate_stencil_rejected(self):
        # crossing at q = 0.05 sits inside the default stencil of width 2e-3
        # only if the step is enlarged
        ham = g.PolynomialHamiltonian([np.diag([0.0, 0.1]), np.diag([1.0, -1.0])])
        with pytest.raises(g.DegenerateSpectrum):
            g.fd_eigenvalue_derivatives(ham, 0, 1, step=0.05)


class TestRayResidual:
    def test_unperturbed_vector_first_order_error(self, toy, toy_gens):
        series = g.build_series(toy_gens, 1, 0)
        qs = np.logspace(-3, -1, 15)
        sines = g.state_ray_residual(toy, series, 1, 0, qs)
        slope = g.log_log_slope(qs, sines)
        assert slope == pytest.approx(1.0, abs=0.1)

    def test_toy_second_order(self, toy, toy_gens):
        series = g.build_series(toy_gens, 1, 2)
        qs = np.logspace(-3, -1.5, 15)
        sines = g.state_ray_residual(toy, series, 1, 2, qs)
        slope = g.log_log_slope(qs, sines)
        assert slope >= 2.8

    def test_random_linear_third_order(self, rng):
        ham = linear_family(rng, 4)
        gens = g.solve_model(ham, 4)
        series = g.build_series(gens, 2, 3)
        qs = np.logspace(-3, -1.5, 15)
        sines = g.state_ray_residual(ham, series, 2, 3, qs)
        usable = sines >= RAY_FLOOR
        slope = g.log_log_slope(qs[usable], sines[usable])
        assert slope >= 3.8

    def test_monotone_improvement(self, toy, toy_gens):
        q = 1e-3
        prev = np.inf
        for order in range(4):
            series = g.build_series(toy_gens, 1, order)
            sine = g.state_ray_residual(toy, series, 1, order, [q])[0]
            assert sine <= prev * (1 + 1e-9)
            prev = sine

    def test_gauge_independent(self, toy, toy_frame, rng):
        # ray residuals ignore scalar factors, and gauge shifts move the
        # truncated vector only along the physical ray at each order in q
        qs = np.logspace(-3, -2, 8)
        diags = [1j * rng.standard_normal(2) for _ in range(5)]
        base = g.build_series(g.solve_generators(toy, toy_frame, 4), 1, 2)
        shifted_gens = g.solve_generators(toy, toy_frame, 4, k0_diagonals=diags)
        shifted = g.build_series(shifted_gens, 1, 2)
        r_base = g.state_ray_residual(toy, base, 1, 2, qs)
        r_shift = g.state_ray_residual(toy, shifted, 1, 2, qs)
        # both series remain order-2 accurate
        assert g.log_log_slope(qs, r_base) >= 2.8
        assert g.log_log_slope(qs, r_shift) >= 2.8
