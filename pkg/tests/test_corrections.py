import numpy as np
import pytest

import geompert as g
from oracles import linear_family, textbook_rs_corrections, worked_low_order_corrections

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def random_generator_series(rng, n, order):
    """Synthetic generator coefficients on a random non-degenerate frame.

    State-correction routes only consume the K_0 list and the frame, so
    arbitrary matrices exercise them fully.
    """
    h0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    frame = g.eigenframe(h0 + np.diag(3.0 * np.arange(n)))
    k0 = tuple(
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for _ in range(order + 1)
    )
    k1 = tuple(np.zeros((n, n), dtype=complex) for _ in range(order + 1))
    return g.GeneratorSeries(order=order, k0=k0, k1=k1, gauge="zero-diagonal", frame=frame)


class TestStateCorrections:
    def test_first_order_is_transport_action(self, toy_gens):
        for n in range(2):
            v0 = toy_gens.frame.right[:, n]
            vecs = g.state_corrections_recursive(toy_gens, n, 1)
            assert np.allclose(vecs[1], -1j * (toy_gens.k0[0] @ v0), atol=1e-14)

    def test_toy_first_order_plus_state(self, toy_gens):
        # |+^(1)> is (i/2) |-^(0)> for unit constants
        vecs = g.state_corrections_recursive(toy_gens, 1, 1)
        s = 1 / (2 * np.sqrt(2))
        assert np.allclose(vecs[1], [1j * s, -1j * s], atol=1e-14)

    def test_zero_transport_means_frozen_state(self, toy_frame):
        zero = tuple(np.zeros((2, 2), dtype=complex) for _ in range(4))
        gens = g.GeneratorSeries(
            order=3, k0=zero, k1=zero, gauge="zero-diagonal", frame=toy_frame
        )
        for n in range(2):
            vecs = g.state_corrections_recursive(gens, n, 3)
            for k in range(1, 4):
                assert np.all(vecs[k] == 0)

    def test_bell_second_order_formula(self, rng):
        gens = random_generator_series(rng, 4, 3)
        k00, k01 = gens.k0[0], gens.k0[1]
        for n in range(4):
            v0 = gens.frame.right[:, n]
            vecs = g.state_corrections_bell(gens, n, 2)
            expected = -0.5 * ((k00 @ (k00 @ v0)) + 1j * (k01 @ v0))
            assert np.allclose(vecs[2], expected, atol=1e-13)

    def test_routes_agree_random(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 6))
            gens = random_generator_series(rng, n, 5)
            state = int(rng.integers(0, n))
            rec = g.state_corrections_recursive(gens, state, 6)
            bell = g.state_corrections_bell(gens, state, 6)
            for a, b in zip(rec, bell):
                assert np.abs(a - b).max() < 1e-12

    def test_order_zero_is_frame_vector(self, toy_gens):
        vecs = g.state_corrections_bell(toy_gens, 0, 0)
        assert np.array_equal(vecs[0], toy_gens.frame.right[:, 0])

    def test_insufficient_order(self, toy_gens):
        with pytest.raises(g.InsufficientOrder):
            g.state_corrections_recursive(toy_gens, 0, toy_gens.order + 2)


class TestEigenvalueCorrections:
    def test_toy_series(self, toy_gens):
        # exact spectrum sqrt(1 + q^2 + q^4): odd orders vanish,
        # h^(2) = 1/2, h^(4) = 3/8 on the "+" branch, mirrored on "-"
        for n, sign in ((0, -1), (1, +1)):
            h = g.eigenvalue_corrections(toy_gens, n, 4)
            assert np.allclose(
                h, sign * np.array([1.0, 0.0, 0.5, 0.0, 0.375]), atol=1e-12
            )

    def test_first_order_is_eigenflow_diagonal(self, rng):
        ham = linear_family(rng, 4)
        frame = g.eigenframe(ham.term(0))
        gens = g.solve_generators(ham, frame, 0)
        bb = g.double_bracket(frame, gens.k1[0])
        for n in range(4):
            h = g.eigenvalue_corrections(gens, n, 1)
            assert abs(h[1] - bb[n, n]) < 1e-12 * max(1, abs(bb[n, n]))

    def test_bell_route_agrees(self, rng):
        for _ in range(5):
            ham = linear_family(rng, 4)
            gens = g.solve_model(ham, 5)
            for n in range(4):
                ha = g.eigenvalue_corrections(gens, n, 6)
                hb = g.eigenvalue_corrections_bell(gens, n, 6)
                assert np.abs(ha - hb).max() < 1e-11 * max(1, np.abs(ha).max())

    def test_worked_low_orders_zero_gauge(self, rng):
        # explicit double-bracket expressions for h^(1..3) match the engine
        for _ in range(5):
            ham = linear_family(rng, 4)
            gens = g.solve_model(ham, 2)
            for n in range(4):
                h = g.eigenvalue_corrections(gens, n, 3)
                worked = worked_low_order_corrections(gens, n)
                for k, ref in enumerate(worked, start=1):
                    assert abs(h[k] - ref) < 1e-11 * max(1, abs(ref))

    def test_worked_low_orders_custom_gauge(self, rng):
        # the same expressions carry the gauge terms, so they must also hold
        # when the transport diagonal is nonzero
        ham = linear_family(rng, 4)
        frame = g.eigenframe(ham.term(0))
        diags = [
            0.4 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
            for _ in range(3)
        ]
        gens = g.solve_generators(ham, frame, 2, k0_diagonals=diags)
        for n in range(4):
            h = g.eigenvalue_corrections(gens, n, 3)
            worked = worked_low_order_corrections(gens, n)
            for k, ref in enumerate(worked, start=1):
                assert abs(h[k] - ref) < 1e-11 * max(1, abs(ref))

    def test_gauge_invariance(self, rng):
        for _ in range(5):
            ham = linear_family(rng, 4)
            frame = g.eigenframe(ham.term(0))
            base = g.solve_generators(ham, frame, 3)
            diags = [
                rng.standard_normal(4) + 1j * rng.standard_normal(4)
                for _ in range(4)
            ]
            shifted = g.solve_generators(ham, frame, 3, k0_diagonals=diags)
            assert g.hierarchy_residuals(ham, shifted).max() < 1e-10
            for n in range(4):
                ha = g.eigenvalue_corrections(base, n, 3)
                hb = g.eigenvalue_corrections(shifted, n, 3)
                assert np.abs(ha - hb).max() < 1e-10 * max(1, np.abs(ha).max())
                sa = g.state_corrections_recursive(base, n, 1)[1]
                sb = g.state_corrections_recursive(shifted, n, 1)[1]
                assert np.abs(sa - sb).max() > 1e-3  # states do change

    def test_hermitian_reality(self, rng):
        for _ in range(5):
            ham = linear_family(rng, 4, hermitian=True)
            gens = g.solve_model(ham, 3)
            for n in range(4):
                h = g.eigenvalue_corrections(gens, n, 4)
                for hk in h:
                    assert abs(hk.imag) <= 1e-10 * abs(hk.real) + 1e-12

    def test_insufficient_order(self, toy_gens):
        with pytest.raises(g.InsufficientOrder):
            g.eigenvalue_corrections(toy_gens, 0, toy_gens.order + 2)


class TestBuildSeries:
    def test_zeroth_entries_match_frame(self, toy_gens):
        series = g.build_series(toy_gens, 1, 3)
        assert series.eigenvalue_corrections[0] == toy_gens.frame.eigenvalues[1]
        assert np.array_equal(series.state_corrections[0], toy_gens.frame.right[:, 1])
        assert series.gauge == "zero-diagonal"
        assert series.order == 3

    def test_truncated_evaluation(self, toy_gens):
        series = g.build_series(toy_gens, 1, 4)
        q = 0.01
        expected = sum(
            (q**k) * series.eigenvalue_corrections[k] for k in range(5)
        )
        assert series.eigenvalue_at(q) == pytest.approx(expected)


class TestLinearClosedForms:
    def test_first_line_identity(self, rng):
        ham = linear_family(rng, 4)
        frame = g.eigenframe(ham.term(0))
        a = g.double_bracket(frame, ham.term(1))
        for n in range(4):
            h1, _, _ = g.rs_linear_corrections(frame, ham.term(1), n)
            assert h1 == pytest.approx(a[n, n])

    def test_two_level_hermitian(self):
        # exact eigenvalues of diag(0,2) + q flip: 1 -/+ sqrt(1+q^2);
        # second-order coefficients are -/+ 1/2
        frame = g.eigenframe(np.diag([0.0, 2.0]))
        _, h2_low, _ = g.rs_linear_corrections(frame, SX, 0)
        _, h2_high, _ = g.rs_linear_corrections(frame, SX, 1)
        assert h2_low == pytest.approx(-0.5)
        assert h2_high == pytest.approx(0.5)

    def test_commuting_perturbation_has_first_order_only(self, rng):
        lam = np.diag([0.0, 1.0, 2.5])
        frame = g.eigenframe(lam)
        h1 = np.diag([0.3, -0.7, 1.1]).astype(complex)
        for n in range(3):
            _, h2, h3 = g.rs_linear_corrections(frame, h1, n)
            assert abs(h2) < 1e-14 and abs(h3) < 1e-14

    def test_dimension_mismatch(self, toy_frame):
        with pytest.raises(g.DimensionMismatch):
            g.rs_linear_corrections(toy_frame, np.eye(3), 0)


class TestCrosscheckLinear:
    def test_random_non_hermitian(self, rng):
        for _ in range(5):
            ham = linear_family(rng, 4)
            result = g.crosscheck_linear(ham)
            assert result.passed
            assert result.max_relative_deviation <= 1e-10

    def test_hermitian_matches_textbook(self, rng):
        ham = linear_family(rng, 5, hermitian=True)
        result = g.crosscheck_linear(ham)
        assert result.passed
        frame = g.eigenframe(ham.term(0))
        for n in range(5):
            ref = textbook_rs_corrections(ham.term(0), ham.term(1), n)
            ours = g.rs_linear_corrections(frame, ham.term(1), n)
            for x, y in zip(ours, ref):
                assert abs(x - y) < 1e-10 * max(1, abs(y))

    def test_zero_perturbation(self):
        ham = g.PolynomialHamiltonian([np.diag([0.0, 1.0, 3.0]), np.zeros((3, 3))])
        result = g.crosscheck_linear(ham)
        assert result.passed
        assert np.all(result.recursion == 0)
        assert np.all(result.h1_route == 0)

    def test_degree_guard(self, toy):
        with pytest.raises(g.DegreeMismatch):
            g.crosscheck_linear(toy)
