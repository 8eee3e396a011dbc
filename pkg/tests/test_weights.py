"""Weight solvers: classical regularized and rank-d representation weights."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ldrlle import (
    DEFAULT_DELTA,
    DegenerateWeightsError,
    GeneralPositionError,
    NeighborhoodMatrix,
    SingularNeighborhoodError,
    assemble_weight_matrix,
    gen_swissroll,
    grid_cross_neighborhood,
    knn,
    ldr_weights,
    ldr_weights_from_spectrum,
    lle_weights,
    lle_weights_pinv,
    neighborhood_matrix,
    neighborhood_spectrum,
    save_spectra,
    save_weight_matrix,
)
from oracles import (
    constrained_lsq_weights,
    feasible_in_discarded_span,
    feasible_sum_one_vectors,
    kkt_min_norm_weights,
    random_orthogonal,
    rank_d_truncation,
)


def hood(rows):
    return NeighborhoodMatrix.from_rows(np.asarray(rows, dtype=float))


def random_hood(rng, K, D):
    return hood(rng.normal(size=(K, D)))


TWO_OPPOSITE = hood([[-1.0, 0.0], [1.0, 0.0]])


class TestNeighborhoodSpectrum:
    def test_two_opposite_points(self):
        spec = neighborhood_spectrum(TWO_OPPOSITE, 1)
        np.testing.assert_allclose(spec.singular_values, [np.sqrt(2.0), 0.0], atol=1e-15)
        assert spec.alpha == pytest.approx(0.0, abs=1e-15)
        # U2 spans (1,1)/sqrt(2): its projector is the all-half matrix.
        proj = spec.U2 @ spec.U2.T
        np.testing.assert_allclose(proj, np.full((2, 2), 0.5), atol=1e-15)

    def test_grid_cross_spectrum(self):
        spec = neighborhood_spectrum(grid_cross_neighborhood(), 2)
        np.testing.assert_allclose(
            spec.singular_values, [0.99, 0.99, 0.0, 0.0], atol=1e-15
        )
        assert spec.alpha == pytest.approx(0.0, abs=1e-15)

    def test_left_basis_orthonormal(self, rng):
        for _ in range(20):
            K = int(rng.integers(3, 10))
            D = int(rng.integers(2, 7))
            d = int(rng.integers(1, K))
            spec = neighborhood_spectrum(random_hood(rng, K, D), d)
            U = np.hstack([spec.U1, spec.U2])
            assert np.max(np.abs(U.T @ U - np.eye(K))) < 1e-10

    def test_singular_values_padded_and_sorted(self, rng):
        spec = neighborhood_spectrum(random_hood(rng, 9, 3), 2)
        assert spec.singular_values.shape == (9,)
        np.testing.assert_array_equal(spec.singular_values[3:], 0.0)
        assert np.all(np.diff(spec.singular_values) <= 0.0)
        assert np.all(spec.singular_values >= 0.0)

    def test_alpha_matches_projected_moment_identity(self, rng):
        # alpha = mu' S^+ mu with mu and S the first and second moments of
        # the rank-d projected rows; evaluated via an independent pinv route.
        for _ in range(50):
            K = int(rng.integers(3, 12))
            D = int(rng.integers(2, 7))
            d = int(rng.integers(1, min(K, D)))
            rows = rng.normal(size=(K, D))
            spec = neighborhood_spectrum(hood(rows), d)
            trunc = rank_d_truncation(rows, d)
            P = trunc @ np.linalg.pinv(trunc)
            alpha_oracle = float(np.ones(K) @ P @ np.ones(K)) / K
            assert abs(alpha_oracle - spec.alpha) < 1e-10

    def test_alpha_within_unit_interval(self, rng):
        for _ in range(20):
            spec = neighborhood_spectrum(random_hood(rng, 6, 4), 2)
            assert -1e-12 <= spec.alpha <= 1.0 + 1e-12

    def test_deterministic_sign_convention(self, rng):
        rows = rng.normal(size=(7, 3))
        a = neighborhood_spectrum(hood(rows), 2)
        b = neighborhood_spectrum(hood(rows.copy()), 2)
        np.testing.assert_array_equal(a.U1, b.U1)
        np.testing.assert_array_equal(a.U2, b.U2)
        for U in (a.U1, a.U2):
            lead = np.argmax(np.abs(U), axis=0)
            assert np.all(U[lead, np.arange(U.shape[1])] >= 0.0)

    def test_gap_warning_on_coincident_split(self):
        # The cross has a double top singular value: splitting at d = 1 is
        # ill-defined and must be flagged; splitting at d = 2 is clean.
        assert neighborhood_spectrum(grid_cross_neighborhood(), 1).gap_warning
        assert not neighborhood_spectrum(grid_cross_neighborhood(), 2).gap_warning

    def test_d_out_of_range(self):
        with pytest.raises(ValueError):
            neighborhood_spectrum(TWO_OPPOSITE, 0)
        with pytest.raises(ValueError):
            neighborhood_spectrum(TWO_OPPOSITE, 2)


class TestClassicalWeights:
    def test_two_neighbor_minimizer(self):
        # min a^2 + 4(1-a)^2 has a = 0.8 by scalar calculus.
        w = lle_weights(hood([[1.0, 0.0], [0.0, 2.0]]), delta=0.0)
        np.testing.assert_allclose(w, [0.8, 0.2], atol=1e-12)

    def test_cross_is_uniform_for_any_regularization(self):
        for delta in (1e-9, 1e-3, 1.0, 1e6):
            w = lle_weights(grid_cross_neighborhood(), delta=delta)
            np.testing.assert_allclose(w, 0.25, atol=1e-12)

    def test_uniform_limit_for_large_regularization(self, rng):
        w = lle_weights(random_hood(rng, 6, 3), delta=1e6)
        np.testing.assert_allclose(w, 1.0 / 6.0, atol=1e-6)

    def test_collinear_neighbors_rejected_without_regularization(self):
        with pytest.raises(SingularNeighborhoodError) as excinfo:
            lle_weights(TWO_OPPOSITE, delta=0.0)
        assert excinfo.value.rcond is not None
        assert excinfo.value.rcond < 1e-12

    def test_negative_regularization_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            lle_weights(TWO_OPPOSITE, delta=-1.0)

    def test_all_duplicate_neighbors_fall_back_to_uniform(self):
        w = lle_weights(hood(np.zeros((3, 2))), delta=1e-9)
        np.testing.assert_allclose(w, 1.0 / 3.0, atol=1e-15)

    def test_matches_constrained_lsq_oracle(self, rng):
        for _ in range(50):
            K = int(rng.integers(2, 7))
            D = int(rng.integers(K, 9))
            rows = rng.normal(size=(K, D))
            w = lle_weights(hood(rows), delta=0.0)
            np.testing.assert_allclose(w, constrained_lsq_weights(rows), atol=1e-10)

    def test_regularized_solution_matches_direct_formula(self, rng):
        rows = rng.normal(size=(8, 3))
        delta = 1e-6
        G = rows @ rows.T
        ridge = (delta / 8.0) * np.trace(G)
        w_oracle = np.linalg.solve(G + ridge * np.eye(8), np.ones(8))
        w_oracle /= w_oracle.sum()
        np.testing.assert_allclose(
            lle_weights(hood(rows), delta=delta), w_oracle, atol=1e-12
        )

    def test_weights_sum_to_one(self, rng):
        for _ in range(20):
            w = lle_weights(random_hood(rng, 10, 3), delta=DEFAULT_DELTA)
            assert abs(w.sum() - 1.0) < 1e-10

    def test_scale_invariance(self, rng):
        rows = rng.normal(size=(5, 8))
        base = lle_weights(hood(rows), delta=1e-9)
        for c in (1e-3, 1e3):
            scaled = lle_weights(hood(c * rows), delta=1e-9)
            assert np.max(np.abs(scaled - base)) < 1e-10

    def test_rotation_invariance(self, rng):
        rows = rng.normal(size=(4, 6))
        R = random_orthogonal(6, rng)
        base = lle_weights(hood(rows), delta=0.0)
        rotated = lle_weights(hood(rows @ R), delta=0.0)
        assert np.max(np.abs(rotated - base)) < 1e-10

    def test_beats_random_feasible_vectors(self, rng):
        from ldrlle import reconstruction_error

        for _ in range(10):
            K = int(rng.integers(2, 6))
            rows = rng.normal(size=(K, K + 2))
            h = hood(rows)
            w = lle_weights(h, delta=0.0)
            best = reconstruction_error(h, w)
            for v in feasible_sum_one_vectors(K, 20, rng):
                assert best <= reconstruction_error(h, v) + 1e-12


class TestPinvWeights:
    def test_matches_exact_solve_when_nonsingular(self):
        h = hood([[1.0, 0.0], [0.0, 2.0]])
        np.testing.assert_allclose(
            lle_weights_pinv(h), lle_weights(h, delta=0.0), atol=1e-12
        )

    def test_unperturbed_cross_is_degenerate(self):
        # The cross's Gram matrix annihilates the ones vector, so the
        # minimum-norm stationary solution sums to zero and has no
        # normalization; the solver must say so rather than divide.
        with pytest.raises(DegenerateWeightsError):
            lle_weights_pinv(grid_cross_neighborhood())


class TestRankDWeights:
    def test_two_opposite_points(self):
        np.testing.assert_allclose(ldr_weights(TWO_OPPOSITE, 1), [0.5, 0.5], atol=1e-15)

    def test_cross_is_uniform(self):
        np.testing.assert_allclose(
            ldr_weights(grid_cross_neighborhood(), 2), 0.25, atol=1e-15
        )

    def test_matches_kkt_oracle(self, rng):
        for _ in range(50):
            K = int(rng.integers(4, 13))
            D = int(rng.integers(2, 7))
            d = int(rng.integers(1, min(K, D)))
            rows = rng.normal(size=(K, D))
            w = ldr_weights(hood(rows), d)
            np.testing.assert_allclose(w, kkt_min_norm_weights(rows, d), atol=1e-8)

    def test_annihilates_the_retained_part(self, rng):
        for _ in range(20):
            K = int(rng.integers(4, 10))
            D = int(rng.integers(3, 6))
            d = int(rng.integers(1, min(K, D)))
            rows = rng.normal(size=(K, D))
            spec = neighborhood_spectrum(hood(rows), d)
            w = ldr_weights_from_spectrum(spec)
            retained = rank_d_truncation(rows, d)
            assert np.linalg.norm(w @ retained) < 1e-8 * spec.singular_values[0]

    def test_minimum_norm_among_feasible(self, rng):
        count = 0
        while count < 100:
            K = int(rng.integers(3, 9))
            D = int(rng.integers(2, 6))
            d = int(rng.integers(1, min(K, D)))
            spec = neighborhood_spectrum(random_hood(rng, K, D), d)
            w = ldr_weights_from_spectrum(spec)
            for v in feasible_in_discarded_span(spec.U2, 5, rng):
                assert np.linalg.norm(w) <= np.linalg.norm(v) + 1e-8
            count += 1

    def test_reconstruction_error_bounded_by_discarded_spectrum(self, rng):
        from ldrlle import reconstruction_error

        for _ in range(20):
            K = int(rng.integers(4, 10))
            D = int(rng.integers(3, 7))
            d = int(rng.integers(1, min(K, D)))
            h = random_hood(rng, K, D)
            spec = neighborhood_spectrum(h, d)
            w = ldr_weights_from_spectrum(spec)
            tail = spec.singular_values[d]
            bound = tail**2 * float(w @ w) + 1e-10
            assert reconstruction_error(h, w) <= bound

    def test_exact_reconstruction_for_rank_d_neighborhoods(self, rng):
        # When the neighborhood itself has rank d, the discarded span
        # annihilates every row, so the residual against the full (not
        # truncated) neighborhood vanishes.
        from ldrlle import reconstruction_error

        rows = rng.normal(size=(12, 2)) @ rng.normal(size=(2, 3))
        w = ldr_weights(hood(rows), 2)
        assert reconstruction_error(hood(rows), w) < 1e-20

    def test_sum_to_one(self, rng):
        for _ in range(20):
            K = int(rng.integers(3, 12))
            w = ldr_weights(random_hood(rng, K, 4), min(2, K - 1))
            assert abs(w.sum() - 1.0) < 1e-10

    def test_scale_invariance(self, rng):
        rows = rng.normal(size=(9, 4))
        base = ldr_weights(hood(rows), 2)
        for c in (1e-3, 1e3):
            scaled = ldr_weights(hood(c * rows), 2)
            assert np.max(np.abs(scaled - base)) < 1e-10

    def test_rotation_invariance(self, rng):
        rows = rng.normal(size=(9, 4))
        R = random_orthogonal(4, rng)
        base = ldr_weights(hood(rows), 2)
        rotated = ldr_weights(hood(rows @ R), 2)
        assert np.max(np.abs(rotated - base)) < 1e-10

    def test_duplicate_of_center_tolerated(self, rng):
        rows = rng.normal(size=(6, 3))
        rows[2] = 0.0
        w = ldr_weights(hood(rows), 2)
        assert abs(w.sum() - 1.0) < 1e-10

    def test_coincident_neighbors_violate_general_position(self):
        with pytest.raises(GeneralPositionError) as excinfo:
            ldr_weights(hood([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]), 1)
        assert excinfo.value.alpha == pytest.approx(1.0, abs=1e-12)

    @given(
        hnp.arrays(
            np.float64,
            (5, 3),
            elements=st.floats(-100.0, 100.0, allow_nan=False, width=64),
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_contract_holds_for_arbitrary_neighborhoods(self, rows):
        try:
            w = ldr_weights(hood(rows), 1)
        except GeneralPositionError:
            assume(False)
        assert abs(w.sum() - 1.0) < 1e-9
        U, _, _ = np.linalg.svd(rows, full_matrices=True)
        assert abs(float(U[:, 0] @ w)) < 1e-9 * max(1.0, np.abs(w).max())


class TestAssembly:
    def test_ring_rows_sum_to_one(self, ring16, ring16_graph):
        W, _ = assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=1)
        sums = np.asarray(W.sum(axis=1)).ravel()
        assert np.max(np.abs(sums - 1.0)) < 1e-10

    def test_matrix_matches_per_point_solves(self, ring16, ring16_graph):
        for method, kwargs in (("classical", {"delta": 1e-9}), ("ldr", {})):
            W, _ = assemble_weight_matrix(
                ring16.points, ring16_graph, method, d=1, **kwargs
            )
            dense = W.toarray()
            for i in range(16):
                h = neighborhood_matrix(ring16.points, ring16_graph, i)
                if method == "classical":
                    w = lle_weights(h, delta=1e-9)
                else:
                    w = ldr_weights(h, 1)
                np.testing.assert_array_equal(dense[i, ring16_graph.indices[i]], w)

    def test_diagonal_zero_and_row_support(self, ring16, ring16_graph):
        W, _ = assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=1)
        assert np.max(np.abs(W.diagonal())) == 0.0
        per_row = np.diff(W.tocsr().indptr)
        assert np.all(per_row <= 4)

    def test_spectra_metadata(self, ring16, ring16_graph):
        _, spectra = assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=1)
        assert [s.center_index for s in spectra] == list(range(16))
        assert all(s.radius > 0 for s in spectra)
        assert all(s.alpha < 1.0 for s in spectra)

    def test_swissroll_has_no_general_position_failures(self):
        sample = gen_swissroll(500, seed=0)
        graph = knn(sample.points, 12)
        _, spectra = assemble_weight_matrix(sample.points, graph, "ldr", d=2)
        assert len(spectra) == 500
        assert max(s.alpha for s in spectra) < 1.0

    def test_classical_skips_spectra_when_no_split_exists(self, rng):
        X = rng.normal(size=(10, 3))
        graph = knn(X, 2)
        W, spectra = assemble_weight_matrix(X, graph, "classical", d=5)
        assert spectra == []
        assert W.shape == (10, 10)

    def test_failures_name_the_point(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
        graph = knn(X, 2)
        with pytest.raises(GeneralPositionError, match="point 0") as excinfo:
            assemble_weight_matrix(X, graph, "ldr", d=1)
        assert excinfo.value.point_index == 0

    def test_unknown_method_rejected(self, ring16, ring16_graph):
        with pytest.raises(ValueError, match="unknown method"):
            assemble_weight_matrix(ring16.points, ring16_graph, "other", d=1)

    def test_rank_parameter_validated(self, ring16, ring16_graph):
        with pytest.raises(ValueError):
            assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=4)
        with pytest.raises(ValueError):
            assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=0)


class TestWeightSerialization:
    def test_coordinate_format_round_trip(self, tmp_path, ring16, ring16_graph):
        W, _ = assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=1)
        path = tmp_path / "w.csv"
        save_weight_matrix(W, path)
        rebuilt = np.zeros((16, 16))
        for line in path.read_text().splitlines():
            i, j, v = line.split(",")
            rebuilt[int(i), int(j)] = float(v)
        np.testing.assert_array_equal(rebuilt, W.toarray())

    def test_spectra_rows(self, tmp_path, ring16, ring16_graph):
        _, spectra = assemble_weight_matrix(ring16.points, ring16_graph, "ldr", d=1)
        path = tmp_path / "spec.csv"
        save_spectra(spectra, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 16
        first = lines[0].split(",")
        # center index, 4 singular values, alpha, radius
        assert len(first) == 7
        assert int(first[0]) == 0
        assert float(first[-1]) == pytest.approx(spectra[0].radius)
