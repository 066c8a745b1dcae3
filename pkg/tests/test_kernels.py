"""Kernel checks: closed-form cases, naive-loop oracles, and bound identities."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import (
    naive_reconstruction_error,
    naive_token_uniqueness,
    naive_uniqueness_bound,
    naive_uniqueness_matrix,
    unit_tokens,
)
from unicomp import (
    DegenerateFeatureError,
    SelectionError,
    pairwise_uniqueness,
    reconstruction,
    reconstruction_error,
    softmax_residual_bound,
    token_uniqueness,
    uniqueness_bound,
    uniqueness_matrix,
)

ATOL = 1e-6


class TestPairwiseUniqueness:
    def test_identical_vectors_score_zero(self):
        v = np.array([0.5, -1.25, 2.0])
        assert pairwise_uniqueness(v, v) == 0.0

    def test_orthogonal_vectors_score_one(self):
        assert pairwise_uniqueness([1.0, 0.0], [0.0, 3.0]) == pytest.approx(1.0, abs=ATOL)

    def test_opposite_vectors_score_two(self):
        assert pairwise_uniqueness([2.0, 0.0], [-1.0, 0.0]) == pytest.approx(2.0, abs=ATOL)

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=6)
        b = rng.normal(size=6)
        assert pairwise_uniqueness(a, b) == pytest.approx(
            pairwise_uniqueness(3.5 * a, 0.02 * b), abs=1e-12
        )

    def test_symmetry(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            a = rng.normal(size=5)
            b = rng.normal(size=5)
            assert pairwise_uniqueness(a, b) == pytest.approx(pairwise_uniqueness(b, a), abs=1e-12)

    def test_zero_norm_rejected(self):
        with pytest.raises(DegenerateFeatureError, match="degenerate feature vector"):
            pairwise_uniqueness([0.0, 0.0], [1.0, 0.0])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal length"):
            pairwise_uniqueness([1.0, 0.0], [1.0, 0.0, 0.0])


class TestUniquenessMatrix:
    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(42)
        tokens = rng.normal(size=(9, 5))
        np.testing.assert_allclose(
            uniqueness_matrix(tokens), naive_uniqueness_matrix(tokens), atol=ATOL
        )

    def test_diagonal_exactly_zero(self):
        rng = np.random.default_rng(43)
        u = uniqueness_matrix(rng.normal(size=(7, 4)))
        assert np.all(np.diag(u) == 0.0)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(44)
        u = uniqueness_matrix(rng.normal(size=(12, 6)))
        np.testing.assert_array_equal(u, u.T)
        assert u.min() >= 0.0 and u.max() <= 2.0

    def test_duplicate_rows_score_zero(self):
        tokens = np.array([[1.0, 2.0], [1.0, 2.0], [2.0, 4.0]])
        u = uniqueness_matrix(tokens)
        np.testing.assert_allclose(u, np.zeros((3, 3)), atol=ATOL)

    def test_zero_row_named_in_error(self):
        tokens = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(DegenerateFeatureError, match="row 2"):
            uniqueness_matrix(tokens)


class TestTokenUniqueness:
    def test_two_orthogonal_tokens(self):
        # each mean includes the zero self term: (0 + 1) / 2
        scores = token_uniqueness(np.array([[1.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_allclose(scores, [0.5, 0.5], atol=ATOL)

    def test_identical_tokens_score_zero(self):
        scores = token_uniqueness(np.ones((6, 3)))
        np.testing.assert_allclose(scores, np.zeros(6), atol=ATOL)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(45)
        tokens = rng.normal(size=(8, 4))
        np.testing.assert_allclose(
            token_uniqueness(tokens), naive_token_uniqueness(tokens), atol=ATOL
        )

    def test_self_term_caps_the_mean(self):
        rng = np.random.default_rng(46)
        for n in (2, 5, 9):
            scores = token_uniqueness(rng.normal(size=(n, 4)))
            assert scores.max() <= 2.0 * (n - 1) / n + ATOL


class TestReconstruction:
    def test_selected_tokens_reproduce_exactly_under_nearest(self):
        rng = np.random.default_rng(47)
        tokens = unit_tokens(rng, 10, 5)
        selected = [1, 4, 8]
        rebuilt = reconstruction(tokens, selected, scheme="nearest")
        np.testing.assert_allclose(rebuilt[selected], tokens[selected], atol=1e-12)

    def test_full_selection_is_lossless_under_nearest(self):
        rng = np.random.default_rng(48)
        tokens = unit_tokens(rng, 6, 4)
        assert reconstruction_error(tokens, range(6), scheme="nearest") <= ATOL

    def test_full_selection_of_identical_tokens_is_lossless_under_softmax(self):
        # softmax smears weight across every selected row, so the full
        # selection is only exactly lossless when the rows agree
        tokens = np.tile(np.array([0.5, 0.25, 0.125]), (4, 1))
        assert reconstruction_error(tokens, range(4), scheme="softmax") <= ATOL

    def test_softmax_matches_naive_convex_combination(self):
        rng = np.random.default_rng(49)
        tokens = unit_tokens(rng, 9, 4)
        selected = [0, 2, 5, 7]
        expected_err = naive_reconstruction_error(tokens, selected, "softmax")
        assert reconstruction_error(tokens, selected, scheme="softmax") == pytest.approx(
            expected_err, abs=ATOL
        )

    def test_nearest_matches_naive_argmax(self):
        rng = np.random.default_rng(50)
        tokens = unit_tokens(rng, 11, 3)
        selected = [3, 6, 9]
        expected_err = naive_reconstruction_error(tokens, selected, "nearest")
        assert reconstruction_error(tokens, selected, scheme="nearest") == pytest.approx(
            expected_err, abs=ATOL
        )

    def test_nearest_tie_prefers_lowest_id(self):
        # tokens 0 and 2 are identical, so every duplicate of them ties
        tokens = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [2.0, 0.0]])
        rebuilt = reconstruction(tokens, [0, 2], scheme="nearest")
        np.testing.assert_array_equal(rebuilt[3], tokens[0])

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            reconstruction(np.eye(3), [0], scheme="mean")

    def test_empty_selection_rejected(self):
        with pytest.raises(SelectionError, match="at least one"):
            reconstruction(np.eye(3), [])

    def test_duplicate_selection_rejected(self):
        with pytest.raises(SelectionError, match="duplicate"):
            reconstruction(np.eye(3), [1, 1])

    def test_out_of_range_selection_rejected(self):
        with pytest.raises(SelectionError, match=r"\[0, 3\)"):
            reconstruction(np.eye(3), [0, 3])


class TestReconstructionError:
    def test_orthogonal_pair_single_selection(self):
        # unit residual of length sqrt(2): squared norm 2
        tokens = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert reconstruction_error(tokens, [0], scheme="nearest") == pytest.approx(2.0, abs=ATOL)

    def test_exhaustive_small_selections_match_oracle(self):
        rng = np.random.default_rng(51)
        tokens = unit_tokens(rng, 10, 4)
        for selected in itertools.combinations(range(10), 3):
            for scheme in ("nearest", "softmax"):
                got = reconstruction_error(tokens, selected, scheme=scheme)
                want = naive_reconstruction_error(tokens, selected, scheme)
                assert got == pytest.approx(want, abs=ATOL), (selected, scheme)


class TestUniquenessBound:
    def test_full_selection_bound_zero(self):
        rng = np.random.default_rng(52)
        tokens = unit_tokens(rng, 7, 4)
        assert uniqueness_bound(tokens, range(7)) == pytest.approx(0.0, abs=ATOL)

    def test_orthogonal_pair_bound_two(self):
        tokens = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert uniqueness_bound(tokens, [0]) == pytest.approx(2.0, abs=ATOL)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(53)
        tokens = unit_tokens(rng, 9, 5)
        for selected in ([0], [2, 6], [1, 3, 8]):
            assert uniqueness_bound(tokens, selected) == pytest.approx(
                naive_uniqueness_bound(tokens, selected), abs=ATOL
            )

    def test_nearest_error_equals_bound(self):
        rng = np.random.default_rng(54)
        for _ in range(200):
            n = int(rng.integers(2, 20))
            tokens = unit_tokens(rng, n, int(rng.integers(2, 8)))
            size = int(rng.integers(1, n + 1))
            selected = rng.choice(n, size=size, replace=False)
            err = reconstruction_error(tokens, selected, scheme="nearest")
            bound = uniqueness_bound(tokens, selected)
            assert abs(err - bound) <= ATOL

    def test_monotone_under_selection_growth(self):
        rng = np.random.default_rng(55)
        for _ in range(100):
            n = int(rng.integers(3, 16))
            tokens = unit_tokens(rng, n, 5)
            small = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
            rest = [i for i in range(n) if i not in set(small)]
            extra = rng.choice(rest, size=int(rng.integers(1, len(rest) + 1)), replace=False)
            large = sorted(small + [int(i) for i in extra])
            assert uniqueness_bound(tokens, large) <= uniqueness_bound(tokens, small) + 1e-9


class TestSoftmaxResidualBound:
    def test_never_below_softmax_error(self):
        rng = np.random.default_rng(56)
        for _ in range(300):
            n = int(rng.integers(2, 16))
            tokens = unit_tokens(rng, n, int(rng.integers(2, 8)))
            size = int(rng.integers(1, n + 1))
            selected = rng.choice(n, size=size, replace=False)
            err = reconstruction_error(tokens, selected, scheme="softmax")
            assert err <= softmax_residual_bound(tokens, selected) + ATOL

    def test_single_token_video_is_free(self):
        tokens = np.array([[0.3, 0.4]])
        assert softmax_residual_bound(tokens, [0]) == pytest.approx(0.0, abs=ATOL)
        assert reconstruction_error(tokens, [0], scheme="softmax") == pytest.approx(0.0, abs=ATOL)


@st.composite
def token_matrices(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    d = draw(st.integers(min_value=2, max_value=6))
    mat = draw(
        arrays(
            np.float64,
            (n, d),
            elements=st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
        )
    )
    return mat


@settings(max_examples=60, deadline=None)
@given(token_matrices())
def test_uniqueness_matrix_properties(tokens):
    norms = np.linalg.norm(tokens, axis=1)
    if np.any(norms == 0.0):
        with pytest.raises(DegenerateFeatureError):
            uniqueness_matrix(tokens)
        return
    u = uniqueness_matrix(tokens)
    np.testing.assert_array_equal(u, u.T)
    assert np.all(np.diag(u) == 0.0)
    assert u.min() >= 0.0 and u.max() <= 2.0


@settings(max_examples=60, deadline=None)
@given(token_matrices(), st.integers(min_value=0, max_value=10_000))
def test_residual_bound_property(tokens, pick):
    norms = np.linalg.norm(tokens, axis=1)
    if np.any(norms == 0.0):
        return
    n = tokens.shape[0]
    size = 1 + pick % n
    selected = [(pick + 3 * k) % n for k in range(n)][:size]
    selected = sorted(set(selected))
    err = reconstruction_error(tokens, selected, scheme="softmax")
    assert err <= softmax_residual_bound(tokens, selected) + ATOL
