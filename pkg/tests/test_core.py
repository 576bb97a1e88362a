import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shapmc.core import (
    Game,
    SamplingBudget,
    ShapleyVector,
    apply_mask,
    baseline_vector,
    feature_vector,
    make_game,
    with_feature,
)
from shapmc.errors import BudgetError, ConfigurationError, DimensionError, NumericError
from shapmc.models import Layer, MlpModel, mlp_forward, random_mlp


class TestApplyMask:
    def test_identity_mask(self):
        np.testing.assert_array_equal(apply_mask([1, 1, 1], [1, 2, 3], [0, 0, 0]), [1, 2, 3])

    def test_empty_mask_is_baseline(self):
        np.testing.assert_array_equal(apply_mask([0, 0, 0], [1, 2, 3], [0, 0, 0]), [0, 0, 0])

    def test_coordinatewise(self):
        np.testing.assert_array_equal(apply_mask([1, 0, 1], [1, 2, 3], [9, 9, 9]), [1, 9, 3])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            apply_mask([1, 0], [1, 2, 3], [0, 0, 0])
        with pytest.raises(DimensionError):
            apply_mask([1, 0, 1], [1, 2, 3], [0, 0])

    @given(
        st.integers(2, 12).flatmap(
            lambda n: st.tuples(
                arrays(bool, n),
                arrays(float, n, elements=st.floats(-1e6, 1e6)),
                arrays(float, n, elements=st.floats(-1e6, 1e6)),
                arrays(float, n, elements=st.floats(-1e6, 1e6)),
            )
        )
    )
    def test_properties(self, data):
        mask, x, b, other = data
        n = x.size
        np.testing.assert_array_equal(apply_mask(np.ones(n, bool), x, b), x)
        np.testing.assert_array_equal(apply_mask(np.zeros(n, bool), x, b), b)
        # absent coordinates ignore x
        x2 = np.where(mask, x, other)
        np.testing.assert_array_equal(apply_mask(mask, x, b), apply_mask(mask, x2, b))


class TestWithFeature:
    @pytest.mark.parametrize(
        "mask, j, expected",
        [((0, 0, 0), 1, (0, 1, 0)), ((0, 1, 0), 1, (0, 1, 0)), ((1, 0, 1), 1, (1, 1, 1))],
    )
    def test_examples(self, mask, j, expected):
        m = np.array(mask, bool)
        out = with_feature(m, j)
        np.testing.assert_array_equal(out, np.array(expected, bool))
        np.testing.assert_array_equal(m, np.array(mask, bool))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            with_feature(np.zeros(3, bool), 3)
        with pytest.raises(IndexError):
            with_feature(np.zeros(3, bool), -1)

    @given(arrays(bool, st.integers(1, 16)), st.data())
    def test_idempotent_and_monotone(self, mask, data):
        j = data.draw(st.integers(0, mask.size - 1))
        once = with_feature(mask, j)
        np.testing.assert_array_equal(with_feature(once, j), once)
        assert np.all(once >= mask)


class TestVectors:
    def test_feature_vector_needs_two_entries(self):
        with pytest.raises(DimensionError):
            feature_vector([1.0])

    def test_feature_vector_finite(self):
        with pytest.raises(NumericError):
            feature_vector([1.0, np.nan])

    def test_default_baseline_zero(self):
        np.testing.assert_array_equal(baseline_vector(None, 4), np.zeros(4))

    def test_baseline_length(self):
        with pytest.raises(DimensionError):
            baseline_vector([1, 2], 3)


class TestGame:
    def test_from_table_indexing(self):
        g = Game.from_table([0.0, 1.0, 2.0, 3.0])
        assert g.evaluate([False, False]) == 0.0
        assert g.evaluate([True, False]) == 1.0
        assert g.evaluate([False, True]) == 2.0
        assert g.evaluate([True, True]) == 3.0

    def test_batch_shape_checked(self):
        g = Game.from_table(np.zeros(8))
        with pytest.raises(DimensionError):
            g.evaluate_batch(np.zeros((2, 2), bool))

    def test_from_function(self):
        g = Game.from_function(lambda m: float(m.sum()), 3)
        np.testing.assert_array_equal(g.evaluate_batch([[1, 1, 0], [0, 0, 0]]), [2.0, 0.0])


class TestMakeGame:
    def model(self):
        return random_mlp([3, 4, 2], seed=7)

    def test_full_mask_is_model_score(self):
        m = self.model()
        x = np.array([1.0, 0.3, -2.0])
        g = make_game(m, x, None, 1)
        assert g.evaluate(np.ones(3, bool)) == mlp_forward(m, x)[1]

    def test_empty_mask_is_zero_input(self):
        m = self.model()
        g = make_game(m, [1.0, 0.3, -2.0], None, 0)
        assert g.evaluate(np.zeros(3, bool)) == mlp_forward(m, np.zeros(3))[0]

    def test_partial_mask_uses_baseline(self):
        w = np.array([[1.0, 10.0]])
        m = MlpModel([Layer(w, np.zeros(1), "linear")])
        g = make_game(m, [2.0, 3.0], [0.0, -1.0], 0)
        assert g.evaluate([True, False]) == 2.0 * 1.0 + -1.0 * 10.0

    def test_dimension_errors(self):
        m = self.model()
        with pytest.raises(ConfigurationError):
            make_game(m, [1.0, 2.0], None, 0)
        with pytest.raises(ConfigurationError):
            make_game(m, [1.0, 2.0, 3.0], None, 2)

    def test_deterministic(self):
        m = random_mlp([6, 5, 3], seed=1)
        g = make_game(m, np.linspace(-1, 1, 6), None, 2)
        mask = np.array([1, 0, 1, 1, 0, 1], bool)
        values = {g.evaluate(mask) for _ in range(100)}
        assert len(values) == 1


class TestBudgetTypes:
    def test_castro_needs_positive(self):
        with pytest.raises(BudgetError):
            SamplingBudget("castro", mc=0)

    def test_owen_needs_q_and_m(self):
        with pytest.raises(BudgetError):
            SamplingBudget("owen", q=0, m=2)
        assert SamplingBudget("owen", q=1000, m=2).equivalent_samples == 2000

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            SamplingBudget("kernel")

    def test_shapley_vector_finite(self):
        with pytest.raises(NumericError):
            ShapleyVector([0.0, np.inf], algorithm="exact")
