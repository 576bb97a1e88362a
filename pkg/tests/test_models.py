import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapmc.errors import ConfigurationError, DimensionError, ParseError
from shapmc.models import (
    DatasetTable,
    Layer,
    MlpModel,
    dump_dataset,
    dump_model,
    glove_game,
    linear_game,
    load_dataset,
    load_model,
    mlp_forward,
    random_mlp,
    sigmoid,
    synthetic_game,
    unanimity_game,
    weighted_voting_game,
)


def layer(w, b, act):
    return Layer(np.array(w, float), np.array(b, float), act)


# hand-set 2 -> 2 -> 2 network; output computed with mpmath at 30 digits:
#   z1 = (1 - 2, 0.5 + 4 - 1) = (-1, 3.5), h = sigmoid(z1)
#   z2 = (h0 + 0.5, h1 - h0), p = softmax(z2)
HAND_NET = MlpModel(
    [
        layer([[1.0, -1.0], [0.5, 2.0]], [0.0, -1.0], "sigmoid"),
        layer([[1.0, 0.0], [-1.0, 1.0]], [0.5, 0.0], "softmax"),
    ]
)
HAND_OUT = (0.516792450439836322626982587136465, 0.483207549560163677373017412863437)


class TestForward:
    def test_uniform_softmax(self):
        m = MlpModel([layer(np.zeros((2, 3)), np.zeros(2), "softmax")])
        np.testing.assert_array_equal(mlp_forward(m, [1.0, -4.0, 9.0]), [0.5, 0.5])

    def test_zero_sigmoid(self):
        m = MlpModel([layer(np.zeros((4, 3)), np.zeros(4), "sigmoid")])
        np.testing.assert_array_equal(mlp_forward(m, [1.0, 2.0, 3.0]), [0.5] * 4)

    def test_hand_computed(self):
        np.testing.assert_allclose(mlp_forward(HAND_NET, [1.0, 2.0]), HAND_OUT, rtol=0, atol=1e-15)

    def test_batch_matches_rows(self):
        m = random_mlp([5, 7, 3], seed=2)
        x = np.random.default_rng(0).normal(size=(10, 5))
        batch = mlp_forward(m, x)
        for i in range(10):
            np.testing.assert_allclose(mlp_forward(m, x[i]), batch[i], rtol=1e-15)

    def test_shape_error(self):
        with pytest.raises(DimensionError):
            mlp_forward(HAND_NET, [1.0, 2.0, 3.0])

    def test_sigmoid_extremes(self):
        s = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
        np.testing.assert_array_equal(s, [0.0, 0.5, 1.0])
        assert np.all(np.isfinite(sigmoid(np.array([-745.0, -800.0]))))

    def test_softmax_properties_random(self):
        rng = np.random.default_rng(9)
        for i in range(1000):
            sizes = [int(rng.integers(2, 8)) for _ in range(int(rng.integers(2, 4)))]
            m = random_mlp(sizes, seed=i, scale=float(rng.uniform(0.1, 10)))
            out = mlp_forward(m, rng.normal(scale=5, size=sizes[0]))
            assert np.all(out >= 0) and np.all(out <= 1)
            assert abs(out.sum() - 1) < 1e-12

    def test_logit_shift_invariance(self):
        rng = np.random.default_rng(10)
        for i in range(50):
            m = random_mlp([4, 6, 3], seed=i)
            last = m.layers[-1]
            shifted = MlpModel([m.layers[0], Layer(last.weights, last.bias + rng.normal() * 10, "softmax")])
            x = rng.normal(size=4)
            np.testing.assert_allclose(mlp_forward(m, x), mlp_forward(shifted, x), atol=1e-10)


class TestModelFile:
    def test_minimal(self):
        m = load_model(json.dumps({"layers": [{"weights": [[1, 2]], "bias": [0], "activation": "linear"}]}))
        assert len(m.layers) == 1 and m.n_inputs == 2

    def test_chain_break_names_layer(self):
        doc = {
            "layers": [
                {"weights": [[1, 2], [3, 4]], "bias": [0, 0], "activation": "sigmoid"},
                {"weights": [[1, 2, 3]], "bias": [0], "activation": "softmax"},
            ]
        }
        with pytest.raises(ParseError, match="layer 1"):
            load_model(json.dumps(doc))

    def test_empty_layers(self):
        with pytest.raises(ParseError):
            load_model('{"layers": []}')

    @pytest.mark.parametrize(
        "doc, fragment",
        [
            ('{"layers": [{"weights": [[1]], "bias": [0], "activation": "relu"}]}', "unknown activation"),
            ('{"layers": [{"weights": [[1]], "activation": "linear"}]}', "layer 0"),
            ('{"layers": [{"weights": [[1, 2]], "bias": [0, 0], "activation": "linear"}]}', "bias"),
            ("not json", "JSON"),
            ('{"weights": []}', "layers"),
        ],
    )
    def test_malformed(self, doc, fragment):
        with pytest.raises(ParseError, match=fragment):
            load_model(doc)

    def test_softmax_only_last(self):
        doc = {
            "layers": [
                {"weights": [[1]], "bias": [0], "activation": "softmax"},
                {"weights": [[1]], "bias": [0], "activation": "linear"},
            ]
        }
        with pytest.raises(ParseError, match="softmax"):
            load_model(json.dumps(doc))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
    def test_round_trip_bitwise(self, seed, scale):
        m = random_mlp([3, 5, 4, 2], seed, scale=scale)
        back = load_model(dump_model(m))
        for a, b in zip(m.layers, back.layers):
            assert a.weights.tobytes() == b.weights.tobytes()
            assert a.bias.tobytes() == b.bias.tobytes()
            assert a.activation == b.activation


class TestDataset:
    def test_with_label(self):
        d = load_dataset("x0,x1,label\n1,0.5,1\n")
        assert len(d) == 1
        np.testing.assert_array_equal(d.rows[0], [1.0, 0.5])
        assert d.labels.tolist() == [1]
        assert d.feature_names == ("x0", "x1")

    def test_without_label(self):
        d = load_dataset("a,b,c\n1,2,3\n4,5,6\n")
        assert d.labels is None and d.n_features == 3

    def test_ragged_row(self):
        with pytest.raises(ParseError, match="row 3"):
            load_dataset("a,b,c\n1,2,3\n1,2\n")

    def test_bad_cell_location(self):
        with pytest.raises(ParseError, match=r"row 2, column 2"):
            load_dataset("a,b\n1,x\n")

    def test_empty(self):
        with pytest.raises(ParseError):
            load_dataset("")

    def test_round_trip(self):
        d = DatasetTable(("x0", "x1"), np.array([[1.0, 0.1], [1.0, -2.5e-7]]), np.array([0, 1]))
        back = load_dataset(dump_dataset(d))
        assert back.rows.tobytes() == d.rows.tobytes()
        assert back.labels.tolist() == [0, 1]

    def test_row_out_of_range(self):
        with pytest.raises(IndexError):
            load_dataset("a,b\n1,2\n").row(1)


class TestSyntheticGames:
    def test_linear(self):
        assert linear_game([1, 2]).evaluate([False, True]) == 2.0

    def test_unanimity(self):
        assert unanimity_game([0, 1], 2).evaluate([True, False]) == 0.0
        assert unanimity_game([0, 1], 2).evaluate([True, True]) == 1.0

    def test_weighted_voting(self):
        g = weighted_voting_game([4, 2, 1], quota=5)
        assert g.evaluate([True, True, False]) == 1.0
        assert g.evaluate([True, False, True]) == 1.0
        assert g.evaluate([False, True, True]) == 0.0

    def test_glove(self):
        g = glove_game([0], [1, 2], 3)
        assert g.evaluate([True, False, True]) == 1.0
        assert g.evaluate([False, True, True]) == 0.0

    def test_by_name(self):
        g = synthetic_game("weighted_voting", weights=[4, 2, 1], quota=5)
        assert g.evaluate([True, True, False]) == 1.0
        with pytest.raises(ConfigurationError):
            synthetic_game("airport")

    def test_empty_members(self):
        with pytest.raises(ConfigurationError):
            unanimity_game([], 3)
        with pytest.raises(ConfigurationError):
            weighted_voting_game([1, 2], quota=0)

    @pytest.mark.parametrize(
        "game",
        [
            unanimity_game([1, 3], 5),
            glove_game([0, 1], [3, 4], 5),
            weighted_voting_game([3, 1, 4, 1, 5], quota=7),
        ],
        ids=["unanimity", "glove", "weighted_voting"],
    )
    def test_monotone(self, game):
        idx = np.arange(32)
        masks = ((idx[:, None] >> np.arange(5)) & 1).astype(bool)
        values = game.evaluate_batch(masks)
        for a in range(32):
            for b in range(32):
                if a & b == a:
                    assert values[a] <= values[b]
