"""MLP inference, model/dataset files and synthetic games with known values.

Model files are JSON documents::

    {"layers": [{"weights": [[...], ...], "bias": [...], "activation": "sigmoid"},
                ...]}

with ``weights`` of shape ``out x in``.  Dataset files are CSV with a
header row; a column named ``label`` holds integer classes, every other
column is a real-valued feature in header order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Game, feature_vector
from .errors import ConfigurationError, DimensionError, NumericError, ParseError

ACTIVATIONS = ("sigmoid", "softmax", "linear")


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


_ACTIVATION_FNS = {"sigmoid": sigmoid, "softmax": softmax, "linear": lambda z: z}


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


class MlpModel:
    """Fully connected feed-forward network, float64 throughout."""

    def __init__(self, layers: Sequence[Layer]):
        layers = list(layers)
        _validate_layers(layers)
        self.layers = tuple(layers)

    @property
    def n_inputs(self) -> int:
        return self.layers[0].n_in

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_out

    def __repr__(self) -> str:
        dims = [self.n_inputs] + [layer.n_out for layer in self.layers]
        return f"MlpModel({'->'.join(map(str, dims))})"

    def __call__(self, x):
        return mlp_forward(self, x)


def _validate_layers(layers):
    if not layers:
        raise ParseError("model has no layers")
    for i, layer in enumerate(layers):
        if layer.activation not in ACTIVATIONS:
            raise ParseError(
                f"layer {i}: unknown activation {layer.activation!r}; valid: {', '.join(ACTIVATIONS)}"
            )
        if layer.weights.ndim != 2 or layer.weights.shape[0] == 0 or layer.weights.shape[1] == 0:
            raise ParseError(f"layer {i}: weights must be a non-empty out x in matrix")
        if layer.bias.shape != (layer.n_out,):
            raise ParseError(f"layer {i}: bias has length {layer.bias.size}, expected {layer.n_out}")
        if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
            raise ParseError(f"layer {i}: non-finite weights")
        if layer.activation == "softmax" and i != len(layers) - 1:
            raise ParseError(f"layer {i}: softmax is only allowed on the final layer")
        if i > 0 and layer.n_in != layers[i - 1].n_out:
            raise ParseError(
                f"layer {i}: expects {layer.n_in} inputs but layer {i - 1} produces {layers[i - 1].n_out}"
            )


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    """Forward pass for one input vector or a batch of row vectors."""
    h = np.asarray(x, dtype=np.float64)
    if h.shape[-1:] != (model.n_inputs,) or h.ndim > 2:
        raise DimensionError(f"model expects {model.n_inputs} inputs, got shape {h.shape}")
    for i, layer in enumerate(model.layers):
        h = _ACTIVATION_FNS[layer.activation](h @ layer.weights.T + layer.bias)
        if not np.all(np.isfinite(h)):
            raise NumericError(f"non-finite activation after layer {i}")
    return h


def model_from_dict(doc) -> MlpModel:
    if not isinstance(doc, dict) or "layers" not in doc:
        raise ParseError('model document needs a top-level "layers" list')
    raw = doc["layers"]
    if not isinstance(raw, list) or not raw:
        raise ParseError('"layers" must be a non-empty list')
    layers = []
    for i, entry in enumerate(raw):
        try:
            w = np.array(entry["weights"], dtype=np.float64)
            b = np.array(entry["bias"], dtype=np.float64).reshape(-1)
            act = entry["activation"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"layer {i}: missing or malformed key {exc}") from None
        except ValueError as exc:
            raise ParseError(f"layer {i}: {exc}") from None
        w.setflags(write=False)
        b.setflags(write=False)
        layers.append(Layer(w, b, act))
    return MlpModel(layers)


def load_model(source: str) -> MlpModel:
    """Parse model file *content* (JSON text)."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc)


def dump_model(model: MlpModel) -> str:
    # json writes floats with repr(), which round-trips float64 exactly
    doc = {
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in model.layers
        ]
    }
    return json.dumps(doc, indent=1)


def random_mlp(layer_sizes: Sequence[int], seed: int, scale: float = 1.0) -> MlpModel:
    """Deterministic random network: sigmoid hidden layers, softmax output.

    Weights are N(0, scale^2 / fan_in), biases N(0, 0.1^2).
    """
    if len(layer_sizes) < 2:
        raise ConfigurationError("need at least input and output sizes")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x4D4C50]))
    layers = []
    for i, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        w = rng.normal(0.0, scale / np.sqrt(n_in), size=(n_out, n_in))
        b = rng.normal(0.0, 0.1, size=n_out)
        act = "softmax" if i == len(layer_sizes) - 2 else "sigmoid"
        layers.append(Layer(w, b, act))
    return MlpModel(layers)


@dataclass(frozen=True)
class DatasetTable:
    feature_names: tuple
    rows: np.ndarray  # (n_rows, n_features)
    labels: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < len(self):
            raise IndexError(f"row {i} out of range for dataset with {len(self)} rows")
        return feature_vector(self.rows[i])

    def select_columns(self, columns: Sequence[int]) -> "DatasetTable":
        cols = list(columns)
        return DatasetTable(
            tuple(self.feature_names[c] for c in cols), self.rows[:, cols].copy(), self.labels
        )


def load_dataset(source: str) -> DatasetTable:
    """Parse CSV *content* into a :class:`DatasetTable`."""
    reader = csv.reader(io.StringIO(source))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("dataset is empty; a header row is required") from None
    label_col = header.index("label") if "label" in header else None
    names = tuple(h for i, h in enumerate(header) if i != label_col)
    rows, labels = [], []
    for lineno, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} cells, got {len(cells)}")
        values = []
        for col, cell in enumerate(cells):
            try:
                if col == label_col:
                    labels.append(int(cell))
                else:
                    values.append(float(cell))
            except ValueError:
                raise ParseError(f"row {lineno}, column {col + 1} ({header[col]!r}): cannot parse {cell!r}") from None
        rows.append(values)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    if not np.all(np.isfinite(data)):
        raise ParseError("dataset contains non-finite values")
    return DatasetTable(names, data, np.array(labels, dtype=np.int64) if label_col is not None else None)


def dump_dataset(table: DatasetTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(table.feature_names) + (["label"] if table.labels is not None else [])
    writer.writerow(header)
    for i, row in enumerate(table.rows):
        cells = [repr(float(v)) for v in row]
        if table.labels is not None:
            cells.append(str(int(table.labels[i])))
        writer.writerow(cells)
    return buf.getvalue()


# -- synthetic games -----------------------------------------------------


def linear_game(weights) -> Game:
    """v(A) = sum of weights of the members of A."""
    w = np.array(weights, dtype=np.float64)
    w.setflags(write=False)
    return Game(lambda masks: masks @ w, w.size, "linear")


def _member_index(members, n_players, what):
    idx = sorted(set(int(i) for i in members))
    if not idx:
        raise ConfigurationError(f"{what} set must not be empty")
    if idx[0] < 0 or idx[-1] >= n_players:
        raise ConfigurationError(f"{what} set {idx} out of range for {n_players} players")
    return np.array(idx)


def unanimity_game(members, n_players: int) -> Game:
    """v(A) = 1 iff every player in ``members`` belongs to A."""
    idx = _member_index(members, n_players, "member")
    return Game(lambda masks: masks[:, idx].all(axis=1).astype(np.float64), n_players, "unanimity")


def glove_game(left, right, n_players: int) -> Game:
    """v(A) = 1 iff A holds at least one left glove and one right glove."""
    lidx = _member_index(left, n_players, "left")
    ridx = _member_index(right, n_players, "right")
    if set(lidx) & set(ridx):
        raise ConfigurationError("a player cannot hold both a left and a right glove")

    def batch(masks):
        return (masks[:, lidx].any(axis=1) & masks[:, ridx].any(axis=1)).astype(np.float64)

    return Game(batch, n_players, "glove")


def weighted_voting_game(weights, quota: float) -> Game:
    """v(A) = 1 iff the weights of A sum to at least ``quota``."""
    w = np.array(weights, dtype=np.float64)
    if quota <= 0:
        raise ConfigurationError("quota must be positive")
    w.setflags(write=False)
    return Game(lambda masks: (masks @ w >= quota).astype(np.float64), w.size, "weighted_voting")


def synthetic_game(kind: str, **params) -> Game:
    """Build a synthetic game by name: linear, unanimity, glove or weighted_voting."""
    factories = {
        "linear": linear_game,
        "unanimity": unanimity_game,
        "glove": glove_game,
        "weighted_voting": weighted_voting_game,
    }
    try:
        factory = factories[kind]
    except KeyError:
        raise ConfigurationError(f"unknown synthetic game {kind!r}; valid: {', '.join(factories)}") from None
    return factory(**params)
