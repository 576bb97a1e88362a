"""Feature vectors, coalition masks and the game abstraction.

A *game* maps a coalition mask (one boolean per feature, ``True`` meaning
the feature is present) to a real number.  For a model explanation the
game is ``mask -> model(mask * x + (1 - mask) * baseline)[class]``; absent
features take their baseline value, which defaults to zero.

Masks and vectors are plain numpy arrays.  Feature 0 is the bias slot and
is attributed like every other feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BudgetError, ConfigurationError, DimensionError, NumericError

ALGORITHMS = ("exact", "castro", "owen", "halved_owen")


def feature_vector(values) -> np.ndarray:
    """Validate and copy ``values`` into a read-only float64 vector."""
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"feature vector must be 1-d, got shape {x.shape}")
    if x.size < 2:
        raise DimensionError("feature vector needs at least 2 entries (bias slot + 1 feature)")
    if not np.all(np.isfinite(x)):
        raise NumericError("feature vector contains non-finite entries")
    x.setflags(write=False)
    return x


def baseline_vector(values=None, n_features: Optional[int] = None) -> np.ndarray:
    """Baseline substituted for absent features; all zeros when ``values`` is None."""
    if values is None:
        if n_features is None:
            raise ConfigurationError("need either baseline values or a feature count")
        b = np.zeros(n_features)
        b.setflags(write=False)
        return b
    b = feature_vector(values)
    if n_features is not None and b.size != n_features:
        raise DimensionError(f"baseline has {b.size} entries, expected {n_features}")
    return b


def coalition_mask(bits) -> np.ndarray:
    mask = np.array(bits, dtype=bool)
    if mask.ndim != 1:
        raise DimensionError(f"coalition mask must be 1-d, got shape {mask.shape}")
    return mask


def apply_mask(mask, x, b) -> np.ndarray:
    """Keep ``x`` where ``mask`` is set and take ``b`` elsewhere.

    ``mask`` may be a single mask or a stack of masks (last axis = features).
    With a zero baseline this is the element-wise product ``mask * x``.
    """
    mask = np.asarray(mask, dtype=bool)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.shape != b.shape or mask.shape[-1:] != x.shape:
        raise DimensionError(
            f"length mismatch: mask {mask.shape}, x {x.shape}, baseline {b.shape}"
        )
    return np.where(mask, x, b)


def with_feature(mask, j: int) -> np.ndarray:
    """Copy of ``mask`` with feature ``j`` set present (coalition union with {j})."""
    mask = np.asarray(mask, dtype=bool)
    if not 0 <= j < mask.shape[-1]:
        raise IndexError(f"feature index {j} out of range for {mask.shape[-1]} features")
    out = mask.copy()
    out[..., j] = True
    return out


def without_feature(mask, j: int) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if not 0 <= j < mask.shape[-1]:
        raise IndexError(f"feature index {j} out of range for {mask.shape[-1]} features")
    out = mask.copy()
    out[..., j] = False
    return out


class Game:
    """A real-valued set function over ``n_players`` features.

    ``batch_fn`` receives a boolean array of shape ``(k, n_players)`` and
    must return ``k`` values.  It has to be deterministic and must not keep
    state between calls; estimators call it from vectorized code paths and
    may call it concurrently.
    """

    def __init__(self, batch_fn: Callable[[np.ndarray], np.ndarray], n_players: int, name: str = "game"):
        if n_players < 1:
            raise ConfigurationError("a game needs at least one player")
        self._batch_fn = batch_fn
        self.n_players = int(n_players)
        self.name = name

    def __repr__(self) -> str:
        return f"Game({self.name!r}, n_players={self.n_players})"

    def evaluate_batch(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=bool)
        if masks.ndim != 2 or masks.shape[1] != self.n_players:
            raise DimensionError(
                f"expected masks of shape (k, {self.n_players}), got {masks.shape}"
            )
        values = np.asarray(self._batch_fn(masks), dtype=np.float64).reshape(-1)
        if values.shape[0] != masks.shape[0]:
            raise DimensionError(
                f"game {self.name!r} returned {values.shape[0]} values for {masks.shape[0]} masks"
            )
        return values

    def evaluate(self, mask) -> float:
        return float(self.evaluate_batch(np.asarray(mask, dtype=bool)[None, :])[0])

    __call__ = evaluate

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], float], n_players: int, name: str = "game") -> "Game":
        """Wrap a scalar ``mask -> value`` function."""

        def batch(masks):
            return np.array([fn(m) for m in masks], dtype=np.float64)

        return cls(batch, n_players, name)

    @classmethod
    def from_table(cls, values, name: str = "table") -> "Game":
        """Game given by an explicit value per coalition.

        ``values[i]`` is the worth of the coalition whose bit ``j`` of the
        integer ``i`` says whether feature ``j`` is present.
        """
        table = np.array(values, dtype=np.float64)
        n = int(round(np.log2(table.size)))
        if table.ndim != 1 or 2**n != table.size:
            raise DimensionError("table length must be a power of two")
        table.setflags(write=False)
        weights = 1 << np.arange(n, dtype=np.int64)

        def batch(masks):
            return table[masks.astype(np.int64) @ weights]

        return cls(batch, n, name)


def make_game(model, x, b=None, class_index: int = 0) -> Game:
    """Game whose worth is ``model``'s score for ``class_index`` on the masked input."""
    from .models import mlp_forward

    x = feature_vector(x)
    b = baseline_vector(b, x.size)
    if model.n_inputs != x.size:
        raise ConfigurationError(f"model takes {model.n_inputs} inputs but x has {x.size} entries")
    if not 0 <= class_index < model.n_outputs:
        raise ConfigurationError(f"class index {class_index} out of range for {model.n_outputs} outputs")

    def batch(masks):
        return mlp_forward(model, np.where(masks, x, b))[:, class_index]

    return Game(batch, x.size, f"{model!r}[class {class_index}]")


def masks_from_integers(idx, n_players: int) -> np.ndarray:
    """Bit ``j`` of each integer in ``idx`` becomes column ``j`` of the mask."""
    idx = np.asarray(idx, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n_players, dtype=np.int64)) & 1).astype(bool)


@dataclass(frozen=True)
class SamplingBudget:
    """Parameters of one estimator run.

    ``kind`` is one of :data:`ALGORITHMS`.  ``equivalent_samples`` is the
    budget in the cross-algorithm unit (``M_c`` for Castro, ``Q * M`` for
    the Owen variants).
    """

    kind: str
    mc: Optional[int] = None
    q: Optional[int] = None
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.kind!r}; valid: {', '.join(ALGORITHMS)}")
        if self.kind == "castro":
            if self.mc is None or self.mc < 1:
                raise BudgetError(f"castro needs M_c >= 1, got {self.mc}")
        elif self.kind in ("owen", "halved_owen"):
            if self.q is None or self.q < 1 or self.m is None or self.m < 1:
                raise BudgetError(f"{self.kind} needs Q >= 1 and M >= 1, got Q={self.q}, M={self.m}")

    @property
    def equivalent_samples(self) -> Optional[int]:
        if self.kind == "castro":
            return self.mc
        if self.kind in ("owen", "halved_owen"):
            return self.q * self.m
        return None


@dataclass(frozen=True)
class ShapleyVector:
    """Attributions for all features plus bookkeeping about how they were obtained."""

    attributions: np.ndarray
    algorithm: str
    seed: Optional[int] = None
    model_evaluations: int = 0
    marginal_samples_per_feature: int = 0
    grid_points_visited: Optional[int] = None
    budget: Optional[SamplingBudget] = field(default=None, compare=False)

    def __post_init__(self):
        a = np.array(self.attributions, dtype=np.float64)
        if a.ndim != 1:
            raise DimensionError("attributions must be 1-d")
        if not np.all(np.isfinite(a)):
            raise NumericError(f"{self.algorithm} produced non-finite attributions")
        a.setflags(write=False)
        object.__setattr__(self, "attributions", a)

    def __len__(self) -> int:
        return self.attributions.size

    def __getitem__(self, j):
        return self.attributions[j]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.attributions, dtype=dtype)
