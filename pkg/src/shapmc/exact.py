"""Exact Shapley values by full coalition enumeration.

Every coalition is evaluated once and stored in a table indexed by the
integer whose bit ``j`` marks feature ``j``.  The table is then combined
three ways:

* :func:`exact_shapley` - the classical weighted sum of marginal
  contributions, weights from a ratio recurrence;
* :func:`exact_multilinear_e` - the expected marginal contribution when
  every other feature joins independently with probability ``q``;
* :func:`exact_integral_shapley` - the integral of the latter over
  ``q in [0, 1]``, done in closed form with Beta functions.

The last one must agree with the first; that agreement is the module's
self-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import beta

from .core import Game, ShapleyVector, masks_from_integers
from .errors import BudgetError

_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactConfig:
    max_features: int = 25
    memory_bytes: int = 1 << 30

    def check(self, n_players: int) -> None:
        if n_players > self.max_features:
            raise BudgetError(
                f"exact enumeration over {n_players} features exceeds the cap of {self.max_features}"
            )
        # value table plus popcount/weight scratch of the same length
        need = (8 + 8 + 1) * (1 << n_players)
        if need > self.memory_bytes:
            raise BudgetError(
                f"exact enumeration over {n_players} features needs ~{need} bytes, "
                f"budget is {self.memory_bytes}"
            )


DEFAULT_CONFIG = ExactConfig()


def coalition_table(game: Game, cfg: ExactConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Worth of every coalition, indexed by mask integer."""
    n = game.n_players
    cfg.check(n)
    total = 1 << n
    table = np.empty(total, dtype=np.float64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        table[start : start + idx.size] = game.evaluate_batch(masks_from_integers(idx, n))
    return table


def _popcount(n_players: int) -> np.ndarray:
    pc = np.zeros(1, dtype=np.uint8)
    for _ in range(n_players):
        pc = np.concatenate([pc, pc + 1])
    return pc


def _split(arr: np.ndarray, n_players: int, j: int):
    """Views of ``arr`` restricted to masks without / with bit ``j``."""
    v = arr.reshape(1 << (n_players - 1 - j), 2, 1 << j)
    return v[:, 0, :], v[:, 1, :]


def shapley_weights(n_players: int) -> np.ndarray:
    """``w[a] = a! (n - a)! / (n + 1)!`` for coalitions of size ``a`` among the others.

    Uses ``w[a + 1] = w[a] (a + 1) / (n - a)`` from ``w[0] = 1 / (n + 1)``
    where ``n + 1 = n_players``; no factorial is ever formed.
    """
    n = n_players - 1
    w = np.empty(n_players)
    w[0] = 1.0 / n_players
    for a in range(n):
        w[a + 1] = w[a] * (a + 1) / (n - a)
    return w


def shapley_from_table(table: np.ndarray, n_players: int) -> np.ndarray:
    pc = _popcount(n_players)
    w = shapley_weights(n_players)
    out = np.empty(n_players)
    for j in range(n_players):
        v0, v1 = _split(table, n_players, j)
        p0, _ = _split(pc, n_players, j)
        out[j] = np.sum(w[p0] * (v1 - v0))
    return out


def exact_shapley(game: Game, n_players: int | None = None, cfg: ExactConfig = DEFAULT_CONFIG) -> ShapleyVector:
    """Shapley value of every feature, evaluating each coalition exactly once."""
    n = game.n_players if n_players is None else n_players
    if n != game.n_players:
        raise BudgetError(f"game has {game.n_players} players, caller asked for {n}")
    table = coalition_table(game, cfg)
    return ShapleyVector(
        shapley_from_table(table, n),
        algorithm="exact",
        model_evaluations=table.size,
        marginal_samples_per_feature=table.size // 2,
    )


def _check_index(game: Game, j: int):
    if not 0 <= j < game.n_players:
        raise IndexError(f"feature index {j} out of range for {game.n_players} features")


def exact_multilinear_e(game: Game, j: int, q: float, cfg: ExactConfig = DEFAULT_CONFIG, table=None) -> float:
    """Expected marginal contribution of ``j`` when each other feature is present w.p. ``q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    _check_index(game, j)
    n_players = game.n_players
    if table is None:
        table = coalition_table(game, cfg)
    n = n_players - 1
    a = np.arange(n_players)
    prob = np.power(q, a) * np.power(1.0 - q, n - a)
    v0, v1 = _split(table, n_players, j)
    p0, _ = _split(_popcount(n_players), n_players, j)
    return float(np.sum(prob[p0] * (v1 - v0)))


def exact_integral_shapley(game: Game, j: int, cfg: ExactConfig = DEFAULT_CONFIG, table=None) -> float:
    """Integral over q in [0, 1] of :func:`exact_multilinear_e`, in closed form.

    The expected marginal is a polynomial ``sum_a c_a q^a (1-q)^(n-a)``
    where ``c_a`` sums the marginals over coalitions of size ``a``; each
    term integrates to ``c_a B(a + 1, n - a + 1)``.
    """
    _check_index(game, j)
    n_players = game.n_players
    if table is None:
        table = coalition_table(game, cfg)
    n = n_players - 1
    v0, v1 = _split(table, n_players, j)
    p0, _ = _split(_popcount(n_players), n_players, j)
    coeff = np.bincount(p0.ravel(), weights=(v1 - v0).ravel(), minlength=n_players)
    a = np.arange(n_players)
    return float(np.dot(coeff, beta(a + 1, n - a + 1)))
