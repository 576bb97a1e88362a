"""Monte Carlo Shapley estimators.

Three schemes, all returning a :class:`~shapmc.core.ShapleyVector`:

``castro_sample``
    Average marginal contribution along uniformly random feature orders.
``owen_sample``
    Riemann grid ``q = 0, 1/Q, ..., 1`` over the membership probability;
    at each grid point ``M`` Bernoulli(q) coalitions are drawn and the
    marginal contribution of every feature is measured on each of them.
``halved_owen_sample``
    Same, but only ``q <= 1/2`` is visited and every coalition is paired
    with its complement, which stands in for the draw at ``1 - q``.

Randomness
----------
Every call builds a ``numpy.random.Generator`` (PCG64) from
``SeedSequence([seed, algorithm code])``.  Bernoulli bits are one uniform
per bit (``u < q``), permutations come from ``Generator.permuted``
(a per-row Fisher-Yates shuffle).  :func:`derive_seed` hashes a master
seed with arbitrary integer keys into an independent 64-bit seed, which
is how the experiment harness gives each run its own substream.

Normalization
-------------
By default estimates are divided by the number of marginal samples that
were actually accumulated: ``(Q + 1) M`` for Owen, ``2 G M`` for Halved
Owen where ``G = floor(Q / 2) + 1`` grid points are visited.  Passing
``compat_normalization=True`` divides by ``Q M`` instead, which is
biased for small ``Q`` (a two-player unanimity game at ``Q = 1`` gives
1.0 rather than 0.5) but matches the textbook pseudo-code.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .core import ALGORITHMS, Game, SamplingBudget, ShapleyVector
from .errors import BudgetError, ConfigurationError

ALGORITHM_CODES = {name: i for i, name in enumerate(ALGORITHMS)}

# upper bound on booleans materialized per evaluation chunk
_MASK_CELLS = 1 << 22

MaskHook = Callable[[np.ndarray, np.ndarray, np.ndarray], None]


def derive_seed(master: int, *keys: int) -> int:
    """Hash ``(master, *keys)`` into a fresh 64-bit seed."""
    state = np.random.SeedSequence([int(master) & (2**64 - 1), *map(int, keys)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def make_rng(seed: int, algorithm: str) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), ALGORITHM_CODES[algorithm]]))


def _check_players(game: Game, n_players: Optional[int]) -> int:
    n = game.n_players if n_players is None else int(n_players)
    if n != game.n_players:
        raise ConfigurationError(f"game has {game.n_players} players, caller asked for {n}")
    return n


def marginals(game: Game, masks: np.ndarray) -> np.ndarray:
    """``h[k, j] = v(masks[k] with j set) - v(masks[k] with j cleared)``.

    Costs ``2 * n_players`` evaluations per row.
    """
    masks = np.asarray(masks, dtype=bool)
    k, n = masks.shape
    out = np.empty((k, n))
    rows = max(1, _MASK_CELLS // (2 * n * n))
    eye = np.eye(n, dtype=bool)
    for start in range(0, k, rows):
        block = masks[start : start + rows]
        b = block.shape[0]
        tiled = np.broadcast_to(block[:, None, :], (b, n, n))
        present = (tiled | eye).reshape(b * n, n)
        absent = (tiled & ~eye).reshape(b * n, n)
        values = game.evaluate_batch(np.concatenate([present, absent]))
        out[start : start + b] = (values[: b * n] - values[b * n :]).reshape(b, n)
    return out


def bernoulli_masks(rng: np.random.Generator, q: np.ndarray, m: int, n: int) -> np.ndarray:
    """Boolean array ``(len(q), m, n)`` with independent Bernoulli(q[g]) entries."""
    q = np.asarray(q, dtype=np.float64)
    return rng.random((q.size, m, n)) < q[:, None, None]


def castro_sample(
    game: Game,
    n_players: Optional[int] = None,
    mc: int = 1,
    seed: int = 0,
    *,
    include_bias: bool = True,
) -> ShapleyVector:
    """Permutation sampling over ``mc`` random feature orders.

    Masks grow one feature at a time along each order, so one permutation
    costs ``n_players + 1`` evaluations.  With ``include_bias=False`` the
    bias slot (feature 0) is held present in every coalition, only
    features ``1..n`` are permuted and feature 0 is attributed zero.
    """
    n = _check_players(game, n_players)
    if mc < 1:
        raise BudgetError(f"castro needs M_c >= 1, got {mc}")
    rng = make_rng(seed, "castro")
    movers = np.arange(n) if include_bias else np.arange(1, n)
    p = movers.size
    if p == 0:
        raise ConfigurationError("no features left to permute")

    total = np.zeros(n)
    rows = max(1, _MASK_CELLS // ((p + 1) * n))
    done = 0
    while done < mc:
        b = min(rows, mc - done)
        perms = rng.permuted(np.broadcast_to(movers, (b, p)), axis=1)
        rank = np.empty_like(perms)
        np.put_along_axis(rank, perms - movers[0], np.broadcast_to(np.arange(p), (b, p)), axis=1)
        # step t holds the first t features of the order
        steps = np.arange(p + 1)[None, :, None]
        masks = np.zeros((b, p + 1, n), dtype=bool)
        masks[:, :, movers] = rank[:, None, :] < steps
        if not include_bias:
            masks[:, :, 0] = True
        values = game.evaluate_batch(masks.reshape(-1, n)).reshape(b, p + 1)
        diffs = np.diff(values, axis=1)
        total[movers] += np.take_along_axis(diffs, rank, axis=1).sum(axis=0)
        done += b

    return ShapleyVector(
        total / mc,
        algorithm="castro",
        seed=int(seed),
        model_evaluations=mc * (p + 1),
        marginal_samples_per_feature=mc,
        budget=SamplingBudget("castro", mc=mc),
    )


def _check_qm(algorithm: str, q: int, m: int):
    if q < 1 or m < 1:
        raise BudgetError(f"{algorithm} needs Q >= 1 and M >= 1, got Q={q}, M={m}")


def owen_sample(
    game: Game,
    n_players: Optional[int] = None,
    q: int = 1,
    m: int = 2,
    seed: int = 0,
    *,
    compat_normalization: bool = False,
    mask_hook: Optional[MaskHook] = None,
) -> ShapleyVector:
    """Owen sampling on the grid ``0, 1/q, ..., 1`` with ``m`` coalitions per point.

    One coalition is drawn per ``(grid point, repetition)`` and reused for
    every feature, with the feature's own bit overridden to present or
    absent.  ``mask_hook(grid, masks, None)`` sees the drawn masks.
    """
    n = _check_players(game, n_players)
    _check_qm("owen", q, m)
    rng = make_rng(seed, "owen")
    grid = np.arange(q + 1) / q
    masks = bernoulli_masks(rng, grid, m, n)
    if mask_hook is not None:
        mask_hook(grid, masks, None)
    h = marginals(game, masks.reshape(-1, n))
    samples = (q + 1) * m
    denom = q * m if compat_normalization else samples
    return ShapleyVector(
        h.sum(axis=0) / denom,
        algorithm="owen",
        seed=int(seed),
        model_evaluations=samples * 2 * n,
        marginal_samples_per_feature=samples,
        grid_points_visited=q + 1,
        budget=SamplingBudget("owen", q=q, m=m),
    )


def halved_owen_sample(
    game: Game,
    n_players: Optional[int] = None,
    q: int = 2,
    m: int = 2,
    seed: int = 0,
    *,
    compat_normalization: bool = False,
    mask_hook: Optional[MaskHook] = None,
) -> ShapleyVector:
    """Antithetic Owen sampling over ``q in {0, 1/Q, ..., <= 1/2}``.

    Each drawn coalition ``I`` is paired with its complement ``~I``; both
    marginal vectors are accumulated.  For even ``Q`` the midpoint 1/2 is
    its own mirror and its pair is kept as two independent-looking draws.
    ``mask_hook(grid, masks, complements)`` sees every pair.
    """
    n = _check_players(game, n_players)
    _check_qm("halved_owen", q, m)
    rng = make_rng(seed, "halved_owen")
    g = q // 2 + 1
    grid = np.arange(g) / q
    masks = bernoulli_masks(rng, grid, m, n)
    anti = ~masks
    if mask_hook is not None:
        mask_hook(grid, masks, anti)
    h = marginals(game, np.concatenate([masks.reshape(-1, n), anti.reshape(-1, n)]))
    samples = 2 * g * m
    denom = q * m if compat_normalization else samples
    return ShapleyVector(
        h.sum(axis=0) / denom,
        algorithm="halved_owen",
        seed=int(seed),
        model_evaluations=samples * 2 * n,
        marginal_samples_per_feature=samples,
        grid_points_visited=g,
        budget=SamplingBudget("halved_owen", q=q, m=m),
    )


def inner_marginal_mean(game: Game, q: float, m: int, seed: int = 0) -> np.ndarray:
    """Monte Carlo estimate of the expected marginal at a single ``q``.

    Averages ``m`` Bernoulli(q) coalitions exactly as one grid point of
    :func:`owen_sample` does; useful to check against the closed form.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if m < 1:
        raise BudgetError(f"need m >= 1, got {m}")
    rng = make_rng(seed, "owen")
    masks = bernoulli_masks(rng, np.array([q]), m, game.n_players)
    return marginals(game, masks.reshape(-1, game.n_players)).mean(axis=0)


def budget_to_params(algorithm: str, equivalent_samples: int, m_default: int = 2) -> SamplingBudget:
    """Translate an equivalent-sample budget into estimator parameters.

    Castro gets ``M_c = equivalent_samples``; the Owen variants get
    ``M = m_default`` and ``Q = equivalent_samples // m_default``.  When
    the budget is not divisible, ``Q`` is rounded down and the realized
    budget is ``budget.equivalent_samples``.
    """
    algorithm = algorithm.replace("-", "_")
    if algorithm == "castro":
        if equivalent_samples < 1:
            raise BudgetError(f"equivalent samples must be >= 1, got {equivalent_samples}")
        return SamplingBudget("castro", mc=int(equivalent_samples))
    if algorithm in ("owen", "halved_owen"):
        if m_default < 1:
            raise BudgetError(f"M must be >= 1, got {m_default}")
        q = int(equivalent_samples) // m_default
        if q < 1:
            raise BudgetError(
                f"{equivalent_samples} equivalent samples is below one grid step at M={m_default}"
            )
        return SamplingBudget(algorithm, q=q, m=m_default)
    if algorithm == "exact":
        return SamplingBudget("exact")
    raise ConfigurationError(f"unknown algorithm {algorithm!r}; valid: {', '.join(ALGORITHMS)}")


def estimate(
    game: Game,
    budget: SamplingBudget,
    seed: int = 0,
    *,
    compat_normalization: bool = False,
    castro_include_bias: bool = True,
    exact_config=None,
) -> ShapleyVector:
    """Dispatch to the estimator named by ``budget.kind``."""
    if budget.kind == "castro":
        return castro_sample(game, game.n_players, budget.mc, seed, include_bias=castro_include_bias)
    if budget.kind == "owen":
        return owen_sample(game, game.n_players, budget.q, budget.m, seed, compat_normalization=compat_normalization)
    if budget.kind == "halved_owen":
        return halved_owen_sample(
            game, game.n_players, budget.q, budget.m, seed, compat_normalization=compat_normalization
        )
    from .exact import DEFAULT_CONFIG, exact_shapley

    return exact_shapley(game, game.n_players, exact_config or DEFAULT_CONFIG)
