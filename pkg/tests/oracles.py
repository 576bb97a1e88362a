"""Independent reference computations used by the tests.

Nothing here imports the code paths it is used to check: the permutation
oracle walks all orderings with scalar game calls, and the random game
factories build plain lookup tables.
"""

import itertools
import math

import numpy as np

from shapmc.core import Game


def permutation_shapley(game: Game) -> np.ndarray:
    """Average marginal contribution over all n! orderings (scalar calls)."""
    n = game.n_players
    cache = {}

    def v(members):
        key = frozenset(members)
        if key not in cache:
            mask = np.zeros(n, dtype=bool)
            mask[list(key)] = True
            cache[key] = game.evaluate(mask)
        return cache[key]

    total = np.zeros(n)
    for order in itertools.permutations(range(n)):
        present = []
        prev = v(present)
        for j in order:
            present.append(j)
            cur = v(present)
            total[j] += cur - prev
            prev = cur
    return total / math.factorial(n)


def subset_expectation(game: Game, j: int, q: float) -> float:
    """E[v(E + j) - v(E)] with every other player in E independently w.p. q."""
    n = game.n_players
    others = [i for i in range(n) if i != j]
    total = 0.0
    for bits in itertools.product([False, True], repeat=len(others)):
        mask = np.zeros(n, dtype=bool)
        mask[others] = bits
        k = sum(bits)
        p = q**k * (1 - q) ** (len(others) - k)
        with_j = mask.copy()
        with_j[j] = True
        total += p * (game.evaluate(with_j) - game.evaluate(mask))
    return total


def random_table_game(rng: np.random.Generator, n: int) -> Game:
    return Game.from_table(rng.normal(size=2**n), name=f"random{n}")


def symmetric_table_game(rng: np.random.Generator, n: int, i: int, j: int) -> Game:
    """Random game invariant under swapping players i and j."""
    idx = np.arange(2**n)
    bi = (idx >> i) & 1
    bj = (idx >> j) & 1
    swapped = idx & ~((1 << i) | (1 << j)) | (bi << j) | (bj << i)
    t = rng.normal(size=2**n)
    return Game.from_table(0.5 * (t + t[swapped]), name="symmetric")


def null_player_game(rng: np.random.Generator, n: int, j: int) -> Game:
    """Random game where player j never changes the worth."""
    idx = np.arange(2**n)
    t = rng.normal(size=2**n)
    return Game.from_table(t[idx & ~(1 << j)], name="null")
