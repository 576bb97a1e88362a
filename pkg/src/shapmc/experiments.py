"""Accuracy, variance and saliency studies over a model and a dataset.

All randomness flows from integer master seeds through
:func:`~shapmc.samplers.derive_seed`: example selection uses its own
stream, and each estimator run is keyed by (master seed, algorithm,
example row, budget).  Results therefore do not depend on evaluation
order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import ALGORITHMS, baseline_vector, make_game
from .errors import BudgetError, ConfigurationError
from .exact import DEFAULT_CONFIG, ExactConfig, exact_shapley
from .models import DatasetTable, MlpModel, mlp_forward, random_mlp
from .samplers import ALGORITHM_CODES, budget_to_params, derive_seed, estimate

SAMPLING_ALGORITHMS = ("castro", "owen", "halved_owen")
_EXAMPLE_STREAM = 0x5E1EC7


def fmt_real(v: float) -> str:
    """17 significant digits, '.' decimal point; parses back to the same float."""
    return format(float(v), ".17g")


class MseRow(NamedTuple):
    algorithm: str
    equivalent_samples: int
    example: int
    mse: float


@dataclass(frozen=True)
class MseReport:
    rows: tuple
    examples: tuple
    seeds: tuple

    def mean_mse(self) -> dict:
        """Mean MSE over examples for each ``(algorithm, equivalent_samples)``."""
        acc: dict = {}
        for r in self.rows:
            acc.setdefault((r.algorithm, r.equivalent_samples), []).append(r.mse)
        return {k: float(np.mean(v)) for k, v in acc.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "equivalent_samples", "example", "mse"])
        for r in self.rows:
            w.writerow([r.algorithm, r.equivalent_samples, r.example, fmt_real(r.mse)])
        return buf.getvalue()


class VarianceRow(NamedTuple):
    algorithm: str
    step: int
    avg_running_std: float


@dataclass(frozen=True)
class VarianceReport:
    rows: tuple
    examples: tuple

    def curve(self, algorithm: str) -> dict:
        return {r.step: r.avg_running_std for r in self.rows if r.algorithm == algorithm}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "step", "avg_running_std"])
        for r in self.rows:
            w.writerow([r.algorithm, r.step, fmt_real(r.avg_running_std)])
        return buf.getvalue()


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray
    predicted_class: int
    algorithm: str
    budget: object
    row: int
    feature_names: tuple = ()
    width: Optional[int] = None
    height: Optional[int] = None
    diagnostics: dict = field(default_factory=dict, compare=False)


def _check_algorithms(algorithms):
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {a!r}; valid: {', '.join(ALGORITHMS)}")


def predicted_class(model: MlpModel, x) -> int:
    return int(np.argmax(mlp_forward(model, x)))


def sample_examples(n_rows: int, count: int, seed: int) -> tuple:
    """Draw ``count`` distinct row indices, sorted, from a dedicated stream."""
    if count < 1 or count > n_rows:
        raise ConfigurationError(f"cannot draw {count} examples from {n_rows} rows")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _EXAMPLE_STREAM]))
    return tuple(int(i) for i in np.sort(rng.choice(n_rows, size=count, replace=False)))


def _game_for_row(model, dataset, row, baseline, class_index):
    x = dataset.row(row)
    cls = predicted_class(model, x) if class_index is None else class_index
    return make_game(model, x, baseline_vector(baseline, x.size), cls), cls


def run_mse_experiment(
    model: MlpModel,
    dataset: DatasetTable,
    example_count: int,
    budget_grid: Sequence[int],
    seeds: Sequence[int],
    *,
    algorithms: Sequence[str] = SAMPLING_ALGORITHMS,
    baseline=None,
    class_index: Optional[int] = None,
    exact_config: ExactConfig = DEFAULT_CONFIG,
    compat_normalization: bool = False,
    example_seed: Optional[int] = None,
) -> MseReport:
    """Mean squared error of each estimator against exact Shapley values.

    ``example_count`` rows are sampled without replacement (seeded by
    ``example_seed``, default ``seeds[0]``).  For every algorithm, budget
    and example the MSE over features is averaged across ``seeds``.
    ``class_index=None`` explains the predicted class of each example.
    """
    _check_algorithms(algorithms)
    if not seeds:
        raise ConfigurationError("need at least one seed")
    if not budget_grid:
        raise ConfigurationError("budget grid is empty")
    exact_config.check(dataset.n_features)
    examples = sample_examples(len(dataset), example_count, seeds[0] if example_seed is None else example_seed)

    per_example = {}
    for row in examples:
        game, _ = _game_for_row(model, dataset, row, baseline, class_index)
        truth = exact_shapley(game, game.n_players, exact_config).attributions
        per_example[row] = (game, truth)

    rows = []
    for algo in algorithms:
        for budget in budget_grid:
            params = budget_to_params(algo, budget)
            for row in examples:
                game, truth = per_example[row]
                errs = []
                for s in seeds:
                    run_seed = derive_seed(s, ALGORITHM_CODES[algo], row, budget)
                    est = estimate(game, params, run_seed, compat_normalization=compat_normalization)
                    errs.append(np.mean((est.attributions - truth) ** 2))
                rows.append(MseRow(algo, int(budget), row, float(np.mean(errs))))
    return MseReport(tuple(rows), examples, tuple(int(s) for s in seeds))


def running_std(estimates: np.ndarray) -> np.ndarray:
    """Population std over the first ``k + 1`` estimates, for each ``k`` and feature.

    ``estimates`` has shape ``(steps, features)``.
    """
    estimates = np.asarray(estimates, dtype=np.float64)
    return np.array([estimates[: k + 1].std(axis=0) for k in range(estimates.shape[0])])


def run_variance_experiment(
    model: MlpModel,
    dataset: DatasetTable,
    example_count: int,
    step_grid: Sequence[int],
    seed: int,
    *,
    algorithms: Sequence[str] = SAMPLING_ALGORITHMS,
    baseline=None,
    class_index: Optional[int] = None,
    compat_normalization: bool = False,
) -> VarianceReport:
    """Running standard deviation of estimates as the budget grows.

    For each example and algorithm one estimate is made per step size.
    At step ``k`` the std of each feature's estimates over steps
    ``<= k`` is taken, averaged over features, then over examples.
    """
    _check_algorithms(algorithms)
    steps = [int(s) for s in step_grid]
    if len(steps) < 2:
        raise ConfigurationError("step grid needs at least 2 points")
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ConfigurationError("step grid must be strictly increasing")
    if any(s < 2 or s % 2 for s in steps):
        raise BudgetError("step sizes must be even and >= 2 (Owen variants use M = 2)")
    examples = sample_examples(len(dataset), example_count, seed)

    rows = []
    for algo in algorithms:
        params = [budget_to_params(algo, s) for s in steps]
        curves = []
        for row in examples:
            game, _ = _game_for_row(model, dataset, row, baseline, class_index)
            est = np.array(
                [
                    estimate(
                        game,
                        p,
                        derive_seed(seed, ALGORITHM_CODES[algo], row, s),
                        compat_normalization=compat_normalization,
                    ).attributions
                    for p, s in zip(params, steps)
                ]
            )
            curves.append(running_std(est).mean(axis=1))
        avg = np.mean(curves, axis=0)
        rows.extend(VarianceRow(algo, s, float(v)) for s, v in zip(steps, avg))
    return VarianceReport(tuple(rows), examples)


def run_saliency(
    model: MlpModel,
    dataset: DatasetTable,
    row: int,
    algorithm: str,
    budget: int,
    seed: int,
    *,
    baseline=None,
    compat_normalization: bool = False,
    exact_config: ExactConfig = DEFAULT_CONFIG,
) -> SaliencyMap:
    """Attributions of one row towards the model's predicted class."""
    _check_algorithms([algorithm])
    x = dataset.row(row)
    game, cls = _game_for_row(model, dataset, row, baseline, None)
    params = budget_to_params(algorithm, budget)
    est = estimate(game, params, seed, compat_normalization=compat_normalization, exact_config=exact_config)
    return SaliencyMap(
        values=est.attributions,
        predicted_class=cls,
        algorithm=algorithm,
        budget=params,
        row=row,
        feature_names=dataset.feature_names,
        diagnostics={"model_evaluations": est.model_evaluations, "seed": est.seed, "n_features": x.size},
    )


def make_benchmark(
    n_features: int,
    seed: int,
    n_rows: int = 200,
    hidden: Sequence[int] = (13, 9),
    n_classes: int = 2,
    weight_scale: float = 2.0,
) -> tuple:
    """Seeded random MLP and dataset standing in for a trained tabular model.

    Column 0 is the constant bias input 1.0; the remaining columns are
    standard normal.  Hidden layers default to 13 and 9 sigmoid units with
    a softmax output.  ``weight_scale`` sets how far the sigmoids are
    driven into saturation; large values give near step-function models.
    """
    if n_features < 2:
        raise ConfigurationError("benchmark needs at least 2 features")
    model = random_mlp([n_features, *hidden, n_classes], seed, scale=weight_scale)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xDA7A]))
    x = rng.standard_normal((n_rows, n_features))
    x[:, 0] = 1.0
    labels = np.argmax(mlp_forward(model, x), axis=1)
    names = tuple(f"x{i}" for i in range(n_features))
    return model, DatasetTable(names, x, labels)
