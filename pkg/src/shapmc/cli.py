"""Command-line interface.

Subcommands::

    shapmc attribute   --model M --data D --row N --algo owen --samples 2000
    shapmc experiment mse       --model M --data D --examples 30 --budgets 100,2000
    shapmc experiment variance  --model M --data D --examples 50 --steps 2:200:2
    shapmc saliency    --model M --data D --row N --width 28 --height 28 --out map
    shapmc benchmark   --features 15 --seed 0 --model-out m.json --data-out d.csv

Exit status: 0 success, 2 usage or parse error, 3 budget or capability error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import SamplingBudget, baseline_vector, make_game
from .errors import BudgetError, ShapleyError
from .exact import ExactConfig
from .experiments import (
    SAMPLING_ALGORITHMS,
    make_benchmark,
    predicted_class,
    run_mse_experiment,
    run_saliency,
    run_variance_experiment,
)
from .export import attribution_csv, saliency_csv, saliency_ppm
from .models import dump_dataset, dump_model, load_dataset, load_model
from .samplers import budget_to_params, estimate

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3
CLI_ALGORITHMS = ("exact", "castro", "owen", "halved-owen")


class UsageError(ShapleyError):
    pass


def _int_list(text: str) -> list:
    """``"1,2,3"`` or ``"start:stop:step"`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (int(t) for t in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list or start:stop:step, got {text!r}") from None


def _class_arg(text: str):
    if text == "predicted":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--class takes an index or 'predicted', got {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        # newline="" keeps '\n' on every platform so outputs are byte-stable
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_inputs(args):
    model = load_model(_read(args.model))
    dataset = load_dataset(_read(args.data))
    if dataset.n_features != model.n_inputs:
        raise UsageError(f"dataset has {dataset.n_features} features but model takes {model.n_inputs} inputs")
    baseline = None
    if args.baseline != "zero":
        baseline = load_dataset(_read(args.baseline)).row(0)
        baseline_vector(baseline, dataset.n_features)
    return model, dataset, baseline


def _budget(args) -> SamplingBudget:
    algo = args.algo.replace("-", "_")
    overrides = [v is not None for v in (args.q, args.m, args.mc)]
    if any(overrides) and args.samples is not None:
        raise UsageError("--q/--m/--mc cannot be combined with --samples")
    if algo == "exact":
        return SamplingBudget("exact")
    if any(overrides):
        if algo == "castro":
            if args.mc is None or args.q is not None or args.m is not None:
                raise UsageError("castro takes --mc (not --q/--m)")
            return SamplingBudget("castro", mc=args.mc)
        if args.mc is not None:
            raise UsageError(f"{args.algo} takes --q and --m (not --mc)")
        return SamplingBudget(algo, q=args.q if args.q is not None else 1000, m=args.m if args.m is not None else 2)
    return budget_to_params(algo, 2000 if args.samples is None else args.samples)


def _diag(**items) -> None:
    print(" ".join(f"{k}={v}" for k, v in items.items() if v is not None), file=sys.stderr)


def cmd_attribute(args) -> int:
    model, dataset, baseline = _load_inputs(args)
    x = dataset.row(args.row)
    cls = predicted_class(model, x) if args.class_index is None else args.class_index
    game = make_game(model, x, baseline_vector(baseline, x.size), cls)
    budget = _budget(args)
    result = estimate(
        game,
        budget,
        args.seed,
        compat_normalization=args.compat_normalization,
        castro_include_bias=not args.castro_fixed_bias,
        exact_config=ExactConfig(max_features=args.max_features),
    )
    indices = list(range(x.size))
    if args.exclude_bias:
        indices = indices[1:]
    _write(args.out, attribution_csv(result.attributions[indices], dataset.feature_names, indices))
    _diag(
        algorithm=result.algorithm,
        class_index=cls,
        M_c=budget.mc,
        Q=budget.q,
        M=budget.m,
        equivalent_samples=budget.equivalent_samples,
        model_evaluations=result.model_evaluations,
        marginal_samples_per_feature=result.marginal_samples_per_feature,
        seed=result.seed,
    )
    return EXIT_OK


def _algos(text: str) -> list:
    names = [a.strip().replace("-", "_") for a in text.split(",") if a.strip()]
    bad = [a for a in names if a not in SAMPLING_ALGORITHMS]
    if bad:
        raise UsageError(f"unknown algorithm(s) {bad}; valid: castro, owen, halved-owen")
    return names


def cmd_experiment(args) -> int:
    model, dataset, baseline = _load_inputs(args)
    algos = _algos(args.algos)
    if args.kind == "mse":
        seeds = args.seeds if args.seeds else [args.seed]
        report = run_mse_experiment(
            model,
            dataset,
            args.examples,
            args.budgets,
            seeds,
            algorithms=algos,
            baseline=baseline,
            class_index=args.class_index,
            exact_config=ExactConfig(max_features=args.max_features),
            compat_normalization=args.compat_normalization,
        )
        _write(args.out, report.to_csv())
        means = report.mean_mse()
        for (algo, budget), v in sorted(means.items()):
            _diag(algorithm=algo, equivalent_samples=budget, mean_mse=f"{v:.6e}")
    else:
        report = run_variance_experiment(
            model,
            dataset,
            args.examples,
            args.steps,
            args.seed,
            algorithms=algos,
            baseline=baseline,
            class_index=args.class_index,
            compat_normalization=args.compat_normalization,
        )
        _write(args.out, report.to_csv())
        for algo in algos:
            curve = report.curve(algo)
            last = max(curve)
            _diag(algorithm=algo, step=last, avg_running_std=f"{curve[last]:.6e}")
    _diag(examples=",".join(map(str, report.examples)), seed=args.seed)
    return EXIT_OK


def cmd_saliency(args) -> int:
    model, dataset, baseline = _load_inputs(args)
    algo = args.algo.replace("-", "_")
    samples = 12 if args.samples is None else args.samples
    smap = run_saliency(
        model,
        dataset,
        args.row,
        algo,
        samples,
        args.seed,
        baseline=baseline,
        compat_normalization=args.compat_normalization,
        exact_config=ExactConfig(max_features=args.max_features),
    )
    values = smap.values[1:] if args.exclude_bias else smap.values
    width, height = args.width, args.height
    if width is None and height is None:
        width, height = values.size, 1
    elif width is None or height is None or width * height != values.size:
        raise UsageError(f"--width {width} x --height {height} does not match {values.size} attributions")
    out = Path(args.out)
    _write(str(out.with_suffix(".csv")), saliency_csv(values, width, height))
    _write(str(out.with_suffix(".ppm")), saliency_ppm(values, width, height))
    _diag(
        algorithm=algo,
        predicted_class=smap.predicted_class,
        Q=smap.budget.q,
        M=smap.budget.m,
        M_c=smap.budget.mc,
        model_evaluations=smap.diagnostics["model_evaluations"],
        seed=args.seed,
    )
    return EXIT_OK


def cmd_benchmark(args) -> int:
    model, dataset = make_benchmark(args.features, args.seed, n_rows=args.rows)
    _write(args.model_out, dump_model(model) + "\n")
    _write(args.data_out, dump_dataset(dataset))
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--data", required=True, help="dataset CSV file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", default="zero", help="'zero' or a CSV whose first row is the baseline")
    p.add_argument("--class", dest="class_index", type=_class_arg, default=None, help="class index or 'predicted'")
    p.add_argument("--compat-normalization", action="store_true", help="divide Owen sums by Q*M as in the pseudo-code")
    p.add_argument("--max-features", type=int, default=25, help="cap for exact enumeration")


def _budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, help="equivalent samples (Castro M_c; Owen Q*M with M=2)")
    p.add_argument("--q", type=int, help="Owen grid resolution Q")
    p.add_argument("--m", type=int, help="Owen draws per grid point M")
    p.add_argument("--mc", type=int, help="Castro permutations M_c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapmc", description="Exact and sampled Shapley values for MLP models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attribute", help="attribute one dataset row")
    _common(p)
    _budget_flags(p)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--algo", choices=CLI_ALGORITHMS, default="halved-owen")
    p.add_argument("--out", default="-")
    p.add_argument("--exclude-bias", action="store_true", help="omit feature 0 from the output")
    p.add_argument("--castro-fixed-bias", action="store_true", help="keep feature 0 present instead of permuting it")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("experiment", help="MSE or variance study")
    p.add_argument("kind", choices=("mse", "variance"))
    _common(p)
    p.add_argument("--examples", type=int, default=50)
    p.add_argument("--budgets", type=_int_list, default=[2000], help="equivalent-sample grid for mse")
    p.add_argument("--steps", type=_int_list, default=list(range(2, 201, 2)), help="step grid for variance")
    p.add_argument("--seeds", type=_int_list, default=None, help="seed list for mse (default: --seed)")
    p.add_argument("--algos", default="castro,owen,halved-owen")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("saliency", help="saliency map of one row as CSV + PPM")
    _common(p)
    _budget_flags(p)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--algo", choices=CLI_ALGORITHMS, default="halved-owen")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--exclude-bias", action="store_true", help="drop feature 0 before shaping the image")
    p.add_argument("--out", required=True, help="output path; .csv and .ppm suffixes are added")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("benchmark", help="write a seeded random model and dataset")
    p.add_argument("--features", type=int, default=15)
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True)
    p.add_argument("--data-out", required=True)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"shapmc: budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ShapleyError, IndexError) as exc:
        print(f"shapmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
