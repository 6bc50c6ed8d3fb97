"""
Command-line interface: one subcommand per pipeline step plus ``run``.

Exit codes: 0 on success, 1 when a step fails (``ERROR: stage '<name>'
failed: ...`` is printed), 2 for usage errors reported by argparse.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from boost.model import GbtModel
from core.config import DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from core.errors import ModelError, PipelineError, RadiofoxError
from core.io import dumps_json, load_config_file, write_json, write_text
from core.logger import Logger
from data import linter
from data.dataset import Dataset, load_csv, read_class_names, split_indices, write_csv
from data.models import SplitSpec
from data.synthetic import make_radiomic_dataset
from explain.shapley import DEFAULT_PERMUTATIONS, MAX_FEATURES_EXACT, explain_rows
from explain.summary import contributions_frame, summary_ranking
from forest.model import ForestModel
from foxopt.benchmarks import BENCHMARK_NAMES
from foxopt.compare import compare_optimizers
from foxopt.optimizer import FoxConfig, FoxRunner, random_search
from pipeline.models import PipelineConfig
from pipeline.runner import run_pipeline
from preprocess.gini import GiniRanking, importance_forest_config, rank_features_gini, select_top_k
from preprocess.normalize import apply_normalizer, fit_normalizer
from report.metrics import metrics
from tune.objective import fit_model
from tune.space import CONFIG_TYPES, baseline_config, default_space, load_space
from tune.tuner import tune


def load_model(path: str):
    """Read a forest or gbt model written by ``train``, ``tune`` or ``run``."""
    text = Path(path).read_text(encoding='utf-8')
    try:
        fmt = json.loads(text).get('format')
    except (json.JSONDecodeError, AttributeError) as e:
        raise ModelError(f"Invalid model file '{path}': {e}")
    if fmt == "radiofox.forest":
        return ForestModel.from_json_string(text)
    if fmt == "radiofox.gbt":
        return GbtModel.from_json_string(text)
    raise ModelError(f"Unknown model format {fmt!r} in '{path}'")


def _load_table(args, path: str) -> Dataset:
    classes = read_class_names(args.class_order_from, args.label) if getattr(args, 'class_order_from', None) else None
    return load_csv(path, args.label, class_names=classes)


def _load_for_model(model, path: str, label: str) -> Dataset:
    return load_csv(path, label, class_names=model.class_names).align_to(model.feature_names, model.class_names)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_make_dataset(args, logger: Logger) -> int:
    ds = make_radiomic_dataset(n_features=args.n_features, seed=args.seed)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, args.output, args.label)
    logger.print_status(f"Wrote {ds.n_rows} rows x {ds.n_features} features to {args.output}")
    return 0


def cmd_lint(args, logger: Logger) -> int:
    return linter.main([args.path, '--label', args.label])


def cmd_split(args, logger: Logger) -> int:
    ds = load_csv(args.input, args.label)
    spec = SplitSpec(test_fraction=args.test_fraction, seed=args.seed, stratified=not args.no_stratify)
    train_idx, test_idx = split_indices(ds, spec)
    for path, rows in ((args.train_output, train_idx), (args.test_output, test_idx)):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        write_csv(ds.subset(rows), path, args.label)
    if args.indices_output:
        write_json(args.indices_output, {'train': train_idx.tolist(), 'test': test_idx.tolist(),
                                         'split': spec.model_dump(mode='json')})
    logger.print_status(f"Split {ds.n_rows} rows into {len(train_idx)} train / {len(test_idx)} test")
    return 0


def cmd_rank_features(args, logger: Logger) -> int:
    ds = _load_table(args, args.input)
    cfg = importance_forest_config(args.seed).model_copy(update={'n_trees': args.trees})
    ranking = rank_features_gini(ds, cfg, n_jobs=args.jobs)
    write_text(args.output, ranking.to_csv_string())
    if args.json_output:
        write_text(args.json_output, ranking.to_json_string() + "\n")
    for rank, name in enumerate(ranking.ranked_names[:args.top_k], start=1):
        logger.print_status(f"{rank:>3}. {name}", "DEBUG")
    logger.print_status(f"Ranked {ds.n_features} features; wrote {args.output}")
    return 0


def cmd_preprocess(args, logger: Logger) -> int:
    train = _load_table(args, args.train)
    text = Path(args.ranking).read_text(encoding='utf-8')
    if args.ranking.endswith('.json'):
        ranking = GiniRanking.from_json_string(text)
    else:
        ranking = GiniRanking.from_csv_string(text)
    # A CSV ranking is stored in rank order.
    ranking = ranking.for_features(train.feature_names)
    k = min(args.top_k, train.n_features)
    params = fit_normalizer(select_top_k(train, ranking, k), args.normalizer)
    out = _ensure_dir(Path(args.output_dir))
    write_csv(apply_normalizer(select_top_k(train, ranking, k), params), str(out / "train.csv"), args.label)
    if args.test:
        test = _load_table(args, args.test).align_to(train.feature_names, train.class_names)
        write_csv(apply_normalizer(select_top_k(test, ranking, k), params), str(out / "test.csv"), args.label)
    write_text(out / "normalizer.json", params.to_json_string() + "\n")
    logger.print_status(f"Kept {k} features, {args.normalizer} normalization; wrote {out}")
    return 0


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _model_config(args):
    if args.config:
        data = load_config_file(args.config) or {}
        data.setdefault('seed', args.seed)
        try:
            return CONFIG_TYPES[args.model].model_validate(data)
        except ValidationError as e:
            raise RadiofoxError(f"Invalid {args.model} config '{args.config}': {e}")
    return baseline_config(args.model, args.seed)


def cmd_train(args, logger: Logger) -> int:
    ds = _load_table(args, args.input)
    cfg = _model_config(args)
    model = fit_model(args.model, ds, cfg, n_jobs=args.jobs)
    write_text(args.output, model.to_json_string() + "\n")
    train_acc = float(np.mean(model.predict(ds.features) == ds.labels))
    logger.print_status(f"Trained {args.model} on {ds.n_rows} rows (training accuracy {train_acc:.2f}); wrote {args.output}")
    return 0


def cmd_tune(args, logger: Logger) -> int:
    ds = _load_table(args, args.input)
    space = load_space(args.space) if args.space else default_space(args.model)
    if space.model_kind != args.model:
        raise RadiofoxError(f"Search space is for '{space.model_kind}', not '{args.model}'")
    fox_cfg = FoxConfig(pop_size=args.pop, max_iters=args.iters, seed=args.seed)
    result = tune(ds, space, fox_cfg, folds=args.folds, seed=args.seed, metric=args.metric,
                  n_jobs=args.jobs, logger=logger)
    write_text(args.output, result.to_json_string() + "\n")
    if args.model_output:
        model = fit_model(args.model, ds, result.config(), n_jobs=args.jobs)
        write_text(args.model_output, model.to_json_string() + "\n")
    logger.print_status(f"CV {args.metric}: baseline {result.baseline_cv_score:.4f}, tuned {result.best_cv_score:.4f}")
    return 0


def cmd_evaluate(args, logger: Logger) -> int:
    model = load_model(args.model)
    ds = _load_for_model(model, args.input, args.label)
    report = metrics(ds.labels, model.predict(ds.features), model.n_classes, list(model.class_names))
    write_text(args.output, report.to_json_string() + "\n")
    if args.confusion_output:
        write_text(args.confusion_output, report.confusion.to_csv_string(model.class_names))
    print(report.to_text(), end="")
    return 0


def cmd_explain(args, logger: Logger) -> int:
    model = load_model(args.model)
    ds = _load_for_model(model, args.input, args.label)
    count = ds.n_rows if args.rows is None else min(args.rows, ds.n_rows)
    explanations = explain_rows(model, ds.features[:count], args.max_exact, allow_sampling=not args.no_sampling,
                                n_permutations=args.permutations, seed=args.seed, n_jobs=args.jobs)
    out = _ensure_dir(Path(args.output_dir))
    frame = contributions_frame(explanations, model.feature_names, model.class_names)
    write_text(out / "contributions.csv", frame.to_csv(index=False, lineterminator='\n', float_format='%.17g'))
    write_text(out / "contributions.json",
               dumps_json({'rows': [dict(row=i, **e.to_dict()) for i, e in enumerate(explanations)]}))
    summary = summary_ranking(explanations, model.feature_names)
    write_text(out / "summary.csv", summary.to_csv_string())
    write_text(out / "summary.txt", summary.to_text_bars())
    print(summary.to_text_bars(top=args.top), end="")
    return 0


def cmd_benchmark_fox(args, logger: Logger) -> int:
    seeds = args.seed_list if args.seed_list else list(range(args.seeds))
    budget = args.pop * (args.iters + 1)
    optimizers = [('fox', FoxRunner(pop_size=args.pop, n_jobs=args.jobs)), ('random_search', random_search)]
    table = compare_optimizers(args.functions, optimizers, seeds, budget, dim=args.dim)
    write_text(args.output, table.to_csv_string())
    if args.json_output:
        write_text(args.json_output, table.to_json_string() + "\n")
    print(table.to_text(), end="")
    wins = table.wins('fox', 'random_search')
    logger.print_status(f"FOX beats random search on {len(wins)} of {len(args.functions)} benchmark(s)")
    return 0


def cmd_run(args, logger: Logger) -> int:
    data = load_config_file(args.config) if args.config else {}
    data = dict(data or {})
    overrides = {
        'input': args.input, 'output_dir': args.output_dir, 'seed': args.seed,
        'fox_pop_size': args.pop, 'fox_max_iters': args.iters,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_tune:
        data['tune'] = False
    if args.paper_order:
        data['leakage_mode'] = "paper-order"
    try:
        cfg = PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise RadiofoxError(f"Invalid pipeline config: {e}")
    status = run_pipeline(cfg, logger=logger, n_jobs=args.jobs)
    logger.print_status(f"Best model: {status.best_model}")
    return 0


COMMANDS = {
    'make-dataset': cmd_make_dataset,
    'lint': cmd_lint,
    'split': cmd_split,
    'rank-features': cmd_rank_features,
    'preprocess': cmd_preprocess,
    'train': cmd_train,
    'tune': cmd_tune,
    'evaluate': cmd_evaluate,
    'explain': cmd_explain,
    'benchmark-fox': cmd_benchmark_fox,
    'run': cmd_run,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_jobs(p):
    p.add_argument('--jobs', type=int, default=None, metavar='N',
                   help='Worker threads (default: RADIOFOX_N_JOBS or 1); results do not depend on it')


def _add_table(p, flag='--input'):
    p.add_argument(flag, required=True, help='CSV feature table')
    p.add_argument('--label', default='label', help='Label column name (default: label)')


def _add_class_order(p):
    p.add_argument('--class-order-from', metavar='CSV',
                   help='Index classes in the order they first appear in this table (e.g. the unsplit dataset)')


def parse_args(argv: List[str]) -> argparse.Namespace:
    """Parse command line arguments.

    Args:
        argv: Command line arguments (excluding script name)

    Returns:
        Parsed arguments namespace
    """
    parser = argparse.ArgumentParser(
        prog='run-pipeline.py',
        description="radiofox: Gini-selected forest and gradient-boosting classifiers tuned with FOX",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Full pipeline on the bundled synthetic dataset
  python run-pipeline.py run --output-dir out/

  # Full pipeline from a JSON config
  python run-pipeline.py run --config cfg.json

  # Rank features of a table
  python run-pipeline.py rank-features --input d.csv --label label --top-k 50 --output ranking.csv

  # Compare FOX with random search on the benchmark suite
  python run-pipeline.py benchmark-fox --dim 10 --seeds 10 --output fox.csv
""")
    sub = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    p = sub.add_parser('make-dataset', help='Write the bundled synthetic radiomic dataset as CSV')
    p.add_argument('--output', required=True, help='CSV path to write')
    p.add_argument('--n-features', type=int, default=107, help='Number of feature columns (default: 107)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Generator seed (default: {DEFAULT_SEED})')
    p.add_argument('--label', default='label', help='Label column name (default: label)')

    p = sub.add_parser('lint', help='Validate a CSV feature table')
    p.add_argument('path', help='CSV feature table')
    p.add_argument('--label', default='label', help='Label column name (default: label)')

    p = sub.add_parser('split', help='Stratified train/test split of a CSV table')
    _add_table(p)
    p.add_argument('--test-fraction', type=float, default=0.2, help='Test fraction (default: 0.2)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Split seed (default: {DEFAULT_SEED})')
    p.add_argument('--no-stratify', action='store_true', help='Split without preserving class proportions')
    p.add_argument('--train-output', required=True, help='CSV path for the training rows')
    p.add_argument('--test-output', required=True, help='CSV path for the test rows')
    p.add_argument('--indices-output', help='Optional JSON file recording the row indices')

    p = sub.add_parser('rank-features', help='Rank features by Gini importance')
    _add_table(p)
    _add_class_order(p)
    p.add_argument('--top-k', type=int, default=50, help='Number of top features to list (default: 50)')
    p.add_argument('--trees', type=int, default=200, help='Trees of the importance forest (default: 200)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Forest seed (default: {DEFAULT_SEED})')
    p.add_argument('--output', required=True, help='Ranking CSV path')
    p.add_argument('--json-output', help='Optional ranking JSON path')
    _add_jobs(p)

    p = sub.add_parser('preprocess', help='Keep the top-k ranked features and normalize')
    p.add_argument('--train', required=True, help='Training CSV (normalizer statistics come from it)')
    p.add_argument('--test', help='Optional test CSV transformed with the same statistics')
    p.add_argument('--label', default='label', help='Label column name (default: label)')
    _add_class_order(p)
    p.add_argument('--ranking', required=True, help='Ranking CSV or JSON written by rank-features')
    p.add_argument('--top-k', type=int, default=50, help='Features to keep (default: 50)')
    p.add_argument('--normalizer', choices=['zscore', 'minmax'], default='zscore', help='Normalization (default: zscore)')
    p.add_argument('--output-dir', required=True, help='Directory for train.csv, test.csv and normalizer.json')

    p = sub.add_parser('train', help='Fit a forest or gbt model')
    _add_table(p)
    _add_class_order(p)
    p.add_argument('--model', choices=sorted(CONFIG_TYPES), required=True, help='Model kind')
    p.add_argument('--config', help='JSON or YAML model config (default: baseline settings)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Model seed (default: {DEFAULT_SEED})')
    p.add_argument('--output', required=True, help='Model JSON path')
    _add_jobs(p)

    p = sub.add_parser('tune', help='Tune a model kind with FOX against cross-validation')
    _add_table(p)
    _add_class_order(p)
    p.add_argument('--model', choices=sorted(CONFIG_TYPES), required=True, help='Model kind')
    p.add_argument('--space', help='JSON or YAML search space (default: built-in space)')
    p.add_argument('--pop', type=int, default=20, help='FOX population (default: 20)')
    p.add_argument('--iters', type=int, default=50, help='FOX iterations (default: 50)')
    p.add_argument('--folds', type=int, default=5, help='Cross-validation folds (default: 5)')
    p.add_argument('--metric', choices=['accuracy', 'f1_weighted'], default='accuracy', help='CV metric (default: accuracy)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Seed (default: {DEFAULT_SEED})')
    p.add_argument('--output', required=True, help='Tuning result JSON path')
    p.add_argument('--model-output', help='Also fit the tuned config on the whole table and write it here')
    _add_jobs(p)

    p = sub.add_parser('evaluate', help='Test metrics of a model on a CSV table')
    p.add_argument('--model', required=True, help='Model JSON path')
    _add_table(p)
    p.add_argument('--output', required=True, help='Metrics JSON path')
    p.add_argument('--confusion-output', help='Optional confusion-matrix CSV path')

    p = sub.add_parser('explain', help='Shapley contributions of a model on CSV rows')
    p.add_argument('--model', required=True, help='Model JSON path')
    _add_table(p)
    p.add_argument('--rows', type=int, help='Explain only the first N rows')
    p.add_argument('--max-exact', type=int, default=MAX_FEATURES_EXACT,
                   help=f'Exact enumeration limit on used features (default: {MAX_FEATURES_EXACT})')
    p.add_argument('--permutations', type=int, default=DEFAULT_PERMUTATIONS,
                   help=f'Permutations above the exact limit (default: {DEFAULT_PERMUTATIONS})')
    p.add_argument('--no-sampling', action='store_true', help='Fail instead of sampling above the exact limit')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Sampling seed (default: {DEFAULT_SEED})')
    p.add_argument('--top', type=int, default=20, help='Features shown in the printed bar chart (default: 20)')
    p.add_argument('--output-dir', required=True, help='Directory for contribution and summary files')
    _add_jobs(p)

    p = sub.add_parser('benchmark-fox', help='Compare FOX with random search on benchmark functions')
    p.add_argument('--functions', nargs='+', choices=BENCHMARK_NAMES, default=list(BENCHMARK_NAMES),
                   help='Benchmark functions (default: all)')
    p.add_argument('--dim', type=int, default=10, help='Dimension (default: 10)')
    p.add_argument('--pop', type=int, default=30, help='FOX population (default: 30)')
    p.add_argument('--iters', type=int, default=500, help='FOX iterations; budget = pop x (iters + 1) (default: 500)')
    p.add_argument('--seeds', type=int, default=10, help='Number of seeds 0..N-1 (default: 10)')
    p.add_argument('--seed-list', type=int, nargs='+', help='Explicit seeds (overrides --seeds)')
    p.add_argument('--output', required=True, help='Comparison CSV path')
    p.add_argument('--json-output', help='Optional comparison JSON path')
    _add_jobs(p)

    p = sub.add_parser('run', help='Run the full pipeline and write an artifact bundle')
    p.add_argument('--config', help='JSON or YAML pipeline config')
    p.add_argument('--input', help='CSV feature table (default: bundled synthetic dataset)')
    p.add_argument('--output-dir', help=f'Bundle directory (default: {DEFAULT_OUTPUT_DIR})')
    p.add_argument('--seed', type=int, help=f'Seed (default: {DEFAULT_SEED})')
    p.add_argument('--pop', type=int, help='FOX population for tuning (default: 20)')
    p.add_argument('--iters', type=int, help='FOX iterations for tuning (default: 50)')
    p.add_argument('--no-tune', action='store_true', help='Fit baselines only')
    p.add_argument('--paper-order', '--pre-split', dest='paper_order', action='store_true',
                   help='Rank, select and normalize on all rows before splitting')
    _add_jobs(p)

    return parser.parse_args(argv)


def main(argv: List[str], logger: Optional[Logger] = None) -> int:
    """Main entry point.

    Returns:
        Exit code: 0 for success, 1 for a failed step (usage errors exit 2
        from argparse)
    """
    args = parse_args(argv)
    logger = logger or Logger()
    try:
        return COMMANDS[args.command](args, logger)
    except PipelineError as e:
        print(f"ERROR: {e}")
        return 1
    except (RadiofoxError, ValidationError, OSError) as e:
        print(f"ERROR: {PipelineError(args.command, e)}")
        return 1
