"""
End-to-end pipeline: load, split, rank/select/normalize, fit baselines,
tune, evaluate on the held-out rows, explain the best model and write the
artifact bundle.

Every random decision derives from ``PipelineConfig.seed``; the thread
count only changes how fast the bundle is produced, never its bytes.
"""
from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import logfire
from pydantic import ValidationError

from core.errors import PipelineError, RadiofoxError
from core.io import dumps_json, write_text
from core.logger import Logger
from core.status import PipelineStatus
from data.dataset import Dataset, load_csv, split_indices
from data.models import SplitSpec
from data.synthetic import make_radiomic_dataset
from explain.shapley import explain_rows
from explain.summary import contributions_frame, summary_ranking
from foxopt.optimizer import FoxConfig
from pipeline.models import MODEL_NAMES, PipelineConfig
from preprocess.gini import GiniRanking, importance_forest_config, rank_features_gini, select_top_k
from preprocess.normalize import NormalizerParams, apply_normalizer, fit_normalizer
from report.metrics import metrics
from report.tables import comparison_table
from tune.objective import fit_model
from tune.space import baseline_config, default_space
from tune.tuner import tune


class Bundle:
    """Writes artifact files under one output directory and lists them in the status."""

    def __init__(self, root: str, status: PipelineStatus):
        self.root = Path(root)
        self.status = status

    def write(self, relative_path: str, text: str) -> Path:
        self.status.add_artifact(relative_path)
        return write_text(self.root / relative_path, text if text.endswith("\n") else text + "\n")


def prepare_features(
    data: Dataset,
    fit_rows,
    top_k: int,
    normalizer: str,
    importance_trees: int = 200,
    seed: int = 0,
    n_jobs: int | None = None,
) -> Tuple[Dataset, GiniRanking, NormalizerParams]:
    """Rank features on ``data[fit_rows]``, keep the top k and normalize.

    The ranking and normalizer statistics only see *fit_rows*; the returned
    dataset holds every row of *data*.
    """
    reference = data.subset(fit_rows)
    forest_cfg = importance_forest_config(seed).model_copy(update={'n_trees': importance_trees})
    ranking = rank_features_gini(reference, forest_cfg, n_jobs=n_jobs)
    k = min(top_k, data.n_features)
    params = fit_normalizer(select_top_k(reference, ranking, k), normalizer)
    return apply_normalizer(select_top_k(data, ranking, k), params), ranking, params


def write_explanations(bundle: Bundle, folder: str, model_name: str, explanations, test: Dataset,
                       row_ids: List[int]) -> None:
    """Contribution and summary files of one explained model under *folder*."""
    frame = contributions_frame(explanations, test.feature_names, test.class_names, row_ids)
    bundle.write(f"{folder}/contributions.csv", frame.to_csv(index=False, lineterminator='\n', float_format='%.17g'))
    bundle.write(f"{folder}/contributions.json", dumps_json(
        {'model': model_name, 'rows': [dict(row=r, **e.to_dict()) for r, e in zip(row_ids, explanations)]}))
    summary = summary_ranking(explanations, test.feature_names)
    bundle.write(f"{folder}/summary.csv", summary.to_csv_string())
    bundle.write(f"{folder}/summary.txt", summary.to_text_bars())


def run_pipeline(cfg: PipelineConfig, logger: Optional[Logger] = None, n_jobs: int | None = None) -> PipelineStatus:
    """Run the whole workflow and write the bundle to ``cfg.output_dir``.

    Raises:
        PipelineError: naming the failed stage; the manifest is still written.
    """
    logger = logger or Logger()
    status = PipelineStatus(config=cfg.model_dump(mode='json'))
    seed = cfg.seed
    status.seeds = {'split': seed, 'importance_forest': seed, 'models': seed, 'cv_folds': seed,
                    'fox': seed, 'explain': seed}
    if cfg.input is None:
        status.seeds['synthetic_dataset'] = seed
    bundle = Bundle(cfg.output_dir, status)

    @contextmanager
    def stage(name: str):
        logger.print_status(f"Stage: {name}")
        with logfire.span('stage {stage}', stage=name):
            try:
                yield
            except (RadiofoxError, ValidationError, OSError) as e:
                status.record(name, success=False, error_text=str(e))
                logger.print_status(f"Stage '{name}' failed: {e}", "ERROR")
                raise PipelineError(name, e) from e
        status.record(name)

    models: Dict[str, object] = {}
    try:
        logger.print_section("radiofox pipeline")
        with stage("load"):
            if cfg.input:
                data = load_csv(cfg.input, cfg.label_column)
            else:
                data = make_radiomic_dataset(n_features=cfg.synthetic_features, seed=seed)
            logger.print_status(f"{data.n_rows} rows, {data.n_features} features, {data.n_classes} classes")

        with stage("split"):
            train_idx, test_idx = split_indices(
                data, SplitSpec(test_fraction=cfg.test_fraction, seed=seed, stratified=cfg.stratified))
            status.split = {'train': train_idx.tolist(), 'test': test_idx.tolist()}

        with stage("preprocess"):
            fit_rows = train_idx if cfg.leakage_mode == "safe" else list(range(data.n_rows))
            prepared, ranking, params = prepare_features(
                data, fit_rows, cfg.top_k, cfg.normalizer, cfg.importance_trees, seed, n_jobs)
            train, test = prepared.subset(train_idx), prepared.subset(test_idx)
            status.selected_features = list(prepared.feature_names)
            bundle.write("ranking.csv", ranking.to_csv_string())
            bundle.write("ranking.json", ranking.to_json_string())
            bundle.write("normalizer.json", params.to_json_string())

        for kind in cfg.models:
            with stage(f"train_{kind}"):
                models[f"{kind}_baseline"] = fit_model(kind, train, baseline_config(kind, seed), n_jobs)
            if not cfg.tune:
                continue
            with stage(f"tune_{kind}"):
                space = getattr(cfg, f"{kind}_space") or default_space(kind)
                fox_cfg = FoxConfig(pop_size=cfg.fox_pop_size, max_iters=cfg.fox_max_iters, seed=seed)
                result = tune(train, space, fox_cfg, folds=cfg.folds, seed=seed,
                              metric=cfg.tune_metric, n_jobs=n_jobs, logger=logger)
                models[f"{kind}_tuned"] = fit_model(kind, train, result.config(), n_jobs)
                status.tuning[kind] = {
                    'best_cv_score': result.best_cv_score,
                    'baseline_cv_score': result.baseline_cv_score,
                    'best_config': result.best_config,
                    'baseline_kept': result.baseline_kept,
                    'evaluations': result.evaluations,
                }
                bundle.write(f"tuning/{kind}.json", result.to_json_string())

        with stage("evaluate"):
            reports = []
            for name in [n for n in MODEL_NAMES if n in models]:
                model = models[name]
                report = metrics(test.labels, model.predict(test.features), test.n_classes,
                                 list(test.class_names))
                reports.append((name, report))
                status.metrics[name] = {'accuracy': report.accuracy, 'precision': report.weighted_precision,
                                        'recall': report.weighted_recall, 'f1': report.weighted_f1}
                bundle.write(f"models/{name}.json", model.to_json_string())
                bundle.write(f"metrics/{name}.json", report.to_json_string())
                bundle.write(f"confusion/{name}.csv", report.confusion.to_csv_string(test.class_names))
                logger.print_status(f"{name}: test accuracy {report.accuracy:.2f}")
            table = comparison_table(reports)
            status.best_model = table.best_model()
            bundle.write("comparison.csv", table.to_csv_string())
            bundle.write("comparison.json", table.to_json_string())
            bundle.write("comparison.txt", table.to_text())

        if cfg.explain:
            with stage("explain"):
                count = test.n_rows if cfg.explain_rows is None else min(cfg.explain_rows, test.n_rows)
                row_ids: List[int] = test_idx[:count].tolist()
                # The best model goes to explain/, each tuned model to explain/<name>/.
                targets = [(status.best_model, "explain")]
                targets += [(name, f"explain/{name}") for name in MODEL_NAMES
                            if name.endswith("_tuned") and name in models]
                done: Dict[str, list] = {}
                for name, folder in targets:
                    if name not in done:
                        done[name] = explain_rows(models[name], test.features[:count], cfg.max_features_exact,
                                                  allow_sampling=True, n_permutations=cfg.n_permutations,
                                                  seed=seed, n_jobs=n_jobs)
                        status.explained.append(name)
                    write_explanations(bundle, folder, name, done[name], test, row_ids)
    finally:
        status.add_artifact("manifest.json")
        try:
            write_text(Path(cfg.output_dir) / "manifest.json", dumps_json(status.to_dict()))
        except OSError as e:
            logger.print_status(f"Failed to write manifest.json: {e}", "WARNING")

    logger.print_status(f"Bundle written to {cfg.output_dir}")
    return status
