"""Unit tests for pipeline.runner and the pipeline.cli subcommands."""

import contextlib
import io
import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from pydantic import ValidationError

from core.config import SLOW_TESTS
from core.errors import PipelineError
from core.logger import Logger
from data.models import SplitSpec
from pipeline.cli import load_model, main
from pipeline.models import MODEL_NAMES, PipelineConfig
from pipeline.runner import run_pipeline

FAST = {
    'top_k': 6,
    'importance_trees': 10,
    'fox_pop_size': 3,
    'fox_max_iters': 1,
    'folds': 3,
    'forest_space': {'model_kind': 'forest', 'params': [
        {'name': 'n_trees', 'kind': 'integer', 'lo': 2, 'hi': 6},
        {'name': 'max_depth', 'kind': 'integer', 'lo': 1, 'hi': 4},
    ]},
    'gbt_space': {'model_kind': 'gbt', 'params': [
        {'name': 'n_rounds', 'kind': 'integer', 'lo': 2, 'hi': 4},
        {'name': 'max_depth', 'kind': 'integer', 'lo': 1, 'hi': 3},
    ]},
    'explain_rows': 2,
    'max_features_exact': 6,
    'n_permutations': 10,
    'seed': 11,
}


def _run_cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(argv, logger=Logger(quiet=True))
    return code, out.getvalue()


def _read_tree(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob('*')) if p.is_file()}


class PipelineTestCase(unittest.TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.data = str(self.tmp / "d.csv")
        code, _ = _run_cli(['make-dataset', '--output', self.data, '--n-features', '12', '--seed', '3'])
        self.assertEqual(code, 0)

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, name, **overrides):
        path = self.tmp / name
        path.write_text(json.dumps(dict(FAST, **overrides)), encoding='utf-8')
        return str(path)


class TestRunPipeline(PipelineTestCase):

    def test_bundle_and_manifest(self):
        cfg = PipelineConfig.model_validate(dict(FAST, input=self.data, output_dir=str(self.tmp / "out")))
        status = run_pipeline(cfg, logger=Logger(quiet=True), n_jobs=1)
        self.assertTrue(status.succeeded)
        self.assertIn(status.best_model, MODEL_NAMES)

        manifest = json.loads((self.tmp / "out" / "manifest.json").read_text(encoding='utf-8'))
        self.assertEqual(manifest['format'], "radiofox.manifest")
        self.assertEqual([s['stage'] for s in manifest['stages']],
                         ['load', 'split', 'preprocess', 'train_forest', 'tune_forest',
                          'train_gbt', 'tune_gbt', 'evaluate', 'explain'])
        self.assertTrue(all(s['success'] for s in manifest['stages']))
        self.assertEqual(len(manifest['selected_features']), 6)
        self.assertEqual(sorted(manifest['metrics']), sorted(MODEL_NAMES))
        for kind in ('forest', 'gbt'):
            tuning = manifest['tuning'][kind]
            self.assertGreaterEqual(tuning['best_cv_score'], tuning['baseline_cv_score'])
        for artifact in manifest['artifacts']:
            self.assertTrue((self.tmp / "out" / artifact).is_file(), artifact)
        self.assertIn("explain/summary.csv", manifest['artifacts'])
        self.assertEqual(manifest['explained'][0], status.best_model)
        self.assertEqual(sorted(set(manifest['explained']) - {status.best_model}),
                         sorted({'forest_tuned', 'gbt_tuned'} - {status.best_model}))
        for name in ('forest_tuned', 'gbt_tuned'):
            for file in ('contributions.csv', 'contributions.json', 'summary.csv', 'summary.txt'):
                self.assertIn(f"explain/{name}/{file}", manifest['artifacts'])
            document = json.loads((self.tmp / "out" / "explain" / name / "contributions.json").read_text(encoding='utf-8'))
            self.assertEqual(document['model'], name)
            self.assertEqual([r['row'] for r in document['rows']], manifest['split']['test'][:2])
        self.assertEqual(load_model(str(self.tmp / "out" / "models" / "gbt_tuned.json")).kind, "gbt")

    def test_split_keeps_every_row_once(self):
        cfg = PipelineConfig.model_validate(dict(FAST, models=['forest'], tune=False, explain=False,
                                                 output_dir=str(self.tmp / "out")))
        status = run_pipeline(cfg, logger=Logger(quiet=True))
        rows = status.split['train'] + status.split['test']
        self.assertEqual(sorted(rows), list(range(75)))
        self.assertEqual(len(status.split['test']), 15)
        self.assertEqual(status.seeds['synthetic_dataset'], 11)

    def test_failed_stage_still_writes_manifest(self):
        bad = self.tmp / "bad.csv"
        bad.write_text("a,b,label\n1.0,oops,x\n2.0,3.0,y\n", encoding='utf-8')
        cfg = PipelineConfig.model_validate(dict(FAST, input=str(bad), output_dir=str(self.tmp / "out")))
        with self.assertRaises(PipelineError) as ctx:
            run_pipeline(cfg, logger=Logger(quiet=True))
        self.assertEqual(ctx.exception.stage, "load")
        manifest = json.loads((self.tmp / "out" / "manifest.json").read_text(encoding='utf-8'))
        self.assertEqual(len(manifest['stages']), 1)
        self.assertFalse(manifest['stages'][0]['success'])
        self.assertTrue(manifest['stages'][0]['error_text'])

    def test_validation_error_inside_stage_is_recorded(self):
        cfg = PipelineConfig.model_validate(dict(FAST, input=self.data, output_dir=str(self.tmp / "out")))

        def invalid_split(data, spec):
            return SplitSpec(test_fraction=1.5)

        with mock.patch('pipeline.runner.split_indices', side_effect=invalid_split):
            with self.assertRaises(PipelineError) as ctx:
                run_pipeline(cfg, logger=Logger(quiet=True))
        self.assertEqual(ctx.exception.stage, "split")
        manifest = json.loads((self.tmp / "out" / "manifest.json").read_text(encoding='utf-8'))
        self.assertEqual([s['success'] for s in manifest['stages']], [True, False])

    def test_missing_input_rejected_by_config(self):
        with self.assertRaises(ValueError):
            PipelineConfig(input=str(self.tmp / "missing.csv"))


class TestRunCommand(PipelineTestCase):

    def test_thread_count_does_not_change_bundle(self):
        config = self.write_config("cfg.json", models=['forest'])
        out = str(self.tmp / "out")
        argv = ['run', '--config', config, '--input', self.data, '--output-dir', out]
        self.assertEqual(_run_cli(argv + ['--jobs', '1'])[0], 0)
        first = _read_tree(out)
        self.assertEqual(_run_cli(argv + ['--jobs', '3'])[0], 0)
        self.assertEqual(_read_tree(out), first)
        self.assertIn("manifest.json", first)
        self.assertIn("metrics/forest_tuned.json", first)

    def test_paper_order_mode(self):
        config = self.write_config("cfg.json", models=['forest'], explain=False)
        for flag in ('--paper-order', '--pre-split'):
            out = self.tmp / flag.strip('-')
            code, _ = _run_cli(['run', '--config', config, '--output-dir', str(out), '--no-tune', flag])
            self.assertEqual(code, 0, flag)
            manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
            self.assertEqual(manifest['config']['leakage_mode'], "paper-order")
            self.assertFalse(manifest['config']['tune'])
            self.assertEqual(manifest['best_model'], "forest_baseline")
        self.assertEqual((self.tmp / "paper-order" / "ranking.csv").read_bytes(),
                         (self.tmp / "pre-split" / "ranking.csv").read_bytes())

    def test_leakage_mode_alias_in_config(self):
        self.assertEqual(PipelineConfig(leakage_mode="pre-split").leakage_mode, "paper-order")
        self.assertEqual(PipelineConfig(leakage_mode="paper-order").leakage_mode, "paper-order")
        with self.assertRaises(ValidationError):
            PipelineConfig(leakage_mode="late")

    def test_bad_input_exits_with_stage_error(self):
        bad = self.tmp / "bad.csv"
        bad.write_text("a,label\n1.0,x\noops,y\n", encoding='utf-8')
        out = self.tmp / "out"
        code, text = _run_cli(['run', '--input', str(bad), '--output-dir', str(out), '--no-tune'])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'load' failed", text)
        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        self.assertEqual(manifest['stages'][0]['stage'], "load")
        self.assertFalse(manifest['stages'][0]['success'])

    def test_invalid_config_value(self):
        config = self.write_config("cfg.json", top_k=0)
        code, text = _run_cli(['run', '--config', config, '--output-dir', str(self.tmp / "out")])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'run' failed", text)

    def test_usage_error_exits_2(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(['train', '--input', self.data])
        self.assertEqual(ctx.exception.code, 2)


class TestStepCommands(PipelineTestCase):

    def test_lint(self):
        self.assertEqual(_run_cli(['lint', self.data])[0], 0)
        bad = self.tmp / "bad.csv"
        bad.write_text("a,a,label\n1.0,2.0,x\n", encoding='utf-8')
        code, text = _run_cli(['lint', str(bad)])
        self.assertEqual(code, 1)
        self.assertIn("FAIL", text)

    def test_composed_steps_match_run(self):
        seed = '11'
        d = str(self.tmp)
        steps = [
            ['split', '--input', self.data, '--seed', seed, '--train-output', f'{d}/train.csv',
             '--test-output', f'{d}/test.csv', '--indices-output', f'{d}/split.json'],
            ['rank-features', '--input', f'{d}/train.csv', '--class-order-from', self.data,
             '--trees', '10', '--seed', seed, '--output', f'{d}/ranking.csv'],
            ['preprocess', '--train', f'{d}/train.csv', '--test', f'{d}/test.csv',
             '--class-order-from', self.data, '--ranking', f'{d}/ranking.csv', '--top-k', '6',
             '--output-dir', f'{d}/prep'],
            ['train', '--input', f'{d}/prep/train.csv', '--class-order-from', self.data,
             '--model', 'forest', '--seed', seed, '--output', f'{d}/forest.json'],
            ['evaluate', '--model', f'{d}/forest.json', '--input', f'{d}/prep/test.csv',
             '--output', f'{d}/metrics.json'],
        ]
        for argv in steps:
            code, text = _run_cli(argv)
            self.assertEqual(code, 0, f"{argv[0]}: {text}")

        config = self.write_config("cfg.json", models=['forest'], explain=False)
        out = self.tmp / "out"
        self.assertEqual(_run_cli(['run', '--config', config, '--input', self.data,
                                   '--output-dir', str(out), '--no-tune'])[0], 0)
        self.assertEqual((self.tmp / "forest.json").read_bytes(),
                         (out / "models" / "forest_baseline.json").read_bytes())
        self.assertEqual((self.tmp / "metrics.json").read_bytes(),
                         (out / "metrics" / "forest_baseline.json").read_bytes())
        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        indices = json.loads((self.tmp / "split.json").read_text(encoding='utf-8'))
        self.assertEqual(indices['test'], manifest['split']['test'])

    def test_tune_and_explain(self):
        space = self.tmp / "space.json"
        space.write_text(json.dumps(FAST['forest_space']), encoding='utf-8')
        code, text = _run_cli(['tune', '--input', self.data, '--model', 'forest', '--space', str(space),
                               '--pop', '3', '--iters', '1', '--folds', '3', '--seed', '2',
                               '--output', str(self.tmp / "tune.json"),
                               '--model-output', str(self.tmp / "tuned.json")])
        self.assertEqual(code, 0, text)
        result = json.loads((self.tmp / "tune.json").read_text(encoding='utf-8'))
        self.assertGreaterEqual(result['best_cv_score'], result['baseline_cv_score'])

        code, text = _run_cli(['explain', '--model', str(self.tmp / "tuned.json"), '--input', self.data,
                               '--rows', '2', '--permutations', '10', '--top', '3',
                               '--output-dir', str(self.tmp / "explain")])
        self.assertEqual(code, 0, text)
        self.assertLessEqual(len(text.splitlines()), 3)
        for name in ("contributions.csv", "contributions.json", "summary.csv", "summary.txt"):
            self.assertTrue((self.tmp / "explain" / name).is_file(), name)

    def test_tune_rejects_mismatched_space(self):
        space = self.tmp / "space.json"
        space.write_text(json.dumps(FAST['gbt_space']), encoding='utf-8')
        code, text = _run_cli(['tune', '--input', self.data, '--model', 'forest', '--space', str(space),
                               '--output', str(self.tmp / "tune.json")])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'tune' failed", text)

    def test_invalid_split_fraction_is_a_stage_error(self):
        code, text = _run_cli(['split', '--input', self.data, '--test-fraction', '1.5',
                               '--train-output', str(self.tmp / "train.csv"),
                               '--test-output', str(self.tmp / "test.csv")])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'split' failed", text)

    def test_invalid_population_is_a_stage_error(self):
        code, text = _run_cli(['tune', '--input', self.data, '--model', 'forest', '--pop', '1',
                               '--output', str(self.tmp / "tune.json")])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'tune' failed", text)
        code, text = _run_cli(['benchmark-fox', '--functions', 'sphere', '--pop', '1', '--seeds', '3',
                               '--output', str(self.tmp / "fox.csv")])
        self.assertEqual(code, 1)
        self.assertIn("ERROR: stage 'benchmark-fox' failed", text)

    def test_evaluate_unknown_model_format(self):
        model = self.tmp / "model.json"
        model.write_text('{"format": "other"}', encoding='utf-8')
        code, text = _run_cli(['evaluate', '--model', str(model), '--input', self.data,
                               '--output', str(self.tmp / "m.json")])
        self.assertEqual(code, 1)
        self.assertIn("Unknown model format", text)

    def test_benchmark_fox(self):
        csv_path = self.tmp / "fox.csv"
        code, text = _run_cli(['benchmark-fox', '--functions', 'sphere', '--dim', '2', '--pop', '4',
                               '--iters', '2', '--seeds', '3', '--output', str(csv_path),
                               '--json-output', str(self.tmp / "fox.json")])
        self.assertEqual(code, 0)
        self.assertIn("sphere", text)
        self.assertTrue(csv_path.read_text(encoding='utf-8').startswith("benchmark"))


@unittest.skipUnless(SLOW_TESTS, "set RADIOFOX_SLOW_TESTS=1 to run the full-size pipeline")
class TestFullPipeline(unittest.TestCase):

    def test_default_run_is_reproducible(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "out")
            argv = ['run', '--output-dir', out, '--pop', '10', '--iters', '15']
            self.assertEqual(_run_cli(argv + ['--jobs', '1'])[0], 0)
            first = _read_tree(out)
            self.assertEqual(_run_cli(argv + ['--jobs', '4'])[0], 0)
            self.assertEqual(_read_tree(out), first)
            manifest = json.loads(first['manifest.json'])
            for kind in ('forest', 'gbt'):
                self.assertGreaterEqual(manifest['tuning'][kind]['best_cv_score'],
                                        manifest['tuning'][kind]['baseline_cv_score'])


if __name__ == '__main__':
    unittest.main()
