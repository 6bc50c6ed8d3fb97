"""Unit tests for boost.objective, boost.tree and boost.model."""

import unittest

import numpy as np

from core.errors import ModelError
from data.dataset import Dataset
from boost.model import GbtConfig, GbtModel, fit_gbt, log_prior, predict, predict_proba
from boost.objective import (leaf_weight, multiclass_log_loss, softmax, softmax_gradients,
                             split_gain)
from boost.tree import RegressionNode, build_regression_tree
from forest.tree import midpoint


def _blobs(seed=0, n_per_class=12, n_classes=3, n_features=4):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_classes), n_per_class)
    features = rng.normal(size=(len(labels), n_features))
    features[:, 0] += labels * 10.0
    return Dataset(features, labels, [f"f{j}" for j in range(n_features)],
                   [f"c{k}" for k in range(n_classes)])


def _xor_dataset():
    corners = [((-1.0, -1.0), 0, 12), ((1.0, 1.0), 0, 8), ((-1.0, 1.0), 1, 9), ((1.0, -1.0), 1, 11)]
    features = np.concatenate([np.tile(xy, (count, 1)) for xy, _, count in corners])
    labels = np.concatenate([np.full(count, label) for _, label, count in corners])
    return Dataset(features, labels, ["x", "y"], ["same", "differ"])


class TestObjective(unittest.TestCase):

    def test_gradients_match_finite_differences(self):
        z = np.array([0.3, -1.2, 2.0, 0.1])
        eps = 1e-6
        for y in range(4):
            g, h = softmax_gradients(z, y)
            for k in range(4):
                step = np.zeros(4)
                step[k] = eps
                numeric_g = (multiclass_log_loss(z + step, [y]) - multiclass_log_loss(z - step, [y])) / (2 * eps)
                self.assertAlmostEqual(g[k], numeric_g, places=6)
                numeric_h = (softmax_gradients(z + step, y)[0][k] - softmax_gradients(z - step, y)[0][k]) / (2 * eps)
                self.assertAlmostEqual(h[k], numeric_h, places=6)

    def test_gradients_at_random_logits(self):
        rng = np.random.default_rng(8)
        eps = 1e-5
        for _ in range(20):
            z = rng.normal(scale=2.0, size=5)
            y = int(rng.integers(0, 5))
            g, h = softmax_gradients(z, y)
            for k in range(5):
                step = np.zeros(5)
                step[k] = eps
                numeric_g = (multiclass_log_loss(z + step, [y]) - multiclass_log_loss(z - step, [y])) / (2 * eps)
                numeric_h = (softmax_gradients(z + step, y)[0][k] - softmax_gradients(z - step, y)[0][k]) / (2 * eps)
                self.assertLess(abs(g[k] - numeric_g), 1e-5 * max(abs(g[k]), 1e-3))
                self.assertLess(abs(h[k] - numeric_h), 1e-5 * max(h[k], 1e-3))

    def test_softmax_is_stable(self):
        p = softmax(np.array([1000.0, 1000.0]))
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_gradients_reject_bad_input(self):
        with self.assertRaises(ModelError):
            softmax_gradients([0.0, np.nan], 0)
        with self.assertRaises(ModelError):
            softmax_gradients([0.0, 1.0], 2)

    def test_split_gain_by_hand(self):
        self.assertAlmostEqual(split_gain(2.0, 1.0, -2.0, 1.0, 1.0, 0.0), 2.0)
        self.assertAlmostEqual(split_gain(2.0, 1.0, -2.0, 1.0, 1.0, 0.5), 1.5)

    def test_leaf_weight(self):
        self.assertEqual(leaf_weight(2.0, 3.0, 1.0), -0.5)
        self.assertEqual(leaf_weight(1.0, 0.0, 0.0), 0.0)


class TestRegressionTree(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(5)
        self.X = rng.normal(size=(30, 3)).round(1)
        self.g = rng.normal(size=30)
        self.h = rng.uniform(0.1, 0.3, size=30)

    def test_root_split_is_exhaustive_maximum(self):
        tree = build_regression_tree(self.X, self.g, self.h, [0, 1, 2], max_depth=1,
                                     min_child_weight=0.0, reg_lambda=1.0, gamma=0.0, learning_rate=1.0)
        self.assertFalse(tree.is_leaf)

        def gain(f, t):
            left = self.X[:, f] <= t
            return split_gain(self.g[left].sum(), self.h[left].sum(),
                              self.g[~left].sum(), self.h[~left].sum(), 1.0, 0.0)

        candidates = []
        for f in range(3):
            values = np.unique(self.X[:, f])
            candidates += [gain(f, midpoint(a, b)) for a, b in zip(values[:-1], values[1:])]
        self.assertAlmostEqual(gain(tree.feature, tree.threshold), max(candidates), places=10)

    def test_every_split_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(31)

        def gain(X, g, h, f, t):
            left = X[:, f] <= t
            return split_gain(g[left].sum(), h[left].sum(), g[~left].sum(), h[~left].sum(), 1.0, 0.0)

        def check(node, X, g, h, rows, depth):
            self.assertEqual(node.cover, len(rows))
            Xn, gn, hn = X[rows], g[rows], h[rows]
            gains = [gain(Xn, gn, hn, f, midpoint(a, b)) for f in range(X.shape[1])
                     for a, b in zip(np.unique(Xn[:, f])[:-1], np.unique(Xn[:, f])[1:])]
            if node.is_leaf:
                if depth < 6 and gains:
                    self.assertLessEqual(max(gains), 1e-12)
                return
            self.assertEqual(node.left.cover + node.right.cover, node.cover)
            self.assertAlmostEqual(gain(Xn, gn, hn, node.feature, node.threshold), max(gains), places=10)
            goes_left = X[rows, node.feature] <= node.threshold
            check(node.left, X, g, h, rows[goes_left], depth + 1)
            check(node.right, X, g, h, rows[~goes_left], depth + 1)

        for _ in range(200):
            n, m = int(rng.integers(2, 31)), int(rng.integers(1, 5))
            X = rng.integers(0, 6, size=(n, m)).astype(float)
            g = rng.normal(size=n)
            h = rng.uniform(0.05, 0.25, size=n)
            tree = build_regression_tree(X, g, h, range(m), max_depth=6, min_child_weight=0.0,
                                         reg_lambda=1.0, gamma=0.0, learning_rate=1.0)
            check(tree, X, g, h, np.arange(n), 0)

    def test_leaf_weights_are_scaled_newton_steps(self):
        tree = build_regression_tree(self.X, self.g, self.h, [0, 1, 2], max_depth=1,
                                     min_child_weight=0.0, reg_lambda=1.0, gamma=0.0, learning_rate=0.3)
        left = self.X[:, tree.feature] <= tree.threshold
        expected = -0.3 * self.g[left].sum() / (self.h[left].sum() + 1.0)
        self.assertAlmostEqual(tree.left.weight, expected, places=12)

    def test_large_gamma_keeps_a_single_leaf(self):
        tree = build_regression_tree(self.X, self.g, self.h, [0, 1, 2], max_depth=4,
                                     min_child_weight=0.0, reg_lambda=1.0, gamma=1e6, learning_rate=1.0)
        self.assertTrue(tree.is_leaf)
        self.assertAlmostEqual(tree.weight, -self.g.sum() / (self.h.sum() + 1.0))

    def test_min_child_weight_stops_growth(self):
        tree = build_regression_tree(self.X, self.g, self.h, [0, 1, 2], max_depth=4,
                                     min_child_weight=100.0, reg_lambda=1.0, gamma=0.0, learning_rate=1.0)
        self.assertTrue(tree.is_leaf)

    def test_vectorized_prediction_matches_rows(self):
        tree = build_regression_tree(self.X, self.g, self.h, [0, 2], max_depth=3,
                                     min_child_weight=0.0, reg_lambda=1.0, gamma=0.0, learning_rate=1.0)
        expected = [tree.predict_row(row) for row in self.X]
        np.testing.assert_array_equal(tree.predict(self.X), expected)
        self.assertTrue(all(node.feature in (None, 0, 2) for node in tree.iter_nodes()))
        self.assertEqual(RegressionNode.from_dict(tree.to_dict()).to_dict(), tree.to_dict())


class TestGbtModel(unittest.TestCase):

    def test_fits_separable_training_data(self):
        ds = _blobs()
        model = fit_gbt(ds, GbtConfig(n_rounds=20, max_depth=3, seed=1))
        self.assertEqual(model.predict(ds.features).tolist(), ds.labels.tolist())
        self.assertEqual(model.n_rounds, 20)
        self.assertLess(model.loss_history[-1], model.loss_history[0])

    def test_fits_xor(self):
        ds = _xor_dataset()
        cfg = GbtConfig(n_rounds=50, max_depth=3, reg_lambda=1.0, learning_rate=0.3,
                        subsample=1.0, colsample=1.0, seed=0)
        model = fit_gbt(ds, cfg)
        self.assertEqual(model.predict(ds.features).tolist(), ds.labels.tolist())
        self.assertLess(model.loss_history[9], model.loss_history[0])

    def test_loss_history_matches_decision_function(self):
        ds = _blobs(seed=2)
        model = fit_gbt(ds, GbtConfig(n_rounds=5, seed=0))
        self.assertAlmostEqual(model.loss_history[-1],
                               multiclass_log_loss(model.decision_function(ds.features), ds.labels), places=12)

    def test_base_score_is_log_prior(self):
        labels = np.array([0, 0, 0, 1])
        np.testing.assert_allclose(log_prior(labels, 3), np.log([0.75, 0.25, 1e-12]))

    def test_absent_class_is_never_predicted(self):
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=(10, 2)), [0, 1] * 5, ["a", "b"], ["x", "y", "absent"])
        model = fit_gbt(ds, GbtConfig(n_rounds=3, seed=0))
        self.assertTrue(np.all(model.predict(rng.normal(size=(20, 2))) != 2))

    def test_thread_count_does_not_change_model(self):
        ds = _blobs(seed=3)
        cfg = GbtConfig(n_rounds=6, max_depth=3, subsample=0.7, colsample=0.5, seed=9)
        self.assertEqual(fit_gbt(ds, cfg, n_jobs=1).to_json_string(),
                         fit_gbt(ds, cfg, n_jobs=3).to_json_string())

    def test_document_round_trip_preserves_predictions(self):
        ds = _blobs(seed=4)
        model = fit_gbt(ds, GbtConfig(n_rounds=4, seed=2))
        restored = GbtModel.from_json_string(model.to_json_string())
        np.testing.assert_array_equal(restored.decision_function(ds.features),
                                      model.decision_function(ds.features))
        self.assertEqual(restored.config, model.config)

    def test_single_row_helpers(self):
        ds = _blobs(seed=6)
        model = fit_gbt(ds, GbtConfig(n_rounds=2, seed=0))
        row = ds.features[0]
        self.assertAlmostEqual(float(predict_proba(model, row).sum()), 1.0)
        self.assertEqual(predict(model, [row]).tolist(), model.predict(row[None, :]).tolist())

    def test_single_class_rejected(self):
        ds = Dataset(np.zeros((3, 1)), [0, 0, 0], ["a"], ["x", "y"])
        with self.assertRaises(ModelError):
            fit_gbt(ds)

    def test_invalid_config(self):
        with self.assertRaises(ValueError):
            GbtConfig(learning_rate=0.0)
        with self.assertRaises(ValueError):
            GbtConfig(subsample=1.5)


if __name__ == '__main__':
    unittest.main()
