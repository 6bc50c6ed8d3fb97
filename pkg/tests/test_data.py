"""Unit tests for data.dataset, data.linter and data.synthetic."""

import os
import tempfile
import unittest

import numpy as np

from core.errors import DatasetError
from data import linter
from data.dataset import (Dataset, class_distribution, load_csv, read_class_names, split,
                          split_indices, write_csv)
from data.linter import LintIssue, lint_table
from data.models import SplitSpec
from data.synthetic import COHORT_COUNTS, make_radiomic_dataset, radiomic_feature_names


def _write(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    return path


class TestLoadCsv(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_classes_indexed_by_first_appearance(self):
        path = _write(self.tmp.name, "d.csv", "a,label,b\n1,SCLC,2\n3,NSCLC,4\n5,SCLC,6\n")
        ds = load_csv(path, "label")
        self.assertEqual(ds.feature_names, ("a", "b"))
        self.assertEqual(ds.class_names, ("SCLC", "NSCLC"))
        self.assertEqual(ds.labels.tolist(), [0, 1, 0])
        self.assertEqual(ds.features.tolist(), [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    def test_explicit_class_order_comes_first(self):
        path = _write(self.tmp.name, "d.csv", "a,label\n1,x\n2,y\n")
        ds = load_csv(path, "label", class_names=["z", "y"])
        self.assertEqual(ds.class_names, ("z", "y", "x"))
        self.assertEqual(ds.labels.tolist(), [2, 1])

    def test_non_numeric_cell_names_row_and_column(self):
        path = _write(self.tmp.name, "d.csv", "a,b,label\n1,2,x\n3,oops,y\n")
        with self.assertRaises(DatasetError) as ctx:
            load_csv(path, "label")
        self.assertIn("Row 2", str(ctx.exception))
        self.assertIn("'b'", str(ctx.exception))

    def test_non_finite_cell_rejected(self):
        path = _write(self.tmp.name, "d.csv", "a,label\nnan,x\n1,y\n")
        with self.assertRaises(DatasetError):
            load_csv(path, "label")

    def test_missing_label_column(self):
        path = _write(self.tmp.name, "d.csv", "a,b\n1,2\n")
        with self.assertRaises(DatasetError) as ctx:
            load_csv(path, "label")
        self.assertIn("Label column 'label' not found", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(DatasetError):
            load_csv(os.path.join(self.tmp.name, "absent.csv"))

    def test_duplicate_feature_names(self):
        path = _write(self.tmp.name, "d.csv", "a,a,label\n1,2,x\n")
        with self.assertRaises(DatasetError):
            load_csv(path, "label")

    def test_header_only_table_is_empty(self):
        path = _write(self.tmp.name, "d.csv", "a,label\n")
        with self.assertRaises(DatasetError):
            load_csv(path, "label")

    def test_write_then_load_is_exact(self):
        ds = make_radiomic_dataset(n_features=9, seed=3)
        path = os.path.join(self.tmp.name, "out.csv")
        write_csv(ds, path)
        self.assertEqual(load_csv(path, class_names=ds.class_names), ds)
        first_seen = [ds.class_names[k] for k in dict.fromkeys(ds.labels.tolist())]
        self.assertEqual(read_class_names(path), first_seen)


class TestLintTable(unittest.TestCase):

    def test_clean_table_has_no_issues(self):
        self.assertEqual(lint_table(["a", "label"], [["1.5", "x"], ["2", "y"]], "label"), [])

    def test_short_row_reported(self):
        issues = lint_table(["a", "b", "label"], [["1", "x"]], "label")
        self.assertEqual(len(issues), 1)
        self.assertEqual(issues[0].row, 1)
        self.assertIn("fields", issues[0].message)

    def test_ragged_lines_in_file_reported(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = _write(tmp, "ragged.csv", "a,b,label\n1,2,x\n3,y\n4,5,6,z\n7,,w\n")
            header, rows = linter.read_table(path)
            self.assertEqual(header, ["a", "b", "label"])
            issues = lint_table(header, rows, "label")
            self.assertEqual([(i.row, i.message) for i in issues if "fields" in i.message],
                             [(2, "Row has 2 fields, expected 3"), (3, "Row has 4 fields, expected 3")])
            self.assertEqual(linter.main([path]), 1)
            with self.assertRaises(DatasetError) as ctx:
                load_csv(path)
            self.assertIn("Row has 2 fields", str(ctx.exception))

    def test_blank_label_reported(self):
        issues = lint_table(["a", "label"], [["1", " "]], "label")
        self.assertEqual([i.column for i in issues], ["label"])

    def test_line_number_counts_header(self):
        issue = LintIssue("ERROR", "bad", row=3, column="a")
        self.assertEqual(issue.line_no, 4)
        self.assertIn("line 4", issue.format())

    def test_main_exit_codes(self):
        with tempfile.TemporaryDirectory() as tmp:
            good = _write(tmp, "good.csv", "a,label\n1,x\n")
            bad = _write(tmp, "bad.csv", "a,label\ninf,x\n")
            self.assertEqual(linter.main([good]), 0)
            self.assertEqual(linter.main([bad]), 1)
            self.assertEqual(linter.main([os.path.join(tmp, "none.csv")]), 1)


class TestDataset(unittest.TestCase):

    def test_rejects_mismatched_names(self):
        with self.assertRaises(DatasetError):
            Dataset(np.zeros((2, 2)), [0, 0], ["a"], ["x"])

    def test_rejects_out_of_range_label(self):
        with self.assertRaises(DatasetError):
            Dataset(np.zeros((2, 1)), [0, 2], ["a"], ["x", "y"])

    def test_features_are_read_only(self):
        ds = Dataset(np.zeros((2, 1)), [0, 1], ["a"], ["x", "y"])
        with self.assertRaises(ValueError):
            ds.features[0, 0] = 1.0

    def test_align_to_reorders_columns_and_labels(self):
        ds = Dataset([[1.0, 2.0], [3.0, 4.0]], [0, 1], ["a", "b"], ["x", "y"])
        aligned = ds.align_to(["b", "a"], ["y", "x", "z"])
        self.assertEqual(aligned.features.tolist(), [[2.0, 1.0], [4.0, 3.0]])
        self.assertEqual(aligned.labels.tolist(), [1, 0])
        self.assertEqual(aligned.class_names, ("y", "x", "z"))

    def test_align_to_unknown_class(self):
        ds = Dataset([[1.0]], [0], ["a"], ["x"])
        with self.assertRaises(DatasetError):
            ds.align_to(["a"], ["y"])

    def test_align_to_missing_feature(self):
        ds = Dataset([[1.0]], [0], ["a"], ["x"])
        with self.assertRaises(DatasetError):
            ds.align_to(["b"], ["x"])

    def test_json_document(self):
        ds = make_radiomic_dataset(n_features=4, seed=1)
        self.assertEqual(Dataset.from_json_string(ds.to_json_string()), ds)


class TestSplit(unittest.TestCase):

    def setUp(self):
        self.ds = make_radiomic_dataset(seed=7)

    def test_cohort_shape(self):
        self.assertEqual(self.ds.n_rows, 75)
        self.assertEqual(self.ds.n_features, 107)
        self.assertEqual(self.ds.n_classes, 7)
        self.assertEqual(class_distribution(self.ds), list(COHORT_COUNTS))
        self.assertEqual(len(set(radiomic_feature_names())), 107)

    def test_stratified_counts(self):
        train_idx, test_idx = split_indices(self.ds, SplitSpec(test_fraction=0.2, seed=0))
        self.assertEqual(len(test_idx), 15)
        test_counts = np.bincount(self.ds.labels[test_idx], minlength=7).tolist()
        self.assertEqual(test_counts, [8, 1, 4, 1, 1, 0, 0])
        train_counts = np.bincount(self.ds.labels[train_idx], minlength=7).tolist()
        self.assertEqual(train_counts, [30, 4, 18, 5, 1, 1, 1])

    def test_partition_is_sorted_and_disjoint(self):
        train_idx, test_idx = split_indices(self.ds, SplitSpec(seed=5))
        self.assertEqual(sorted(train_idx.tolist() + test_idx.tolist()), list(range(75)))
        self.assertTrue(np.all(np.diff(train_idx) > 0))
        self.assertTrue(np.all(np.diff(test_idx) > 0))

    def test_deterministic_for_seed(self):
        a = split(self.ds, SplitSpec(seed=11))
        b = split(self.ds, SplitSpec(seed=11))
        self.assertEqual(a[0], b[0])
        self.assertEqual(a[1], b[1])

    def test_unstratified_size(self):
        _, test_idx = split_indices(self.ds, SplitSpec(test_fraction=0.3, seed=2, stratified=False))
        self.assertEqual(len(test_idx), 23)

    def test_test_split_never_empty(self):
        ds = Dataset(np.arange(3.0).reshape(3, 1), [0, 1, 0], ["a"], ["x", "y"])
        train_idx, test_idx = split_indices(ds, SplitSpec(test_fraction=0.01))
        self.assertEqual(len(test_idx), 1)
        self.assertEqual(len(train_idx), 2)

    def test_too_few_rows(self):
        ds = Dataset([[1.0]], [0], ["a"], ["x"])
        with self.assertRaises(DatasetError):
            split_indices(ds, SplitSpec())


if __name__ == '__main__':
    unittest.main()
