"""Shapley contributions of tree-ensemble predictions."""
