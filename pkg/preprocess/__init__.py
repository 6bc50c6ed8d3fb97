"""Gini feature ranking, top-k selection and normalization."""
