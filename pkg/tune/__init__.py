"""Hyperparameter search spaces and cross-validated FOX tuning."""
