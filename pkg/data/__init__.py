"""CSV feature tables, validation, synthetic data and train/test splits."""
