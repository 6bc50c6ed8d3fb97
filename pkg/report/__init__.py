"""Classification metrics and model comparison tables."""
