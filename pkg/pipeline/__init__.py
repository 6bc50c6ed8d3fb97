"""End-to-end pipeline runner and command-line interface."""
