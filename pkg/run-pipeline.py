#!/usr/bin/env python
"""
radiofox

Radiomic cancer-type classification: Gini-ranked features, random forest and
gradient-boosted trees tuned with the FOX optimizer, and Shapley
explanations of the best model.  See ``python run-pipeline.py --help``.
"""

import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from core.config import configure_telemetry
from pipeline.cli import main

# Enable telemetry with Logfire
configure_telemetry()


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
