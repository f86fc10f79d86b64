"""Shared pytest fixtures/path setup: keeps `import oracles` working from any rootdir."""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
