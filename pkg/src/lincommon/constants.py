"""Numerical tolerances shared across modules."""

import os

# Absolute tolerance for quantities of magnitude <= 1. The environment
# variable is a testing aid for the CLI; it is read once at import time.
TOL = float(os.environ.get("COMMON_WITNESS_TOL", "1e-9"))

# Stricter tolerance used for pointwise checks on witness functions.
TIGHT_TOL = 1e-12
