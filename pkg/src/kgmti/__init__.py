"""Spectral solvers for the nonlinear Klein-Gordon equation in the
nonrelativistic scaling, its oscillatory-in-time limit models, and the
experiment harness built on top of them.

Layout:

* :mod:`kgmti.spectral`     -- periodic grids, transforms, norms, energy
* :mod:`kgmti.coefficients` -- per-mode exponential-integrator coefficients
* :mod:`kgmti.stepper`      -- the two-scale exponential time stepper
* :mod:`kgmti.limits`       -- limit-model solvers and limit-error functionals
* :mod:`kgmti.diagnostics`  -- error norms, rate estimation, result tables
* :mod:`kgmti.problems`     -- built-in initial data and experiment presets
* :mod:`kgmti.harness`      -- sweep drivers, reference caching, file output
* :mod:`kgmti.cli`          -- command-line entry point
"""

from kgmti.spectral import SpectralGrid, energy

__version__ = "0.1.0"

__all__ = ["SpectralGrid", "energy", "__version__"]
