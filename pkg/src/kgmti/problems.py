"""Built-in initial-value problems used by the experiment harness.

Each problem fixes the domain, the nonlinearity strength lam, and the pair of
real initial profiles (phi1, phi2); the solver consumes them as

    u(0) = phi1,        du/dt(0) = phi2 / eps^2 .

The profiles decay far faster than the domain half-width, so periodization
error is below machine precision and spectral accuracy in space is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from kgmti.spectral import SpectralGrid

__all__ = ["Problem", "PROBLEMS", "get_problem"]


@dataclass(frozen=True)
class Problem:
    """Domain, nonlinearity, and initial profiles of one benchmark problem."""

    name: str
    a: float
    b: float
    dim: int
    lam: float
    phi1: Callable[..., np.ndarray]
    phi2: Callable[..., np.ndarray]

    def grid(self, n: int) -> SpectralGrid:
        return SpectralGrid(self.a, self.b, n, self.dim)

    def initial_profiles(self, grid: SpectralGrid) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate (phi1, phi2) on the grid nodes."""
        if (grid.a, grid.b, grid.dim) != (self.a, self.b, self.dim):
            raise ValueError(
                f"grid domain ({grid.a}, {grid.b}, dim={grid.dim}) does not match "
                f"problem '{self.name}' ({self.a}, {self.b}, dim={self.dim})"
            )
        mesh = grid.mesh()
        return (
            np.broadcast_to(self.phi1(*mesh), grid.shape).astype(float),
            np.broadcast_to(self.phi2(*mesh), grid.shape).astype(float),
        )


def _sech_pulse_phi1(x):
    return 0.5 / np.cosh(x**2)


def _gauss_pulse_phi2(x):
    return 0.5 * np.exp(-(x**2))


def _twin_gauss_phi1(x, y):
    return np.exp(-(x**2) - (y + 2.0) ** 2) + np.exp(-(x**2) - (y - 2.0) ** 2)


def _center_gauss_phi2(x, y):
    return np.exp(-(x**2) - y**2)


PROBLEMS: dict[str, Problem] = {
    p.name: p
    for p in (
        Problem(
            name="sech-gauss",
            a=-16.0,
            b=16.0,
            dim=1,
            lam=1.0,
            phi1=_sech_pulse_phi1,
            phi2=_gauss_pulse_phi2,
        ),
        Problem(
            name="twin-gauss-2d",
            a=-20.0,
            b=20.0,
            dim=2,
            lam=1.0,
            phi1=_twin_gauss_phi1,
            phi2=_center_gauss_phi2,
        ),
        Problem(
            name="zero",
            a=-16.0,
            b=16.0,
            dim=1,
            lam=1.0,
            phi1=np.zeros_like,
            phi2=np.zeros_like,
        ),
    )
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem '{name}'; available: {sorted(PROBLEMS)}") from None
