"""Error functionals, observed-order computation, and error-table assembly.

Comparisons between runs at different spatial resolutions follow a fixed
convention: the finer field is restricted to the coarser index set by spectral
truncation (drop modes the coarse grid cannot represent), never by pointwise
sampling; a pad mode (extend the coarse spectrum with zeros and compare on the
fine grid, which charges the unresolved tail to the error) is available for
diagnostic use.  All norms are the discrete H1 / L2 norms of the spectral
module.

The error energy functional combines the field error e and its time
derivative edot with the scaling that stays O(1) for a uniformly accurate
scheme:

    energy = eps^2 ||edot||_H1^2 + sum_axis ||d_axis e||_H1^2 + (1/eps^2) ||e||_H1^2

Tables are assembled as (eps, h, tau) -> cell maps, serialized as CSV with the
header `eps,h,tau,e_h1,edot_h1,rate` (rates displayed rounded to two decimals)
and as a JSON mirror that retains full precision plus a metadata block.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from kgmti.spectral import SpectralGrid
from kgmti.stepper import FieldState

__all__ = [
    "ErrorPair",
    "h1_error",
    "restrict_state",
    "error_energy",
    "observed_rates",
    "uniform_error",
    "Cell",
    "ErrorTable",
]


@dataclass(frozen=True)
class ErrorPair:
    """H1 norms of the error in the field and in its time derivative."""

    e: float
    edot: float

    def combined(self, eps: float) -> float:
        """The combined metric e + eps^2 * edot."""
        return self.e + eps * eps * self.edot


def _restrict_spectrum(uh_fine: np.ndarray, fine: SpectralGrid, coarse: SpectralGrid) -> np.ndarray:
    """Drop the modes of a fine-grid spectrum that the coarse grid cannot hold.

    The coarse Nyquist mode is set to zero (it has no conjugate partner and the
    evolved fields are kept Nyquist-free anyway).
    """
    n, nf = coarse.n, fine.n
    half = n // 2
    if fine.dim == 1:
        out = np.zeros(n, dtype=complex)
        out[:half] = uh_fine[:half]
        out[half + 1:] = uh_fine[nf - half + 1:]
        return out
    idx = np.concatenate([np.arange(half), [0], np.arange(nf - half + 1, nf)])
    out = uh_fine[np.ix_(idx, idx)].astype(complex)
    out[half, :] = 0.0
    out[:, half] = 0.0
    return out


def _extend_spectrum(uh_coarse: np.ndarray, coarse: SpectralGrid, fine: SpectralGrid) -> np.ndarray:
    """Embed a coarse-grid spectrum into the fine grid's index set (zero pad)."""
    n, nf = coarse.n, fine.n
    half = n // 2
    if coarse.dim == 1:
        out = np.zeros(nf, dtype=complex)
        out[:half] = uh_coarse[:half]
        out[nf - half + 1:] = uh_coarse[half + 1:]
        return out
    out = np.zeros((nf, nf), dtype=complex)
    src = np.concatenate([np.arange(half), np.arange(half + 1, n)])
    dst = np.concatenate([np.arange(half), np.arange(nf - half + 1, nf)])
    out[np.ix_(dst, dst)] = uh_coarse[np.ix_(src, src)]
    return out


def h1_error(
    numeric: FieldState,
    reference: FieldState,
    grid: SpectralGrid,
    ref_grid: SpectralGrid | None = None,
    mode: str = "truncate",
) -> ErrorPair:
    """H1 norms of (numeric - reference) for the field and its derivative.

    With ref_grid unset (or equal to grid) the states must share the grid.
    Otherwise the reference must live on a finer grid over the same domain;
    mode 'truncate' restricts it spectrally to the coarse index set, mode
    'pad' extends the numeric spectrum to the fine grid instead.
    """
    if ref_grid is None or ref_grid == grid:
        if reference.u.shape != grid.shape or numeric.u.shape != grid.shape:
            raise ValueError("field shapes do not match the grid")
        return ErrorPair(
            e=grid.h1_norm(numeric.u - reference.u),
            edot=grid.h1_norm(numeric.udot - reference.udot),
        )
    if (ref_grid.a, ref_grid.b, ref_grid.dim) != (grid.a, grid.b, grid.dim):
        raise ValueError(
            f"incompatible domains: ({grid.a},{grid.b}) dim {grid.dim} vs "
            f"({ref_grid.a},{ref_grid.b}) dim {ref_grid.dim}"
        )
    if ref_grid.n < grid.n:
        raise ValueError(f"reference grid (n={ref_grid.n}) is coarser than numeric (n={grid.n})")
    if mode == "truncate":
        def err(f_num: np.ndarray, f_ref: np.ndarray) -> float:
            rh = _restrict_spectrum(ref_grid.forward(f_ref), ref_grid, grid)
            return grid.h1_norm(grid.inverse(rh).real - f_num)
    elif mode == "pad":
        def err(f_num: np.ndarray, f_ref: np.ndarray) -> float:
            nh = _extend_spectrum(grid.forward(f_num), grid, ref_grid)
            return ref_grid.h1_norm(ref_grid.inverse(nh).real - f_ref)
    else:
        raise ValueError(f"unknown comparison mode '{mode}' (expected 'truncate' or 'pad')")
    return ErrorPair(
        e=err(numeric.u, reference.u),
        edot=err(numeric.udot, reference.udot),
    )


def restrict_state(
    reference: FieldState, fine: SpectralGrid, coarse: SpectralGrid
) -> FieldState:
    """Spectrally truncate a fine-grid state onto a coarser grid.

    Same convention as h1_error's 'truncate' mode; the restricted state can be
    compared field-by-field against a coarse-grid numeric state.
    """
    if (fine.a, fine.b, fine.dim) != (coarse.a, coarse.b, coarse.dim):
        raise ValueError("incompatible domains")
    if fine.n < coarse.n:
        raise ValueError(f"reference grid (n={fine.n}) is coarser than target (n={coarse.n})")
    if fine.n == coarse.n:
        return reference

    def down(f: np.ndarray) -> np.ndarray:
        return coarse.inverse(_restrict_spectrum(fine.forward(f), fine, coarse)).real

    return FieldState(u=down(reference.u), udot=down(reference.udot), t=reference.t)


def error_energy(e: np.ndarray, edot: np.ndarray, eps: float, grid: SpectralGrid) -> float:
    """eps^2 ||edot||_H1^2 + sum_axis ||d_axis e||_H1^2 + (1/eps^2) ||e||_H1^2."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    grad_sq = sum(grid.h1_norm(grid.derivative(e, axis=ax)) ** 2 for ax in range(grid.dim))
    return (
        eps * eps * grid.h1_norm(edot) ** 2
        + grad_sq
        + grid.h1_norm(e) ** 2 / (eps * eps)
    )


def observed_rates(errors, refinement: float) -> list:
    """Per-pair convergence rates log(e_prev/e_cur)/log(refinement).

    Non-positive entries yield a None marker for the affected pairs instead of
    raising.  Requires at least two entries and refinement > 1.
    """
    errs = list(errors)
    if len(errs) < 2:
        raise ValueError("need at least two error entries to compute rates")
    if refinement <= 1.0:
        raise ValueError(f"refinement factor must exceed 1, got {refinement}")
    out = []
    for prev, cur in zip(errs[:-1], errs[1:]):
        if prev <= 0.0 or cur <= 0.0:
            out.append(None)
        else:
            out.append(math.log(prev / cur) / math.log(refinement))
    return out


def uniform_error(per_eps_errors: dict) -> float:
    """max over the supplied eps grid (the uniform-in-eps error)."""
    if not per_eps_errors:
        raise ValueError("empty error map")
    return max(per_eps_errors.values())


# ----------------------------------------------------------------- error table


@dataclass(frozen=True)
class Cell:
    """One table cell; optional fields stay empty in CSV for summary rows."""

    e_h1: float
    edot_h1: float | None = None
    l2_error: float | None = None
    energy_err: float | None = None
    rate: float | None = None


@dataclass
class ErrorTable:
    """Sweep results keyed by (eps, h, tau); eps may be the label 'max' for
    the uniform-error summary rows.

    Metadata keys starting with '_' (e.g. wall times) are kept on the object
    for inspection but excluded from CSV/JSON output, so that re-running a
    deterministic study reproduces the serialized table bit for bit.
    """

    eps_list: list
    h_list: list[float]
    tau_list: list[float]
    cells: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, eps, h: float, tau: float, cell: Cell) -> None:
        if cell.e_h1 < 0.0 or (cell.edot_h1 is not None and cell.edot_h1 < 0.0):
            raise ValueError("error entries must be non-negative")
        self.cells[(eps, h, tau)] = cell

    def get(self, eps, h: float, tau: float) -> Cell:
        return self.cells[(eps, h, tau)]

    @staticmethod
    def _fmt(value, spec: str = ".10e") -> str:
        return "" if value is None else format(value, spec)

    def to_csv(self) -> str:
        """CSV with commented metadata header; rates rounded to 2 decimals."""
        buf = io.StringIO()
        for key in sorted(self.metadata):
            if not key.startswith("_"):
                buf.write(f"# {key}: {self.metadata[key]}\n")
        buf.write("eps,h,tau,e_h1,edot_h1,rate\n")
        for (eps, h, tau), cell in self.cells.items():
            eps_s = eps if isinstance(eps, str) else format(eps, ".10g")
            rate_s = "" if cell.rate is None else format(cell.rate, ".2f")
            buf.write(
                f"{eps_s},{format(h, '.10g')},{format(tau, '.10g')},"
                f"{self._fmt(cell.e_h1)},{self._fmt(cell.edot_h1)},{rate_s}\n"
            )
        return buf.getvalue()

    def to_json(self) -> str:
        """JSON mirror: full-precision cells plus the metadata block."""
        rows = []
        for (eps, h, tau), cell in self.cells.items():
            rows.append(
                {
                    "eps": eps,
                    "h": h,
                    "tau": tau,
                    "e_h1": cell.e_h1,
                    "edot_h1": cell.edot_h1,
                    "l2_error": cell.l2_error,
                    "energy_err": cell.energy_err,
                    "rate": cell.rate,
                }
            )
        doc = {
            "metadata": {k: v for k, v in self.metadata.items() if not k.startswith("_")},
            "axes": {"eps": self.eps_list, "h": self.h_list, "tau": self.tau_list},
            "cells": rows,
        }
        return json.dumps(doc, indent=2, sort_keys=False)
