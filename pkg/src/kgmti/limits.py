"""Oscillatory-limit models of the Klein-Gordon flow and their solvers.

As eps -> 0 the solution is described, after factoring out the e^{+-i t/eps^2}
carrier, by complex envelopes:

* wave-modulated Schrodinger model (keeps the eps^2 wave operator)

      eps^2 v_tt + 2 i v_t - Lap v + 3 lam |v|^2 v = 0,
      v(0) = v0 = (phi1 - i phi2)/2,      v_t(0) = gamma,

  integrated by a one-step Gautschi-type exponential integrator in Fourier
  space with the cubic term frozen over each step (first order in tau);

* Schrodinger limit (drops the eps^2 term)

      2 i v_t - Lap v + 3 lam |v|^2 v = 0,     v(0) = v0,

  integrated by Strang splitting (second order in tau): a half step of the
  pointwise phase rotation e^{i (3 lam/2) |v|^2 tau/2}, a full linear step
  e^{+i mu^2 tau/2} per mode, and another half rotation.

The admissible v_t(0) choices for the wave-modulated model are enumerated by
GammaChoice; "well_prepared" is the value that removes the leading initial
layer, gamma = (i/2)(-Lap v0 + 3 lam |v0|^2 v0).

The module also provides the two error functionals used in the limit studies:

    e_sw(t) = || u(t) - [e^{i t/eps^2} v_sw(t) + c.c.] ||_H1      (model error)
    e_we(t) = || v_sw(t) - v_se(t) ||_H1                          (model gap)

Both are O(eps^2) for fixed t under the appropriate data preparation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from kgmti.coefficients import CoeffTable, build_coeff_table, cis
from kgmti.spectral import SpectralGrid
from kgmti.stepper import FieldState, Trajectory, _step_plan, g_term

__all__ = [
    "GammaChoice",
    "NlswState",
    "LimitTrajectory",
    "make_v0",
    "make_gamma",
    "nlsw_step",
    "run_nlsw",
    "nlse_step",
    "run_nlse",
    "e_sw",
    "e_we",
]


class GammaChoice(enum.Enum):
    """Initial time-derivative v_t(0) = gamma for the wave-modulated model."""

    ZERO = "zero"
    WELL_PREPARED = "well_prepared"
    CUBIC_ONLY = "cubic_only"

    @classmethod
    def parse(cls, tag: str) -> "GammaChoice":
        try:
            return cls(tag)
        except ValueError:
            raise ValueError(
                f"unknown gamma choice '{tag}'; expected one of {[c.value for c in cls]}"
            ) from None


@dataclass
class NlswState:
    """Complex envelope pair (v, dv/dt) at one time."""

    v: np.ndarray
    vdot: np.ndarray
    t: float


@dataclass
class LimitTrajectory:
    """Envelope fields of a limit-model run, recorded at sample times."""

    grid: SpectralGrid
    ts: list[float]
    fields: list[np.ndarray]

    def field_at(self, t: float) -> np.ndarray:
        ts = np.asarray(self.ts)
        k = int(np.argmin(np.abs(ts - t)))
        if abs(ts[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"no field recorded at t = {t}")
        return self.fields[k]


def make_v0(phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Envelope initial value v0 = (phi1 - i phi2)/2."""
    return 0.5 * (phi1 - 1j * phi2)


def make_gamma(
    choice: GammaChoice, v0: np.ndarray, lam: float, grid: SpectralGrid
) -> np.ndarray:
    """Initial envelope velocity for the wave-modulated model."""
    if choice is GammaChoice.ZERO:
        return np.zeros_like(v0)
    cubic = 3.0 * lam * (v0.real**2 + v0.imag**2) * v0
    if choice is GammaChoice.CUBIC_ONLY:
        return 0.5j * cubic
    if choice is GammaChoice.WELL_PREPARED:
        return 0.5j * (-grid.laplacian(v0) + cubic)
    raise ValueError(f"unhandled gamma choice {choice!r}")


# ------------------------------------------------------- wave-modulated model


def nlsw_step(
    state: NlswState, tau: float, eps: float, lam: float, table: CoeffTable
) -> NlswState:
    """One Gautschi-type step of the wave-modulated model.

    In Fourier space, with the cubic term g = 3 lam |v|^2 v frozen at the left
    endpoint:

        v~(tau)  = a v~(0) + eps^2 b  v~'(0) - c  g~(0)
        v~'(tau) = a' v~(0) + eps^2 b' v~'(0) - c' g~(0)
    """
    if table.eps != eps:
        raise ValueError(f"coefficient table eps {table.eps} != {eps}")
    grid_n = state.v.shape
    if table.a.shape != grid_n:
        raise ValueError(f"coefficient table shape {table.a.shape} != field shape {grid_n}")
    eps2 = eps * eps
    vh = np.fft.fftn(state.v)
    wh = np.fft.fftn(state.vdot)
    gh = np.fft.fftn(g_term(state.v, lam))
    v1h = table.a * vh + eps2 * table.b * wh - table.c * gh
    w1h = table.a_prime * vh + eps2 * table.b_prime * wh - table.c_prime * gh
    return NlswState(v=np.fft.ifftn(v1h), vdot=np.fft.ifftn(w1h), t=state.t + tau)


def run_nlsw(
    grid: SpectralGrid,
    eps: float,
    lam: float,
    tau: float,
    t_end: float,
    v0: np.ndarray,
    gamma: np.ndarray,
    record_times: list[float] | None = None,
) -> LimitTrajectory:
    """Integrate the wave-modulated model; records v at record_times
    (defaults to initial and final time)."""
    n_full, tau_last = _step_plan(t_end, tau)
    total = n_full + (1 if tau_last > 0.0 else 0)
    record_idx = _record_indices(record_times, tau, t_end, n_full, total)

    # complex envelopes use all modes; no Nyquist projection here
    table = build_coeff_table(tau, eps, grid, zero_nyquist=False)
    state = NlswState(v=np.asarray(v0, dtype=complex), vdot=np.asarray(gamma, dtype=complex), t=0.0)
    ts, fields = [0.0], [state.v.copy()]
    for k in range(1, total + 1):
        if k == n_full + 1:
            table = build_coeff_table(tau_last, eps, grid, zero_nyquist=False)
        state = nlsw_step(state, table.tau, eps, lam, table)
        state.t = k * tau if k <= n_full else t_end
        if k in record_idx or k == total:
            if not np.all(np.isfinite(state.v)):
                raise RuntimeError(f"wave-modulated run diverged by step {k} (t = {state.t:.6g})")
            ts.append(state.t)
            fields.append(state.v.copy())
    return LimitTrajectory(grid=grid, ts=ts, fields=fields)


# ----------------------------------------------------------- Schrodinger limit


def nlse_step(
    v: np.ndarray,
    tau: float,
    lam: float,
    grid: SpectralGrid,
    lin_phase: np.ndarray | None = None,
) -> np.ndarray:
    """One Strang-splitting step of the Schrodinger limit.

    lin_phase may carry the precomputed per-mode multiplier e^{+i mu^2 tau/2}.
    """
    if lin_phase is None:
        lin_phase = np.exp(0.5j * tau * grid.mu_sq)
    half = 0.75j * lam * tau  # i (3 lam / 2) * (tau/2)
    v = v * np.exp(half * (v.real**2 + v.imag**2))
    v = np.fft.ifftn(np.fft.fftn(v) * lin_phase)
    v = v * np.exp(half * (v.real**2 + v.imag**2))
    return v


def run_nlse(
    grid: SpectralGrid,
    lam: float,
    tau: float,
    t_end: float,
    v0: np.ndarray,
    record_times: list[float] | None = None,
) -> LimitTrajectory:
    """Integrate the Schrodinger limit; records v at record_times."""
    n_full, tau_last = _step_plan(t_end, tau)
    total = n_full + (1 if tau_last > 0.0 else 0)
    record_idx = _record_indices(record_times, tau, t_end, n_full, total)

    lin = np.exp(0.5j * tau * grid.mu_sq)
    v = np.asarray(v0, dtype=complex)
    t = 0.0
    ts, fields = [0.0], [v.copy()]
    for k in range(1, total + 1):
        step_tau = tau if k <= n_full else tau_last
        v = nlse_step(v, step_tau, lam, grid, lin if k <= n_full else None)
        t = k * tau if k <= n_full else t_end
        if k in record_idx or k == total:
            if not np.all(np.isfinite(v)):
                raise RuntimeError(f"Schrodinger-limit run diverged by step {k} (t = {t:.6g})")
            ts.append(t)
            fields.append(v.copy())
    return LimitTrajectory(grid=grid, ts=ts, fields=fields)


def _record_indices(
    record_times: list[float] | None, tau: float, t_end: float, n_full: int, total: int
) -> set:
    idx: set[int] = set()
    if record_times is None:
        return idx
    for t_req in record_times:
        k = round(t_req / tau)
        t_k = k * tau if k <= n_full else t_end
        if k < 0 or k > total or abs(t_k - t_req) > 1e-9 * max(1.0, abs(t_req)):
            raise ValueError(f"record time {t_req} is not on the step grid (tau={tau})")
        idx.add(min(k, total))
    return idx


# ------------------------------------------------------------ limit functionals


def e_sw_field(
    u: np.ndarray, v: np.ndarray, t: float, eps: float, grid: SpectralGrid
) -> float:
    """|| u - [e^{i t/eps^2} v + c.c.] ||_H1 at one time."""
    phase = complex(cis(t, 1.0 / (eps * eps)))
    recon = 2.0 * (phase * v).real
    return grid.h1_norm(u - recon)


def e_sw(u_traj: Trajectory, v_traj: LimitTrajectory, t: float) -> float:
    """Model error of the wave-modulated envelope against the full solution."""
    if u_traj.params.grid != v_traj.grid:
        raise ValueError("trajectories live on different grids")
    u_state: FieldState = u_traj.state_at(t)
    v = v_traj.field_at(t)
    return e_sw_field(u_state.u, v, t, u_traj.params.eps, u_traj.params.grid)


def e_we(v_sw_traj: LimitTrajectory, v_se_traj: LimitTrajectory, t: float) -> float:
    """H1 gap between the wave-modulated and Schrodinger-limit envelopes."""
    if v_sw_traj.grid != v_se_traj.grid:
        raise ValueError("trajectories live on different grids")
    v_sw = v_sw_traj.field_at(t)
    v_se = v_se_traj.field_at(t)
    return v_sw_traj.grid.h1_norm(v_sw - v_se)
