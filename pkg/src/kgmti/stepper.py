"""Two-scale exponential time stepper for the nonlinear Klein-Gordon equation

    eps^2 u_tt - Lap u + u/eps^2 + lam u^3 = 0,
    u(0) = phi1,   u_t(0) = phi2 / eps^2,

on a periodic box, discretized by Fourier collocation in space.  On each step
interval [t_n, t_n + tau] the solution is written as

    u(t_n + s) = e^{i s/eps^2} v(s) + e^{-i s/eps^2} conj(v(s)) + r(s),

with the envelope transmission conditions

    v(0) = (u^n - i eps^2 udot^n)/2,   v'(0) = 0,   r(0) = r'(0) = 0 .

The envelope solves the wave-modulated Schrodinger system with cubic term
g(v) = 3 lam |v|^2 v, the remainder absorbs the third harmonic h(v) = lam v^3
and the coupling f(v, r, s); both are advanced in Fourier space by Duhamel
formulas with the nonlinearities frozen at s = 0 (plus an endpoint correction
for f), using the per-mode coefficient tables from :mod:`kgmti.coefficients`.

Cost per step: 8 FFTs of the grid size.  Everything is mode-diagonal, so the
update is identical in 1D and 2D.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from kgmti.coefficients import CoeffTable, build_coeff_table, cis
from kgmti.spectral import SpectralGrid

__all__ = [
    "FieldState",
    "MicroStep",
    "SolverParams",
    "Trajectory",
    "DivergenceError",
    "decompose",
    "g_term",
    "h_term",
    "f_term",
    "initial_state",
    "mti_step",
    "run",
    "interpolate",
]

#: fields whose sup-norm exceeds this abort the run as diverged
SUP_LIMIT = 1e8

#: |s| or |s - tau| below this fraction of tau snaps interpolation to an endpoint
SNAP_FRACTION = 1e-12


class DivergenceError(RuntimeError):
    """Raised when a run produces non-finite values or leaves the trust region."""

    def __init__(self, step_index: int, t: float, sup: float):
        self.step_index = step_index
        self.t = t
        self.sup = sup
        super().__init__(
            f"solution diverged at step {step_index} (t = {t:.6g}): sup |u| = {sup:.3e}"
        )


@dataclass
class FieldState:
    """Real solution pair (u, du/dt) at one time."""

    u: np.ndarray
    udot: np.ndarray
    t: float


@dataclass
class MicroStep:
    """Per-interval envelope data needed to evaluate the interpolant.

    Covers [t_start, t_start + tau]; v0/v1 are the complex envelopes at the
    interval ends, r1/r1dot the remainder pair at the right end.
    """

    v0: np.ndarray
    v1: np.ndarray
    v1dot: np.ndarray
    r1: np.ndarray
    r1dot: np.ndarray
    t_start: float
    tau: float


@dataclass(frozen=True)
class SolverParams:
    """Static description of one run."""

    grid: SpectralGrid
    eps: float
    lam: float
    tau: float
    t_end: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")


@dataclass
class Trajectory:
    """Result of a run: recorded states, optional per-interval envelope data."""

    params: SolverParams
    states: list[FieldState]
    micro: list[MicroStep] | None
    n_steps: int
    wall_time: float

    @property
    def ts(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> FieldState:
        return self.states[-1]

    def state_at(self, t: float) -> FieldState:
        """The recorded state closest to t (must match within 1e-9)."""
        ts = self.ts
        k = int(np.argmin(np.abs(ts - t)))
        if abs(ts[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"no state recorded at t = {t}; have {ts}")
        return self.states[k]


# ------------------------------------------------------------------ pointwise


def decompose(u: np.ndarray, udot: np.ndarray, eps: float) -> np.ndarray:
    """Initial envelope v(0) = (u - i eps^2 udot)/2 of one step interval."""
    return 0.5 * (u - 1j * eps * eps * udot)


def g_term(v: np.ndarray, lam: float) -> np.ndarray:
    """First-harmonic cubic term g(v) = 3 lam |v|^2 v."""
    return 3.0 * lam * (v.real**2 + v.imag**2) * v


def h_term(v: np.ndarray, lam: float) -> np.ndarray:
    """Third-harmonic cubic term h(v) = lam v^3."""
    return lam * v * v * v


def f_term(v: np.ndarray, r: np.ndarray, s: float, lam: float, eps: float) -> np.ndarray:
    """Envelope-remainder coupling f = lam [ (w+r)^3 - w^3 ] with
    w = 2 Re(e^{i s/eps^2} v); expanded so it is exactly real and vanishes
    identically at r = 0."""
    w = 2.0 * (complex(cis(s, 1.0 / (eps * eps))) * v).real
    return lam * r * (r * r + 3.0 * r * w + 3.0 * w * w)


def _recombine_u(phase: complex, v: np.ndarray, r: np.ndarray) -> np.ndarray:
    # single definition shared by stepping and interpolation so the s = tau
    # interpolant reproduces u^{n+1} bit-for-bit
    return 2.0 * (phase * v).real + r


def initial_state(u: np.ndarray, udot: np.ndarray, grid: SpectralGrid) -> FieldState:
    """Project initial data onto the real, Nyquist-free subspace (done once;
    stepping then preserves the subspace exactly)."""
    return FieldState(u=grid.resymmetrize(u), udot=grid.resymmetrize(udot), t=0.0)


# ------------------------------------------------------------------- stepping


def mti_step(
    state: FieldState, params: SolverParams, table: CoeffTable
) -> tuple[FieldState, MicroStep]:
    """Advance one interval of length table.tau.  Returns the new state and the
    envelope data of the traversed interval."""
    if table.eps != params.eps:
        raise ValueError(f"coefficient table eps {table.eps} != params eps {params.eps}")
    grid = params.grid
    if table.a.shape != grid.shape:
        raise ValueError(f"coefficient table shape {table.a.shape} != grid shape {grid.shape}")
    eps2 = params.eps * params.eps
    lam = params.lam
    tau = table.tau

    v0 = decompose(state.u, state.udot, params.eps)
    v0h = grid.forward(v0)
    g0h = grid.forward(g_term(v0, lam))
    h0h = grid.forward(h_term(v0, lam))
    hbh = np.conj(grid.reflect_spectrum(h0h))  # spectrum of conj(h(v0))

    v1 = grid.inverse(table.a * v0h - table.c * g0h)
    v1dot = grid.inverse(table.a_prime * v0h - table.c_prime * g0h)
    r1 = grid.inverse(-table.p * h0h - np.conj(table.p) * hbh).real

    w1 = 2.0 * (table.rot * v1).real
    f1 = lam * r1 * (r1 * r1 + 3.0 * r1 * w1 + 3.0 * w1 * w1)
    f1h = grid.forward(f1)
    if table.nyquist_zeroed:
        f1h[grid.nyquist_mask] = 0.0
    r1dot = grid.inverse(
        -table.p_prime * h0h - np.conj(table.p_prime) * hbh - (0.5 * tau / eps2) * f1h
    ).real

    u1 = w1 + r1
    u1dot = 2.0 * (table.rot * (v1dot + (1j / eps2) * v1)).real + r1dot

    t1 = state.t + tau
    new = FieldState(u=u1, udot=u1dot, t=t1)
    micro = MicroStep(v0=v0, v1=v1, v1dot=v1dot, r1=r1, r1dot=r1dot, t_start=state.t, tau=tau)
    return new, micro


def _step_plan(t_end: float, tau: float) -> tuple[int, float]:
    """(number of full steps, length of trailing partial step or 0.0)."""
    n_round = round(t_end / tau)
    if n_round > 0 and abs(n_round * tau - t_end) <= 1e-9 * max(tau, abs(t_end)):
        return n_round, 0.0
    n_full = int(math.floor(t_end / tau))
    rest = t_end - n_full * tau
    if rest <= 1e-9 * tau:
        return n_full, 0.0
    return n_full, rest


def run(
    params: SolverParams,
    initial: FieldState,
    *,
    record_times: Sequence[float] | None = None,
    keep_micro: bool = False,
    on_step: Callable[[int, FieldState], None] | None = None,
) -> Trajectory:
    """Integrate from t = 0 to t = t_end in steps of tau (plus one shortened
    final step when t_end is not a multiple of tau).

    record_times selects which intermediate states are kept (they must lie on
    the step grid); the initial and final states are always recorded.  on_step
    is called as on_step(k, state) for k = 0 (initial) and after every step.
    Raises DivergenceError when the solution leaves the trust region.
    """
    grid = params.grid
    if initial.t != 0.0:
        raise ValueError(f"runs must start at t = 0, got initial.t = {initial.t}")
    state = FieldState(
        u=grid.resymmetrize(initial.u), udot=grid.resymmetrize(initial.udot), t=0.0
    )

    n_full, tau_last = _step_plan(params.t_end, params.tau)
    total_steps = n_full + (1 if tau_last > 0.0 else 0)

    record_idx: set[int] = set()
    if record_times is not None:
        for t_req in record_times:
            k = round(t_req / params.tau)
            t_k = k * params.tau if k <= n_full else params.t_end
            if k < 0 or k > total_steps or abs(t_k - t_req) > 1e-9 * max(1.0, abs(t_req)):
                raise ValueError(f"record time {t_req} is not on the step grid (tau={params.tau})")
            record_idx.add(min(k, total_steps))

    table = build_coeff_table(params.tau, params.eps, grid)
    tic = time.perf_counter()
    states = [state]
    micro_list: list[MicroStep] | None = [] if keep_micro else None
    if on_step is not None:
        on_step(0, state)

    for k in range(1, total_steps + 1):
        if k == n_full + 1:  # trailing partial step
            table = build_coeff_table(tau_last, params.eps, grid)
        state, micro = mti_step(state, params, table)
        # keep time bookkeeping exact: t = k*tau, not accumulated sums
        state.t = k * params.tau if k <= n_full else params.t_end
        if micro_list is not None:
            micro_list.append(micro)
        sup = float(np.max(np.abs(state.u)))
        if not math.isfinite(sup) or sup > SUP_LIMIT:
            raise DivergenceError(k, state.t, sup)
        if k in record_idx or k == total_steps:
            states.append(state)
        if on_step is not None:
            on_step(k, state)

    wall = time.perf_counter() - tic
    return Trajectory(
        params=params, states=states, micro=micro_list, n_steps=total_steps, wall_time=wall
    )


# -------------------------------------------------------------- interpolation


def eval_interpolant(step: MicroStep, s: float, eps: float) -> np.ndarray:
    """Multiscale interpolant inside one interval, 0 <= s <= step.tau:

        U(t_n + s) = 2 Re( e^{i s/eps^2} [ (1 - s/tau) v0 + (s/tau) v1 ] )
                     + (s/tau) r1 .

    At s = 0 this returns u^n and at s = tau it returns u^{n+1} bit-for-bit.
    """
    tau = step.tau
    if s <= SNAP_FRACTION * tau:
        return 2.0 * step.v0.real
    if s >= tau * (1.0 - SNAP_FRACTION):
        phase = complex(cis(tau, 1.0 / (eps * eps)))
        return _recombine_u(phase, step.v1, step.r1)
    theta = s / tau
    phase = complex(cis(s, 1.0 / (eps * eps)))
    vmix = (1.0 - theta) * step.v0 + theta * step.v1
    return _recombine_u(phase, vmix, theta * step.r1)


def interpolate(traj: Trajectory, t: float) -> np.ndarray:
    """Evaluate u(t) anywhere in [0, t_end] from a keep_micro=True trajectory."""
    if traj.micro is None:
        raise ValueError("trajectory was run without keep_micro=True")
    t_end = traj.params.t_end
    if t < -1e-9 or t > t_end * (1.0 + 1e-12) + 1e-12:
        raise ValueError(f"t = {t} outside the computed range [0, {t_end}]")
    micro = traj.micro
    tau = traj.params.tau
    n = min(int(t / tau), len(micro) - 1)
    if t < micro[n].t_start:  # guard against floor() landing one interval high
        n -= 1
    step = micro[n]
    s = min(max(t - step.t_start, 0.0), step.tau)
    return eval_interpolant(step, s, traj.params.eps)
