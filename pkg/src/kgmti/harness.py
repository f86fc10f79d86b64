"""Experiment harness: configuration, reference caching, and study drivers.

The harness turns a validated ExperimentConfig into the standard studies —
single runs with snapshots, the spatial and temporal error tables (with the
uniform-in-eps summary row), the dense-in-time interpolation-error series, the
limit-model scaling study, and the 2D dynamics snapshots — and serializes the
results as CSV (with commented metadata headers) plus JSON mirrors.

Reference solutions (fine-step runs of the same scheme) are cached on disk
under a content key derived from the physical parameters; cache writes are
atomic (write to a temp file, then rename), and re-running a study with a warm
cache reproduces the serialized tables bit for bit: nothing volatile (wall
times, host info) is written into table files.

Parameter-sweep cells are independent; with jobs > 1 they are dispatched to a
thread pool (the FFT kernels release the interpreter lock), with jobs = 1 the
map is a plain loop.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from kgmti import __version__
from kgmti.diagnostics import (
    Cell,
    ErrorTable,
    error_energy,
    restrict_state,
    uniform_error,
)
from kgmti.limits import (
    GammaChoice,
    e_sw_field,
    make_gamma,
    make_v0,
    run_nlse,
    run_nlsw,
)
from kgmti.problems import Problem, get_problem
from kgmti.spectral import SpectralGrid, energy
from kgmti.stepper import (
    FieldState,
    SolverParams,
    Trajectory,
    initial_state,
    interpolate,
    run,
)

__all__ = [
    "ExperimentConfig",
    "reference_state",
    "probe_reference",
    "run_mti",
    "cmd_solve",
    "cmd_table_temporal",
    "cmd_table_spatial",
    "cmd_interp_error",
    "cmd_limits",
    "cmd_dynamics2d",
]

SCHEME = "two-scale exponential integrator, Fourier pseudospectral"
NORM_NOTE = "discrete H1; e_h1 on u, edot_h1 on du/dt; energy_err is the weighted error-energy functional"


# ----------------------------------------------------------------- configuration


@dataclass
class ExperimentConfig:
    """All knobs of one experiment; defaults follow the standard 1D benchmark."""

    problem: str = "sech-gauss"
    lam: float | None = None  # overrides the problem's nonlinearity if set
    eps_list: list[float] = field(default_factory=lambda: [0.5])
    h_list: list[float] = field(default_factory=lambda: [1.0 / 32.0])
    tau_list: list[float] = field(default_factory=lambda: [1e-4])
    t_end: float = 1.0
    h_ref: float | None = None  # defaults per study (see each command)
    tau_ref: float = 1e-5
    out_dir: str = "out"
    cache_dir: str | None = None  # defaults to <out_dir>/cache
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    jobs: int = 1
    seed: int = 0
    snapshot_times: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    gamma_choices: list[str] = field(
        default_factory=lambda: ["zero", "well_prepared", "cubic_only"]
    )
    sample_dt: float = 0.1  # limit-study error sampling interval
    probe_x: float = 0.0  # interpolation-study probe location (must be a node)
    n_query: int = 1001  # interpolation-study query times

    # ---------------------------------------------------------------- loading

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        """Build from the nested config layout (problem/sweep/reference/outputs)."""
        cfg = cls()
        prob = doc.get("problem", {})
        if isinstance(prob, str):
            cfg.problem = prob
        elif prob:
            cfg.problem = prob.get("name", cfg.problem)
            if "lam" in prob:
                cfg.lam = float(prob["lam"])
            base = get_problem(cfg.problem)
            for key, actual in (("a", base.a), ("b", base.b), ("dim", base.dim)):
                if key in prob and prob[key] != actual:
                    raise ValueError(
                        f"problem.{key}={prob[key]} conflicts with built-in "
                        f"'{cfg.problem}' ({key}={actual})"
                    )
        sweep = doc.get("sweep", {})
        if "eps" in sweep:
            cfg.eps_list = [float(x) for x in sweep["eps"]]
        if "h" in sweep:
            cfg.h_list = [float(x) for x in sweep["h"]]
        if "tau" in sweep:
            cfg.tau_list = [float(x) for x in sweep["tau"]]
        if "T" in sweep:
            cfg.t_end = float(sweep["T"])
        ref = doc.get("reference", {})
        if "h_ref" in ref and ref["h_ref"] is not None:
            cfg.h_ref = float(ref["h_ref"])
        if "tau_ref" in ref:
            cfg.tau_ref = float(ref["tau_ref"])
        if "cache" in ref and ref["cache"] is not None:
            cfg.cache_dir = str(ref["cache"])
        outs = doc.get("outputs", {})
        if "directory" in outs:
            cfg.out_dir = str(outs["directory"])
        if "formats" in outs:
            cfg.formats = [str(f) for f in outs["formats"]]
        for key in ("jobs", "seed", "n_query"):
            if key in doc:
                setattr(cfg, key, int(doc[key]))
        for key in ("sample_dt", "probe_x"):
            if key in doc:
                setattr(cfg, key, float(doc[key]))
        if "snapshot_times" in doc:
            cfg.snapshot_times = [float(t) for t in doc["snapshot_times"]]
        if "gamma_choices" in doc:
            cfg.gamma_choices = [str(g) for g in doc["gamma_choices"]]
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    # ------------------------------------------------------------- validation

    def validate(self, swept: tuple = ()) -> list[str]:
        """Collect every validation failure (empty list means valid).

        swept names the axes ('tau', 'h') a study refines; the reference must
        be strictly finer along each swept axis and at least as fine along the
        others.
        """
        errs: list[str] = []
        try:
            problem = self.effective_problem()
        except ValueError as exc:
            errs.append(str(exc))
            problem = None
        for name, values in (("eps", self.eps_list), ("h", self.h_list), ("tau", self.tau_list)):
            if not values:
                errs.append(f"sweep.{name} must be non-empty")
            for v in values:
                if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                    errs.append(f"sweep.{name} entries must be positive, got {v}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0.0):
            errs.append(f"T must be non-negative, got {self.t_end}")
        if not (math.isfinite(self.tau_ref) and self.tau_ref > 0.0):
            errs.append(f"tau_ref must be positive, got {self.tau_ref}")
        if self.h_ref is not None and not (math.isfinite(self.h_ref) and self.h_ref > 0.0):
            errs.append(f"h_ref must be positive, got {self.h_ref}")
        if problem is not None:
            for h in list(self.h_list) + ([self.h_ref] if self.h_ref is not None else []):
                try:
                    self.grid_n(problem, h)
                except ValueError as exc:
                    errs.append(str(exc))
        if self.jobs < 1:
            errs.append(f"jobs must be >= 1, got {self.jobs}")
        if self.n_query < 2:
            errs.append(f"n_query must be >= 2, got {self.n_query}")
        if self.sample_dt <= 0.0:
            errs.append(f"sample_dt must be positive, got {self.sample_dt}")
        for f in self.formats:
            if f not in ("csv", "json"):
                errs.append(f"unknown output format '{f}' (expected csv or json)")
        for g in self.gamma_choices:
            try:
                GammaChoice.parse(g)
            except ValueError as exc:
                errs.append(str(exc))
        if "tau" in swept and self.tau_list:
            if self.tau_ref >= min(self.tau_list):
                errs.append(
                    f"tau_ref={self.tau_ref} must be strictly finer than the "
                    f"finest swept tau={min(self.tau_list)}"
                )
        elif self.tau_list and self.tau_ref > min(self.tau_list):
            errs.append(f"tau_ref={self.tau_ref} must not be coarser than tau={min(self.tau_list)}")
        if self.h_ref is not None and self.h_list:
            if "h" in swept:
                if self.h_ref >= min(self.h_list):
                    errs.append(
                        f"h_ref={self.h_ref} must be strictly finer than the "
                        f"finest swept h={min(self.h_list)}"
                    )
            elif self.h_ref > min(self.h_list):
                errs.append(f"h_ref={self.h_ref} must not be coarser than h={min(self.h_list)}")
        return errs

    def ensure_valid(self, swept: tuple = ()) -> None:
        errs = self.validate(swept)
        if errs:
            raise ValueError("invalid configuration:\n" + "\n".join(f"- {e}" for e in errs))

    # ---------------------------------------------------------------- helpers

    def effective_problem(self) -> Problem:
        p = get_problem(self.problem)
        if self.lam is not None and self.lam != p.lam:
            p = dataclasses.replace(p, lam=float(self.lam))
        return p

    @staticmethod
    def grid_n(problem: Problem, h: float) -> int:
        """Node count for mesh size h; (b-a)/h must be an even integer."""
        length = problem.b - problem.a
        n = length / h
        r = round(n)
        if abs(n - r) > 1e-9 * max(1.0, abs(n)) or r <= 0 or r % 2:
            raise ValueError(f"h={h} does not divide the domain into an even node count")
        return int(r)

    def effective_cache_dir(self) -> str:
        return self.cache_dir if self.cache_dir is not None else os.path.join(self.out_dir, "cache")

    def physics_hash(self) -> str:
        """Stable hash of the physical setup (excludes output plumbing)."""
        payload = {
            "problem": self.problem,
            "lam": self.lam,
            "eps": [_f17(x) for x in self.eps_list],
            "h": [_f17(x) for x in self.h_list],
            "tau": [_f17(x) for x in self.tau_list],
            "T": _f17(self.t_end),
            "h_ref": None if self.h_ref is None else _f17(self.h_ref),
            "tau_ref": _f17(self.tau_ref),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def _f17(x: float) -> str:
    return format(float(x), ".17g")


# ------------------------------------------------------------- shared machinery


def run_mti(problem: Problem, eps: float, n: int, tau: float, t_end: float, **kw) -> Trajectory:
    """One full-model run from the problem's initial data."""
    grid = problem.grid(n)
    phi1, phi2 = problem.initial_profiles(grid)
    params = SolverParams(grid=grid, eps=eps, lam=problem.lam, tau=tau, t_end=t_end)
    return run(params, initial_state(phi1, phi2 / eps**2, grid), **kw)


def _atomic_save_npz(path: str, **arrays) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            np.savez(f, **arrays)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _cache_path(cache_dir: str, payload: dict) -> str:
    key = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]
    return os.path.join(cache_dir, f"ref-{key}.npz")


def reference_state(
    problem: Problem, eps: float, n: int, tau: float, t_end: float, cache_dir: str
) -> FieldState:
    """Final state of a fine-step run, loaded from cache when available."""
    payload = {
        "kind": "mti-final",
        "problem": problem.name,
        "lam": _f17(problem.lam),
        "domain": [_f17(problem.a), _f17(problem.b), problem.dim],
        "n": n,
        "eps": _f17(eps),
        "tau": _f17(tau),
        "T": _f17(t_end),
    }
    path = _cache_path(cache_dir, payload)
    if os.path.exists(path):
        with np.load(path) as z:
            return FieldState(u=z["u"], udot=z["udot"], t=float(z["t"]))
    final = run_mti(problem, eps, n, tau, t_end).final
    _atomic_save_npz(path, u=final.u, udot=final.udot, t=final.t, key=json.dumps(payload))
    return final


def probe_reference(
    problem: Problem,
    eps: float,
    n: int,
    tau: float,
    t_end: float,
    query_times: list[float],
    probe_index,
    cache_dir: str,
) -> np.ndarray:
    """u(x_probe, t) along a fine-step run at the query times (cached)."""
    payload = {
        "kind": "mti-probe",
        "problem": problem.name,
        "lam": _f17(problem.lam),
        "domain": [_f17(problem.a), _f17(problem.b), problem.dim],
        "n": n,
        "eps": _f17(eps),
        "tau": _f17(tau),
        "T": _f17(t_end),
        "queries": [_f17(t) for t in query_times],
        "probe": list(np.atleast_1d(probe_index).astype(int).tolist()),
    }
    path = _cache_path(cache_dir, payload)
    if os.path.exists(path):
        with np.load(path) as z:
            return z["values"]
    traj = run_mti(problem, eps, n, tau, t_end, record_times=list(query_times))
    idx = tuple(np.atleast_1d(probe_index).astype(int))
    values = np.array([st.u[idx] for st in traj.states])
    _atomic_save_npz(path, values=values, key=json.dumps(payload))
    return values


def _map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _pairwise_rate(e_prev: float, e_cur: float, ratio: float):
    if e_prev <= 0.0 or e_cur <= 0.0:
        return None
    return math.log(e_prev / e_cur) / math.log(ratio)


def _compare(num: FieldState, grid: SpectralGrid, ref: FieldState,
             ref_grid: SpectralGrid, eps: float) -> Cell:
    """Error cell of a numeric state against a (possibly finer) reference."""
    ref_c = restrict_state(ref, ref_grid, grid)
    e = num.u - ref_c.u
    edot = num.udot - ref_c.udot
    return Cell(
        e_h1=grid.h1_norm(e),
        edot_h1=grid.h1_norm(edot),
        l2_error=grid.l2_norm(e),
        energy_err=error_energy(e, edot, eps, grid),
    )


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def _write_table(table: ErrorTable, cfg: ExperimentConfig, stem: str) -> list[str]:
    paths = []
    if "csv" in cfg.formats:
        p = os.path.join(cfg.out_dir, f"{stem}.csv")
        _write_text(p, table.to_csv())
        paths.append(p)
    if "json" in cfg.formats:
        p = os.path.join(cfg.out_dir, f"{stem}.json")
        _write_text(p, table.to_json())
        paths.append(p)
    return paths


def _fmt_num(x: float) -> str:
    return format(x, ".17g")


# ------------------------------------------------------------------- cmd: solve


@dataclass
class SolveResult:
    paths: list[str]
    energy_drift: float
    n_steps: int
    wall_time: float
    trajectory: Trajectory


def cmd_solve(cfg: ExperimentConfig, eps: float | None = None) -> SolveResult:
    """Run one simulation, write snapshots and metadata."""
    cfg.ensure_valid()
    problem = cfg.effective_problem()
    eps = cfg.eps_list[0] if eps is None else eps
    tau, t_end = cfg.tau_list[0], cfg.t_end
    n = cfg.grid_n(problem, cfg.h_list[0])
    grid = problem.grid(n)

    record = sorted({0.0, t_end} | {t for t in cfg.snapshot_times if 0.0 <= t <= t_end})
    t0 = time.perf_counter()
    traj = run_mti(problem, eps, n, tau, t_end, record_times=record)
    wall = time.perf_counter() - t0

    e_start = energy(traj.states[0].u, traj.states[0].udot, eps, problem.lam, grid)
    e_final = energy(traj.final.u, traj.final.udot, eps, problem.lam, grid)
    drift = abs(e_final - e_start) / max(abs(e_start), 1e-300)

    tag = format(eps, ".6g")
    paths: list[str] = []
    if "csv" in cfg.formats:
        lines = [
            f"# problem: {problem.name}",
            f"# scheme: {SCHEME}",
            f"# eps: {_fmt_num(eps)}",
            f"# lam: {_fmt_num(problem.lam)}",
            f"# tau: {_fmt_num(tau)}",
            f"# n: {n}",
            f"# config: {cfg.physics_hash()}",
        ]
        if grid.dim == 1:
            lines.append("t,x,u,udot")
            for st in traj.states:
                for j in range(n):
                    lines.append(
                        f"{_fmt_num(st.t)},{_fmt_num(grid.x[j])},"
                        f"{_fmt_num(st.u[j])},{_fmt_num(st.udot[j])}"
                    )
        else:
            lines.append("t,x,y,u,udot")
            for st in traj.states:
                for i in range(n):
                    for j in range(n):
                        lines.append(
                            f"{_fmt_num(st.t)},{_fmt_num(grid.x[i])},{_fmt_num(grid.x[j])},"
                            f"{_fmt_num(st.u[i, j])},{_fmt_num(st.udot[i, j])}"
                        )
        p = os.path.join(cfg.out_dir, f"solve_eps{tag}.csv")
        _write_text(p, "\n".join(lines) + "\n")
        paths.append(p)

    # raw spectral dump of the final state for downstream tooling
    spec_path = os.path.join(cfg.out_dir, f"solve_eps{tag}_spectrum.npz")
    _atomic_save_npz(
        spec_path, uhat=grid.forward(traj.final.u), udothat=grid.forward(traj.final.udot),
        t=traj.final.t,
    )
    paths.append(spec_path)

    if "json" in cfg.formats:
        meta = {
            "problem": problem.name,
            "scheme": SCHEME,
            "version": __version__,
            "eps": eps,
            "lam": problem.lam,
            "tau": tau,
            "n": n,
            "T": t_end,
            "n_steps": traj.n_steps,
            "energy_drift_rel": drift,
            "wall_time_s": wall,
            "config": cfg.physics_hash(),
            "snapshots": [st.t for st in traj.states],
        }
        p = os.path.join(cfg.out_dir, f"solve_eps{tag}.meta.json")
        _write_text(p, json.dumps(meta, indent=2))
        paths.append(p)
    return SolveResult(paths=paths, energy_drift=drift, n_steps=traj.n_steps,
                       wall_time=wall, trajectory=traj)


# --------------------------------------------------------------- cmd: temporal


def cmd_table_temporal(cfg: ExperimentConfig) -> tuple[ErrorTable, list[str]]:
    """Temporal-error table at fixed h, with the uniform-error summary rows."""
    cfg.ensure_valid(swept=("tau",))
    problem = cfg.effective_problem()
    h = cfg.h_list[0]
    n = cfg.grid_n(problem, h)
    grid = problem.grid(n)
    h_ref = h if cfg.h_ref is None else cfg.h_ref
    n_ref = cfg.grid_n(problem, h_ref)
    ref_grid = problem.grid(n_ref)
    taus = sorted(cfg.tau_list, reverse=True)
    cache = cfg.effective_cache_dir()

    table = ErrorTable(
        eps_list=list(cfg.eps_list), h_list=[h], tau_list=taus,
        metadata={
            "study": "temporal",
            "problem": problem.name,
            "lam": _f17(problem.lam),
            "T": _f17(cfg.t_end),
            "h": _f17(h),
            "tau_ref": _f17(cfg.tau_ref),
            "reference": f"same scheme at tau_ref={cfg.tau_ref:g}, h_ref={h_ref:g}",
            "comparison": "same-grid" if n_ref == n else "spectral truncation to the coarse band",
            "norms": NORM_NOTE,
            "config": cfg.physics_hash(),
            "scheme": SCHEME,
        },
    )

    t0 = time.perf_counter()

    def one_eps(eps: float) -> tuple[float, list[Cell]]:
        ref = reference_state(problem, eps, n_ref, cfg.tau_ref, cfg.t_end, cache)
        cells = []
        for tau in taus:
            fin = run_mti(problem, eps, n, tau, cfg.t_end).final
            cells.append(_compare(fin, grid, ref, ref_grid, eps))
        return eps, cells

    for eps, cells in _map(one_eps, list(cfg.eps_list), cfg.jobs):
        prev = None
        for tau, cell in zip(taus, cells):
            rate = None if prev is None else _pairwise_rate(prev[1].e_h1, cell.e_h1, prev[0] / tau)
            table.add(eps, h, tau, dataclasses.replace(cell, rate=rate))
            prev = (tau, cell)

    # uniform-in-eps summary rows (meaningful once several eps are present)
    prev_e, prev_tau = None, None
    for tau in taus:
        e_star = uniform_error({eps: table.get(eps, h, tau).e_h1 for eps in cfg.eps_list})
        rate = None if prev_e is None else _pairwise_rate(prev_e, e_star, prev_tau / tau)
        table.add("max", h, tau, Cell(e_h1=e_star, rate=rate))
        prev_e, prev_tau = e_star, tau

    table.metadata["_wall_time_s"] = f"{time.perf_counter() - t0:.3f}"
    return table, _write_table(table, cfg, "table_temporal")


# ---------------------------------------------------------------- cmd: spatial


def cmd_table_spatial(cfg: ExperimentConfig) -> tuple[ErrorTable, list[str]]:
    """Spatial-error table at fixed small tau against a finer-grid reference."""
    cfg.ensure_valid(swept=("h",))
    problem = cfg.effective_problem()
    tau = cfg.tau_list[0]
    hs = sorted(cfg.h_list, reverse=True)
    h_ref = (min(hs) / 2.0) if cfg.h_ref is None else cfg.h_ref
    if h_ref >= min(hs):
        raise ValueError(f"h_ref={h_ref} must be strictly finer than the finest swept h={min(hs)}")
    n_ref = cfg.grid_n(problem, h_ref)
    ref_grid = problem.grid(n_ref)
    cache = cfg.effective_cache_dir()

    table = ErrorTable(
        eps_list=list(cfg.eps_list), h_list=hs, tau_list=[tau],
        metadata={
            "study": "spatial",
            "problem": problem.name,
            "lam": _f17(problem.lam),
            "T": _f17(cfg.t_end),
            "tau": _f17(tau),
            "tau_ref": _f17(cfg.tau_ref),
            "reference": f"same scheme at h_ref={h_ref:g} (n={n_ref}), tau_ref={cfg.tau_ref:g}",
            "comparison": "spectral truncation to the coarse band",
            "norms": NORM_NOTE,
            "config": cfg.physics_hash(),
            "scheme": SCHEME,
        },
    )

    t0 = time.perf_counter()

    def one_eps(eps: float) -> tuple[float, list[Cell]]:
        ref = reference_state(problem, eps, n_ref, cfg.tau_ref, cfg.t_end, cache)
        cells = []
        for h in hs:
            n = cfg.grid_n(problem, h)
            fin = run_mti(problem, eps, n, tau, cfg.t_end).final
            cells.append(_compare(fin, problem.grid(n), ref, ref_grid, eps))
        return eps, cells

    for eps, cells in _map(one_eps, list(cfg.eps_list), cfg.jobs):
        prev = None
        for h, cell in zip(hs, cells):
            rate = None if prev is None else _pairwise_rate(prev[1].e_h1, cell.e_h1, prev[0] / h)
            table.add(eps, h, tau, dataclasses.replace(cell, rate=rate))
            prev = (h, cell)

    table.metadata["_wall_time_s"] = f"{time.perf_counter() - t0:.3f}"
    return table, _write_table(table, cfg, "table_spatial")


# ----------------------------------------------------------- cmd: interp error


@dataclass
class InterpResult:
    paths: list[str]
    max_err: dict  # eps -> max |u(x0,t) - U(x0,t)| over the query times
    endpoint_err: dict  # eps -> max over step boundaries (identity: exactly 0)


def cmd_interp_error(cfg: ExperimentConfig) -> InterpResult:
    """Dense-in-time interpolation error at a probe point vs a fine reference."""
    cfg.ensure_valid(swept=("tau",))
    problem = cfg.effective_problem()
    if problem.dim != 1:
        raise ValueError("the interpolation study is defined for 1D problems")
    tau, t_end = cfg.tau_list[0], cfg.t_end
    n = cfg.grid_n(problem, cfg.h_list[0])
    grid = problem.grid(n)
    cache = cfg.effective_cache_dir()

    j = int(np.argmin(np.abs(grid.x - cfg.probe_x)))
    if abs(grid.x[j] - cfg.probe_x) > 1e-12:
        raise ValueError(f"probe x={cfg.probe_x} is not a grid node")
    queries = [i * t_end / (cfg.n_query - 1) for i in range(cfg.n_query)]

    rows = []
    max_err: dict = {}
    endpoint_err: dict = {}
    n_full = int(math.floor(t_end / tau + 1e-9))
    boundaries = [k * tau for k in range(n_full + 1)]
    if boundaries[-1] < t_end - 1e-9 * max(1.0, t_end):
        boundaries.append(t_end)

    for eps in cfg.eps_list:
        u_ref = probe_reference(problem, eps, n, cfg.tau_ref, t_end, queries, j, cache)
        traj = run_mti(problem, eps, n, tau, t_end, keep_micro=True, record_times=boundaries)
        u_int = np.array([interpolate(traj, t)[j] for t in queries])
        err = np.abs(u_int - u_ref)
        max_err[eps] = float(np.max(err))
        # endpoint identity: at step boundaries the interpolant equals the
        # stepper state bit for bit
        worst = 0.0
        for k, st in enumerate(traj.states):
            worst = max(worst, abs(interpolate(traj, st.t)[j] - st.u[j]))
        endpoint_err[eps] = worst
        for t, ur, ui, e in zip(queries, u_ref, u_int, err):
            rows.append(f"{_fmt_num(eps)},{_fmt_num(t)},{_fmt_num(ur)},{_fmt_num(ui)},{_fmt_num(e)}")

    paths: list[str] = []
    if "csv" in cfg.formats:
        head = [
            f"# problem: {problem.name}",
            f"# tau: {_fmt_num(tau)}",
            f"# tau_ref: {_fmt_num(cfg.tau_ref)}",
            f"# probe_x: {_fmt_num(grid.x[j])}",
            f"# config: {cfg.physics_hash()}",
            "eps,t,u_ref,u_interp,abs_err",
        ]
        p = os.path.join(cfg.out_dir, "interp_error.csv")
        _write_text(p, "\n".join(head + rows) + "\n")
        paths.append(p)
    if "json" in cfg.formats:
        p = os.path.join(cfg.out_dir, "interp_error.json")
        _write_text(p, json.dumps({
            "problem": problem.name,
            "tau": tau,
            "tau_ref": cfg.tau_ref,
            "probe_x": grid.x[j],
            "config": cfg.physics_hash(),
            "max_abs_err": {format(eps, ".6g"): v for eps, v in max_err.items()},
            "endpoint_err": {format(eps, ".6g"): v for eps, v in endpoint_err.items()},
        }, indent=2))
        paths.append(p)
    return InterpResult(paths=paths, max_err=max_err, endpoint_err=endpoint_err)


# ---------------------------------------------------------------- cmd: limits


@dataclass
class LimitsResult:
    paths: list[str]
    series: dict  # gamma -> eps -> {"t": [...], "e_sw": [...], "e_we": [...]}
    summary: dict  # gamma -> fitted constants


def _linear_fit(ts: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """Least-squares y ~ C1 + C2 t; returns (C1, C2, relative residual)."""
    A = np.vstack([np.ones_like(ts), ts]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    fit = A @ coef
    denom = np.linalg.norm(ys)
    resid = float(np.linalg.norm(ys - fit) / denom) if denom > 0 else 0.0
    return float(coef[0]), float(coef[1]), resid


def cmd_limits(cfg: ExperimentConfig) -> LimitsResult:
    """Limit-model scaling study: e_sw / e_we series per gamma choice."""
    cfg.ensure_valid()
    problem = cfg.effective_problem()
    if problem.dim != 1:
        raise ValueError("the limit study is defined for 1D problems")
    tau, t_end = cfg.tau_list[0], cfg.t_end
    n = cfg.grid_n(problem, cfg.h_list[0])
    grid = problem.grid(n)
    n_samples = int(round(t_end / cfg.sample_dt))
    samples = [k * cfg.sample_dt for k in range(n_samples + 1)]
    if abs(samples[-1] - t_end) > 1e-9:
        raise ValueError(f"sample_dt={cfg.sample_dt} does not divide T={t_end}")
    samples[-1] = t_end
    gammas = [GammaChoice.parse(g) for g in cfg.gamma_choices]

    series: dict = {g.value: {} for g in gammas}

    def one_eps(eps: float):
        phi1, phi2 = problem.initial_profiles(grid)
        u_traj = run_mti(problem, eps, n, tau, t_end, record_times=samples)
        v0 = make_v0(phi1, phi2)
        v_se = run_nlse(grid, problem.lam, tau, t_end, v0, record_times=samples)
        out = {}
        for gc in gammas:
            gamma = make_gamma(gc, v0, problem.lam, grid)
            v_sw = run_nlsw(grid, eps, problem.lam, tau, t_end, v0, gamma,
                            record_times=samples)
            e_sw_t, e_we_t = [], []
            for st in u_traj.states:
                vw = v_sw.field_at(st.t)
                e_sw_t.append(e_sw_field(st.u, vw, st.t, eps, grid))
                e_we_t.append(grid.h1_norm(vw - v_se.field_at(st.t)))
            out[gc.value] = {"t": [st.t for st in u_traj.states],
                             "e_sw": e_sw_t, "e_we": e_we_t}
        return eps, out

    for eps, out in _map(one_eps, list(cfg.eps_list), cfg.jobs):
        for gname, data in out.items():
            series[gname][eps] = data

    summary: dict = {}
    for gname, per_eps in series.items():
        c_vals, sw_at_1, we_fits = [], {}, {}
        for eps, data in per_eps.items():
            ts = np.asarray(data["t"])
            sw = np.asarray(data["e_sw"])
            we = np.asarray(data["e_we"])
            c_vals.append(np.max(sw) / eps**2)
            k1 = int(np.argmin(np.abs(ts - 1.0)))
            if abs(ts[k1] - 1.0) <= 1e-9:
                sw_at_1[eps] = float(sw[k1])
            c1, c2, resid = _linear_fit(ts, we / eps**2)
            we_fits[format(eps, ".6g")] = {"C1": c1, "C2": c2, "residual_rel": resid}
        eps_arr = np.array(sorted(per_eps), dtype=float)
        slope = None
        if len(sw_at_1) >= 2:
            le = np.log([sw_at_1[e] for e in sorted(sw_at_1)])
            lx = np.log(np.array(sorted(sw_at_1), dtype=float))
            slope = float(np.polyfit(lx, le, 1)[0])
        summary[gname] = {
            "C_gamma": float(np.exp(np.mean(np.log(c_vals)))),
            "e_sw_slope_at_t1": slope,
            "e_sw_at_t1": {format(e, ".6g"): v for e, v in sw_at_1.items()},
            "we_fit": we_fits,
            "eps": eps_arr.tolist(),
        }

    paths: list[str] = []
    head_common = [
        f"# problem: {problem.name}",
        f"# tau: {_fmt_num(tau)}",
        f"# T: {_fmt_num(t_end)}",
        f"# n: {n}",
        f"# config: {cfg.physics_hash()}",
    ]
    if "csv" in cfg.formats:
        for gname, per_eps in series.items():
            lines = head_common + [f"# gamma: {gname}", "eps,t,e_sw,e_we"]
            for eps in cfg.eps_list:
                data = per_eps[eps]
                for t, esw, ewe in zip(data["t"], data["e_sw"], data["e_we"]):
                    lines.append(f"{_fmt_num(eps)},{_fmt_num(t)},{_fmt_num(esw)},{_fmt_num(ewe)}")
            p = os.path.join(cfg.out_dir, f"limits_{gname}.csv")
            _write_text(p, "\n".join(lines) + "\n")
            paths.append(p)
    if "json" in cfg.formats:
        p = os.path.join(cfg.out_dir, "limits_summary.json")
        _write_text(p, json.dumps({
            "problem": problem.name, "tau": tau, "T": t_end, "n": n,
            "config": cfg.physics_hash(), "gammas": summary,
        }, indent=2))
        paths.append(p)
    return LimitsResult(paths=paths, series=series, summary=summary)


# ------------------------------------------------------------- cmd: 2D dynamics


@dataclass
class Dynamics2dResult:
    paths: list[str]
    max_asymmetry: dict  # eps -> max over snapshots of |u(x,y) - u(-x,y)|
    energy_drift: dict  # eps -> relative drift at T
    snapshots: dict  # eps -> {t: 2D array}


def cmd_dynamics2d(cfg: ExperimentConfig) -> Dynamics2dResult:
    """2D benchmark run with heatmap-ready snapshot grids."""
    cfg.ensure_valid()
    problem = cfg.effective_problem()
    if problem.dim != 2:
        raise ValueError(f"dynamics2d needs a 2D problem, got '{problem.name}' (dim={problem.dim})")
    tau, t_end = cfg.tau_list[0], cfg.t_end
    n = cfg.grid_n(problem, cfg.h_list[0])
    grid = problem.grid(n)
    snaps = sorted({0.0, t_end} | {t for t in cfg.snapshot_times if 0.0 <= t <= t_end})

    paths: list[str] = []
    max_asym: dict = {}
    drift: dict = {}
    snapshots: dict = {}

    def one_eps(eps: float):
        phi1, phi2 = problem.initial_profiles(grid)
        traj = run_mti(problem, eps, n, tau, t_end, record_times=snaps)
        fields = {}
        asym = 0.0
        for st in traj.states:
            # at t=0 emit the raw initial data (the run itself starts from the
            # symmetrized projection)
            u = phi1 if st.t == 0.0 else st.u
            fields[st.t] = u
            asym = max(asym, float(np.max(np.abs(u[grid._reflect_idx, :] - u))))
        e0 = energy(traj.states[0].u, traj.states[0].udot, eps, problem.lam, grid)
        eT = energy(traj.final.u, traj.final.udot, eps, problem.lam, grid)
        return eps, fields, asym, abs(eT - e0) / max(abs(e0), 1e-300)

    for eps, fields, asym, d in _map(one_eps, list(cfg.eps_list), cfg.jobs):
        tag = format(eps, ".6g")
        max_asym[eps] = asym
        drift[eps] = d
        snapshots[eps] = fields
        if "csv" in cfg.formats:
            for t, u in fields.items():
                lines = [
                    f"# problem: {problem.name}",
                    f"# shape: {n},{n}",
                    f"# order: row-major (x index outer, y index inner)",
                    f"# domain: [{_fmt_num(problem.a)},{_fmt_num(problem.b)}]^2",
                    f"# eps: {_fmt_num(eps)}",
                    f"# t: {_fmt_num(t)}",
                    f"# config: {cfg.physics_hash()}",
                ]
                for i in range(n):
                    lines.append(",".join(_fmt_num(u[i, jj]) for jj in range(n)))
                p = os.path.join(cfg.out_dir, f"dyn2d_eps{tag}_t{format(t, '.6g')}.csv")
                _write_text(p, "\n".join(lines) + "\n")
                paths.append(p)

    if "json" in cfg.formats:
        p = os.path.join(cfg.out_dir, "dynamics2d_summary.json")
        _write_text(p, json.dumps({
            "problem": problem.name, "tau": tau, "T": t_end, "n": n,
            "config": cfg.physics_hash(),
            "snapshots": [float(t) for t in snaps],
            "max_asymmetry": {format(e, ".6g"): v for e, v in max_asym.items()},
            "energy_drift_rel": {format(e, ".6g"): v for e, v in drift.items()},
        }, indent=2))
        paths.append(p)
    return Dynamics2dResult(paths=paths, max_asymmetry=max_asym, energy_drift=drift,
                            snapshots=snapshots)
