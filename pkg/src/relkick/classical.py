"""Classical bounce-kick map for a relativistic particle in a 1D box.

Between kicks the particle moves freely with speed v = p / sqrt(p^2 + 1) and
reflects specularly off the walls at 0 and L. Each kick adds
kappa * sin(2*pi*x/lambda) to the momentum. Every function here accepts
scalar or array-valued states, so a whole ensemble advances in one call.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, RunConfig, kick_amplitude, rng, validate


@dataclass(frozen=True)
class ClassicalState:
    """Phase point(s) plus the cumulative number of wall reflections."""

    x: np.ndarray | float
    p: np.ndarray | float
    bounces: np.ndarray | int = 0

    @property
    def speed(self):
        return np.abs(velocity(self.p))

    @property
    def kinetic_energy(self):
        return kinetic_energy(self.p)


@dataclass(frozen=True)
class EnergySeries:
    kicks: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    initial_mean: float
    initial_var: float


def velocity(p):
    return p / np.sqrt(p * p + 1.0)


def kinetic_energy(p):
    """Rest-mass-subtracted kinetic energy sqrt(p^2 + 1) - 1.

    Written as p^2 / (sqrt(p^2 + 1) + 1) to stay accurate for small p.
    """
    p2 = np.square(p)
    return p2 / (np.sqrt(p2 + 1.0) + 1.0)


def _fold(s, L):
    """Fold unfolded positions ``s`` into [0, L]; return (x, wall crossings)."""
    r = np.mod(s, 2.0 * L)
    x = np.where(r > L, 2.0 * L - r, r)
    crossings = np.abs(np.floor(s / L)).astype(np.int64)
    return x, crossings


def free_flight(state: ClassicalState, duration: float, L: float) -> ClassicalState:
    """Exact constant-speed motion with specular reflections at 0 and L."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration!r}")
    s = state.x + velocity(state.p) * duration
    x, crossings = _fold(s, L)
    p = np.where(crossings % 2 == 1, -state.p, state.p)
    if np.ndim(x) == 0:
        return ClassicalState(float(x), float(p), int(state.bounces + crossings))
    return ClassicalState(x, p, state.bounces + crossings)


def kick(state: ClassicalState, params: PhysicalParams) -> ClassicalState:
    kappa = kick_amplitude(params)
    p = state.p + kappa * np.sin((2.0 * math.pi / params.wavelength) * np.asarray(state.x))
    if np.ndim(p) == 0:
        p = float(p)
    return ClassicalState(state.x, p, state.bounces)


def map_step(state: ClassicalState, params: PhysicalParams) -> ClassicalState:
    """One period: free flight for T, then the kick at the new position."""
    return kick(free_flight(state, params.kick_period, params.box_length), params)


def _iterate(x, p, params: PhysicalParams, n_kicks: int, record):
    """Hot loop shared by trajectory and ensemble runs.

    ``record(k, x, p, crossings)`` is called after every kick, k = 1..n_kicks.
    Works on float64 arrays in place where possible.
    """
    L = params.box_length
    T = params.kick_period
    twoL = 2.0 * L
    kappa = kick_amplitude(params)
    wavenumber = 2.0 * math.pi / params.wavelength
    x = np.array(x, dtype=np.float64, copy=True)
    p = np.array(p, dtype=np.float64, copy=True)
    s = np.empty_like(x)
    for k in range(1, n_kicks + 1):
        np.multiply(p, p, out=s)
        s += 1.0
        np.sqrt(s, out=s)
        np.divide(p, s, out=s)
        s *= T
        s += x
        crossings = np.floor(s / L)
        np.mod(s, twoL, out=x)
        np.subtract(twoL, x, out=x, where=x > L)
        np.negative(p, out=p, where=np.mod(crossings, 2.0) == 1.0)
        if kappa != 0.0:
            p += kappa * np.sin(wavenumber * x)
        record(k, x, p, crossings)
    return x, p


def trajectory(initial: ClassicalState, params: PhysicalParams, n_kicks: int) -> ClassicalState:
    """States after each of ``n_kicks`` map steps.

    Returns a ClassicalState whose fields carry a leading axis of length
    ``n_kicks`` (entry k-1 is the state after kick k). ``initial`` may itself
    be an ensemble, in which case the trailing axes follow its shape.
    """
    validate(params)
    if n_kicks < 1:
        raise ValueError("n_kicks must be >= 1")
    shape = np.shape(initial.x)
    xs = np.empty((n_kicks,) + shape)
    ps = np.empty((n_kicks,) + shape)
    bs = np.empty((n_kicks,) + shape, dtype=np.int64)
    total = np.broadcast_to(np.asarray(initial.bounces, dtype=np.int64), shape).ravel().copy()

    def record(k, x, p, crossings):
        total[:] += np.abs(crossings).astype(np.int64)
        xs[k - 1] = x.reshape(shape)
        ps[k - 1] = p.reshape(shape)
        bs[k - 1] = total.reshape(shape)

    _iterate(np.ravel(initial.x), np.ravel(initial.p), params, n_kicks, record)
    return ClassicalState(xs, ps, bs)


def initial_ensemble(params: PhysicalParams, config: RunConfig,
                     momentum_halfwidth: float = 0.1) -> ClassicalState:
    """Seeded ensemble: x uniform on (0, L), p uniform on [-w, w]."""
    gen = rng(config.seed, 0)
    n = config.ensemble_size
    x = gen.uniform(0.0, params.box_length, n)
    p = gen.uniform(-momentum_halfwidth, momentum_halfwidth, n)
    return ClassicalState(x, p, np.zeros(n, dtype=np.int64))


def ensemble_energy(params: PhysicalParams, config: RunConfig,
                    initial: ClassicalState | None = None) -> EnergySeries:
    """Ensemble mean and variance of the kinetic energy after every kick."""
    validate(params)
    if initial is None:
        initial = initial_ensemble(params, config)
    n = config.n_kicks
    mean = np.empty(n)
    var = np.empty(n)

    def record(k, x, p, crossings):
        e = kinetic_energy(p)
        mean[k - 1] = e.mean()
        var[k - 1] = e.var()

    e0 = kinetic_energy(np.asarray(initial.p, dtype=np.float64))
    _iterate(initial.x, initial.p, params, n, record)
    return EnergySeries(np.arange(1, n + 1), mean, var, float(e0.mean()), float(e0.var()))


def _sweep_cells(args):
    cells, eps_grid, T_grid, params, config = args
    out = []
    for idx in cells:
        i, j = divmod(idx, len(T_grid))
        cell = PhysicalParams(params.box_length, params.wavelength,
                              float(eps_grid[i]), float(T_grid[j]),
                              params.kick_amplitude_mode)
        out.append((idx, ensemble_energy(cell, config).mean[-1]))
    return out


def default_workers() -> int:
    env = os.environ.get("RELKICK_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def parameter_sweep(eps_grid, T_grid, params: PhysicalParams, config: RunConfig,
                    workers: int | None = None) -> np.ndarray:
    """Final-kick ensemble mean energy on an (eps, T) grid.

    Every cell starts from the same seeded ensemble. Cells are distributed over
    ``workers`` processes and merged by cell index, so the result does not
    depend on the worker count. Result shape is (len(eps_grid), len(T_grid)).
    """
    from .io import sweep_schedule

    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    T_grid = np.asarray(T_grid, dtype=np.float64)
    if workers is None:
        workers = default_workers()
    parts = sweep_schedule((len(eps_grid), len(T_grid)), workers)
    jobs = [(part, eps_grid, T_grid, params, config) for part in parts if part]
    result = np.empty(len(eps_grid) * len(T_grid))
    if workers == 1 or len(jobs) <= 1:
        chunks = list(map(_sweep_cells, jobs))
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            chunks = list(pool.map(_sweep_cells, jobs))
    for chunk in chunks:
        for idx, value in chunk:
            result[idx] = value
    return result.reshape(len(eps_grid), len(T_grid))


def default_sweep_grid(n_eps: int = 64, n_T: int = 64, eps_max: float = 0.2,
                       T_max: float = 200.0) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grids on (0, eps_max] and (0, T_max], endpoints included."""
    eps = eps_max * np.arange(1, n_eps + 1) / n_eps
    T = T_max * np.arange(1, n_T + 1) / n_T
    return eps, T
