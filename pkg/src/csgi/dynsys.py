"""Synthetic benchmark systems with known ground-truth coupling.

Each generator is a pure function of (parameters, seed): rerunning with the
same arguments gives bit-identical output. Map orbits that escape their
admissible range trigger a bounded, deterministic resample of the initial
conditions before the run is declared divergent.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DivergedError
from .timeseries import TimeSeries

__all__ = [
    "CouplingSchedule",
    "SimOutput",
    "rk4_integrate",
    "simulate_rossler_lorenz",
    "simulate_two_species",
    "simulate_coupled_ar",
    "simulate_henon",
    "simulate_henon_nonstationary",
]

FLOW_DIVERGENCE_LIMIT = 1e12
MAP_DIVERGENCE_LIMIT = 10.0
MAX_IC_RESAMPLES = 20


@dataclass(frozen=True)
class CouplingSchedule:
    """Piecewise-constant coupling strength over discrete time.

    breakpoints is an ordered tuple of (start_index, value); the value at
    step t is that of the last breakpoint with start_index <= t.
    """

    breakpoints: tuple

    def __post_init__(self):
        bps = tuple((int(s), float(v)) for s, v in self.breakpoints)
        if not bps:
            raise ValueError("schedule needs at least one breakpoint")
        if bps[0][0] != 0:
            raise ValueError("first breakpoint must start at index 0")
        starts = [s for s, _ in bps]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("breakpoint start indices must strictly increase")
        if any(v < 0 for _, v in bps):
            raise ValueError("coupling values must be >= 0")
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def constant(cls, value: float) -> "CouplingSchedule":
        return cls(((0, value),))

    def value_at(self, t: int) -> float:
        out = self.breakpoints[0][1]
        for start, value in self.breakpoints:
            if start <= t:
                out = value
            else:
                break
        return out

    def sample(self, n: int) -> np.ndarray:
        """Evaluate the schedule on steps 0..n-1."""
        out = np.empty(n)
        starts = [s for s, _ in self.breakpoints] + [n]
        for (start, value), nxt in zip(self.breakpoints, starts[1:]):
            if start >= n:
                break
            out[start : min(nxt, n)] = value
        return out

    def is_constant_zero(self) -> bool:
        return all(v == 0.0 for _, v in self.breakpoints)


@dataclass(frozen=True)
class SimOutput:
    """Named component series plus the coupling ground truth and seed."""

    series: dict
    coupling_truth: dict
    seed: int

    def __post_init__(self):
        lengths = {len(ts) for ts in self.series.values()}
        dts = {ts.dt for ts in self.series.values()}
        if len(lengths) > 1 or len(dts) > 1:
            raise ValueError("all component series must share length and dt")

    def __getitem__(self, key: str) -> TimeSeries:
        return self.series[key]

    def to_csv(self) -> str:
        """One column per component, header row of labels, no index column."""
        names = list(self.series)
        buf = io.StringIO()
        buf.write(",".join(names) + "\n")
        columns = [self.series[k].values for k in names]
        for row in zip(*columns):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def rk4_integrate(vector_field, initial_state, dt: float, n_steps: int) -> np.ndarray:
    """Classical fourth-order Runge-Kutta integration.

    Returns the trajectory including the initial state, shape
    (n_steps + 1, dim). Raises DivergedError when any component exceeds
    1e12 in magnitude.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    state = np.asarray(initial_state, dtype=np.float64)
    traj = np.empty((n_steps + 1, state.size))
    traj[0] = state
    for i in range(n_steps):
        k1 = vector_field(state)
        k2 = vector_field(state + 0.5 * dt * k1)
        k3 = vector_field(state + 0.5 * dt * k2)
        k4 = vector_field(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > FLOW_DIVERGENCE_LIMIT:
            raise DivergedError(f"trajectory diverged at step {i + 1}")
        traj[i + 1] = state
    return traj


def _rossler_lorenz_field(C: float):
    def field(s: np.ndarray) -> np.ndarray:
        x1, x2, x3, y1, y2, y3 = s
        return np.array(
            [
                -6.0 * (x2 + x3),
                6.0 * (x1 + 0.2 * x2),
                6.0 * (0.2 + x3 * (x1 - 5.7)),
                10.0 * (y2 - y1),
                28.0 * y1 - y2 - y1 * y3 + C * x2 * x2,
                y1 * y2 - (8.0 / 3.0) * y3,
            ]
        )

    return field


def simulate_rossler_lorenz(
    C: float,
    n: int = 300_000,
    burn_in: int = 30_000,
    dt: float = 0.1,
    seed: int = 0,
    substeps: int = 4,
) -> SimOutput:
    """Lorenz system driven by a (6x time-scaled) Rossler oscillator.

    The driving enters the second Lorenz equation as C * x2^2; there is no
    reverse coupling. Initial state is drawn uniformly from [-1, 1]^6.

    dt is the sampling interval of the emitted series; integration runs at
    dt/substeps because the 6x-scaled Rossler contraction rate (about -34
    near the attractor) puts a plain dt=0.1 step outside the RK4 stability
    region.
    """
    if C < 0:
        raise ValueError("C must be >= 0")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    rng = np.random.default_rng(seed)
    init = rng.uniform(-1.0, 1.0, 6)
    traj = rk4_integrate(
        _rossler_lorenz_field(C), init, dt / substeps, (burn_in + n) * substeps
    )
    kept = traj[::substeps][burn_in + 1 :]
    names = ("x1", "x2", "x3", "y1", "y2", "y3")
    series = {
        name: TimeSeries(kept[:, i], dt=dt, label=name) for i, name in enumerate(names)
    }
    return SimOutput(series=series, coupling_truth={"C_xy": C, "C_yx": 0.0}, seed=seed)


def _iterate_map(step, state0, n_total: int, limit: float) -> np.ndarray:
    """Run a discrete map, returning (n_total, dim) or raising DivergedError."""
    state = np.asarray(state0, dtype=np.float64)
    out = np.empty((n_total, state.size))
    for t in range(n_total):
        out[t] = state
        state = step(t, state)
        if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > limit:
            raise DivergedError(f"map orbit escaped at step {t + 1}")
    return out


def _run_with_resampling(draw_init, step, n_total: int, limit: float):
    """Retry escaped orbits with fresh initial conditions, up to a bound.

    draw_init consumes the caller's RNG, so retries are deterministic per
    seed.
    """
    last_err = None
    for _ in range(MAX_IC_RESAMPLES):
        try:
            return _iterate_map(step, draw_init(), n_total, limit)
        except DivergedError as err:
            last_err = err
    raise DivergedError(
        f"orbit still diverging after {MAX_IC_RESAMPLES} initial-condition resamples"
    ) from last_err


def simulate_two_species(
    C: float, n: int = 300_000, burn_in: int = 30_000, seed: int = 0
) -> SimOutput:
    """Bidirectionally coupled two-species logistic maps.

    x(t+1) = x(3.8 - 3.8 x - C y); y(t+1) = y(3.5 - 3.5 y - 5C x). The
    reverse coupling is five times stronger than the forward one. Initial
    conditions are uniform in (0.01, 0.99).
    """
    if C < 0:
        raise ValueError("C must be >= 0")
    rng = np.random.default_rng(seed)

    def step(t, s):
        x, y = s
        return np.array(
            [
                x * (3.8 - 3.8 * x - C * y),
                y * (3.5 - 3.5 * y - 5.0 * C * x),
            ]
        )

    orbit = _run_with_resampling(
        lambda: rng.uniform(0.01, 0.99, 2), step, burn_in + n, MAP_DIVERGENCE_LIMIT
    )
    kept = orbit[burn_in:]
    series = {
        "x": TimeSeries(kept[:, 0], label="x"),
        "y": TimeSeries(kept[:, 1], label="y"),
    }
    return SimOutput(
        series=series, coupling_truth={"C_xy": C, "C_yx": 5.0 * C}, seed=seed
    )


def simulate_coupled_ar(
    C: float,
    n: int = 300_000,
    burn_in: int = 30_000,
    noise_var: float = 0.1,
    seed: int = 0,
) -> SimOutput:
    """First-order coupled autoregressive pair with Gaussian innovations.

    x(t+1) = 0.5 x + 0.2 y + e_x; y(t+1) = C x + 0.7 y + e_y, where the
    innovations have variance noise_var (0.1 by default, read as a
    variance). y always drives x with strength 0.2; x drives y with
    strength C. Initial conditions are standard normal.
    """
    if C < 0:
        raise ValueError("C must be >= 0")
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    rng = np.random.default_rng(seed)
    total = burn_in + n
    std = float(np.sqrt(noise_var))
    init = rng.standard_normal(2)
    noise = rng.standard_normal((total, 2)) * std
    out = np.empty((total, 2))
    x, y = init
    for t in range(total):
        out[t] = (x, y)
        x, y = (
            0.5 * x + 0.2 * y + noise[t, 0],
            C * x + 0.7 * y + noise[t, 1],
        )
        if abs(x) > FLOW_DIVERGENCE_LIMIT or abs(y) > FLOW_DIVERGENCE_LIMIT:
            raise DivergedError(f"AR recursion diverged at step {t + 1}")
    kept = out[burn_in:]
    series = {
        "x": TimeSeries(kept[:, 0], label="x"),
        "y": TimeSeries(kept[:, 1], label="y"),
    }
    return SimOutput(
        series=series, coupling_truth={"C_xy": C, "C_yx": 0.2}, seed=seed
    )


def _henon_step(cxy: np.ndarray, cyx: np.ndarray):
    """Coupled Henon update with per-step coupling values.

    The quadratic term interpolates between self- and cross-products:
    y1' = 1.4 - (cxy*x1*y1 + (1-cxy)*y1^2) + 0.3*y2, and symmetrically for
    the x subsystem with cyx.
    """

    def step(t, s):
        x1, x2, y1, y2 = s
        a = cxy[t]
        b = cyx[t]
        return np.array(
            [
                1.4 - (b * y1 * x1 + (1.0 - b) * x1 * x1) + 0.3 * x2,
                x1,
                1.4 - (a * x1 * y1 + (1.0 - a) * y1 * y1) + 0.3 * y2,
                y1,
            ]
        )

    return step


def _simulate_henon_schedules(
    cxy: CouplingSchedule, cyx: CouplingSchedule, n: int, burn_in: int, seed: int
) -> SimOutput:
    total = burn_in + n
    cxy_vals = cxy.sample(total)
    cyx_vals = cyx.sample(total)
    rng_x = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    rng_y = np.random.default_rng(np.random.SeedSequence([seed, 1]))

    if cyx.is_constant_zero():
        # x evolves autonomously: simulate it first so the x orbit (and its
        # resampling) is identical for every forward-coupling choice.
        def x_step(t, s):
            x1, x2 = s
            return np.array([1.4 - x1 * x1 + 0.3 * x2, x1])

        x_orbit = _run_with_resampling(
            lambda: rng_x.uniform(-0.5, 0.5, 2), x_step, total, MAP_DIVERGENCE_LIMIT
        )

        def y_step(t, s):
            y1, y2 = s
            a = cxy_vals[t]
            x1 = x_orbit[t, 0]
            return np.array(
                [1.4 - (a * x1 * y1 + (1.0 - a) * y1 * y1) + 0.3 * y2, y1]
            )

        y_orbit = _run_with_resampling(
            lambda: rng_y.uniform(-0.5, 0.5, 2), y_step, total, MAP_DIVERGENCE_LIMIT
        )
        orbit = np.hstack([x_orbit, y_orbit])
    else:
        step = _henon_step(cxy_vals, cyx_vals)

        def draw():
            return np.concatenate(
                [rng_x.uniform(-0.5, 0.5, 2), rng_y.uniform(-0.5, 0.5, 2)]
            )

        orbit = _run_with_resampling(draw, step, total, MAP_DIVERGENCE_LIMIT)

    kept = orbit[burn_in:]
    names = ("x1", "x2", "y1", "y2")
    series = {
        name: TimeSeries(kept[:, i], label=name) for i, name in enumerate(names)
    }
    return SimOutput(
        series=series, coupling_truth={"C_xy": cxy, "C_yx": cyx}, seed=seed
    )


def simulate_henon(
    C: float, n: int = 300_000, burn_in: int = 30_000, seed: int = 0
) -> SimOutput:
    """Two Henon maps with unidirectional coupling of strength C from the x
    subsystem into the y subsystem; the x subsystem never depends on C."""
    if C < 0:
        raise ValueError("C must be >= 0")
    return _simulate_henon_schedules(
        CouplingSchedule.constant(C), CouplingSchedule.constant(0.0), n, burn_in, seed
    )


def simulate_henon_nonstationary(
    cxy: CouplingSchedule,
    cyx: CouplingSchedule,
    n: int,
    burn_in: int = 30_000,
    seed: int = 0,
) -> SimOutput:
    """Coupled Henon maps whose coupling strengths follow piecewise-constant
    schedules evaluated per step (burn-in steps included in schedule time)."""
    return _simulate_henon_schedules(cxy, cyx, n, burn_in, seed)
