"""Trajectory generation: the discrete accelerated scheme (gradient or
proximal steps, time map t_n = n*sqrt(h)) and a fixed-step RK4 integrator of
the damped second-order flow  x'' + (alpha/t) x' + grad F(x) = 0.

Single runs are strictly sequential; distinct runs are independent and the
returned Trajectory values are immutable arrays, safe to share across
workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .objectives import ObjectiveSpec

MODES = ("nesterov", "prox-nesterov", "ode-rk4")


@dataclass
class SchemeState:
    """One step of the discrete scheme; x_prev == x_curr encodes a rest start."""

    n: int
    x_curr: object
    x_prev: object
    alpha: float
    h: float


@dataclass
class OdeState:
    t: float
    x: object
    v: object


@dataclass(frozen=True)
class Trajectory:
    """Recorded (t, x, v, gap) samples of one run.

    For scheme runs v is the divided difference (x_n - x_{n-1})/sqrt(h) and
    t = n*sqrt(h) computed from the recorded index (no accumulated drift);
    for integrator runs v is the state velocity and t = t0 + k*dt.
    """

    mode: str
    objective_name: str
    alpha: float
    step: float              # h for schemes, dt for the integrator
    t0: float                # 0.0 for schemes
    stride: int
    n: np.ndarray            # record indices, shape (N,)
    t: np.ndarray            # shape (N,)
    x: np.ndarray            # shape (N, dim)
    v: np.ndarray            # shape (N, dim)
    gap: np.ndarray          # F(x) - F*, shape (N,)
    error: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def is_scheme(self) -> bool:
        return self.mode != "ode-rk4"

    def __len__(self) -> int:
        return len(self.n)


# ---------------------------------------------------------------------------
# single-step operations
# ---------------------------------------------------------------------------

def _momentum(n: int, alpha: float) -> float:
    return n / (n + alpha)


def nesterov_step(state: SchemeState, obj: ObjectiveSpec) -> SchemeState:
    """Extrapolate with factor n/(n+alpha), then take one gradient step."""
    m = _momentum(state.n, state.alpha)
    y = state.x_curr + m * (state.x_curr - state.x_prev)
    g = obj.gradient(y)
    x_new = y - state.h * g
    if not _finite(x_new):
        raise FloatingPointError(f"non-finite state after step {state.n}")
    return SchemeState(state.n + 1, x_new, state.x_curr, state.alpha, state.h)


def prox_nesterov_step(state: SchemeState, obj: ObjectiveSpec) -> SchemeState:
    """Same extrapolation as nesterov_step, proximal step instead of gradient."""
    if obj.prox is None:
        raise ValueError(f"objective {obj.name} exposes no prox")
    m = _momentum(state.n, state.alpha)
    y = state.x_curr + m * (state.x_curr - state.x_prev)
    x_new = obj.prox(state.h, y)
    if not _finite(x_new):
        raise FloatingPointError(f"non-finite state after step {state.n}")
    return SchemeState(state.n + 1, x_new, state.x_curr, state.alpha, state.h)


def ode_rk4_step(state: OdeState, obj: ObjectiveSpec, dt: float, alpha: float) -> OdeState:
    """One classical RK4 step of (x' = v, v' = -(alpha/t) v - grad F(x)).

    Requires 0 < dt <= state.t so no stage ever samples the damping at t <= 0.
    """
    if alpha <= 0.0:
        raise ValueError(f"ode_rk4_step requires alpha > 0, got {alpha}")
    if dt <= 0.0 or dt > state.t:
        raise ValueError(f"ode_rk4_step requires 0 < dt <= t, got dt={dt}, t={state.t}")
    t, x, v = state.t, state.x, state.v
    grad = obj.gradient
    a1x = v
    a1v = -(alpha / t) * v - grad(x)
    t2 = t + 0.5 * dt
    x2 = x + 0.5 * dt * a1x
    v2 = v + 0.5 * dt * a1v
    a2x = v2
    a2v = -(alpha / t2) * v2 - grad(x2)
    x3 = x + 0.5 * dt * a2x
    v3 = v + 0.5 * dt * a2v
    a3x = v3
    a3v = -(alpha / t2) * v3 - grad(x3)
    t4 = t + dt
    x4 = x + dt * a3x
    v4 = v + dt * a3v
    a4x = v4
    a4v = -(alpha / t4) * v4 - grad(x4)
    x_new = x + (dt / 6.0) * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
    v_new = v + (dt / 6.0) * (a1v + 2.0 * a2v + 2.0 * a3v + a4v)
    if not (_finite(x_new) and _finite(v_new)):
        raise FloatingPointError(f"non-finite state at t={t}")
    return OdeState(t4, x_new, v_new)


def _finite(x) -> bool:
    if isinstance(x, float):
        return math.isfinite(x)
    return bool(np.all(np.isfinite(x)))


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

class _Recorder:
    def __init__(self, dim: int):
        self.dim = dim
        self.ns: list = []
        self.xs: list = []
        self.vs: list = []

    def add(self, n: int, x, v) -> None:
        self.ns.append(n)
        self.xs.append(x)
        self.vs.append(v)

    def arrays(self):
        n = np.asarray(self.ns, dtype=np.int64)
        x = np.asarray(self.xs, dtype=float).reshape(len(self.ns), self.dim)
        v = np.asarray(self.vs, dtype=float).reshape(len(self.ns), self.dim)
        return n, x, v


def run_scheme(
    obj: ObjectiveSpec,
    alpha: float,
    h: float,
    steps: int,
    x0,
    stride: int = 100,
    use_prox: bool = False,
) -> Trajectory:
    """Run the discrete scheme from rest (x_prev = x_curr = x0).

    Records every ``stride``-th state plus first and last.  A non-finite
    state aborts the run; the partial trajectory carries an error marker and
    the last finite state as its final record.
    """
    if alpha <= 0.0 or h <= 0.0 or steps < 1 or stride < 1:
        raise ValueError("run_scheme requires alpha > 0, h > 0, steps >= 1, stride >= 1")
    if use_prox and obj.prox is None:
        raise ValueError(f"objective {obj.name} exposes no prox")
    sqrt_h = math.sqrt(h)
    rec = _Recorder(obj.dim)
    error = None
    if obj.dim == 1:
        x = float(np.asarray(x0).reshape(()))
        xp = x
        rec.add(0, x, 0.0)
        grad = obj.gradient
        prox = obj.prox
        for n in range(steps):
            m = n / (n + alpha)
            y = x + m * (x - xp)
            if use_prox:
                xn = prox(h, y)
            else:
                xn = y - h * grad(y)
            xp = x
            x = xn
            if not math.isfinite(x):
                error = f"non-finite state at step {n + 1}"
                break
            k = n + 1
            if k % stride == 0 or k == steps:
                rec.add(k, x, (x - xp) / sqrt_h)
    else:
        x = np.asarray(x0, dtype=float).copy()
        xp = x.copy()
        rec.add(0, x.copy(), np.zeros(obj.dim))
        for n in range(steps):
            m = n / (n + alpha)
            y = x + m * (x - xp)
            if use_prox:
                xn = obj.prox(h, y)
            else:
                xn = y - h * obj.gradient(y)
            xp = x
            x = xn
            if not np.all(np.isfinite(x)):
                error = f"non-finite state at step {n + 1}"
                break
            k = n + 1
            if k % stride == 0 or k == steps:
                rec.add(k, x.copy(), (x - xp) / sqrt_h)
    n_arr, x_arr, v_arr = rec.arrays()
    t_arr = n_arr * sqrt_h
    gap = _gaps(obj, x_arr)
    return Trajectory(
        mode="prox-nesterov" if use_prox else "nesterov",
        objective_name=obj.name,
        alpha=alpha,
        step=h,
        t0=0.0,
        stride=stride,
        n=n_arr,
        t=t_arr,
        x=x_arr,
        v=v_arr,
        gap=gap,
        error=error,
    )


def run_ode(
    obj: ObjectiveSpec,
    alpha: float,
    dt: float,
    t0: float,
    steps: int,
    x0,
    v0=None,
    stride: int = 100,
) -> Trajectory:
    """Integrate the flow with fixed-step RK4 from (x0, v0) at t0.

    t0 is clamped up to dt (the damping is singular at 0, t0 > 0 mandatory);
    times are t0 + k*dt computed from the step index.
    """
    if alpha <= 0.0 or dt <= 0.0 or steps < 1 or stride < 1:
        raise ValueError("run_ode requires alpha > 0, dt > 0, steps >= 1, stride >= 1")
    if t0 <= 0.0:
        raise ValueError(f"run_ode requires t0 > 0, got {t0}")
    t0 = max(t0, dt)
    rec = _Recorder(obj.dim)
    error = None
    if obj.dim == 1:
        x = float(np.asarray(x0).reshape(()))
        v = 0.0 if v0 is None else float(np.asarray(v0).reshape(()))
        rec.add(0, x, v)
        grad = obj.gradient
        for k in range(steps):
            t = t0 + k * dt
            a1x = v
            a1v = -(alpha / t) * v - grad(x)
            t2 = t + 0.5 * dt
            x2 = x + 0.5 * dt * a1x
            v2 = v + 0.5 * dt * a1v
            a2x = v2
            a2v = -(alpha / t2) * v2 - grad(x2)
            x3 = x + 0.5 * dt * a2x
            v3 = v + 0.5 * dt * a2v
            a3x = v3
            a3v = -(alpha / t2) * v3 - grad(x3)
            t4 = t + dt
            x4 = x + dt * a3x
            v4 = v + dt * a3v
            a4x = v4
            a4v = -(alpha / t4) * v4 - grad(x4)
            x = x + (dt / 6.0) * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
            v = v + (dt / 6.0) * (a1v + 2.0 * a2v + 2.0 * a3v + a4v)
            if not (math.isfinite(x) and math.isfinite(v)):
                error = f"non-finite state at step {k + 1}"
                break
            kk = k + 1
            if kk % stride == 0 or kk == steps:
                rec.add(kk, x, v)
    else:
        state = OdeState(
            t0,
            np.asarray(x0, dtype=float).copy(),
            np.zeros(obj.dim) if v0 is None else np.asarray(v0, dtype=float).copy(),
        )
        rec.add(0, state.x.copy(), state.v.copy())
        for k in range(steps):
            state = OdeState(t0 + k * dt, state.x, state.v)
            try:
                state = ode_rk4_step(state, obj, dt, alpha)
            except FloatingPointError as exc:
                error = str(exc)
                break
            kk = k + 1
            if kk % stride == 0 or kk == steps:
                rec.add(kk, state.x.copy(), state.v.copy())
    n_arr, x_arr, v_arr = rec.arrays()
    t_arr = t0 + n_arr * dt
    gap = _gaps(obj, x_arr)
    return Trajectory(
        mode="ode-rk4",
        objective_name=obj.name,
        alpha=alpha,
        step=dt,
        t0=t0,
        stride=stride,
        n=n_arr,
        t=t_arr,
        x=x_arr,
        v=v_arr,
        gap=gap,
        error=error,
    )


def _gaps(obj: ObjectiveSpec, x_arr: np.ndarray) -> np.ndarray:
    if obj.dim == 1:
        return np.array([obj.value(float(x[0])) - obj.f_star for x in x_arr])
    return np.array([obj.value(x) - obj.f_star for x in x_arr])


def run(config, obj: ObjectiveSpec) -> Trajectory:
    """Run one experiment described by an ExperimentConfig."""
    if config.mode not in MODES:
        raise ValueError(f"unknown mode {config.mode!r}")
    if config.mode == "ode-rk4":
        return run_ode(
            obj,
            alpha=config.alpha,
            dt=config.dt,
            t0=config.t0,
            steps=config.steps,
            x0=config.x0 if obj.dim > 1 else config.x0[0],
            v0=config.v0 if obj.dim > 1 else config.v0[0],
            stride=config.stride,
        )
    return run_scheme(
        obj,
        alpha=config.alpha,
        h=config.h,
        steps=config.steps,
        x0=config.x0 if obj.dim > 1 else config.x0[0],
        stride=config.stride,
        use_prox=(config.mode == "prox-nesterov"),
    )
