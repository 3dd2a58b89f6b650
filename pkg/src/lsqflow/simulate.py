"""Fixed-step simulators for the continuous flow and its Euler iteration.

All integrators are deterministic: fixed step, fixed recording stride,
no adaptivity. Divergence (any state component non-finite or beyond
1e9 in magnitude) raises :class:`DivergedError` carrying the partial
trajectory, so callers can still inspect and serialize what happened.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DivergedError
from .spectral import AssembledFlow, flow_cost

DIVERGE_LIMIT = 1e9

TrajectorySample = namedtuple("TrajectorySample", "t_or_k x v error cost")


@dataclass(frozen=True)
class FlowState:
    t_or_k: float
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: times, stacked states, squared consensus error, cost.

    ``error[k] = ||x_k - 1 (x) y_ref||^2`` with ``y_ref`` stored
    alongside so the column can be recomputed and cross-checked.
    """

    t_or_k: np.ndarray
    x: np.ndarray          # (n_samples, N*m)
    v: np.ndarray          # (n_samples, N*m)
    error: np.ndarray
    cost: np.ndarray
    y_ref: np.ndarray
    metadata: dict = field(compare=False)

    @property
    def samples(self):
        return [
            TrajectorySample(self.t_or_k[k], self.x[k], self.v[k],
                             self.error[k], self.cost[k])
            for k in range(len(self.t_or_k))
        ]

    @property
    def n_nodes(self) -> int:
        return int(self.metadata["n_nodes"])

    @property
    def dim(self) -> int:
        return int(self.metadata["dim"])


@dataclass(frozen=True)
class DiscreteConfig:
    epsilon: float
    max_steps: int = 40000
    record_every: int = 10

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_steps < 1 or self.record_every < 1:
            raise ValueError("max_steps and record_every must be >= 1")


def component_names(n_nodes: int, dim: int) -> list:
    """CSV/plot column names: x_1_1 .. x_N_m, v_1_1 .. v_N_m (1-based)."""
    names = []
    for block in ("x", "v"):
        for i in range(1, n_nodes + 1):
            for j in range(1, dim + 1):
                names.append(f"{block}_{i}_{j}")
    return names


def component_series(traj: Trajectory, name: str) -> np.ndarray:
    """Column of a trajectory by component name, 'error', or 'cost'."""
    if name == "error":
        return traj.error
    if name == "cost":
        return traj.cost
    try:
        block, i, j = name.split("_")
        idx = (int(i) - 1) * traj.dim + (int(j) - 1)
        source = {"x": traj.x, "v": traj.v}[block]
        if not (0 <= idx < source.shape[1]) or not (1 <= int(j) <= traj.dim):
            raise ValueError
    except (ValueError, KeyError):
        raise DimensionMismatchError(f"unknown component name {name!r}") from None
    return source[:, idx]


def ct_rhs(flow: AssembledFlow, state: FlowState) -> tuple:
    """Right-hand side of the saddle-point flow at one state."""
    dx = -flow.L_kron @ state.v - (flow.H_tilde @ state.x - flow.z_H)
    dv = flow.L_kron @ state.x
    return dx, dv


def _check_state(flow, u):
    bad = np.flatnonzero(~np.isfinite(u) | (np.abs(u) > DIVERGE_LIMIT))
    if bad.size == 0:
        return None
    names = component_names(flow.problem.n_nodes, flow.problem.dim)
    return [names[i] for i in bad]


def _finish_trajectory(flow, times, xs, vs, metadata):
    x = np.array(xs)
    v = np.array(vs)
    ones_y = np.tile(flow.y_ref, flow.problem.n_nodes)
    diff = x - ones_y
    error = np.einsum("ij,ij->i", diff, diff)
    cost = np.array([flow_cost(flow, row) for row in x])
    return Trajectory(
        t_or_k=np.array(times), x=x, v=v, error=error, cost=cost,
        y_ref=np.array(flow.y_ref), metadata=metadata,
    )


def _integrate(flow_at, n_steps, u0, time_of, stepper, record_every, metadata, ref_flow):
    """Shared driver: step, record every record_every-th state plus the
    first and last, stop with a partial trajectory on divergence."""
    nm = ref_flow.state_dim
    u = np.array(u0, dtype=float)
    times, xs, vs = [time_of(0)], [u[:nm].copy()], [u[nm:].copy()]

    def record(k, state):
        times.append(time_of(k))
        xs.append(state[:nm].copy())
        vs.append(state[nm:].copy())

    for k in range(n_steps):
        u = stepper(flow_at(k), u)
        done = k + 1 == n_steps
        bad = _check_state(ref_flow, u)
        if bad is not None:
            record(k + 1, u)
            traj = _finish_trajectory(ref_flow, times, xs, vs, metadata)
            raise DivergedError(
                f"state left the finite range at {time_of(k + 1)} "
                f"(components {', '.join(bad)})",
                time_of(k + 1), traj, bad,
            )
        if (k + 1) % record_every == 0 or done:
            record(k + 1, u)
    return _finish_trajectory(ref_flow, times, xs, vs, metadata)


def _rk4_stepper(h):
    def step(mats, u):
        M, b = mats
        k1 = M @ u + b
        k2 = M @ (u + 0.5 * h * k1) + b
        k3 = M @ (u + 0.5 * h * k2) + b
        k4 = M @ (u + h * k3) + b
        return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return step


def _stack_initial(flow, x0, v0):
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    v0 = np.asarray(v0, dtype=float).reshape(-1)
    nm = flow.state_dim
    if x0.shape != (nm,) or v0.shape != (nm,):
        raise DimensionMismatchError(
            f"initial states must have shape ({nm},), got {x0.shape} and {v0.shape}"
        )
    return np.concatenate([x0, v0])


def _base_metadata(flow, **extra):
    meta = {
        "n_nodes": flow.problem.n_nodes,
        "dim": flow.problem.dim,
        "problem": repr(flow.problem),
        "graph": flow.graph.label or f"custom-{flow.graph.n_nodes}",
        "reference": "least-squares" if flow.problem.full_rank else "origin",
    }
    meta.update(extra)
    return meta


def simulate_ct(flow: AssembledFlow, x0, v0, step_h: float, t_end: float,
                record_every: int = 10) -> Trajectory:
    """Classical fixed-step RK4 integration of the saddle-point flow."""
    if step_h <= 0 or t_end <= 0:
        raise ValueError("step_h and t_end must be positive")
    n_steps = int(round(t_end / step_h))
    u0 = _stack_initial(flow, x0, v0)
    b = np.concatenate([flow.z_H, np.zeros(flow.state_dim)])
    mats = (flow.M, b)
    meta = _base_metadata(flow, integrator="rk4", step=step_h,
                          t_end=t_end, record_every=record_every)
    return _integrate(lambda k: mats, n_steps, u0, lambda k: k * step_h,
                      _rk4_stepper(step_h), record_every, meta, flow)


def simulate_dt(flow: AssembledFlow, x0, v0, config: DiscreteConfig) -> Trajectory:
    """Forward-Euler iteration with step epsilon.

    Below the spectral threshold this converges to the same consensus
    as the flow; above it, some components blow up and the run ends in
    :class:`DivergedError` with the partial trajectory attached.
    """
    u0 = _stack_initial(flow, x0, v0)
    b = np.concatenate([flow.z_H, np.zeros(flow.state_dim)])
    eps = config.epsilon

    def step(mats, u):
        M, bb = mats
        return u + eps * (M @ u + bb)

    mats = (flow.M, b)
    meta = _base_metadata(flow, integrator="euler", step=eps,
                          max_steps=config.max_steps,
                          record_every=config.record_every)
    return _integrate(lambda k: mats, config.max_steps, u0, lambda k: k,
                      step, config.record_every, meta, flow)


def simulate_damped(flow: AssembledFlow, alpha: float, x0, v0,
                       step_h: float, t_end: float,
                       record_every: int = 10) -> Trajectory:
    """Comparison flow with additional consensus damping -alpha L x.

    With alpha = 0 the extra term vanishes and the run delegates to
    :func:`simulate_ct`, so the trajectories agree bit for bit.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0.0:
        return simulate_ct(flow, x0, v0, step_h, t_end, record_every)
    if step_h <= 0 or t_end <= 0:
        raise ValueError("step_h and t_end must be positive")
    nm = flow.state_dim
    M = flow.M.copy()
    M[:nm, :nm] -= alpha * flow.L_kron
    b = np.concatenate([flow.z_H, np.zeros(nm)])
    n_steps = int(round(t_end / step_h))
    u0 = _stack_initial(flow, x0, v0)
    mats = (M, b)
    meta = _base_metadata(flow, integrator="rk4", step=step_h, t_end=t_end,
                          record_every=record_every, alpha=alpha)
    return _integrate(lambda k: mats, n_steps, u0, lambda k: k * step_h,
                      _rk4_stepper(step_h), record_every, meta, flow)


def error_trajectory(traj: Trajectory, y_star) -> list:
    """Pointwise squared distance of x to consensus on y_star."""
    if len(traj.t_or_k) == 0:
        raise ValueError("empty trajectory")
    target = np.tile(np.asarray(y_star, dtype=float), traj.n_nodes)
    diff = traj.x - target
    e = np.einsum("ij,ij->i", diff, diff)
    return [(float(t), float(val)) for t, val in zip(traj.t_or_k, e)]


def oscillates(traj: Trajectory, component: str, *, ratio: float = 0.5) -> bool:
    """Heuristic: does a component keep oscillating to the end of the run?

    Compares the peak-to-peak amplitude over the last fifth of the
    samples against the window between 40% and 60% of the run; fires
    when the tail amplitude is at least ``ratio`` times the mid-run
    amplitude and is not itself negligible.
    """
    s = component_series(traj, component)
    n = len(s)
    if n < 10:
        raise ValueError("trajectory too short for oscillation detection")
    mid = s[int(0.4 * n):int(0.6 * n)]
    tail = s[int(0.8 * n):]
    amp_mid = float(mid.max() - mid.min())
    amp_tail = float(tail.max() - tail.min())
    floor = 1e-8 * (1.0 + float(np.abs(s).max()))
    if amp_tail <= floor:
        return False
    return amp_tail >= ratio * amp_mid


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with 17-significant-digit floats; byte-stable across runs."""
    names = component_names(traj.n_nodes, traj.dim)
    header = "t," + ",".join(names) + ",error,cost"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for k in range(len(traj.t_or_k)):
            row = [traj.t_or_k[k], *traj.x[k], *traj.v[k], traj.error[k], traj.cost[k]]
            fh.write(",".join("%.17g" % val for val in row) + "\n")
