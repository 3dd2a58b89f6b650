"""Periodically switched network topologies for the saddle-point flow.

A switching signal cycles through a list of graphs, holding each for T
seconds. The dual variable then chases a different affine limit set per
graph; when those sets are disjoint the state keeps commuting between
them, which is visible as an oscillation of the consensus error at the
switching frequency. Fast switching between individually non-convergent
graphs can nevertheless pull the error into a small neighborhood of
zero.
"""

from __future__ import annotations

import json
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    FingerprintMismatchError,
    StepAlignmentError,
)
from .graphs import Graph, graph_from_dict, laplacian, spectrum, _support_of
from .problem import NetworkLinearEquation
from .simulate import Trajectory, _base_metadata, _integrate, _rk4_stepper, _stack_initial
from .spectral import assemble, equilibrium_dual, zero_space_projector

IntersectionResult = namedtuple("IntersectionResult", "intersects distance")


@dataclass(frozen=True)
class SwitchingSignal:
    """Piecewise-constant graph schedule: index(t) = floor(t/T) mod len."""

    period_T: float
    graphs: tuple

    def __post_init__(self):
        if self.period_T <= 0:
            raise ValueError("period_T must be positive")
        if len(self.graphs) == 0:
            raise ValueError("signal needs at least one graph")
        sizes = {g.n_nodes for g in self.graphs}
        if len(sizes) != 1:
            raise DimensionMismatchError(f"graphs disagree on node count: {sizes}")

    def index_at(self, t: float) -> int:
        return int(t // self.period_T) % len(self.graphs)


@dataclass(frozen=True)
class LimitSet:
    """Affine set base_point + range(span_basis), columns orthonormal."""

    base_point: np.ndarray
    span_basis: np.ndarray

    def distance_to(self, point) -> float:
        d = np.asarray(point, dtype=float) - self.base_point
        return float(np.linalg.norm(d - self.span_basis @ (self.span_basis.T @ d)))

    def contains(self, point, tol: float = 1e-8) -> bool:
        return self.distance_to(point) <= tol * (1.0 + float(np.linalg.norm(self.base_point)))


def _aligned_count(total: float, step: float, what: str) -> int:
    ratio = total / step
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > 1e-12 * max(1.0, abs(ratio)):
        raise StepAlignmentError(
            f"{what}: {total} is not an integer multiple of {step}"
        )
    return count


def simulate_switching(problem: NetworkLinearEquation, signal: SwitchingSignal,
                       x0, v0, step_h: float, t_end: float,
                       record_every: int = 10) -> Trajectory:
    """Piecewise RK4 with switch instants aligned to the step grid.

    The state is continuous across switches; only the active Laplacian
    changes. Alignment is a precondition, not a sub-stepping feature:
    step_h must divide period_T and t_end must be a whole number of
    periods.
    """
    if step_h <= 0:
        raise ValueError("step_h must be positive")
    steps_per_period = _aligned_count(signal.period_T, step_h, "period_T / step_h")
    n_periods = _aligned_count(t_end, signal.period_T, "t_end / period_T")
    flows = [assemble(problem, g) for g in signal.graphs]
    b = np.concatenate([flows[0].z_H, np.zeros(flows[0].state_dim)])
    mats = [(f.M, b) for f in flows]
    n_graphs = len(mats)

    def flow_at(k):
        return mats[(k // steps_per_period) % n_graphs]

    meta = _base_metadata(
        flows[0], integrator="rk4", step=step_h, t_end=t_end,
        record_every=record_every, period_T=signal.period_T,
        graphs=[g.label or f"custom-{g.n_nodes}" for g in signal.graphs],
    )
    n_steps = steps_per_period * n_periods
    return _integrate(flow_at, n_steps, _stack_initial(flows[0], x0, v0),
                      lambda k: k * step_h, _rk4_stepper(step_h),
                      record_every, meta, flows[0])


def limit_set(problem: NetworkLinearEquation, graph: Graph) -> LimitSet:
    """Affine set of possible dual limits for a fixed graph."""
    flow = assemble(problem, graph)
    _, W = zero_space_projector(flow)  # raises ConditionViolatedError if unmet
    v_star = equilibrium_dual(flow)
    base = v_star - W @ v_star
    U, sv, _ = np.linalg.svd(W)
    span = U[:, sv > 0.5]  # idempotent W: singular values cluster at 0 and 1
    return LimitSet(base_point=base, span_basis=span)


def limit_sets_intersect(a: LimitSet, b: LimitSet) -> IntersectionResult:
    """Least-squares affine feasibility test between two limit sets."""
    if a.base_point.shape != b.base_point.shape:
        raise DimensionMismatchError("limit sets live in different ambient spaces")
    system = np.hstack([a.span_basis, -b.span_basis])
    rhs = b.base_point - a.base_point
    sol, _, _, _ = np.linalg.lstsq(system, rhs, rcond=None)
    gap = float(np.linalg.norm(system @ sol - rhs))
    intersects = gap <= 1e-6 * (1.0 + float(np.linalg.norm(rhs)))
    return IntersectionResult(intersects, 0.0 if intersects else gap)


def tail_sup_error(traj: Trajectory, tail_fraction: float = 0.2) -> float:
    """Supremum of the squared consensus error over the trailing window."""
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must be in (0, 1)")
    n = len(traj.error)
    if n == 0:
        raise ValueError("empty trajectory")
    return float(traj.error[int((1.0 - tail_fraction) * n):].max())


def oscillation_period(traj: Trajectory, lag_min: float, lag_max: float,
                       settle_fraction: float = 0.6) -> float:
    """Estimate the period of the error signal by self-matching lags.

    Over the samples after ``settle_fraction`` of the run, computes the
    mean absolute mismatch between the signal and its lagged copy for
    every lag in [lag_min, lag_max] and returns the smallest lag whose
    mismatch is within 5% of the best one. The run must be long enough
    for transients to have decayed out of the matched window.
    """
    t = traj.t_or_k
    if len(t) < 10:
        raise ValueError("trajectory too short for period estimation")
    dt = float(t[1] - t[0])
    if np.abs(np.diff(t) - dt).max() > 1e-9 * max(1.0, abs(dt)):
        raise ValueError("period estimation needs uniform sampling")
    tail = traj.error[int(settle_fraction * len(t)):]
    lo_lag = max(2, int(round(lag_min / dt)))
    hi_lag = int(round(lag_max / dt))
    if hi_lag >= len(tail):
        raise ValueError("lag_max exceeds the settled window")
    lags = np.arange(lo_lag, hi_lag + 1)
    mismatch = np.array([float(np.mean(np.abs(tail[l:] - tail[:-l]))) for l in lags])
    scale = float(np.mean(np.abs(tail - tail.mean())))
    best = mismatch.min()
    good = lags[mismatch <= best * 1.05 + 1e-9 * max(scale, 1e-300)]
    return float(good[0] * dt)


def check_support_fingerprint(graph: Graph, allowed_supports) -> None:
    """Verify that the eigenvector supports are exactly the declared ones.

    Requires a simple Laplacian spectrum (supports of repeated
    eigenspaces depend on the basis choice) and compares the set of
    supports of the eigenvector basis against ``allowed_supports``.
    Raises :class:`FingerprintMismatchError` on any deviation.
    """
    spect = spectrum(laplacian(graph))
    if any(len(g) > 1 for g in spect.eigenspace_groups):
        raise FingerprintMismatchError(
            f"{graph!r}: repeated Laplacian eigenvalues, supports are basis-dependent"
        )
    found = {
        frozenset(_support_of(spect.eigenvectors[:, k]))
        for k in range(graph.n_nodes)
    }
    wanted = {frozenset(int(i) for i in s) for s in allowed_supports}
    if found != wanted:
        raise FingerprintMismatchError(
            f"{graph!r}: eigenvector supports {sorted(map(sorted, found))} "
            f"do not match declared {sorted(map(sorted, wanted))}"
        )


def load_graph_pair(path) -> tuple:
    """Load and fingerprint-validate the pinned switching graph pair.

    The fixture states, for each graph, the exact set of eigenvector
    supports it must produce; any candidate edge list that fails this
    spectral fingerprint is rejected at load time.
    """
    with open(path) as fh:
        data = json.load(fh)
    graphs = [graph_from_dict(g) for g in data["graphs"]]
    supports = data["required_supports"]
    if len(graphs) != len(supports):
        raise FingerprintMismatchError("fixture lists differ in length")
    for g, allowed in zip(graphs, supports):
        check_support_fingerprint(g, allowed)
    return tuple(graphs)
