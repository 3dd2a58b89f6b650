"""Network linear equation and its centralized least-squares oracle.

A problem instance is the pair (H, z): N scalar observations
``z_i = h_i . y`` distributed over N nodes, each node holding one row
``h_i`` of H and one entry of z. With more equations than unknowns the
system is generally inconsistent and the object of interest is the
least-squares minimizer of ``||z - H y||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidNodeError, RankDeficientError

# Relative threshold under which a singular value counts as zero.
RANK_RTOL = 1e-12


def _numerical_rank(matrix: np.ndarray) -> int:
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv.size == 0:
        return 0
    tol = sv[0] * max(matrix.shape) * RANK_RTOL
    return int(np.count_nonzero(sv > tol))


class NetworkLinearEquation:
    """Immutable (H, z) pair with per-node rows.

    Parameters
    ----------
    rows : (N, m) array-like
        Stacked row vectors h_i.
    obs : (N,) array-like
        Scalar observations z_i.
    check_rank : bool
        When True (default) the constructor rejects rank-deficient H.
        Diagnostic flows (e.g. zeroed measurement rows) pass False; the
        computed rank is still recorded in ``numerical_rank``.
    """

    def __init__(self, rows, obs, *, check_rank: bool = True):
        rows = np.array(rows, dtype=float)
        obs = np.array(obs, dtype=float)
        if rows.ndim != 2:
            raise DimensionMismatchError("rows must be a 2-d array of shape (N, m)")
        if obs.shape != (rows.shape[0],):
            raise DimensionMismatchError(
                f"obs has shape {obs.shape}, expected ({rows.shape[0]},)"
            )
        n, m = rows.shape
        if n <= m:
            raise DimensionMismatchError(
                f"need more equations than unknowns: N={n} <= m={m}"
            )
        self.n_nodes = n
        self.dim = m
        self.numerical_rank = _numerical_rank(rows)
        self.full_rank = self.numerical_rank == m
        if check_rank and not self.full_rank:
            raise RankDeficientError(
                f"measurement matrix has numerical rank {self.numerical_rank} < {m}",
                self.numerical_rank,
            )
        rows.setflags(write=False)
        obs.setflags(write=False)
        self.rows = rows
        self.obs = obs

    def row(self, i: int) -> np.ndarray:
        """Row h_i for a 1-based node index."""
        if not 1 <= i <= self.n_nodes:
            raise InvalidNodeError(f"node index {i} outside 1..{self.n_nodes}")
        return self.rows[i - 1]

    def __repr__(self) -> str:
        return f"NetworkLinearEquation(N={self.n_nodes}, m={self.dim})"


@dataclass(frozen=True)
class LeastSquaresSolution:
    y_star: np.ndarray
    residual: np.ndarray  # H y* - z
    objective: float      # ||residual||^2


@dataclass(frozen=True)
class AugmentedSystem:
    """Square expansion [[H, -I],[0, H^T]] y_bar = [z; 0].

    Its unique solution stacks the least-squares minimizer on top of the
    residual vector, turning the inconsistent problem into an exactly
    solvable one at the cost of N + m unknowns.
    """

    H_bar: np.ndarray
    z_bar: np.ndarray

    def solve(self) -> np.ndarray:
        # general LU solve with partial pivoting
        return np.linalg.solve(self.H_bar, self.z_bar)


def solve_least_squares(problem: NetworkLinearEquation) -> LeastSquaresSolution:
    """Minimize ||z - H y||^2 via orthogonal factorization.

    Raises :class:`RankDeficientError` if the factorization reveals a
    rank below m (possible only for problems built with
    ``check_rank=False``).
    """
    y_star, _, rank, _ = np.linalg.lstsq(problem.rows, problem.obs, rcond=RANK_RTOL)
    if rank < problem.dim:
        raise RankDeficientError(
            f"rank {rank} < {problem.dim} during least-squares factorization", int(rank)
        )
    residual = problem.rows @ y_star - problem.obs
    objective = float(residual @ residual)
    return LeastSquaresSolution(y_star=y_star, residual=residual, objective=objective)


def normal_equations_solution(problem: NetworkLinearEquation) -> np.ndarray:
    """Independent oracle: solve H^T H y = H^T z directly.

    Numerically inferior to :func:`solve_least_squares` (squares the
    condition number); kept as a cross-check, not for production use.
    """
    gram = problem.rows.T @ problem.rows
    return np.linalg.solve(gram, problem.rows.T @ problem.obs)


def residual_component(problem: NetworkLinearEquation, y_star, i: int) -> float:
    """h_i . y* - z_i for a 1-based node index i."""
    h_i = problem.row(i)
    return float(h_i @ np.asarray(y_star, dtype=float) - problem.obs[i - 1])


def build_state_expansion(problem: NetworkLinearEquation) -> AugmentedSystem:
    n, m = problem.n_nodes, problem.dim
    top = np.hstack([problem.rows, -np.eye(n)])
    bottom = np.hstack([np.zeros((m, m)), problem.rows.T])
    H_bar = np.vstack([top, bottom])
    z_bar = np.concatenate([problem.obs, np.zeros(m)])
    return AugmentedSystem(H_bar=H_bar, z_bar=z_bar)
