"""Binary SVM dual solver for precomputed kernel matrices.

Sequential minimal optimization over the standard dual

    max_alpha  sum_i alpha_i - (1/2) beta' K beta,   beta_i = alpha_i y_i,
    s.t.       0 <= alpha_i <= C,   y' alpha = 0,

with maximal-violating-pair working-set selection. The kernel matrix is
taken as given; callers own its construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hfa.linalg import symmetrize

__all__ = [
    "DualProblem",
    "DualSolution",
    "DegenerateProblemError",
    "solve_dual",
    "decision_values",
]

# curvature floor for the pair step denominator K_ii + K_jj - 2 K_ij
_CURVATURE_FLOOR = 1e-12
# relative margin deciding whether an alpha sits at a box bound
_BOUND_EPS = 1e-12


class DegenerateProblemError(ValueError):
    """Raised when the training labels contain only one class."""


@dataclass(frozen=True)
class DualProblem:
    """Kernel matrix, +-1 labels and box bound for one binary dual."""

    K: np.ndarray
    y: np.ndarray
    C: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"kernel matrix must be square, got {K.shape}")
        if y.ndim != 1 or y.size != K.shape[0]:
            raise ValueError("label vector length must match kernel order")
        if y.size == 0:
            raise ValueError("empty problem")
        if not np.all(np.isfinite(K)):
            raise ValueError("kernel matrix has non-finite entries")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be +-1")
        if np.all(y > 0) or np.all(y < 0):
            raise DegenerateProblemError("labels contain a single class")
        if not self.C > 0:
            raise ValueError("C must be positive")
        object.__setattr__(self, "K", symmetrize(K))
        object.__setattr__(self, "y", y)

    @property
    def size(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class DualSolution:
    """Optimal multipliers with the bias and dual objective value.

    beta = alpha * y is stored alongside alpha because every consumer
    (decision values, the metric subproblem) works in beta form.
    """

    alpha: np.ndarray
    beta: np.ndarray
    bias: float
    objective: float
    iterations: int


def solve_dual(
    problem: DualProblem,
    tol: float = 1e-6,
    warm_start: np.ndarray | None = None,
    max_iter: int | None = None,
) -> DualSolution:
    """Solve the box-constrained dual by maximal-violating-pair SMO.

    Parameters
    ----------
    problem : DualProblem
    tol : float
        Stop when the violating-pair gap max_{I_up} G - min_{I_low} G
        drops to tol, with G_i = y_i - (K beta)_i.
    warm_start : ndarray, optional
        Feasible alpha to start from; infeasible entries are clipped to
        the box (the equality constraint must already hold).
    max_iter : int, optional
        Guard on pair updates; exceeding it raises RuntimeError.

    Returns
    -------
    DualSolution
        alpha within the box to round-off, |y' alpha| <= 1e-8 * n * C,
        and bias from free support vectors when any exist.
    """
    K, y, C = problem.K, problem.y, problem.C
    n = problem.size
    if max_iter is None:
        max_iter = 200 * n + 200_000

    if warm_start is not None:
        alpha = np.clip(np.asarray(warm_start, dtype=float), 0.0, C)
        if alpha.shape != (n,):
            raise ValueError("warm_start length mismatch")
        if abs(float(y @ alpha)) > 1e-6 * n * C:
            raise ValueError("warm_start violates the equality constraint")
    else:
        alpha = np.zeros(n)

    pos = y > 0
    beta = alpha * y
    Kbeta = K @ beta
    G = y - Kbeta

    bound_eps = _BOUND_EPS * C
    iterations = 0
    for iterations in range(1, max_iter + 1):
        below_C = alpha < C - bound_eps
        above_0 = alpha > bound_eps
        up = np.where(pos, below_C, above_0)
        low = np.where(pos, above_0, below_C)

        G_up = np.where(up, G, -np.inf)
        G_low = np.where(low, G, np.inf)
        i = int(np.argmax(G_up))
        j = int(np.argmin(G_low))
        gap = G_up[i] - G_low[j]
        if not gap > tol:
            iterations -= 1
            break

        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        t = gap / max(a, _CURVATURE_FLOOR)
        # box caps for moving alpha_i up-direction and alpha_j down-direction
        cap_i = C - alpha[i] if pos[i] else alpha[i]
        cap_j = alpha[j] if pos[j] else C - alpha[j]
        t = min(t, cap_i, cap_j)

        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        dK = K[:, i] - K[:, j]
        G -= t * dK
    else:
        raise RuntimeError(f"SMO did not reach tol={tol} within {max_iter} updates")

    np.clip(alpha, 0.0, C, out=alpha)
    beta = alpha * y
    G = y - K @ beta

    free_margin = 1e-8 * C
    free = (alpha > free_margin) & (alpha < C - free_margin)
    if np.any(free):
        bias = float(G[free].mean())
    else:
        # every alpha at a bound: the KKT conditions only bracket the bias,
        # take the midpoint of the admissible interval
        at_0 = alpha <= free_margin
        at_C = alpha >= C - free_margin
        lower = (pos & at_0) | (~pos & at_C)
        upper = (pos & at_C) | (~pos & at_0)
        lo = float(G[lower].max()) if np.any(lower) else -np.inf
        hi = float(G[upper].min()) if np.any(upper) else np.inf
        if np.isfinite(lo) and np.isfinite(hi):
            bias = 0.5 * (lo + hi)
        elif np.isfinite(lo):
            bias = lo
        elif np.isfinite(hi):
            bias = hi
        else:
            bias = 0.0

    objective = float(alpha.sum() - 0.5 * (beta @ (K @ beta)))
    return DualSolution(alpha=alpha, beta=beta, bias=float(bias), objective=objective, iterations=iterations)


def decision_values(solution: DualSolution, K_cross: np.ndarray) -> np.ndarray:
    """Evaluate f = K_cross' beta + bias, one value per column of K_cross.

    K_cross holds kernel values between the n training points (rows) and
    m evaluation points (columns).
    """
    K_cross = np.asarray(K_cross, dtype=float)
    if K_cross.ndim != 2 or K_cross.shape[0] != solution.beta.size:
        raise ValueError(f"cross-kernel block must have {solution.beta.size} rows, got {K_cross.shape}")
    return K_cross.T @ solution.beta + solution.bias
