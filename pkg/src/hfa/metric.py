"""Trace-constrained PSD metric and its linear subproblem.

At fixed dual coefficients beta the adversarial objective is linear in
the metric H:

    G(H) = -1/2 (beta' F beta + v' H v),    v = lift @ beta,

minimized over the feasible set {H PSD, trace(H) <= budget}. The
minimizer is the rank-1 vertex budget * vv' / ||v||^2 (sdp_closed_form);
the alternation deliberately walks toward it with damped projected-
gradient steps instead of jumping, which keeps the outer loop stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hfa.linalg import frobenius_inner, psd_project, symmetrize, trace_cap

__all__ = [
    "TransformMetric",
    "MetricFactors",
    "LineSearchParams",
    "initial_metric",
    "lift_vector",
    "sdp_objective",
    "sdp_gradient",
    "sdp_closed_form",
    "sdp_pgd_step",
    "line_search",
    "optimize_metric",
]


@dataclass(frozen=True)
class TransformMetric:
    """PSD matrix with a trace budget.

    The matrix couples the two domain blocks of the working kernel; its
    order is d_s+d_t on the explicit-feature path and n_s+n_t on the
    kernelized path.
    """

    matrix: np.ndarray
    budget: float

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"metric must be square, got {M.shape}")
        if not self.budget > 0:
            raise ValueError("trace budget must be positive")
        object.__setattr__(self, "matrix", symmetrize(M))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def is_feasible(self, tol: float = 1e-10) -> bool:
        """PSD within -tol*trace and trace within budget*(1+tol)."""
        t = self.trace
        if t > self.budget * (1.0 + tol):
            return False
        w = np.linalg.eigvalsh(self.matrix)
        return bool(w.min() >= -tol * max(t, 1.0) if w.size else True)


@dataclass(frozen=True)
class MetricFactors:
    """Fixed matrices defining the subproblem for one training set.

    base is the block-diagonal Gram of both domains (order n); lift maps
    dual coefficients into the metric space, so v = lift @ beta. On the
    kernelized path lift is blockdiag of the Gram square roots; on the
    explicit path it is blockdiag of the column-sample matrices.
    """

    base: np.ndarray
    lift: np.ndarray
    n_source: int
    n_target: int

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        lift = np.asarray(self.lift, dtype=float)
        n = self.n_source + self.n_target
        if base.shape != (n, n):
            raise ValueError(f"base must be {n}x{n}, got {base.shape}")
        if lift.ndim != 2 or lift.shape[1] != n:
            raise ValueError(f"lift must have {n} columns, got {lift.shape}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "lift", lift)

    @property
    def n(self) -> int:
        return self.n_source + self.n_target

    @property
    def metric_order(self) -> int:
        return self.lift.shape[0]


@dataclass(frozen=True)
class LineSearchParams:
    """Backtracking constants for the projected-gradient step."""

    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    eta_min: float = 1e-12
    max_backtracks: int = 50


def initial_metric(order: int, budget: float) -> TransformMetric:
    """Scaled identity (budget/order) * I, the alternation's start point."""
    if order < 1:
        raise ValueError("order must be positive")
    return TransformMetric(np.eye(order) * (budget / order), budget)


def lift_vector(factors: MetricFactors, beta: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (factors.n,):
        raise ValueError(f"beta must have length {factors.n}, got {beta.shape}")
    return factors.lift @ beta


def sdp_objective(beta: np.ndarray, metric: TransformMetric, factors: MetricFactors) -> float:
    """G(H) = -1/2 (beta' base beta + v' H v)."""
    beta = np.asarray(beta, dtype=float)
    if metric.order != factors.metric_order:
        raise ValueError(f"metric order {metric.order} != factor order {factors.metric_order}")
    v = lift_vector(factors, beta)
    return -0.5 * float(beta @ (factors.base @ beta) + v @ (metric.matrix @ v))


def sdp_gradient(beta: np.ndarray, factors: MetricFactors) -> np.ndarray:
    """dG/dH = -1/2 vv'; symmetric, negative semidefinite, rank <= 1."""
    v = lift_vector(factors, beta)
    return -0.5 * np.outer(v, v)


def sdp_closed_form(beta: np.ndarray, budget: float, factors: MetricFactors) -> TransformMetric:
    """Analytic minimizer budget * vv' / ||v||^2; zero metric when v = 0."""
    if not budget > 0:
        raise ValueError("trace budget must be positive")
    v = lift_vector(factors, beta)
    nv = float(v @ v)
    p = factors.metric_order
    if nv == 0.0:
        # objective is constant in H, any feasible point is optimal
        return TransformMetric(np.zeros((p, p)), budget)
    return TransformMetric(np.outer(v, v) * (budget / nv), budget)


def _project_feasible(M: np.ndarray, budget: float) -> np.ndarray:
    return trace_cap(psd_project(M), budget)


def _stall_threshold(gnorm: float, trace: float, f0: float) -> float:
    return 1e-13 * (gnorm * max(trace, 1.0) + abs(f0))


def sdp_pgd_step(
    metric: TransformMetric, beta: np.ndarray, eta: float, factors: MetricFactors
) -> TransformMetric:
    """One projected-gradient update H <- project(H - eta * dG/dH).

    The projection clips negative eigenvalues, then rescales onto the
    trace budget; along the actual gradient direction the update adds a
    PSD rank-1 term, so the eigenvalue clip only absorbs round-off.
    """
    if not eta >= 0:
        raise ValueError("step size must be nonnegative")
    grad = sdp_gradient(beta, factors)
    stepped = metric.matrix - eta * grad
    return TransformMetric(_project_feasible(stepped, metric.budget), metric.budget)


def line_search(
    metric: TransformMetric,
    beta: np.ndarray,
    grad: np.ndarray,
    factors: MetricFactors,
    params: LineSearchParams = LineSearchParams(),
) -> tuple[float, bool]:
    """Backtracking step-size choice for the projected-gradient update.

    Starts from eta0 = trace(H) / (||grad||_F + eps) and halves until the
    projected candidate satisfies the sufficient-decrease test

        G(P(H - eta g)) <= G(H) + c * <g, P(H - eta g) - H>,

    with the inner product required to be negative so an accepted step
    makes actual progress.

    Returns
    -------
    (eta, stalled) : tuple of float and bool
        stalled is True when no step above eta_min passes the test, which
        happens exactly when H already sits at the feasible minimizer.
    """
    grad = np.asarray(grad, dtype=float)
    gnorm = float(np.linalg.norm(grad))
    if gnorm == 0.0:
        raise ValueError("line search requires a nonzero gradient")
    f0 = sdp_objective(beta, metric, factors)
    # progress below round-off scale counts as a stall, not a step
    stall = _stall_threshold(gnorm, metric.trace, f0)
    eps = np.finfo(float).eps
    eta = metric.trace / (gnorm + eps)
    if eta <= params.eta_min:
        eta = 1.0 / (gnorm + eps)
    for _ in range(params.max_backtracks):
        cand = _project_feasible(metric.matrix - eta * grad, metric.budget)
        ref = frobenius_inner(grad, cand - metric.matrix)
        f1 = sdp_objective(beta, TransformMetric(cand, metric.budget), factors)
        if ref < -stall and f1 <= f0 + params.sufficient_decrease * ref:
            return eta, False
        eta *= params.shrink
        if eta < params.eta_min:
            break
    return params.eta_min, True


def optimize_metric(
    metric: TransformMetric,
    beta: np.ndarray,
    factors: MetricFactors,
    steps: int = 10,
    params: LineSearchParams = LineSearchParams(),
) -> TransformMetric:
    """Run up to `steps` line-searched projected-gradient updates at fixed beta.

    Stops early when the line search stalls (H at the subproblem
    optimum). A zero gradient (beta = 0) returns the metric unchanged.
    """
    grad = sdp_gradient(beta, factors)
    if not np.any(grad):
        return metric
    for _ in range(steps):
        eta, stalled = line_search(metric, beta, grad, factors, params)
        if stalled:
            break
        metric = sdp_pgd_step(metric, beta, eta, factors)
    return metric


def _scalar_inner_loop(
    metric: TransformMetric,
    v: np.ndarray,
    steps: int,
    params: LineSearchParams,
    trace_base: float,
    energy_base: float,
    const: float = 0.0,
) -> tuple[float, float]:
    """Coefficients (gamma, delta) with H_out = gamma * H_in + delta * vv'.

    Because the gradient -1/2 vv' is constant at fixed beta, every
    projected step maps (gamma, delta) affinely: add (eta/2) to delta,
    then scale both by the trace cap. Running the whole inner loop on
    these two scalars reproduces optimize_metric without materializing
    any intermediate matrix; the caller applies the result as a rank-1
    update. trace_base = trace(H_in), energy_base = v' H_in v, const =
    beta' base beta (only its magnitude matters, for the stall scale).
    """
    nv2 = float(v @ v)
    nv4 = nv2 * nv2
    gnorm = 0.5 * nv2  # ||-(1/2) vv'||_F = ||v||^2 / 2
    eps = np.finfo(float).eps
    budget = metric.budget
    gamma, delta = 1.0, 0.0
    for _ in range(steps):
        tr = gamma * trace_base + delta * nv2
        energy = gamma * energy_base + delta * nv4
        # objective is exactly linear in H, so the sufficient-decrease
        # test reduces to the v-energy rising by more than the stall scale
        stall = 2.0 * _stall_threshold(gnorm, tr, -0.5 * (const + energy))
        eta = tr / (gnorm + eps)
        if eta <= params.eta_min:
            eta = 1.0 / (gnorm + eps)
        accepted = False
        for _ in range(params.max_backtracks):
            d_new = delta + 0.5 * eta
            tr_new = gamma * trace_base + d_new * nv2
            scale = 1.0 if tr_new <= budget else budget / tr_new
            energy_new = scale * (gamma * energy_base + d_new * nv4)
            if energy_new - energy > stall:
                gamma *= scale
                delta = scale * d_new
                accepted = True
                break
            eta *= params.shrink
            if eta < params.eta_min:
                break
        if not accepted:
            break
    return gamma, delta
