"""Cross-domain augmented-feature SVM training and prediction.

The model couples a labeled source domain (dim d_s) and a sparsely
labeled target domain (dim d_t) by implicitly embedding both into a
shared augmented space. Only the PSD coupling metric is learned, by
alternating a kernel SVM dual solve with damped projected-gradient
updates of the metric; prediction needs target kernel values only.

Two training paths exist: the explicit path carries a metric of order
d_s+d_t over raw features, the kernelized path a metric of order
n_s+n_t over per-domain Gram square roots. Their optimal objectives
agree when the linear kernel is used and sample counts do not exceed
feature dimensions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from hfa.data import Dataset
from hfa.linalg import (
    KernelSpec,
    cross_gram,
    default_ridge,
    gram_matrix,
    median_heuristic_gamma,
    sym_eigen,
    symmetrize,
)
from hfa.metric import (
    LineSearchParams,
    MetricFactors,
    TransformMetric,
    _scalar_inner_loop,
    initial_metric,
    lift_vector,
)
from hfa.svm import DegenerateProblemError, DualProblem, solve_dual

log = logging.getLogger("hfa")

__all__ = [
    "HfaConfig",
    "HfaModel",
    "LinearHfaModel",
    "PrecomputedKernels",
    "augment_source",
    "augment_target",
    "build_KH_linear",
    "build_KH_kernelized",
    "linear_factors",
    "kernelized_factors",
    "prepare_kernels",
    "hfa_train",
    "hfa_train_linear",
    "predict",
    "predict_linear",
]


@dataclass(frozen=True)
class HfaConfig:
    """Training settings shared by both paths.

    lam is the metric trace budget. kernel_gamma None selects the
    per-domain median-distance bandwidth at training time; ridge None
    selects the scale-aware default for each Gram matrix.
    """

    C: float = 1.0
    lam: float = 1.0
    kernel_family: str = "rbf"
    kernel_gamma: float | None = None
    t_max: int = 100
    conv_tol: float = 1e-5
    ridge: float | None = None
    metric_steps: int = 10
    svm_tol: float = 1e-6
    line_search: LineSearchParams = field(default_factory=LineSearchParams)
    standardize: bool = False

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.kernel_family not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel family {self.kernel_family!r}")
        if self.kernel_gamma is not None and not self.kernel_gamma > 0:
            raise ValueError("kernel_gamma must be positive when given")
        if self.t_max < 1:
            raise ValueError("t_max must be at least 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")
        if self.ridge is not None and not self.ridge > 0:
            raise ValueError("ridge must be positive when given")
        if self.metric_steps < 1:
            raise ValueError("metric_steps must be at least 1")
        if not self.svm_tol > 0:
            raise ValueError("svm_tol must be positive")

    def kernel_spec_for(self, X: np.ndarray) -> KernelSpec:
        """Resolve the kernel for one domain's training rows."""
        if self.kernel_family == "linear":
            return KernelSpec("linear")
        gamma = self.kernel_gamma if self.kernel_gamma is not None else median_heuristic_gamma(X)
        return KernelSpec("rbf", gamma)


def augment_source(x, P, target_dim: int) -> np.ndarray:
    """Source embedding [P @ x ; x ; 0_{target_dim}]."""
    x = np.asarray(x, dtype=float).ravel()
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape[1] != x.size:
        raise ValueError(f"P has {P.shape[1]} columns but x has dimension {x.size}")
    if target_dim < 0:
        raise ValueError("target_dim must be nonnegative")
    return np.concatenate([P @ x, x, np.zeros(target_dim)])


def augment_target(x, Q, source_dim: int) -> np.ndarray:
    """Target embedding [Q @ x ; 0_{source_dim} ; x]."""
    x = np.asarray(x, dtype=float).ravel()
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[1] != x.size:
        raise ValueError(f"Q has {Q.shape[1]} columns but x has dimension {x.size}")
    if source_dim < 0:
        raise ValueError("source_dim must be nonnegative")
    return np.concatenate([Q @ x, np.zeros(source_dim), x])


def _block_diag(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, m = A.shape[0], B.shape[0]
    out = np.zeros((n + B.shape[0], A.shape[1] + B.shape[1]))
    out[:n, : A.shape[1]] = A
    out[n:, A.shape[1]:] = B
    return out


def _metric_kernel(factors: MetricFactors, H: np.ndarray) -> np.ndarray:
    return symmetrize(factors.base + factors.lift.T @ (H @ factors.lift))


def linear_factors(Xs: np.ndarray, Xt: np.ndarray) -> MetricFactors:
    """Subproblem factors for column-sample matrices Xs (d_s x n_s), Xt (d_t x n_t)."""
    Xs = np.asarray(Xs, dtype=float)
    Xt = np.asarray(Xt, dtype=float)
    if Xs.ndim != 2 or Xt.ndim != 2:
        raise ValueError("sample matrices must be 2-D with samples as columns")
    base = _block_diag(symmetrize(Xs.T @ Xs), symmetrize(Xt.T @ Xt))
    lift = _block_diag(Xs, Xt)
    return MetricFactors(base=base, lift=lift, n_source=Xs.shape[1], n_target=Xt.shape[1])


def kernelized_factors(Ks, Kt, ks_sqrt, kt_sqrt) -> MetricFactors:
    """Subproblem factors from per-domain Grams and their square roots."""
    Ks, Kt = np.asarray(Ks, dtype=float), np.asarray(Kt, dtype=float)
    ks_sqrt, kt_sqrt = np.asarray(ks_sqrt, dtype=float), np.asarray(kt_sqrt, dtype=float)
    if ks_sqrt.shape != Ks.shape or kt_sqrt.shape != Kt.shape:
        raise ValueError("square-root factors must match their Gram matrices")
    base = _block_diag(Ks, Kt)
    lift = _block_diag(ks_sqrt, kt_sqrt)
    return MetricFactors(base=base, lift=lift, n_source=Ks.shape[0], n_target=Kt.shape[0])


def build_KH_linear(Xs: np.ndarray, Xt: np.ndarray, metric: TransformMetric) -> np.ndarray:
    """Working kernel of the explicit path; equals the Gram matrix of the
    augmented vectors when the metric factors as [P,Q]'[P,Q].

    Xs and Xt hold samples as columns (d_s x n_s and d_t x n_t); the
    metric order must be d_s + d_t.
    """
    factors = linear_factors(Xs, Xt)
    d = np.asarray(Xs).shape[0] + np.asarray(Xt).shape[0]
    if metric.order != d:
        raise ValueError(f"metric order {metric.order} != d_s + d_t = {d}")
    return _metric_kernel(factors, metric.matrix)


def build_KH_kernelized(ks_sqrt, kt_sqrt, Ks, Kt, metric: TransformMetric) -> np.ndarray:
    """Working kernel of the kernelized path, blockdiag(Ks, Kt) plus the
    metric coupling through the Gram square roots."""
    factors = kernelized_factors(Ks, Kt, ks_sqrt, kt_sqrt)
    if metric.order != factors.n:
        raise ValueError(f"metric order {metric.order} != n_s + n_t = {factors.n}")
    return _metric_kernel(factors, metric.matrix)


def _sqrt_factors(K: np.ndarray, ridge: float) -> tuple[np.ndarray, np.ndarray]:
    """Ridged square root of a Gram matrix and its paired inverse factor.

    Eigendirections below 1e-12 of the largest eigenvalue are zeroed in
    both factors, which makes inv @ K == sqrt hold to round-off; the
    predictor relies on that identity to reproduce training-kernel
    decision values exactly.
    """
    w, V = sym_eigen(K)
    wmax = w[0] if w.size and w[0] > 0 else 0.0
    keep = w > 1e-12 * wmax
    safe_w = np.where(keep, w, 1.0)
    s = np.where(keep, np.sqrt(safe_w + ridge), 0.0)
    inv = np.where(keep, s / safe_w, 0.0)
    return symmetrize((V * s) @ V.T), symmetrize((V * inv) @ V.T)


@dataclass(frozen=True)
class PrecomputedKernels:
    """Gram matrices and factors shared by all models on one training set."""

    kernel_source: KernelSpec
    kernel_target: KernelSpec
    Ks: np.ndarray
    Kt: np.ndarray
    ks_sqrt: np.ndarray
    kt_sqrt: np.ndarray
    kt_inv_sqrt: np.ndarray
    factors: MetricFactors


def prepare_kernels(source_X: np.ndarray, target_X: np.ndarray, cfg: HfaConfig) -> PrecomputedKernels:
    """Resolve kernels and factor the Grams once for a training pair."""
    spec_s = cfg.kernel_spec_for(source_X)
    spec_t = cfg.kernel_spec_for(target_X)
    Ks = gram_matrix(spec_s, source_X)
    Kt = gram_matrix(spec_t, target_X)
    ridge_s = cfg.ridge if cfg.ridge is not None else default_ridge(Ks)
    ridge_t = cfg.ridge if cfg.ridge is not None else default_ridge(Kt)
    ks_sqrt, _ = _sqrt_factors(Ks, ridge_s)
    kt_sqrt, kt_inv_sqrt = _sqrt_factors(Kt, ridge_t)
    return PrecomputedKernels(
        kernel_source=spec_s,
        kernel_target=spec_t,
        Ks=Ks,
        Kt=Kt,
        ks_sqrt=ks_sqrt,
        kt_sqrt=kt_sqrt,
        kt_inv_sqrt=kt_inv_sqrt,
        factors=kernelized_factors(Ks, Kt, ks_sqrt, kt_sqrt),
    )


def _validate_binary_pair(source: Dataset, target: Dataset) -> None:
    if len(source) < 1 or len(target) < 1:
        raise ValueError("both domains need at least one training sample")
    y = np.concatenate([source.y, target.y])
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("training labels must be +1 or -1")
    if np.all(y == 1) or np.all(y == -1):
        raise DegenerateProblemError("both classes must appear across the two domains")


def _alternate(factors: MetricFactors, y: np.ndarray, cfg: HfaConfig, monitor=None):
    """Run the alternation; returns (metric, final solution, objective trace).

    Each outer iteration updates the metric with a bounded number of
    line-searched projected-gradient steps at fixed beta, then re-solves
    the dual on the updated kernel (warm started). Because the metric
    steps compose to H <- gamma*H + delta*vv', the working kernel is
    maintained by a rank-1 update instead of a fresh triple product.
    """
    budget = cfg.lam
    metric = initial_metric(factors.metric_order, budget)
    coupling = factors.lift.T @ (metric.matrix @ factors.lift)
    K = symmetrize(factors.base + coupling)
    sol = solve_dual(DualProblem(K, y, cfg.C), cfg.svm_tol)
    objective = [sol.objective]
    log.info("outer 0 objective %.10e", sol.objective)
    if monitor is not None:
        monitor(0, metric, sol)
    for tau in range(1, cfg.t_max):
        v = lift_vector(factors, sol.beta)
        if float(v @ v) > 0.0:
            gamma, delta = _scalar_inner_loop(
                metric,
                v,
                cfg.metric_steps,
                cfg.line_search,
                trace_base=metric.trace,
                energy_base=float(v @ (metric.matrix @ v)),
                const=float(sol.beta @ (factors.base @ sol.beta)),
            )
            if (gamma, delta) != (1.0, 0.0):
                metric = TransformMetric(gamma * metric.matrix + delta * np.outer(v, v), budget)
                u = factors.lift.T @ v
                coupling = symmetrize(gamma * coupling + delta * np.outer(u, u))
                K = symmetrize(factors.base + coupling)
        sol = solve_dual(DualProblem(K, y, cfg.C), cfg.svm_tol, warm_start=sol.alpha)
        objective.append(sol.objective)
        log.info("outer %d objective %.10e", tau, sol.objective)
        if monitor is not None:
            monitor(tau, metric, sol)
        prev, cur = objective[-2], objective[-1]
        if abs(cur - prev) <= cfg.conv_tol * max(abs(prev), 1e-12):
            break
    return metric, sol, np.array(objective)


@dataclass(frozen=True)
class HfaModel:
    """Trained kernelized model over one binary source/target pair.

    beta splits as (beta_source, beta_target) in training order; the
    stored factor matrices satisfy ks_sqrt @ ks_sqrt ~= Ks + ridge*I and
    kt_inv_sqrt @ Kt == kt_sqrt up to round-off.
    """

    source: Dataset
    target: Dataset
    kernel_source: KernelSpec
    kernel_target: KernelSpec
    metric: TransformMetric
    beta: np.ndarray
    bias: float
    ks_sqrt: np.ndarray
    kt_sqrt: np.ndarray
    kt_inv_sqrt: np.ndarray
    objective_trace: np.ndarray

    @property
    def n_source(self) -> int:
        return len(self.source)

    @property
    def n_target(self) -> int:
        return len(self.target)

    @property
    def beta_source(self) -> np.ndarray:
        return self.beta[: self.n_source]

    @property
    def beta_target(self) -> np.ndarray:
        return self.beta[self.n_source:]

    def lifted_coefficients(self) -> np.ndarray:
        """v = [Ks^{1/2} beta_s ; Kt^{1/2} beta_t], the metric-space image of beta."""
        return np.concatenate([self.ks_sqrt @ self.beta_source, self.kt_sqrt @ self.beta_target])

    def decision_function(self, X) -> np.ndarray:
        """Decision values for target-domain rows X, shape (m,)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.target.dim:
            raise ValueError(f"expected target-domain rows of dimension {self.target.dim}, got {X.shape}")
        if X.shape[0] == 0:
            return np.empty(0)
        v = self.lifted_coefficients()
        hv_target = (self.metric.matrix @ v)[self.n_source:]
        coef = self.kt_inv_sqrt @ hv_target + self.beta_target
        k_t = cross_gram(self.kernel_target, self.target.X, X)
        return k_t.T @ coef + self.bias


def hfa_train(
    source: Dataset,
    target: Dataset,
    cfg: HfaConfig = HfaConfig(),
    kernels: PrecomputedKernels | None = None,
    monitor=None,
) -> HfaModel:
    """Train the kernelized model on +-1 labeled source/target data.

    Parameters
    ----------
    source, target : Dataset
        Binary training sets; both label signs must appear in the union.
    cfg : HfaConfig
    kernels : PrecomputedKernels, optional
        Shared Gram factorization when training several relabelings of
        the same samples (one-vs-rest); must match the sample counts.
    monitor : callable, optional
        monitor(iteration, metric, dual_solution), called once per outer
        iteration including the initial solve.

    Returns
    -------
    HfaModel
    """
    _validate_binary_pair(source, target)
    if kernels is None:
        kernels = prepare_kernels(source.X, target.X, cfg)
    elif kernels.factors.n_source != len(source) or kernels.factors.n_target != len(target):
        raise ValueError("precomputed kernels do not match the training sample counts")
    y = np.concatenate([source.y, target.y]).astype(float)
    metric, sol, trace = _alternate(kernels.factors, y, cfg, monitor)
    return HfaModel(
        source=source,
        target=target,
        kernel_source=kernels.kernel_source,
        kernel_target=kernels.kernel_target,
        metric=metric,
        beta=sol.beta,
        bias=sol.bias,
        ks_sqrt=kernels.ks_sqrt,
        kt_sqrt=kernels.kt_sqrt,
        kt_inv_sqrt=kernels.kt_inv_sqrt,
        objective_trace=trace,
    )


def predict(model: HfaModel, x) -> float:
    """Decision value for one target-domain vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.target.dim:
        raise ValueError(f"expected a target-domain vector of dimension {model.target.dim}")
    return float(model.decision_function(x[None, :])[0])


@dataclass(frozen=True)
class LinearHfaModel:
    """Trained explicit-path model; the metric has order d_s + d_t."""

    source: Dataset
    target: Dataset
    metric: TransformMetric
    beta: np.ndarray
    bias: float
    objective_trace: np.ndarray

    @property
    def n_source(self) -> int:
        return len(self.source)

    @property
    def beta_source(self) -> np.ndarray:
        return self.beta[: self.n_source]

    @property
    def beta_target(self) -> np.ndarray:
        return self.beta[self.n_source:]

    def weight_vector(self) -> np.ndarray:
        """Effective target-space weights: metric coupling plus the direct term."""
        d_s = self.source.dim
        v = np.concatenate([self.source.X.T @ self.beta_source, self.target.X.T @ self.beta_target])
        hv_target = (self.metric.matrix @ v)[d_s:]
        return hv_target + self.target.X.T @ self.beta_target

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.target.dim:
            raise ValueError(f"expected target-domain rows of dimension {self.target.dim}, got {X.shape}")
        return X @ self.weight_vector() + self.bias


def hfa_train_linear(
    source: Dataset,
    target: Dataset,
    cfg: HfaConfig = HfaConfig(),
    monitor=None,
) -> LinearHfaModel:
    """Train the explicit path directly on raw features (linear kernel)."""
    _validate_binary_pair(source, target)
    factors = linear_factors(source.X.T, target.X.T)
    y = np.concatenate([source.y, target.y]).astype(float)
    metric, sol, trace = _alternate(factors, y, cfg, monitor)
    return LinearHfaModel(
        source=source,
        target=target,
        metric=metric,
        beta=sol.beta,
        bias=sol.bias,
        objective_trace=trace,
    )


def predict_linear(model: LinearHfaModel, x) -> float:
    """Decision value for one target-domain vector under the explicit path."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.target.dim:
        raise ValueError(f"expected a target-domain vector of dimension {model.target.dim}")
    return float(model.decision_function(x[None, :])[0])
