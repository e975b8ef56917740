"""Smooth data-fit terms: value, gradient, and Lipschitz constants.

Two losses are provided, both with an explicit unpenalized intercept:
squared error for regression and the logistic negative log-likelihood for
±1 classification.  Gradients come back as a volume over the dataset's mask
plus a scalar intercept derivative, ready for a proximal-gradient step.
Lipschitz constants are spectral norms estimated by power iteration through
matrix-vector products; the design matrix is never squared explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .grid import Mask, MaskedVolume
from .spectral import power_iteration_norm

__all__ = [
    "Dataset",
    "LossEval",
    "squared_loss",
    "logistic_loss",
    "lipschitz_squared",
    "lipschitz_logistic",
]

_TASKS = ("regression", "binary", "multiclass")


@dataclass(frozen=True)
class Dataset:
    """Sample matrix, targets, and the mask defining column order.

    Rows of ``x`` are samples; column ``q`` corresponds to active voxel
    ordinal ``q`` of ``mask``.  ``task`` declares how ``y`` is read:
    ``"regression"`` (real targets), ``"binary"`` (labels exactly -1/+1) or
    ``"multiclass"`` (nonnegative integer class ids).
    """

    x: np.ndarray
    y: np.ndarray
    mask: Mask
    task: str = "regression"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"x must be 2-dimensional, got shape {x.shape}")
        if x.shape[0] < 1:
            raise ValueError("dataset needs at least one sample")
        if x.shape[1] != self.mask.p:
            raise ValueError(
                f"x has {x.shape[1]} columns but the mask has "
                f"{self.mask.p} active voxels"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("x must be finite")
        if self.task not in _TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        y = np.asarray(self.y)
        if y.shape != (x.shape[0],):
            raise ValueError(
                f"expected {x.shape[0]} targets, got shape {y.shape}"
            )
        if self.task == "multiclass":
            if not np.issubdtype(y.dtype, np.integer):
                y_float = np.asarray(y, dtype=float)
                if np.any(y_float != np.round(y_float)):
                    raise ValueError("multiclass ids must be integers")
                y = y_float.astype(np.int64)
            else:
                y = y.astype(np.int64)
            if np.any(y < 0):
                raise ValueError("multiclass ids must be nonnegative")
        else:
            y = np.asarray(y, dtype=float)
            if not np.all(np.isfinite(y)):
                raise ValueError("targets must be finite")
            if self.task == "binary" and np.any(np.abs(y) != 1.0):
                raise ValueError("binary labels must be exactly -1 or +1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    def subset(self, indices):
        """Dataset restricted to the given sample rows (same mask/task)."""
        indices = np.asarray(indices)
        return Dataset(self.x[indices], self.y[indices], self.mask, self.task)


@dataclass(frozen=True)
class LossEval:
    """Loss value with its gradient split into volume and intercept parts."""

    value: float
    grad_w: MaskedVolume
    grad_b: float


def _check_point(d, w):
    if not d.mask.same_domain(w.mask):
        raise ValueError("weight volume does not live on the dataset mask")


def squared_loss(d, w, b):
    """Mean squared-error loss ``(1/2n) * ||y - Xw - b||^2``.

    Requires regression targets.  Gradients are ``-(1/n) X^T r`` and
    ``-(1/n) sum(r)`` for the residual ``r = y - Xw - b``.
    """
    if d.task != "regression":
        raise ValueError("squared loss needs regression targets")
    _check_point(d, w)
    r = d.y - d.x @ w.values - b
    value = 0.5 * float(r @ r) / d.n
    grad_w = MaskedVolume(d.mask, -(d.x.T @ r) / d.n)
    grad_b = -float(r.sum()) / d.n
    return LossEval(value=value, grad_w=grad_w, grad_b=grad_b)


def logistic_loss(d, w, b):
    """Mean logistic loss ``(1/n) * sum log(1 + exp(-y (Xw + b)))``.

    Requires ±1 labels.  The log term is evaluated as the stable softplus
    ``max(t, 0) + log1p(exp(-|t|))``, so margins of any size neither
    overflow nor lose the tail.
    """
    if d.task != "binary":
        raise ValueError("logistic loss needs -1/+1 labels")
    _check_point(d, w)
    margins = d.y * (d.x @ w.values + b)
    t = -margins
    value = float((np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))).mean())
    weights = d.y * expit(-margins)
    grad_w = MaskedVolume(d.mask, -(d.x.T @ weights) / d.n)
    grad_b = -float(weights.sum()) / d.n
    return LossEval(value=value, grad_w=grad_w, grad_b=grad_b)


def _gram_norm(x, seed, tol, max_iter):
    return power_iteration_norm(
        lambda v: x.T @ (x @ v), x.shape[1], seed=seed, tol=tol, max_iter=max_iter
    )


def augmented_gram_norm(x, *, seed=0, tol=1e-7, max_iter=10000):
    """Spectral norm of ``A^T A`` for ``A = [X, 1]`` without forming ``A``.

    This is the constant governing joint (weights, intercept) gradient
    steps; the plain ``lipschitz_*`` functions use ``X`` alone.
    """

    def matvec(v):
        av = x @ v[:-1] + v[-1]
        return np.concatenate([x.T @ av, [av.sum()]])

    return power_iteration_norm(
        matvec, x.shape[1] + 1, seed=seed, tol=tol, max_iter=max_iter
    )


def lipschitz_squared(d, *, seed=0, tol=1e-7, max_iter=10000):
    """Gradient Lipschitz constant of the squared loss in the weights:
    ``||X^T X|| / n`` by power iteration."""
    return _gram_norm(d.x, seed, tol, max_iter) / d.n


def lipschitz_logistic(d, *, seed=0, tol=1e-7, max_iter=10000):
    """Gradient Lipschitz constant of the logistic loss in the weights:
    ``||X||^2 / (4n)`` by power iteration."""
    return _gram_norm(d.x, seed, tol, max_iter) / (4.0 * d.n)
