"""Sparse linear surrogate fitted to the auxiliary permutation dataset.

The estimator minimizes

    (1/(2m)) * sum_i (y_i - w.x_i - b)^2 + lam * Omega(w)

with Omega the L1 norm (default, cyclic coordinate descent) or the squared
L2 norm (regularized normal equations).  Features and targets are mean
centered for the solve; the intercept is unpenalized and reported in the
original basis.  The fit is fully deterministic: fixed cyclic coordinate
order, no randomization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import Degenerate, DimensionMismatch, NonFinite


@dataclass(frozen=True)
class AuxiliaryDataset:
    """Rows of (lower-triangle adjacency vector, model score)."""

    features: np.ndarray  # (m, d)
    targets: np.ndarray  # (m,)

    def __post_init__(self):
        if self.features.ndim != 2 or self.targets.ndim != 1:
            raise ValueError("features must be (m, d), targets (m,)")
        if self.features.shape[0] != self.targets.shape[0]:
            raise ValueError("row count mismatch between features and targets")

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def row_count(self) -> int:
        return self.features.shape[0]


def _soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


class SparseLinearSurrogate(BaseEstimator, RegressorMixin):
    """Regularized linear regression with an unpenalized intercept.

    Parameters
    ----------
    lam : regularization strength (>= 0).
    penalty : "l1" (coordinate descent) or "l2" (normal equations).
    tol : L1 convergence threshold on the max coordinate update.
    max_iter : maximum number of coordinate-descent sweeps.
    """

    def __init__(self, lam=0.01, penalty="l1", tol=1e-8, max_iter=1000):
        self.lam = lam
        self.penalty = penalty
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        m, d = X.shape
        if d == 0 or m == 0:
            raise Degenerate(f"empty design: {m} rows x {d} features")
        if y.shape[0] != m:
            raise DimensionMismatch(f"{m} rows but {y.shape[0]} targets")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise NonFinite("fit inputs contain NaN or infinite values")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.penalty not in ("l1", "l2"):
            raise ValueError(f"unknown penalty {self.penalty!r}")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")

        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        yc = y - y_mean

        if self.penalty == "l2":
            w = np.linalg.solve(
                (Xc.T @ Xc) / m + 2.0 * self.lam * np.eye(d),
                (Xc.T @ yc) / m,
            )
            self.n_iter_ = 1
            self.objective_path_ = [self._objective(Xc, yc, w)]
        else:
            w, self.n_iter_, self.objective_path_ = self._fit_l1(Xc, yc)

        self.coef_ = w
        self.intercept_ = float(y_mean - w @ x_mean)
        self.objective_value_ = float(self.objective_path_[-1])
        self.n_features_in_ = d
        return self

    def _objective(self, Xc, yc, w):
        m = Xc.shape[0]
        r = yc - Xc @ w
        loss = float(r @ r) / (2.0 * m)
        if self.penalty == "l1":
            return loss + self.lam * float(np.abs(w).sum())
        return loss + self.lam * float(w @ w)

    def _fit_l1(self, Xc, yc):
        m, d = Xc.shape
        col_sq = (Xc ** 2).sum(axis=0) / m  # per-coordinate curvature
        w = np.zeros(d)
        r = yc.copy()  # residual yc - Xc @ w
        path = []
        sweeps = 0
        for sweeps in range(1, self.max_iter + 1):
            max_delta = 0.0
            for j in range(d):
                if col_sq[j] == 0.0:
                    continue
                xj = Xc[:, j]
                rho = (xj @ r) / m + col_sq[j] * w[j]
                new = _soft_threshold(rho, self.lam) / col_sq[j]
                delta = new - w[j]
                if delta != 0.0:
                    r -= delta * xj
                    w[j] = new
                    max_delta = max(max_delta, abs(delta))
            path.append(self._objective(Xc, yc, w))
            if max_delta < self.tol:
                break
        return w, sweeps, path

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        out = self.intercept_ + X @ self.coef_
        return float(out[0]) if single else out

    def fit_dataset(self, dataset: AuxiliaryDataset) -> "SparseLinearSurrogate":
        return self.fit(dataset.features, dataset.targets)


def lambda_max(X, y) -> float:
    """Smallest lam for which the L1 fit is all-zero: max |(1/m) xj~ . y~|."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    return float(np.max(np.abs(Xc.T @ yc)) / X.shape[0])
