"""Kernel PCA over contribution-kernel Gram matrices.

Double-centers the Gram, eigendecomposes, and scales eigenvectors by
inverse square-root eigenvalues so projections carry the component
variances. A deterministic sign convention (largest-magnitude coefficient
positive) makes outputs reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NotSquareError, OutOfRangeError, RankDeficientWarning
from .kernel import GramMatrix


@dataclass(frozen=True, eq=False)
class KpcaModel:
    centered_gram: np.ndarray
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    col_means: np.ndarray
    grand_mean: float

    @property
    def d(self) -> int:
        return self.coefficients.shape[1]

    @property
    def n(self) -> int:
        return self.centered_gram.shape[0]


def _gram_values(gram) -> np.ndarray:
    values = gram.values if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise NotSquareError(f"Gram matrix must be square, got shape {values.shape}")
    return values


def kpca_fit(gram, d: int) -> KpcaModel:
    """Fit a d-component kernel PCA model from a square Gram matrix.

    When fewer than d eigenvalues exceed the rank tolerance, the model is
    truncated to the achievable count with a RankDeficientWarning.
    """
    values = _gram_values(gram)
    n = values.shape[0]
    if not (1 <= d < n):
        raise OutOfRangeError(f"need 1 <= d < n, got d={d}, n={n}")
    col_means = values.mean(axis=0)
    grand_mean = float(values.mean())
    centered = values - col_means[None, :] - col_means[:, None] + grand_mean
    centered = 0.5 * (centered + centered.T)
    eigenvalues, eigenvectors = np.linalg.eigh(centered)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    tol = 1e-10 * max(eigenvalues[0], 0.0)
    usable = int(np.sum(eigenvalues > tol))
    if usable < d:
        warnings.warn(
            f"only {usable} of {d} requested components exceed the rank tolerance",
            RankDeficientWarning,
            stacklevel=2,
        )
        d = max(usable, 1)
    eigenvalues = eigenvalues[:d].copy()
    coefficients = eigenvectors[:, :d] / np.sqrt(eigenvalues)[None, :]
    # fix signs: the largest-magnitude coefficient of each component is positive
    flips = np.sign(coefficients[np.argmax(np.abs(coefficients), axis=0), np.arange(d)])
    coefficients = coefficients * flips[None, :]
    return KpcaModel(
        centered_gram=centered,
        eigenvalues=eigenvalues,
        coefficients=coefficients,
        col_means=col_means,
        grand_mean=grand_mean,
    )


def kpca_transform(model: KpcaModel) -> np.ndarray:
    """Training-sample scores, (n, d)."""
    return model.centered_gram @ model.coefficients


def kpca_project(model: KpcaModel, cross_gram) -> np.ndarray:
    """Project new samples given their kernel values against the training set."""
    cross = np.asarray(cross_gram, dtype=np.float64)
    if cross.ndim != 2 or cross.shape[1] != model.n:
        raise DimensionMismatchError(
            f"cross-Gram must have {model.n} columns, got shape {cross.shape}"
        )
    centered = (
        cross
        - cross.mean(axis=1, keepdims=True)
        - model.col_means[None, :]
        + model.grand_mean
    )
    return centered @ model.coefficients


def linear_pca_scores(points, d: int) -> np.ndarray:
    """Classical PCA scores (the coordinate-space baseline for comparisons)."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not (1 <= d <= min(n - 1, points.shape[1])):
        raise OutOfRangeError(f"need 1 <= d <= min(n-1, m), got d={d}")
    centered = points - points.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:d]
    flips = np.sign(components[np.arange(d), np.argmax(np.abs(components), axis=1)])
    return centered @ (components * flips[:, None]).T
