"""Hypothesis tests built on the aggregate contribution statistic.

The aggregate statistic is sum_i(phi_i); its (j, j') entry is positive
exactly when the distance-covariance test rejects independence of features
j and j' at the configured level (under the ``szekely`` scaling).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .critical import CriticalScale, critical_matrix
from .dataset import Dataset
from .errors import DimensionMismatchError, SmallSampleWarning
from .kernel import contribution_features, gram_matrix


@dataclass(frozen=True, eq=False)
class IndependenceResult:
    """Aggregate statistic with per-pair rejection decisions (diagonal not applicable)."""

    statistic: np.ndarray
    reject: np.ndarray
    alpha: float
    convention: CriticalScale

    def pairs(self):
        """Off-diagonal (j, j') decisions as JSON-ready dicts, j < j'."""
        m = self.statistic.shape[0]
        return [
            {
                "i": j,
                "j": j2,
                "reject": bool(self.reject[j, j2]),
                "statistic": float(self.statistic[j, j2]),
            }
            for j in range(m)
            for j2 in range(j + 1, m)
        ]


@dataclass(frozen=True, eq=False)
class StructureComparison:
    """Two-sample comparison: cross-kernel mass and per-pair sign witnesses."""

    score: float
    different_structure: bool
    witnesses: tuple[tuple[int, int], ...]
    statistic_a: np.ndarray
    statistic_b: np.ndarray


def _as_values(data):
    return data.values if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def aggregate_statistic(
    data,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    threads=None,
) -> np.ndarray:
    """sum_i(phi_i) = sum_i(Z_i^T Z_i) - n T."""
    values = _as_values(data)
    n, m = values.shape
    critical = critical_matrix(m, n, alpha, convention)
    feats = contribution_features(values, threads=threads)
    return feats.sum(axis=0) - n * critical.values


def independence_test(
    data,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    threads=None,
) -> IndependenceResult:
    """Pairwise unconditional independence test over all feature pairs.

    Rejects (j, j') when the aggregate statistic entry is strictly
    positive. Consistent against any type of dependence.
    """
    values = _as_values(data)
    if values.shape[0] < 10:
        warnings.warn(
            f"independence test with n={values.shape[0]} < 10 samples is unreliable",
            SmallSampleWarning,
            stacklevel=2,
        )
    statistic = aggregate_statistic(data, alpha=alpha, convention=convention, threads=threads)
    reject = statistic > 0.0
    np.fill_diagonal(reject, False)
    return IndependenceResult(
        statistic=statistic,
        reject=reject,
        alpha=alpha,
        convention=CriticalScale(convention),
    )


def structure_difference_score(
    data_a,
    data_b,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    threads=None,
) -> StructureComparison:
    """Two-sample test for differing dependence structure.

    ``score`` is the total cross-Gram kernel mass; a negative total
    certifies that some feature pair is dependent in one dataset and
    independent in the other. The witness list reports pairs whose
    aggregate statistics disagree in sign between the datasets.
    """
    values_a = _as_values(data_a)
    values_b = _as_values(data_b)
    if values_a.shape[1] != values_b.shape[1]:
        raise DimensionMismatchError(
            f"feature counts differ: {values_a.shape[1]} vs {values_b.shape[1]}"
        )
    cross = gram_matrix(values_a, values_b, alpha=alpha, convention=convention, threads=threads)
    score = float(cross.values.sum())
    stat_a = aggregate_statistic(values_a, alpha=alpha, convention=convention, threads=threads)
    stat_b = aggregate_statistic(values_b, alpha=alpha, convention=convention, threads=threads)
    m = values_a.shape[1]
    witnesses = tuple(
        (j, j2)
        for j in range(m)
        for j2 in range(j + 1, m)
        if (stat_a[j, j2] > 0.0) != (stat_b[j, j2] > 0.0)
    )
    return StructureComparison(
        score=score,
        different_structure=score < 0.0,
        witnesses=witnesses,
        statistic_a=stat_a,
        statistic_b=stat_b,
    )
