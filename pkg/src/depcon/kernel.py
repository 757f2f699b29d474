"""Distance-covariance contribution map and the sample-similarity kernel.

The central objects, for a dataset ``S`` of n samples by m features:

* per-feature pairwise distance slices ``D``, their doubly-centered
  versions ``C`` and standardized versions ``Z = C / mean(D)``;
* the per-sample contribution matrix ``phi_i = Z_i^T Z_i - T`` where
  ``Z_i`` is the n x m slice for sample i and ``T`` is the critical
  matrix;
* the kernel ``kappa(i, i') = <phi_i, phi_i'>_F / (||phi_i|| ||phi_i'||)``
  and its Gram matrix over one or two datasets.

Gram computation never materializes the n x n x m tensor: per-sample
m x m products are built in row blocks (compiled kernel when available)
and contracted with one BLAS call.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend
from .critical import CriticalMatrix, CriticalScale, critical_matrix
from .dataset import Dataset
from .errors import (
    ConstantFeatureError,
    DegenerateSampleWarning,
    DimensionMismatchError,
    IndexOutOfBoundsError,
    OutOfRangeError,
)

#: ||phi||^2 below this counts as a zero direction; kappa is defined as 0 there.
DEGENERATE_SQ_NORM = 1e-24

#: Default cap on the per-block scratch the NumPy backend may allocate.
DEFAULT_BLOCK_BYTES = 128 * 2**20


@dataclass(frozen=True, eq=False)
class CenteredDistanceTensor:
    """Stacked per-feature distance matrices: raw, doubly-centered, standardized."""

    d: np.ndarray
    c: np.ndarray
    z: np.ndarray
    feature_mean_distance: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def m(self) -> int:
        return self.d.shape[2]


@dataclass(frozen=True, eq=False)
class DepConMatrix:
    """Image of one sample under the dependence contribution map."""

    values: np.ndarray
    sample_index: int


@dataclass(frozen=True, eq=False)
class DistanceCovMatrix:
    """m x m matrix of squared sample distance covariances."""

    values: np.ndarray


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel matrix of kappa values plus the cached per-side contribution norms."""

    values: np.ndarray
    self_norms: tuple[np.ndarray, np.ndarray]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def is_square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]


def _resolve_threads(threads):
    if threads is None:
        threads = int(os.environ.get("DEPCON_THREADS", "1"))
    return max(1, int(threads))


def _values(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.values
    return np.ascontiguousarray(np.asarray(data, dtype=np.float64))


def distance_moments(values: np.ndarray):
    """Row means and grand mean of each per-feature distance matrix.

    Uses the sorted prefix-sum identity, O(n log n) per feature, so no
    n x n matrix is formed. Raises ConstantFeatureError when a feature's
    grand mean distance would be zero.
    """
    values = _values(values)
    n, m = values.shape
    spread = values.max(axis=0) - values.min(axis=0)
    for j in np.nonzero(spread <= 0.0)[0]:
        raise ConstantFeatureError(int(j))
    order = np.argsort(values, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(values, order, axis=0)
    prefix = np.vstack([np.zeros((1, m)), np.cumsum(sorted_vals, axis=0)])
    total = prefix[-1]
    ranks = np.arange(n, dtype=np.float64)[:, None]
    # sum_k |v_r - v_k| for the r-th sorted value
    sums = sorted_vals * (2.0 * ranks + 1.0 - n) + total - prefix[:-1] - prefix[1:]
    row_sums = np.empty_like(values)
    np.put_along_axis(row_sums, order, sums, axis=0)
    row_mean = row_sums / n
    grand_mean = row_mean.mean(axis=0)
    return row_mean, grand_mean


def distance_tensor(data) -> CenteredDistanceTensor:
    """Materialize the full n x n x m distance tensor (D, C, Z).

    Memory is O(n^2 m); Gram computation does not need this, but the
    per-sample operations (phi_map, gamma_kernel) work from it.
    """
    values = _values(data)
    row_mean, grand_mean = distance_moments(values)
    d = np.abs(values[:, None, :] - values[None, :, :])
    c = d - row_mean[:, None, :] - row_mean[None, :, :] + grand_mean
    z = c / grand_mean
    return CenteredDistanceTensor(d=d, c=c, z=z, feature_mean_distance=grand_mean)


def _block_rows(n: int, m: int, block_rows=None) -> int:
    if block_rows is not None:
        return max(1, min(int(block_rows), n))
    per_row = n * m * 8
    return max(1, min(n, DEFAULT_BLOCK_BYTES // max(per_row, 1)))


def contribution_features(data, standardize=True, threads=None, block_rows=None) -> np.ndarray:
    """(n, m, m) stack of per-sample products Z_i^T Z_i (C_i^T C_i when unstandardized).

    Row blocks are fixed independently of the thread count, so results are
    bit-identical however many workers run them.
    """
    values = _values(data)
    n, m = values.shape
    row_mean, grand_mean = distance_moments(values)
    out = np.empty((n, m, m), dtype=np.float64)
    step = _block_rows(n, m, block_rows)
    spans = [(start, min(start + step, n)) for start in range(0, n, step)]
    threads = _resolve_threads(threads)

    def run(span):
        start, stop = span
        backend.phi_feature_block(
            values, row_mean, grand_mean, start, stop, standardize, out[start:stop]
        )

    if threads == 1 or len(spans) == 1:
        for span in spans:
            run(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, spans))
    return out


def phi_map(tensor: CenteredDistanceTensor, critical: CriticalMatrix, i: int) -> DepConMatrix:
    """Dependence contribution matrix of sample i: Z_i^T Z_i - T."""
    if critical.m != tensor.m:
        raise DimensionMismatchError(
            f"critical matrix is {critical.m}x{critical.m}, tensor has m={tensor.m}"
        )
    if not (0 <= i < tensor.n):
        raise IndexOutOfBoundsError(f"sample index {i} outside [0, {tensor.n})")
    slice_i = tensor.z[i]
    return DepConMatrix(values=slice_i.T @ slice_i - critical.values, sample_index=i)


def distance_cov_matrix(data) -> DistanceCovMatrix:
    """Matrix of squared sample distance covariances, (1/n^2) L^T L."""
    feats = contribution_features(data, standardize=False)
    n = feats.shape[0]
    values = feats.sum(axis=0) / (n * n)
    return DistanceCovMatrix(values=np.maximum(values, 0.0))


def _phi_inner(p_a, p_b, critical: CriticalMatrix) -> float:
    t = critical.values
    return float(
        np.sum(p_a * p_b) - np.sum(p_a * t) - np.sum(t * p_b) + critical.sq_norm
    )


def _check_pair(tensor_a, tensor_b, critical, i, i_prime):
    if tensor_a.m != tensor_b.m or critical.m != tensor_a.m:
        raise DimensionMismatchError(
            f"feature counts differ: {tensor_a.m}, {tensor_b.m}, critical {critical.m}"
        )
    if not (0 <= i < tensor_a.n):
        raise IndexOutOfBoundsError(f"index {i} outside [0, {tensor_a.n})")
    if not (0 <= i_prime < tensor_b.n):
        raise IndexOutOfBoundsError(f"index {i_prime} outside [0, {tensor_b.n})")


def gamma_kernel(tensor_a, tensor_b, critical, i, i_prime) -> float:
    """Frobenius inner product of the two samples' contribution matrices."""
    _check_pair(tensor_a, tensor_b, critical, i, i_prime)
    za, zb = tensor_a.z[i], tensor_b.z[i_prime]
    return _phi_inner(za.T @ za, zb.T @ zb, critical)


def gamma_trace_form(tensor_a, tensor_b, critical, i, i_prime) -> float:
    """Alternate expansion using the squared trace inner product of Z slices.

    Differs from :func:`gamma_kernel` for general inputs because
    ``(tr Z_a^T Z_b)^2 != ||Z_a Z_b^T||_F^2``; kept only for comparison.
    """
    _check_pair(tensor_a, tensor_b, critical, i, i_prime)
    za, zb = tensor_a.z[i], tensor_b.z[i_prime]
    if za.shape != zb.shape:
        raise DimensionMismatchError(
            "trace form needs equal sample counts; "
            f"got slices {za.shape} and {zb.shape}"
        )
    first = float(np.sum(za * zb)) ** 2
    t = critical.values
    return (
        first
        - float(np.sum((za.T @ za) * t))
        - float(np.sum(t * (zb.T @ zb)))
        + critical.sq_norm
    )


def kappa_kernel(tensor_a, tensor_b, critical, i, i_prime) -> float:
    """Cosine-normalized gamma, clamped to [-1, 1]; 0 for degenerate samples."""
    value = gamma_kernel(tensor_a, tensor_b, critical, i, i_prime)
    self_a = max(gamma_kernel(tensor_a, tensor_a, critical, i, i), 0.0)
    self_b = max(gamma_kernel(tensor_b, tensor_b, critical, i_prime, i_prime), 0.0)
    if self_a < DEGENERATE_SQ_NORM or self_b < DEGENERATE_SQ_NORM:
        warnings.warn(
            "sample with (near-)zero contribution norm; kappa set to 0",
            DegenerateSampleWarning,
            stacklevel=2,
        )
        return 0.0
    return float(np.clip(value / math.sqrt(self_a * self_b), -1.0, 1.0))


def _off_diag_sums(flat_feats: np.ndarray, m: int) -> np.ndarray:
    diag_idx = np.arange(m) * (m + 1)
    return flat_feats.sum(axis=1) - flat_feats[:, diag_idx].sum(axis=1)


def _feature_stats(data, alpha, convention, threads, block_rows):
    values = _values(data)
    n, m = values.shape
    critical = critical_matrix(m, n, alpha, convention)
    feats = contribution_features(values, threads=threads, block_rows=block_rows)
    flat = feats.reshape(n, m * m)
    return flat, _off_diag_sums(flat, m), critical


def gram_matrix(
    data_a,
    data_b=None,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    threads=None,
    block_rows=None,
) -> GramMatrix:
    """Kernel matrix of kappa values over one dataset or across two.

    The square single-dataset Gram is exactly symmetric with unit diagonal
    (0 on degenerate samples); the cross case is n x n'.
    """
    values_a = _values(data_a)
    m = values_a.shape[1]
    flat_a, off_a, crit_a = _feature_stats(data_a, alpha, convention, threads, block_rows)
    t_a = crit_a.off_diagonal
    if data_b is None:
        flat_b, off_b, t_b = flat_a, off_a, t_a
    else:
        values_b = _values(data_b)
        if values_b.shape[1] != m:
            raise DimensionMismatchError(
                f"feature counts differ: {m} vs {values_b.shape[1]}"
            )
        flat_b, off_b, crit_b = _feature_stats(data_b, alpha, convention, threads, block_rows)
        t_b = crit_b.off_diagonal
    cross_tt = m * (m - 1) * t_a * t_b

    gamma = flat_a @ flat_b.T
    gamma -= t_b * off_a[:, None]
    gamma -= t_a * off_b[None, :]
    gamma += cross_tt

    if data_b is None:
        gamma = 0.5 * (gamma + gamma.T)
        self_a = self_b = np.maximum(np.diagonal(gamma).copy(), 0.0)
    else:
        self_a = np.maximum(
            np.einsum("ij,ij->i", flat_a, flat_a)
            - 2.0 * t_a * off_a
            + m * (m - 1) * t_a * t_a,
            0.0,
        )
        self_b = np.maximum(
            np.einsum("ij,ij->i", flat_b, flat_b)
            - 2.0 * t_b * off_b
            + m * (m - 1) * t_b * t_b,
            0.0,
        )

    degenerate_a = self_a < DEGENERATE_SQ_NORM
    degenerate_b = self_b < DEGENERATE_SQ_NORM
    if degenerate_a.any() or degenerate_b.any():
        warnings.warn(
            "dataset contains samples with (near-)zero contribution norm; "
            "their kernel rows are set to 0",
            DegenerateSampleWarning,
            stacklevel=2,
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = gamma / (np.sqrt(self_a)[:, None] * np.sqrt(self_b)[None, :])
    kappa[degenerate_a, :] = 0.0
    kappa[:, degenerate_b] = 0.0
    np.clip(kappa, -1.0, 1.0, out=kappa)
    return GramMatrix(values=kappa, self_norms=(np.sqrt(self_a), np.sqrt(self_b)))


def kernel_distance(kappa_value):
    """Angular distance arccos(kappa), in radians within [0, pi]."""
    arr = np.asarray(kappa_value, dtype=np.float64)
    if np.any(arr < -1.0 - 1e-9) or np.any(arr > 1.0 + 1e-9):
        raise OutOfRangeError("kappa value outside [-1, 1]")
    result = np.arccos(np.clip(arr, -1.0, 1.0))
    return float(result) if np.isscalar(kappa_value) or arr.ndim == 0 else result


def mean_contribution(
    data,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    threads=None,
) -> np.ndarray:
    """Mean of the contribution matrices over all samples: mean_i(phi_i)."""
    values = _values(data)
    n, m = values.shape
    critical = critical_matrix(m, n, alpha, convention)
    feats = contribution_features(values, threads=threads)
    return feats.mean(axis=0) - critical.values


def contribution_mean_distance(mean_a: np.ndarray, mean_b: np.ndarray) -> float:
    """(m^2 - <A, B>_F) / 2 for two mean contribution matrices.

    When both means are +/-1 sign matrices this equals the ordered
    disagreement count, i.e. the graph distance of their preimages.
    """
    mean_a = np.asarray(mean_a, dtype=np.float64)
    mean_b = np.asarray(mean_b, dtype=np.float64)
    if mean_a.shape != mean_b.shape or mean_a.ndim != 2 or mean_a.shape[0] != mean_a.shape[1]:
        raise DimensionMismatchError(
            f"mean matrices must share a square shape, got {mean_a.shape} and {mean_b.shape}"
        )
    m = mean_a.shape[0]
    return 0.5 * (m * m - float(np.sum(mean_a * mean_b)))


def sample_set_distance(
    data_a,
    data_b,
    *,
    alpha: float = 0.1,
    convention: CriticalScale | str = CriticalScale.SZEKELY,
    printed_form: bool = False,
    threads=None,
) -> float:
    """Distance between two sample sets in contribution space.

    Default form: (m^2 - mean_{i,i'} gamma) / 2, which matches the graph
    distance exactly when both mean contribution matrices are sign
    matrices. ``printed_form`` selects m^2 - sum(gamma) / (2 n^2) instead,
    for comparison.
    """
    values_a = _values(data_a)
    values_b = _values(data_b)
    if values_a.shape[1] != values_b.shape[1]:
        raise DimensionMismatchError(
            f"feature counts differ: {values_a.shape[1]} vs {values_b.shape[1]}"
        )
    m = values_a.shape[1]
    mean_a = mean_contribution(values_a, alpha=alpha, convention=convention, threads=threads)
    mean_b = mean_contribution(values_b, alpha=alpha, convention=convention, threads=threads)
    mean_gamma = float(np.sum(mean_a * mean_b))
    if printed_form:
        n_a, n_b = values_a.shape[0], values_b.shape[0]
        return m * m - (n_a * n_b * mean_gamma) / (2.0 * n_a * n_a)
    return 0.5 * (m * m - mean_gamma)
