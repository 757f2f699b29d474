"""NumPy fallback for the contribution-feature inner loop.

Mirrors the compiled kernel in ``_accel.pyx``: for each sample i in
[start, stop) build the n x m slice of centered (optionally standardized)
distances and accumulate its m x m self-product.
"""

import numpy as np


def phi_feature_block(x, row_mean, grand_mean, start, stop, standardize, out):
    block = np.abs(x[start:stop, None, :] - x[None, :, :])
    block -= row_mean[start:stop, None, :]
    block -= row_mean[None, :, :]
    block += grand_mean
    if standardize:
        block /= grand_mean
    np.matmul(block.transpose(0, 2, 1), block, out=out)
