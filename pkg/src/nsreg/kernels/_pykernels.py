"""NumPy implementations of the stencil reductions (fallback backend)."""

import numpy as np


def power_sum(values, i, j, k, w, p):
    gathered = values[:, i, j, k]
    s2 = np.einsum("cm,cm->m", gathered, gathered)
    if p == 2.0:
        return float(np.dot(w, s2))
    if p == 1.0:
        return float(np.dot(w, np.sqrt(s2)))
    return float(np.dot(w, s2 ** (0.5 * p)))


def max_norm(values, i, j, k):
    if len(i) == 0:
        return 0.0
    gathered = values[:, i, j, k]
    return float(np.sqrt(np.einsum("cm,cm->m", gathered, gathered).max()))


def weighted_sum(values, i, j, k, w):
    return float(np.dot(w, values[i, j, k]))


def slice_sums(values, i, j, w):
    return w @ values[i, j, :]
