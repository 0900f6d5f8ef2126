"""Comparison statistics: MMD^2 U-statistic, energy distance (two- and k-sample), GMMD."""
import numpy as np
from scipy.spatial.distance import cdist

from kbqd.errors import InputError
from kbqd.models.kernel import validate_bandwidth
from kbqd.models.samples import GroupedSamples, as_data_matrix
from kbqd.services.kernel_core import kernel_block


def _pair(X, Y, min_rows):
    X = as_data_matrix(X, name='X')
    Y = as_data_matrix(Y, name='Y')
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"Dimension mismatch: d={X.shape[1]} vs d={Y.shape[1]}")
    if X.shape[0] < min_rows or Y.shape[0] < min_rows:
        raise InputError(f"Both samples need at least {min_rows} rows, got {X.shape[0]} and {Y.shape[0]}")
    return X, Y


def _mmd2_from_blocks(Kxx, Kyy, Kxy):
    n, m = Kxx.shape[0], Kyy.shape[0]
    within_x = (Kxx.sum() - np.trace(Kxx)) / (n * (n - 1))
    within_y = (Kyy.sum() - np.trace(Kyy)) / (m * (m - 1))
    return float(within_x + within_y - 2 * Kxy.sum() / (n * m))


def mmd2_u(X, Y, h, normalize=True):
    """Unbiased MMD^2 with the uncentered Gaussian kernel."""
    X, Y = _pair(X, Y, 2)
    h = validate_bandwidth(h)
    blocks = (kernel_block(X, X, h, normalize), kernel_block(Y, Y, h, normalize), kernel_block(X, Y, h, normalize))
    return _mmd2_from_blocks(*blocks)


def mmd2_u_from_gram(K, n):
    """MMD^2 of the first n pooled rows against the rest, from a precomputed Gram array."""
    return _mmd2_from_blocks(K[:n, :n], K[n:, n:], K[:n, n:])


def energy_two_sample(X, Y):
    """2/(nm) sum ||x - y|| - 1/n^2 sum ||x - x'|| - 1/m^2 sum ||y - y'||."""
    X, Y = _pair(X, Y, 1)
    return _energy_from_blocks(cdist(X, X), cdist(Y, Y), cdist(X, Y))


def _energy_from_blocks(Dxx, Dyy, Dxy):
    return float(2 * Dxy.mean() - Dxx.mean() - Dyy.mean())


def energy_k_sample(groups):
    """sum_{i<j} n_i n_j / (n_i + n_j) * energy_two_sample(sample_i, sample_j)."""
    if not isinstance(groups, GroupedSamples):
        raise InputError("groups must be GroupedSamples")
    return energy_k_sample_from_distances(cdist(groups.pooled, groups.pooled), groups.sizes)


def energy_k_sample_from_distances(Dist, sizes):
    bounds = np.cumsum((0,) + tuple(sizes))
    total = 0.0
    for i in range(len(sizes)):
        si, ei, ni = bounds[i], bounds[i + 1], sizes[i]
        for j in range(i + 1, len(sizes)):
            sj, ej, nj = bounds[j], bounds[j + 1], sizes[j]
            energy = _energy_from_blocks(Dist[si:ei, si:ei], Dist[sj:ej, sj:ej], Dist[si:ei, sj:ej])
            total += ni * nj / (ni + nj) * energy
    return float(total)


def gmmd(groups, pi, h, ordered=True, normalize=True):
    """
    Generalized MMD: sum_i sum_{j != i} pi[j] * MMD^2(sample_i, sample_j).

    With ordered=False only pairs i < j are summed (weighted by pi[j]); for
    pi = 1 that sum is T_n with the uncentered kernel, and the ordered sum is 2 T_n.
    """
    if not isinstance(groups, GroupedSamples):
        raise InputError("groups must be GroupedSamples")
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (groups.k,):
        raise InputError(f"pi must have {groups.k} entries, got shape {pi.shape}")
    if np.any(pi < 0):
        raise InputError("pi entries must be non-negative")
    h = validate_bandwidth(h)
    pooled = groups.pooled
    return gmmd_from_gram(kernel_block(pooled, pooled, h, normalize), groups.sizes, pi, ordered)


def gmmd_from_gram(K, sizes, pi, ordered=True):
    bounds = np.cumsum((0,) + tuple(sizes))
    k = len(sizes)
    mmd = np.zeros((k, k))
    for i in range(k):
        si, ei = bounds[i], bounds[i + 1]
        for j in range(i + 1, k):
            sj, ej = bounds[j], bounds[j + 1]
            mmd[i, j] = mmd[j, i] = _mmd2_from_blocks(K[si:ei, si:ei], K[sj:ej, sj:ej], K[si:ei, sj:ej])
    total = 0.0
    for i in range(k):
        for j in range(k):
            if i != j and (ordered or i < j):
                total += pi[j] * mmd[i, j]
    return float(total)


def proportional_weights(sizes):
    """pi_i = n_i / n."""
    sizes = np.asarray(sizes, dtype=float)
    return sizes / sizes.sum()
