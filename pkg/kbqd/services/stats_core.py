"""
Matrix distance and the omnibus k-sample statistics.

    D[i][i] = U-statistic of the centered kernel within group i
    D[i][j] = V-statistic of the centered kernel between groups i and j
    trace   = sum_i D[i][i]
    T_n     = (k - 1) * trace - 2 * sum_{i<j} D[i][j]
"""
import numpy as np

from kbqd.errors import InputError
from kbqd.models.kernel import Centering, GramMatrix, validate_bandwidth
from kbqd.models.samples import DistanceMatrix, GroupedSamples, StatisticPair
from kbqd.services import kernel_core


def _distance_from_values(Kc, sizes):
    """Matrix distance from a centered Gram array whose rows follow the group order."""
    sizes = tuple(int(s) for s in sizes)
    if any(s < 2 for s in sizes):
        raise InputError(f"Every group needs at least 2 rows, got sizes {sizes}")
    if Kc.shape != (sum(sizes), sum(sizes)):
        raise InputError(f"Gram matrix of shape {Kc.shape} does not match group sizes {sizes}")
    bounds = np.cumsum((0,) + sizes)
    k = len(sizes)
    D = np.empty((k, k))
    for i in range(k):
        si, ei, ni = bounds[i], bounds[i + 1], sizes[i]
        block = Kc[si:ei, si:ei]
        D[i, i] = (block.sum() - np.trace(block)) / (ni * (ni - 1))
        for j in range(i + 1, k):
            sj, ej, nj = bounds[j], bounds[j + 1], sizes[j]
            D[i, j] = Kc[si:ei, sj:ej].sum() / (ni * nj)
            D[j, i] = D[i, j]
    return D


def matrix_distance(groups, Kc):
    if not isinstance(groups, GroupedSamples):
        raise InputError("groups must be GroupedSamples")
    if not isinstance(Kc, GramMatrix):
        raise InputError("Kc must be a GramMatrix")
    if Kc.n != groups.n:
        raise InputError(f"Gram matrix has {Kc.n} rows but the pooled sample has {groups.n}")
    return DistanceMatrix(_distance_from_values(Kc.values, groups.sizes), groups.sizes)


def trace_statistic(D):
    return float(np.trace(D.values))


def tn_statistic(D):
    values = D.values
    k = D.k
    off = values[np.triu_indices(k, 1)].sum()
    return float((k - 1) * np.trace(values) - 2 * off)


def statistics_from_gram(K, sizes, centering=Centering.NONPARAMETRIC, Z=None, h=None, normalize=True):
    """
    trace and T_n from an uncentered Gram array in group order.

    Used both for the observed statistics and for every resample, which
    indexes into the precomputed Gram and re-centers.
    """
    centering = Centering.parse(centering)
    G = K if isinstance(K, GramMatrix) else GramMatrix(K, Centering.NONE)
    Kc = kernel_core.center(G, centering, Z=Z, h=h, normalize=normalize)
    D = DistanceMatrix(_distance_from_values(Kc.values, sizes), tuple(sizes))
    return StatisticPair(trace=trace_statistic(D), tn=tn_statistic(D))


def check_centering(centering, k):
    centering = Centering.parse(centering)
    if centering is Centering.PARAMETRIC and k > 2:
        raise InputError("Parametric-normal centering is only available for two samples (k=2)")
    return centering


def ksample_test_statistics(groups, h, centering=Centering.NONPARAMETRIC, workers=1, normalize=True):
    """Both statistics from one shared Gram matrix over the pooled sample."""
    h = validate_bandwidth(h)
    centering = check_centering(centering, groups.k)
    pooled = groups.pooled
    G = kernel_core.gram_matrix(pooled, h, workers=workers, normalize=normalize)
    return statistics_from_gram(G, groups.sizes, centering, Z=pooled, h=h, normalize=normalize)
