"""
Gaussian diffusion kernel, Gram matrices and kernel centering.

The kernel is the normal density kernel
    K(x, y) = (2 pi h^2)^(-d/2) exp(-||x - y||^2 / (2 h^2)),
or, with normalize=False, the unit-height kernel exp(-||x - y||^2 / (2 h^2)).
The two differ by the constant (2 pi h^2)^(d/2), so every centered kernel
and every statistic built on it scales by the same factor.
"""
import logging
import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import multivariate_normal

from kbqd.errors import ComputationError, InputError
from kbqd.models.kernel import Centering, GramMatrix, NormalModelParams, validate_bandwidth
from kbqd.models.samples import as_data_matrix
from kbqd.services.worker_pool import WorkerPool

logger = logging.getLogger(__name__)

ROW_BLOCK = 512


def _normalizer(d, h, normalize=True):
    if not normalize:
        return 1.0
    return (2 * math.pi * h * h) ** (-d / 2)


def kernel_scale(d, h, normalize=True):
    """Factor turning normal density kernel values into the requested kernel."""
    return 1.0 if normalize else (2 * math.pi * h * h) ** (d / 2)


def gaussian_kernel(x, y, h, normalize=True):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError(f"Dimension mismatch: {x.shape} vs {y.shape}")
    h = validate_bandwidth(h)
    diff = x - y
    return _normalizer(x.shape[0], h, normalize) * math.exp(-float(diff @ diff) / (2 * h * h))


def kernel_block(X, Y, h, normalize=True):
    """K(x_i, y_j) for every row pair of X and Y."""
    h = validate_bandwidth(h)
    X = as_data_matrix(X, name='X')
    Y = as_data_matrix(Y, name='Y')
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"Dimension mismatch: d={X.shape[1]} vs d={Y.shape[1]}")
    sq = cdist(X, Y, 'sqeuclidean')
    return _normalizer(X.shape[1], h, normalize) * np.exp(-sq / (2 * h * h))


def gram_matrix(Z, h, workers=1, normalize=True):
    """
    Uncentered Gram matrix over the pooled sample Z.

    Row blocks are evaluated independently; every entry is computed on its
    own so the result is identical for any number of workers.
    """
    Z = as_data_matrix(Z, name='pooled sample')
    h = validate_bandwidth(h)
    n = Z.shape[0]
    if n < 2:
        raise InputError(f"Gram matrix needs at least 2 rows, got {n}")
    starts = range(0, n, ROW_BLOCK)
    blocks = WorkerPool(workers, name='gram').map(
        lambda s: kernel_block(Z[s:s + ROW_BLOCK], Z, h, normalize=normalize), starts)
    G = GramMatrix(np.vstack(blocks), Centering.NONE)
    if G.underflow_fraction > 0:
        logger.warning(f"⚠️ [Kernel] {G.underflow_fraction:.1%} of the kernel entries underflow to 0 at h={h} "
                       f"(d={Z.shape[1]}); standardize the features or use a larger h")
    return G


def center_nonparametric(G):
    """
    Center K with respect to the pooled empirical distribution.

    Kc[i, j] = K[i, j] - r_i - r_j + g, with r_i the row mean including the
    diagonal and g the grand mean excluding it. Means are accumulated on
    K - K[0, 0] so a constant matrix centers to exact zeros.
    """
    if G.centering is not Centering.NONE:
        raise InputError(f"Gram matrix is already centered ({G.centering.value})")
    K = G.values
    n = G.n
    if n < 2:
        raise InputError(f"Centering needs at least 2 rows, got {n}")
    ref = K[0, 0]
    shifted = K - ref
    r = ref + shifted.mean(axis=1)
    g = ref + (shifted.sum() - np.trace(shifted)) / (n * (n - 1))
    Kc = K - (r[:, None] + r[None, :]) + g
    return GramMatrix(Kc, Centering.NONPARAMETRIC)


def _convolved_density(points, params, h, scale):
    cov = h * h * np.eye(params.d) + scale * params.sigma
    try:
        return multivariate_normal(mean=params.mu, cov=cov).pdf(points)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ComputationError(f"Singular convolution covariance: {e}")


def _self_convolution(params, h):
    return float(_convolved_density(np.zeros(params.d), NormalModelParams(np.zeros(params.d), params.sigma), h, 2.0))


def center_parametric_normal(x, y, h, params, normalize=True):
    """K_G(x, y) for G = N(mu, sigma), using Gaussian convolution closed forms."""
    if not isinstance(params, NormalModelParams):
        raise InputError("params must be NormalModelParams")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (params.d,) or y.shape != (params.d,):
        raise InputError(f"Points must have dimension {params.d}")
    h = validate_bandwidth(h)
    scale = kernel_scale(params.d, h, normalize)
    k_xg = scale * float(_convolved_density(x, params, h, 1.0))
    k_gy = scale * float(_convolved_density(y, params, h, 1.0))
    k_gg = scale * _self_convolution(params, h)
    return gaussian_kernel(x, y, h, normalize=normalize) - k_xg - k_gy + k_gg


def center_parametric_gram(G, Z, h, params=None, normalize=True):
    """
    Center a Gram matrix with respect to N(mu, sigma); params default to the sample estimates of Z.

    normalize must match the kernel G was built with.
    """
    if G.centering is not Centering.NONE:
        raise InputError(f"Gram matrix is already centered ({G.centering.value})")
    Z = as_data_matrix(Z, name='pooled sample')
    if Z.shape[0] != G.n:
        raise InputError(f"Gram matrix has {G.n} rows but the sample has {Z.shape[0]}")
    h = validate_bandwidth(h)
    params = params or NormalModelParams.from_sample(Z)
    scale = kernel_scale(params.d, h, normalize)
    k_zg = scale * np.atleast_1d(_convolved_density(Z, params, h, 1.0))
    k_gg = scale * _self_convolution(params, h)
    Kc = G.values - (k_zg[:, None] + k_zg[None, :]) + k_gg
    return GramMatrix(Kc, Centering.PARAMETRIC)


def center(G, centering, Z=None, h=None, normalize=True):
    """Dispatch on the requested centering mode."""
    centering = Centering.parse(centering)
    if centering is Centering.NONE:
        return G
    if centering is Centering.NONPARAMETRIC:
        return center_nonparametric(G)
    if Z is None or h is None:
        raise InputError("Parametric centering needs the pooled sample and h")
    return center_parametric_gram(G, Z, h, normalize=normalize)
