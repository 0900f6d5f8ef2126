import math

import numpy as np
from scipy import stats

# Largest skewness a skew-normal marginal can reach (|delta| -> 1)
SN_MAX_SKEWNESS = 0.5 * (4 - math.pi) * (2 / (math.pi - 2)) ** 1.5
SKEWNESS_CLAMP = 0.995


def order_statistic_rank(alpha, B):
    """1-based rank m = ceil((1 - alpha) * B) of the empirical (1 - alpha) quantile."""
    return max(1, min(B, math.ceil(round((1 - alpha) * B, 9))))


def empirical_quantile(values, alpha):
    """m-th order statistic of the resampled values, m = ceil((1 - alpha) * B)."""
    ordered = np.sort(np.asarray(values, dtype=float))
    return float(ordered[order_statistic_rank(alpha, len(ordered)) - 1])


def resampling_pvalue(values, observed):
    """(1 + #{resampled >= observed}) / (B + 1)."""
    values = np.asarray(values, dtype=float)
    return float((1 + np.count_nonzero(values >= observed)) / (len(values) + 1))


def sample_skewness(data):
    """Standardized third moment per column (biased moment estimator)."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    return np.atleast_1d(stats.skew(data, axis=0, bias=True))


def skewness_to_sn_shape(gamma):
    """
    Invert the skew-normal skewness formula for the shape parameter.

    gamma is clamped to +-0.995 * SN_MAX_SKEWNESS so the result stays finite.
    """
    gamma = np.clip(np.asarray(gamma, dtype=float), -SKEWNESS_CLAMP * SN_MAX_SKEWNESS,
                    SKEWNESS_CLAMP * SN_MAX_SKEWNESS)
    g23 = np.abs(gamma) ** (2.0 / 3.0)
    c23 = (0.5 * (4 - math.pi)) ** (2.0 / 3.0)
    abs_delta = np.sqrt(0.5 * math.pi * g23 / (g23 + c23))
    delta = np.sign(gamma) * abs_delta
    return delta / np.sqrt(1 - delta ** 2)


def sn_skewness(shape):
    """Marginal skewness of a univariate skew-normal with the given shape."""
    shape = np.asarray(shape, dtype=float)
    delta = shape / np.sqrt(1 + shape ** 2)
    mean = delta * math.sqrt(2 / math.pi)
    return 0.5 * (4 - math.pi) * mean ** 3 / (1 - mean ** 2) ** 1.5
