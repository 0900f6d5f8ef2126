import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from kbqd.errors import ComputationError, InputError

SYMMETRY_RTOL = 1e-12
PSD_TOL = 1e-10


class Centering(str, Enum):
    NONE = 'none'
    NONPARAMETRIC = 'nonparametric'
    PARAMETRIC = 'parametric'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {'parametric-normal': cls.PARAMETRIC, 'parametric_normal': cls.PARAMETRIC}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            choices = ', '.join(c.value for c in cls)
            raise InputError(f"Unknown centering '{value}' (expected one of: {choices})")


def validate_bandwidth(h):
    """Return h as float; h must be a finite positive real."""
    try:
        h = float(h)
    except (TypeError, ValueError):
        raise InputError(f"Bandwidth h must be a number, got {h!r}")
    if not math.isfinite(h) or h <= 0:
        raise InputError(f"Bandwidth h must be finite and > 0, got {h}")
    return h


@dataclass(frozen=True)
class GramMatrix:
    """Kernel evaluations over a pooled sample."""
    values: np.ndarray
    centering: Centering = Centering.NONE

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InputError(f"Gram matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("Gram matrix has non-finite entries")
        scale = max(float(np.max(np.abs(values))), 1.0) if values.size else 1.0
        if not np.allclose(values, values.T, rtol=0.0, atol=SYMMETRY_RTOL * scale):
            raise ComputationError("Gram matrix is not symmetric")
        if Centering.parse(self.centering) is Centering.NONE and np.any(values < 0):
            raise ComputationError("Uncentered Gram matrix has negative entries")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'centering', Centering.parse(self.centering))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def underflow_fraction(self):
        """Share of off-diagonal entries that are exactly zero; kernel values never are."""
        n = self.n
        if self.centering is not Centering.NONE or n < 2:
            return 0.0
        zeros = np.count_nonzero(self.values == 0.0) - np.count_nonzero(np.diag(self.values) == 0.0)
        return zeros / (n * (n - 1))


@dataclass(frozen=True)
class NormalModelParams:
    """Location / covariance of the normal centering distribution."""
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        d = mu.shape[0]
        if sigma.shape != (d, d):
            raise InputError(f"sigma must be {d}x{d}, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=PSD_TOL, atol=PSD_TOL):
            raise ComputationError("sigma is not symmetric")
        if np.min(np.linalg.eigvalsh(sigma)) <= PSD_TOL:
            raise ComputationError("sigma is not positive-definite")
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'sigma', sigma)

    @property
    def d(self):
        return self.mu.shape[0]

    @classmethod
    def from_sample(cls, data):
        data = np.asarray(data, dtype=float)
        if data.shape[0] <= data.shape[1]:
            raise ComputationError(
                f"Need more rows than columns to estimate a covariance (n={data.shape[0]}, d={data.shape[1]})")
        sigma = np.atleast_2d(np.cov(data, rowvar=False, ddof=1))
        return cls(mu=data.mean(axis=0), sigma=sigma)
