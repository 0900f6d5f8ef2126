"""
Random samplers for the simulation scenarios.

Every sampler takes an RngStream (or a numpy Generator). Streams are keyed by
(seed, stream_id) and backed by the counter-based Philox bit generator, so a
replication's draws depend only on its key, never on execution order.
"""
from dataclasses import dataclass

import numpy as np

from kbqd.errors import ComputationError, InputError

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ('seed', 'stream_id'):
            value = int(getattr(self, name))
            if not 0 <= value < 2 ** 64:
                raise InputError(f"{name} must be an unsigned 64-bit integer, got {value}")
            object.__setattr__(self, name, value)

    def _seed_sequence(self):
        return np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))

    def generator(self):
        return np.random.Generator(np.random.Philox(self._seed_sequence()))

    def derive_seed(self):
        """A 64-bit seed owned by this stream, for handing to nested stages."""
        return int(self._seed_sequence().generate_state(1, dtype=np.uint64)[0])

    def child(self, stream_id):
        return RngStream(self.derive_seed(), stream_id)

    def path(self, *keys):
        stream = self
        for key in keys:
            stream = stream.child(key)
        return stream


def as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InputError(f"Expected an RngStream or numpy Generator, got {type(rng).__name__}")


def _vector(values, d=None, name='vector'):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if d is not None and values.shape == (1,) and d > 1:
        values = np.full(d, values[0])
    if values.ndim != 1 or (d is not None and values.shape[0] != d):
        raise InputError(f"{name} must have {d} entries, got shape {values.shape}")
    return values


def _cholesky(sigma):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise ComputationError(f"Cholesky factorization failed: {e}")


def sample_mvn(n, mu, sigma, rng):
    mu = _vector(mu, name='mu')
    d = mu.shape[0]
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape != (d, d):
        raise InputError(f"sigma must be {d}x{d}, got {sigma.shape}")
    L = _cholesky(sigma)
    z = as_generator(rng).standard_normal((int(n), d))
    return mu + z @ L.T


def sample_skew_normal(n, mu, sigma, lam, rng):
    """
    Multivariate skew-normal SN(mu, sigma, lam) via the conditioning representation.

    sigma = S Omega S with S the diagonal of scale roots; delta = Omega lam / sqrt(1 + lam' Omega lam);
    (X0, X) ~ N(0, [[1, delta'], [delta, Omega]]); output mu + S (X if X0 > 0 else -X).
    """
    mu = _vector(mu, name='mu')
    d = mu.shape[0]
    lam = _vector(lam, d, name='lambda')
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape != (d, d):
        raise InputError(f"sigma must be {d}x{d}, got {sigma.shape}")
    scale = np.sqrt(np.diag(sigma))
    if np.any(scale <= 0):
        raise ComputationError("sigma must have a positive diagonal")
    omega = sigma / np.outer(scale, scale)
    delta = omega @ lam / np.sqrt(1 + lam @ omega @ lam)
    augmented = np.empty((d + 1, d + 1))
    augmented[0, 0] = 1.0
    augmented[0, 1:] = delta
    augmented[1:, 0] = delta
    augmented[1:, 1:] = omega
    L = _cholesky(augmented)
    draws = as_generator(rng).standard_normal((int(n), d + 1)) @ L.T
    x0, x = draws[:, 0], draws[:, 1:]
    x = np.where((x0 > 0)[:, None], x, -x)
    return mu + x * scale


def skew_normal_delta(lam, sigma=None):
    lam = _vector(lam, name='lambda')
    omega = np.eye(lam.shape[0]) if sigma is None else np.atleast_2d(sigma) / np.outer(
        np.sqrt(np.diag(sigma)), np.sqrt(np.diag(sigma)))
    return omega @ lam / np.sqrt(1 + lam @ omega @ lam)


def sample_mvt(n, nu, center, rng):
    """center + Z / sqrt(V / nu), Z ~ N_d(0, I), V ~ chi-square(nu)."""
    if int(nu) != nu or nu < 1:
        raise InputError(f"nu must be a positive integer, got {nu}")
    center = _vector(center, name='center')
    n, d = int(n), center.shape[0]
    gen = as_generator(rng)
    z = gen.standard_normal((n, d))
    w = np.sqrt(gen.chisquare(nu, size=n) / nu)
    small = w < UNDERFLOW
    while np.any(small):
        # redraw instead of clamping so the law is unchanged
        w[small] = np.sqrt(gen.chisquare(nu, size=int(small.sum())) / nu)
        small = w < UNDERFLOW
    return center + z / w[:, None]


def sample_mv_cauchy(n, center, rng):
    """Multivariate Cauchy with identity scale: the t distribution with one degree of freedom."""
    return sample_mvt(n, 1, center, rng)


def sample_lognormal(n, mu_log, sigma_log, rng):
    if sigma_log <= 0:
        raise InputError(f"sigma_log must be > 0, got {sigma_log}")
    return np.exp(as_generator(rng).normal(mu_log, sigma_log, size=(int(n), 1)))


def sample_gumbel(n, mu_loc, sigma_scale, rng):
    """mu - sigma * log(-log U), U ~ uniform(0, 1)."""
    if sigma_scale <= 0:
        raise InputError(f"sigma_scale must be > 0, got {sigma_scale}")
    gen = as_generator(rng)
    u = gen.random(size=int(n))
    zero = u <= 0.0
    while np.any(zero):
        u[zero] = gen.random(size=int(zero.sum()))
        zero = u <= 0.0
    return (mu_loc - sigma_scale * np.log(-np.log(u)))[:, None]
