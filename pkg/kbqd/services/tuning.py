"""
Bandwidth selection by Monte Carlo mid-power search.

For delta ascending (outer) and h ascending (inner): draw k-1 samples from
F_0 = SN(mu, Sigma, lambda) fitted to the pooled data and one from F_delta,
run the T_n test N times and estimate its power. The first h whose power
reaches 0.5 is selected; otherwise the h with maximum power (ties -> smallest h).
"""
import logging
from dataclasses import dataclass

import numpy as np

from kbqd.errors import ComputationError, InputError
from kbqd.models.kernel import Centering
from kbqd.models.plans import AlternativeFamily, AlternativeKind
from kbqd.models.results import HSelectionResult
from kbqd.models.samples import GroupedSamples, as_data_matrix
from kbqd.services import resampling
from kbqd.services.distributions import RngStream, sample_skew_normal
from kbqd.services.worker_pool import WorkerPool
from kbqd.utils.quant_math import sample_skewness, skewness_to_sn_shape

logger = logging.getLogger(__name__)

MID_POWER = 0.5


@dataclass(frozen=True)
class PooledEstimates:
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    lambda_hat: np.ndarray

    def to_dict(self):
        return {
            'mu_hat': self.mu_hat.tolist(),
            'sigma_hat': self.sigma_hat.tolist(),
            'lambda_hat': self.lambda_hat.tolist(),
        }


def estimate_pooled_params(pooled):
    """
    Sample mean, covariance (n - 1 denominator) and per-coordinate skew-normal shape.

    The shape comes from inverting the skew-normal skewness formula at the
    sample standardized third moment, clamped below the attainable bound.
    """
    pooled = as_data_matrix(pooled, name='pooled sample')
    n, d = pooled.shape
    if n <= d:
        raise InputError(f"Need more rows than columns to estimate the covariance (n={n}, d={d})")
    sigma = np.atleast_2d(np.cov(pooled, rowvar=False, ddof=1))
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ComputationError("Pooled sample covariance is singular")
    if np.min(np.linalg.eigvalsh(sigma)) <= 1e-10:
        raise ComputationError("Pooled sample covariance is singular")
    lam = skewness_to_sn_shape(sample_skewness(pooled))
    return PooledEstimates(mu_hat=pooled.mean(axis=0), sigma_hat=sigma, lambda_hat=np.asarray(lam, dtype=float))


def alternative_params(estimates, family, delta):
    """(mu, sigma, lambda) of F_delta for the chosen family."""
    mu, sigma, lam = estimates.mu_hat, estimates.sigma_hat, estimates.lambda_hat
    if family.kind is AlternativeKind.LOCATION:
        return mu + delta, sigma, lam
    if family.kind is AlternativeKind.SCALE:
        return mu, sigma * delta, lam
    return mu, sigma, lam + delta


def _draw_groups(estimates, family, delta, sizes, stream):
    alt_mu, alt_sigma, alt_lam = alternative_params(estimates, family, delta)
    samples = []
    for g, size in enumerate(sizes[:-1]):
        samples.append(sample_skew_normal(size, estimates.mu_hat, estimates.sigma_hat,
                                          estimates.lambda_hat, stream.child(g)))
    samples.append(sample_skew_normal(sizes[-1], alt_mu, alt_sigma, alt_lam, stream.child(len(sizes) - 1)))
    return GroupedSamples(tuple(samples))


def select_h(groups, family=None, plan=None, N=50, centering=Centering.NONPARAMETRIC, workers=1,
             normalize=True, exhaustive=False):
    """
    Pick h from family.h_grid by the mid-power rule.

    Repetition j of delta index i uses the same simulated data for every h,
    so powers across the h grid are compared on common random numbers.
    The search stops at the first cell reaching MID_POWER unless exhaustive
    is set, in which case the whole (h, delta) table is filled first and the
    same cell is chosen from it.
    """
    if not isinstance(groups, GroupedSamples):
        raise InputError("groups must be GroupedSamples")
    family = family or AlternativeFamily()
    if plan is None:
        raise InputError("select_h needs a ResamplingPlan")
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N}")
    N = int(N)
    estimates = estimate_pooled_params(groups.pooled)
    sizes = groups.sizes
    root = RngStream(plan.seed, 0).child(0x7A1E)
    pool = WorkerPool(workers, name='select-h')
    power_table = {}
    selected = None

    logger.info(f"🎯 [Tuning] {family.kind.value} family, delta={family.delta_grid}, h={family.h_grid}, N={N}")
    for di, delta in enumerate(family.delta_grid):
        datasets = [_draw_groups(estimates, family, delta, sizes, root.path(di, rep)) for rep in range(N)]
        for hi, h in enumerate(family.h_grid):
            def run(rep):
                rep_plan = plan.with_seed(root.path(di, rep, 1 + hi).derive_seed())
                result = resampling.critical_value(datasets[rep], h, rep_plan, centering=centering, workers=1,
                                                   normalize=normalize)
                return result.reject_tn

            rejections = pool.map(run, range(N))
            power = float(np.mean(rejections))
            power_table[(h, delta)] = power
            logger.debug(f"   [Tuning] delta={delta} h={h} power={power:.3f}")
            if selected is None and power >= MID_POWER:
                logger.info(f"✅ [Tuning] h*={h} reaches power {power:.2f} at delta={delta}")
                selected = HSelectionResult(h_star=h, power_table=power_table, achieved=True, delta_star=delta)
                if not exhaustive:
                    return selected
    if selected is not None:
        return selected

    (h_best, delta_best), best = min(power_table.items(), key=lambda item: (-item[1], item[0][0], item[0][1]))
    logger.warning(f"⚠️ [Tuning] no h reached power {MID_POWER}; using max-power h={h_best} ({best:.2f})")
    return HSelectionResult(h_star=h_best, power_table=power_table, achieved=False, delta_star=delta_best)
