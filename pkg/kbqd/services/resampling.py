"""
Empirical critical values by bootstrap, permutation or subsampling of the pooled sample.

The uncentered Gram matrix of the pooled sample is built once; every
replication indexes into it and re-centers on the resampled rows. Replication
r draws from RngStream(seed, r), so the result is fixed by (inputs, seed).
"""
import logging
import math

import numpy as np
from scipy.spatial.distance import cdist

from kbqd.errors import InputError
from kbqd.models.kernel import Centering, validate_bandwidth
from kbqd.models.plans import ResamplingMethod, ResamplingPlan
from kbqd.models.results import BaselineResult, TestResult
from kbqd.models.samples import GroupedSamples, as_data_matrix
from kbqd.services import baselines, kernel_core, stats_core
from kbqd.services.distributions import RngStream, as_generator
from kbqd.services.worker_pool import WorkerPool
from kbqd.utils.quant_math import empirical_quantile, resampling_pvalue

logger = logging.getLogger(__name__)

BASELINE_STATISTICS = ('mmd', 'energy')


def subsample_sizes(sizes, b):
    """round(b * n_i) per group, rounding halves up; each must stay >= 2."""
    out = tuple(int(math.floor(b * n + 0.5)) for n in sizes)
    if any(s < 2 for s in out):
        raise InputError(f"Subsample proportion b={b} leaves a group with fewer than 2 rows ({out})")
    return out


def resample_indices(n, sizes, method, b, rng):
    """Pooled-row indices of each resampled group."""
    method = ResamplingMethod.parse(method)
    sizes = tuple(int(s) for s in sizes)
    if sum(sizes) != n:
        raise InputError(f"Group sizes {sizes} do not add up to {n} pooled rows")
    gen = as_generator(rng)
    if method is ResamplingMethod.BOOTSTRAP:
        flat = gen.integers(0, n, size=n)
        out_sizes = sizes
    else:
        # permutation is subsampling with b = 1
        b = 1.0 if method is ResamplingMethod.PERMUTATION else b
        out_sizes = subsample_sizes(sizes, b)
        flat = gen.permutation(n)[:sum(out_sizes)]
    bounds = np.cumsum((0,) + out_sizes)
    return [flat[bounds[i]:bounds[i + 1]] for i in range(len(out_sizes))]


def resample_groups(pooled, sizes, method, b, rng):
    pooled = as_data_matrix(pooled, name='pooled sample')
    parts = resample_indices(pooled.shape[0], sizes, method, b, rng)
    return GroupedSamples(tuple(pooled[idx] for idx in parts))


def _replication_streams(plan):
    return [RngStream(plan.seed, r) for r in range(plan.B)]


def _resampled_values(statistic, n, sizes, plan, workers):
    """Evaluate statistic(flat_index, out_sizes) on B resamples, in replication order."""
    def run(stream):
        parts = resample_indices(n, sizes, plan.method, plan.b, stream)
        flat = np.concatenate(parts)
        return statistic(flat, tuple(len(p) for p in parts))

    return WorkerPool(workers, name='resample').map(run, _replication_streams(plan))


def critical_value(groups, h, plan, centering=Centering.NONPARAMETRIC, workers=1, normalize=True):
    """Observed trace / T_n with resampled (1 - alpha) critical values and p-values."""
    if not isinstance(plan, ResamplingPlan):
        raise InputError("plan must be a ResamplingPlan")
    h = validate_bandwidth(h)
    centering = stats_core.check_centering(centering, groups.k)
    pooled = groups.pooled
    G = kernel_core.gram_matrix(pooled, h, workers=workers, normalize=normalize)
    K = G.values
    observed = stats_core.statistics_from_gram(G, groups.sizes, centering, Z=pooled, h=h, normalize=normalize)

    def statistic(flat, out_sizes):
        Z = pooled[flat] if centering is Centering.PARAMETRIC else None
        return stats_core.statistics_from_gram(K[np.ix_(flat, flat)], out_sizes, centering, Z=Z, h=h,
                                               normalize=normalize)

    logger.debug(f"🔄 [Resampling] {plan.B} {plan.method.value} replications, n={groups.n}, h={h}")
    values = _resampled_values(statistic, groups.n, groups.sizes, plan, workers)
    traces = [v.trace for v in values]
    tns = [v.tn for v in values]
    return TestResult(
        statistic_trace=observed.trace,
        statistic_tn=observed.tn,
        critical_trace=empirical_quantile(traces, plan.alpha),
        critical_tn=empirical_quantile(tns, plan.alpha),
        pvalue_trace=resampling_pvalue(traces, observed.trace),
        pvalue_tn=resampling_pvalue(tns, observed.tn),
        h=h,
        plan=plan,
        centering=centering.value,
    )


def baseline_statistic_fn(statistic_name, groups, h=None, workers=1, normalize=True):
    """(observed value, fn(flat_index, sizes)) for a comparison statistic over the pooled sample."""
    pooled = groups.pooled
    if statistic_name == 'energy':
        Dist = cdist(pooled, pooled)

        def fn(flat, sizes):
            return baselines.energy_k_sample_from_distances(Dist[np.ix_(flat, flat)], sizes)

        return fn(np.arange(groups.n), groups.sizes), fn
    if statistic_name == 'mmd':
        h = validate_bandwidth(h)
        K = kernel_core.gram_matrix(pooled, h, workers=workers, normalize=normalize).values

        def fn(flat, sizes):
            sub = K[np.ix_(flat, flat)]
            if len(sizes) == 2:
                return baselines.mmd2_u_from_gram(sub, sizes[0])
            return baselines.gmmd_from_gram(sub, sizes, baselines.proportional_weights(sizes))

        return fn(np.arange(groups.n), groups.sizes), fn
    raise InputError(f"Unknown baseline statistic '{statistic_name}' (expected one of: {', '.join(BASELINE_STATISTICS)})")


def baseline_test(groups, statistic_name, plan, h=None, workers=1, normalize=True):
    """
    Resampled test for MMD (k=2: MMD^2 U-statistic; k>2: GMMD with pi_i = n_i / n)
    or the k-sample energy statistic, with the same quantile and p-value rules as critical_value.
    """
    observed, fn = baseline_statistic_fn(statistic_name, groups, h=h, workers=workers, normalize=normalize)
    values = _resampled_values(fn, groups.n, groups.sizes, plan, workers)
    return BaselineResult(
        statistic_name=statistic_name,
        statistic=observed,
        critical=empirical_quantile(values, plan.alpha),
        pvalue=resampling_pvalue(values, observed),
        h=None if statistic_name == 'energy' else validate_bandwidth(h),
        plan=plan,
    )
