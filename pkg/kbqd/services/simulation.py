"""
Level / power simulations and computational-time benchmarks.

Randomness for repetition r of grid point g in scenario s comes from
RngStream(seed, crc32(s)).path(g, r), so rows do not depend on how grid points
are spread over worker threads. Rows are sorted canonically before output.
"""
import logging
import math
import time
import zlib
from collections import defaultdict
from dataclasses import replace

import numpy as np

from kbqd.errors import InputError
from kbqd.models.plans import AlternativeFamily, ResamplingPlan
from kbqd.models.results import ScenarioResult, ScenarioRow
from kbqd.models.samples import GroupedSamples
from kbqd.services import resampling, tuning
from kbqd.services.distributions import (RngStream, sample_gumbel, sample_lognormal, sample_mv_cauchy,
                                         sample_mvn, sample_mvt, sample_skew_normal)
from kbqd.services.worker_pool import WorkerPool

logger = logging.getLogger(__name__)

T_DEGREES_OF_FREEDOM = 4
AUTO_H = object()


def _half(d, value):
    eps = np.zeros(d)
    eps[:max(1, d // 2)] = value
    return eps


def _univariate(d, name):
    if d != 1:
        raise InputError(f"Generator '{name}' is univariate; got d={d}")


def _normal(n, d, param, stream, group, k):
    return sample_mvn(n, np.zeros(d), np.eye(d), stream)


def _normal_shift_last(n, d, param, stream, group, k):
    mu = np.zeros(d)
    mu[-1] = param
    return sample_mvn(n, mu, np.eye(d), stream)


def _normal_triangle(n, d, param, stream, group, k):
    """Three groups with means on an equilateral triangle of side param."""
    if k != 3 or d < 2:
        raise InputError("Generator 'normal_triangle' needs k=3 and d>=2")
    corners = [(0.0, math.sqrt(3) / 3 * param),
               (-param / 2, -math.sqrt(3) / 6 * param),
               (param / 2, -math.sqrt(3) / 6 * param)]
    mu = np.zeros(d)
    mu[:2] = corners[group]
    return sample_mvn(n, mu, np.eye(d), stream)


def _skew_normal(n, d, param, stream, group, k):
    return sample_skew_normal(n, np.zeros(d), np.eye(d), np.full(d, param), stream)


def _skew_normal_first(n, d, param, stream, group, k):
    lam = np.zeros(d)
    lam[0] = param
    return sample_skew_normal(n, np.zeros(d), np.eye(d), lam, stream)


def _cauchy(n, d, param, stream, group, k):
    return sample_mv_cauchy(n, np.full(d, param), stream)


def _cauchy_half(n, d, param, stream, group, k):
    return sample_mv_cauchy(n, _half(d, param), stream)


def _t4(n, d, param, stream, group, k):
    return sample_mvt(n, T_DEGREES_OF_FREEDOM, np.full(d, param), stream)


def _t4_half(n, d, param, stream, group, k):
    return sample_mvt(n, T_DEGREES_OF_FREEDOM, _half(d, param), stream)


def _lognormal(n, d, param, stream, group, k):
    _univariate(d, 'lognormal')
    return sample_lognormal(n, 0.0, param, stream)


def _gumbel_scale(n, d, param, stream, group, k):
    _univariate(d, 'gumbel_scale')
    return sample_gumbel(n, 0.0, param, stream)


def _gumbel_location(n, d, param, stream, group, k):
    _univariate(d, 'gumbel_location')
    return sample_gumbel(n, param, 1.0, stream)


# key -> sampler(n, d, param, stream, group, k)
GENERATORS = {
    'normal': _normal,
    'normal_shift_last': _normal_shift_last,
    'normal_triangle': _normal_triangle,
    'skew_normal': _skew_normal,
    'skew_normal_first': _skew_normal_first,
    'cauchy': _cauchy,
    'cauchy_half': _cauchy_half,
    't4': _t4,
    't4_half': _t4_half,
    'lognormal': _lognormal,
    'gumbel_scale': _gumbel_scale,
    'gumbel_location': _gumbel_location,
}


def scenario_stream(config):
    return RngStream(config.plan.seed, zlib.crc32(config.name.encode('utf-8')))


def generate_groups(config, alt_param, stream):
    """k samples: null generator for groups 0..k-2, alternative for the last (or for all)."""
    samples = []
    for g in range(config.k):
        if config.alternative_groups == 'all' or g == config.k - 1:
            key, param = config.alternative_generator, alt_param
        else:
            key, param = config.null_generator, config.null_param
        samples.append(GENERATORS[key](config.n, config.d, param, stream.child(g), g, config.k))
    return GroupedSamples(tuple(samples))


def _select_h(config, groups, stream):
    plan = config.plan.with_seed(stream.derive_seed())
    result = tuning.select_h(groups, AlternativeFamily(), plan=plan, N=config.select_h_N,
                             centering=config.centering, workers=1, normalize=config.normalize)
    return result.h_star


def _run_grid_point(config, alt_param, stream):
    """
    Rejection tallies for one alternative parameter.

    With h_policy='auto' the bandwidth is selected again on every repetition's
    data; those rows report the mean selected h.
    """
    tallies = defaultdict(lambda: [0, 0.0])
    auto = config.h_policy == 'auto'
    selected = []
    kbqd_stats = [s for s in config.statistics if s in ('tn', 'trace')]

    for rep in range(config.N):
        rep_stream = stream.child(rep)
        groups = generate_groups(config, alt_param, rep_stream.child(0))
        if auto:
            selected.append(_select_h(config, groups, rep_stream.child(2)))
            h_values = ((AUTO_H, selected[-1]),)
        else:
            h_values = tuple((h, h) for h in config.h_grid)
        seed = rep_stream.child(1).derive_seed()

        if kbqd_stats:
            for method in config.methods:
                plan = config.plan.with_method(method).with_seed(seed)
                for key, h in h_values:
                    started = time.perf_counter()
                    result = resampling.critical_value(groups, h, plan, centering=config.centering, workers=1,
                                                       normalize=config.normalize)
                    elapsed = time.perf_counter() - started
                    for stat in kbqd_stats:
                        reject = result.reject_tn if stat == 'tn' else result.reject_trace
                        tally = tallies[(stat, method, key)]
                        tally[0] += int(reject)
                        tally[1] += elapsed

        baseline_plan = config.plan.with_method('permutation').with_seed(seed)
        for stat in config.statistics:
            if stat not in resampling.BASELINE_STATISTICS:
                continue
            for key, h in (h_values if stat == 'mmd' else ((None, None),)):
                started = time.perf_counter()
                result = resampling.baseline_test(groups, stat, baseline_plan, h=h, workers=1,
                                                  normalize=config.normalize)
                tally = tallies[(stat, 'permutation', key)]
                tally[0] += int(result.reject)
                tally[1] += time.perf_counter() - started

    if auto:
        logger.info(f"🎯 [Simulation] {config.name}: alt_param={alt_param} selected h "
                    f"min={min(selected)} max={max(selected)}")
    logger.info(f"✅ [Simulation] {config.name}: alt_param={alt_param} B={config.plan.B} done "
                f"({config.N} repetitions)")
    mean_h = float(np.mean(selected)) if auto else None
    return [
        ScenarioRow(
            scenario=config.name, statistic=stat, method=method, d=config.d, n=config.n, k=config.k,
            h=mean_h if key is AUTO_H else key, alt_param=float(alt_param), rejection_rate=count / config.N,
            mean_runtime_seconds=runtime / config.N, N=config.N, B=config.plan.B, seed=config.plan.seed,
        )
        for (stat, method, key), (count, runtime) in tallies.items()
    ]


def run_scenario(config, workers=None):
    """
    Rejection rates for every (statistic, method, h, alt_param, B) cell of the scenario.

    Every B of a sweep reuses the same simulated datasets and resampling seeds.
    """
    logger.info(f"🚀 [Simulation] {config.name}: k={config.k} d={config.d} n={config.n} "
                f"N={config.N} grid={config.alt_grid} B={config.B_values}")
    root = scenario_stream(config)
    cells = [(replace(config, plan=replace(config.plan, B=B)), g, alt_param)
             for B in config.B_values for g, alt_param in enumerate(config.alt_grid)]
    chunks = WorkerPool(workers, name='simulate').map(
        lambda cell: _run_grid_point(cell[0], cell[2], root.child(cell[1])), cells)
    return ScenarioResult([row for chunk in chunks for row in chunk]).sorted()


def run_timing_benchmark(d_grid, n_grid, B_grid, methods, repetitions=3, h=1.0, b=0.8, alpha=0.05,
                         seed=0):
    """
    Wall-clock seconds per KBQD test on standard-normal two-sample data.

    Runs sequentially so timings are not distorted by sibling threads; one
    warm-up run per cell is discarded.
    """
    if repetitions < 1:
        raise InputError(f"repetitions must be >= 1, got {repetitions}")
    rows = []
    root = RngStream(seed, zlib.crc32(b'timing'))
    for di, d in enumerate(d_grid):
        for ni, n in enumerate(n_grid):
            groups_stream = root.path(di, ni)
            data = [GroupedSamples((sample_mvn(n, np.zeros(d), np.eye(d), groups_stream.path(rep, 0)),
                                    sample_mvn(n, np.zeros(d), np.eye(d), groups_stream.path(rep, 1))))
                    for rep in range(repetitions + 1)]
            for B in B_grid:
                for method in methods:
                    plan = ResamplingPlan(method=method, B=B, b=b, alpha=alpha, seed=seed)
                    resampling.critical_value(data[0], h, plan, workers=1)
                    rejections, elapsed = 0, 0.0
                    for groups in data[1:]:
                        started = time.perf_counter()
                        result = resampling.critical_value(groups, h, plan, workers=1)
                        elapsed += time.perf_counter() - started
                        rejections += int(result.reject_tn)
                    rows.append(ScenarioRow(
                        scenario='timing', statistic='tn', method=plan.method.value, d=int(d), n=int(n), k=2,
                        h=float(h), alt_param=0.0, rejection_rate=rejections / repetitions,
                        mean_runtime_seconds=elapsed / repetitions, N=repetitions, B=int(B), seed=int(seed),
                    ))
                    logger.info(f"⏱️ [Bench] d={d} n={n} B={B} {plan.method.value}: "
                                f"{elapsed / repetitions:.3f}s per test")
    return ScenarioResult(rows).sorted()
