"""Adelie vs Chinstrap on the Palmer penguins measurements."""
import numpy as np
import pytest

from kbqd import cli
from kbqd.models.plans import ResamplingPlan
from kbqd.services import baselines, resampling, stats_core

palmerpenguins = pytest.importorskip('palmerpenguins')

FEATURES = ['bill_length_mm', 'bill_depth_mm', 'flipper_length_mm', 'body_mass_g']
GROUPS = ('Adelie', 'Chinstrap')


@pytest.fixture(scope='module')
def penguins():
    return cli.dataset_from_frame(palmerpenguins.load_penguins(), 'species', FEATURES, drop_incomplete=True)


def test_complete_rows(penguins):
    assert penguins.data.shape == (342, 4)
    assert len(penguins.groups) == 3
    sizes = penguins.group_sizes()
    assert (sizes['Adelie'], sizes['Chinstrap']) == (151, 68)


@pytest.mark.parametrize('standardize', [False, True])
def test_statistic_does_not_depend_on_method(penguins, standardize):
    groups = penguins.to_groups(standardize=standardize, only=GROUPS)
    sub = resampling.critical_value(groups, 0.8, ResamplingPlan(method='subsampling', B=30, seed=1))
    perm = resampling.critical_value(groups, 0.8, ResamplingPlan(method='permutation', B=30, seed=1))
    assert sub.statistic_tn == perm.statistic_tn
    assert sub.statistic_trace == perm.statistic_trace
    assert 0.0 <= sub.pvalue_tn <= 1.0


def test_standardized_statistics_are_finite(penguins):
    groups = penguins.to_groups(standardize=True, only=GROUPS)
    statistics = stats_core.ksample_test_statistics(groups, 0.8)
    assert np.isfinite(statistics.tn) and np.isfinite(statistics.trace)
    assert baselines.energy_k_sample(groups) > 0


REFERENCE_TN = 1.346008
H = 0.8


@pytest.fixture(scope='module')
def standardized(penguins):
    return penguins.to_groups(standardize=True, only=GROUPS)


def test_tn_scales_between_kernels(standardized):
    density = stats_core.ksample_test_statistics(standardized, H)
    unit = stats_core.ksample_test_statistics(standardized, H, normalize=False)
    assert unit.tn == pytest.approx((2 * np.pi * H * H) ** 2 * density.tn, rel=1e-9)
    assert unit.trace == pytest.approx((2 * np.pi * H * H) ** 2 * density.trace, rel=1e-9)


def test_reference_tn_needs_the_unit_height_kernel(standardized):
    density_bound = 2 * (2 * np.pi * H * H) ** -2
    density = stats_core.ksample_test_statistics(standardized, H)
    unit = stats_core.ksample_test_statistics(standardized, H, normalize=False)
    assert 0 < density.tn < density_bound < REFERENCE_TN
    assert 0 < unit.tn <= 2.0


@pytest.mark.parametrize('normalize', [True, False])
def test_two_sample_tn_is_mmd(standardized, normalize):
    X, Y = standardized.samples
    tn = stats_core.ksample_test_statistics(standardized, H, normalize=normalize).tn
    assert tn == pytest.approx(baselines.mmd2_u(X, Y, H, normalize=normalize), rel=1e-9)
