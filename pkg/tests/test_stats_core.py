import numpy as np
import pytest

from kbqd.errors import InputError
from kbqd.models.kernel import Centering
from kbqd.models.samples import DistanceMatrix, GroupedSamples
from kbqd.services import baselines, kernel_core, stats_core


def _oracle_distance(groups, h, centering):
    """Quadruple-loop matrix distance over raw kernel evaluations."""
    Z = groups.pooled
    n = Z.shape[0]
    K = np.array([[kernel_core.gaussian_kernel(Z[a], Z[b], h) for b in range(n)] for a in range(n)])
    if centering == 'nonparametric':
        r = [sum(K[a, b] for b in range(n)) / n for a in range(n)]
        g = sum(K[a, b] for a in range(n) for b in range(n) if a != b) / (n * (n - 1))
        K = np.array([[K[a, b] - r[a] - r[b] + g for b in range(n)] for a in range(n)])
    offsets = groups.offsets
    k = groups.k
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            rows_i = range(offsets[i], offsets[i + 1])
            rows_j = range(offsets[j], offsets[j + 1])
            if i == j:
                ni = len(rows_i)
                D[i, i] = sum(K[a, b] for a in rows_i for b in rows_i if a != b) / (ni * (ni - 1))
            else:
                D[i, j] = sum(K[a, b] for a in rows_i for b in rows_j) / (len(rows_i) * len(rows_j))
    return D


def _random_instance(gen, k_choices, d_choices, n_range):
    k = int(gen.choice(k_choices))
    d = int(gen.choice(d_choices))
    sizes = gen.integers(n_range[0], n_range[1] + 1, size=k)
    groups = GroupedSamples(tuple(gen.standard_normal((int(s), d)) + gen.normal(0, 0.5) for s in sizes))
    h = float(gen.uniform(0.5, 2.0))
    return groups, h


class TestMatrixDistance:
    def test_degenerate_data_gives_zero_matrix(self, degenerate_groups):
        G = kernel_core.gram_matrix(degenerate_groups.pooled, 1.0)
        D = stats_core.matrix_distance(degenerate_groups, kernel_core.center_nonparametric(G))
        assert np.all(D.values == 0.0)

    def test_matches_loop_oracle(self, make_groups):
        groups = make_groups((3, 5, 4), d=2)
        G = kernel_core.gram_matrix(groups.pooled, 0.9)
        D = stats_core.matrix_distance(groups, kernel_core.center_nonparametric(G))
        np.testing.assert_allclose(D.values, _oracle_distance(groups, 0.9, 'nonparametric'), rtol=0, atol=1e-12)

    def test_exactly_symmetric(self, make_groups):
        groups = make_groups((7, 9, 4, 6), d=3)
        G = kernel_core.gram_matrix(groups.pooled, 1.2)
        D = stats_core.matrix_distance(groups, kernel_core.center_nonparametric(G))
        assert np.array_equal(D.values, D.values.T)

    def test_size_mismatch(self, make_groups):
        groups = make_groups((3, 3))
        G = kernel_core.gram_matrix(np.zeros((5, 2)) + np.arange(5)[:, None], 1.0)
        with pytest.raises(InputError):
            stats_core.matrix_distance(groups, G)


class TestStatistics:
    def test_zero_matrix(self):
        D = DistanceMatrix(np.zeros((3, 3)), (2, 2, 2))
        assert stats_core.trace_statistic(D) == 0.0
        assert stats_core.tn_statistic(D) == 0.0

    def test_two_sample_forms(self):
        D = DistanceMatrix(np.array([[0.4, 0.1], [0.1, 0.3]]), (4, 4))
        assert stats_core.trace_statistic(D) == pytest.approx(0.7)
        assert stats_core.tn_statistic(D) == pytest.approx(0.4 + 0.3 - 2 * 0.1)

    def test_three_sample_hand_expansion(self, rng):
        A = rng.standard_normal((3, 3))
        D = DistanceMatrix((A + A.T) / 2, (3, 3, 3))
        v = D.values
        expected = 2 * (v[0, 0] + v[1, 1] + v[2, 2]) - 2 * (v[0, 1] + v[0, 2] + v[1, 2])
        assert stats_core.tn_statistic(D) == pytest.approx(expected, rel=1e-12)

    def test_degenerate_samples_give_zero(self, degenerate_groups):
        result = stats_core.ksample_test_statistics(degenerate_groups, 0.7)
        assert (result.trace, result.tn) == (0.0, 0.0)

    def test_label_permutation_leaves_tn_unchanged(self, make_groups):
        groups = make_groups((6, 8, 5), d=2, shift=0.4)
        base = stats_core.ksample_test_statistics(groups, 1.0)
        swapped = stats_core.ksample_test_statistics(groups.relabel((2, 0, 1)), 1.0)
        assert swapped.tn == pytest.approx(base.tn, rel=1e-10)
        assert swapped.trace == pytest.approx(base.trace, rel=1e-10)

    def test_parametric_centering_needs_two_samples(self, make_groups):
        with pytest.raises(InputError):
            stats_core.ksample_test_statistics(make_groups((5, 5, 5)), 1.0, centering='parametric')

    def test_parametric_centering_two_samples(self, make_groups):
        groups = make_groups((15, 12), d=2)
        result = stats_core.ksample_test_statistics(groups, 1.0, centering=Centering.PARAMETRIC)
        assert np.isfinite(result.tn) and np.isfinite(result.trace)


class TestCenteringInvariance:
    def test_tn_does_not_depend_on_centering(self):
        gen = np.random.default_rng(11)
        for _ in range(1000):
            groups, h = _random_instance(gen, (2, 3, 5), (1, 2, 6), (3, 30))
            K = kernel_core.gram_matrix(groups.pooled, h)
            centered = stats_core.statistics_from_gram(K, groups.sizes, Centering.NONPARAMETRIC)
            raw = stats_core.statistics_from_gram(K, groups.sizes, Centering.NONE)
            scale = float(np.max(K.values))
            assert centered.tn == pytest.approx(raw.tn, rel=1e-10, abs=1e-12 * scale)


class TestMMDEquivalence:
    def test_two_sample_tn_without_centering_is_mmd(self):
        gen = np.random.default_rng(12)
        for _ in range(1000):
            groups, h = _random_instance(gen, (2,), (1, 2, 6), (2, 30))
            tn = stats_core.ksample_test_statistics(groups, h, centering=Centering.NONE).tn
            X, Y = groups.samples
            scale = kernel_core.gaussian_kernel(X[0], X[0], h)
            assert tn == pytest.approx(baselines.mmd2_u(X, Y, h), rel=1e-12, abs=1e-12 * scale)


class TestBruteForceOracle:
    def test_small_instances(self):
        gen = np.random.default_rng(13)
        for _ in range(500):
            groups, h = _random_instance(gen, (2, 3), (1, 2), (2, 5))
            for centering in ('none', 'nonparametric'):
                oracle = _oracle_distance(groups, h, centering)
                K = kernel_core.gram_matrix(groups.pooled, h)
                Kc = kernel_core.center(K, centering)
                D = stats_core.matrix_distance(groups, Kc)
                np.testing.assert_allclose(D.values, oracle, rtol=0, atol=1e-12)
                k = groups.k
                assert stats_core.trace_statistic(D) == pytest.approx(np.trace(oracle), abs=1e-12)
                expected_tn = (k - 1) * np.trace(oracle) - 2 * oracle[np.triu_indices(k, 1)].sum()
                assert stats_core.tn_statistic(D) == pytest.approx(expected_tn, abs=1e-12)


class TestKernelNormalization:
    def test_statistics_scale_with_the_kernel(self, make_groups):
        groups = make_groups((20, 15, 18), d=4, shift=0.4)
        density = stats_core.ksample_test_statistics(groups, 0.8)
        unit = stats_core.ksample_test_statistics(groups, 0.8, normalize=False)
        scale = (2 * np.pi * 0.64) ** 2
        assert unit.tn == pytest.approx(scale * density.tn, rel=1e-10)
        assert unit.trace == pytest.approx(scale * density.trace, rel=1e-10)

    def test_parametric_statistics_scale_with_the_kernel(self, make_groups):
        groups = make_groups((25, 20), d=2, shift=0.5)
        density = stats_core.ksample_test_statistics(groups, 1.1, centering=Centering.PARAMETRIC)
        unit = stats_core.ksample_test_statistics(groups, 1.1, centering=Centering.PARAMETRIC, normalize=False)
        assert unit.tn == pytest.approx(2 * np.pi * 1.21 * density.tn, rel=1e-9)

    def test_separated_clusters_reach_the_upper_bound(self):
        # 151 and 68 identical rows in d=4, far apart: T_n is 2 for a unit-height kernel
        groups = GroupedSamples((np.zeros((151, 4)), np.full((68, 4), 1e3)))
        unit = stats_core.ksample_test_statistics(groups, 0.8, normalize=False)
        density = stats_core.ksample_test_statistics(groups, 0.8)
        assert unit.tn == pytest.approx(2.0, abs=1e-10)
        assert unit.tn > 1.346008
        assert density.tn == pytest.approx(2 * (2 * np.pi * 0.64) ** -2, rel=1e-10)
        assert density.tn == pytest.approx(0.123683, abs=1e-6)
