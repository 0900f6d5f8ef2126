import io

import numpy as np
import pandas as pd
import pytest

from kbqd import cli
from kbqd.errors import InputError
from kbqd.models.plans import ResamplingPlan
from kbqd.models.samples import LabeledDataset


@pytest.fixture
def csv_path(tmp_path):
    gen = np.random.default_rng(3)
    frame = pd.DataFrame({
        'species': ['A'] * 20 + ['B'] * 20,
        'x1': np.round(gen.standard_normal(40), 6),
        'x2': np.round(gen.standard_normal(40) + np.repeat([0.0, 1.0], 20), 6),
    })
    path = tmp_path / 'data.csv'
    frame.to_csv(path, index=False)
    return path


class TestLoadCsv:
    def test_reads_groups_and_features(self, csv_path):
        dataset = cli.load_csv(str(csv_path), 'species')
        assert dataset.data.shape == (40, 2)
        assert dataset.column_names == ['x1', 'x2']
        assert dataset.group_sizes() == {'A': 20, 'B': 20}

    def test_incomplete_rows(self, tmp_path):
        path = tmp_path / 'gaps.csv'
        path.write_text('g,a,b\nA,1,2\nA,,3\nA,2,2\nB,5,1\nB,6,0\nB,7,\n', encoding='utf-8')
        dataset = cli.load_csv(str(path), 'g', drop_incomplete=True)
        assert dataset.group_sizes() == {'A': 2, 'B': 2}
        with pytest.raises(InputError):
            cli.load_csv(str(path), 'g', drop_incomplete=False)

    def test_single_group(self, tmp_path):
        path = tmp_path / 'one.csv'
        path.write_text('g,a\nA,1\nA,2\nA,3\n', encoding='utf-8')
        with pytest.raises(InputError):
            cli.load_csv(str(path), 'g')

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / 'text.csv'
        path.write_text('g,a\nA,1\nA,two\nB,3\nB,4\n', encoding='utf-8')
        with pytest.raises(InputError, match='non-numeric'):
            cli.load_csv(str(path), 'g')

    def test_missing_column(self, csv_path):
        with pytest.raises(InputError):
            cli.load_csv(str(csv_path), 'species', ['x1', 'x9'])

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            cli.load_csv(str(tmp_path / 'nope.csv'), 'g')

    def test_standardize_and_subset(self, csv_path):
        dataset = cli.load_csv(str(csv_path), 'species')
        groups = dataset.to_groups(standardize=True, only=('B', 'A'))
        assert groups.labels == ('B', 'A')
        np.testing.assert_allclose(groups.pooled.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(groups.pooled.std(axis=0, ddof=1), 1.0)


class TestRunConfig:
    def test_from_mapping(self):
        config = cli.RunConfig.from_mapping(
            {'input': 'x.csv', 'statistic': 'all', 'method': 'sub', 'B': '40', 'h': '0.8',
             'drop_incomplete': 'true'}, ResamplingPlan(seed=3))
        assert config.statistics == ('tn', 'trace', 'mmd', 'energy')
        assert config.plan.method.value == 'subsampling'
        assert (config.plan.B, config.plan.seed, config.h) == (40, 3, 0.8)
        assert config.drop_incomplete

    def test_auto_h(self):
        assert cli.RunConfig.from_mapping({'h': 'auto'}, ResamplingPlan()).h is None

    def test_unknown_key(self):
        with pytest.raises(InputError):
            cli.RunConfig.from_mapping({'bandwidth': '1'}, ResamplingPlan())

    def test_bad_statistic(self):
        with pytest.raises(InputError):
            cli.RunConfig(statistics='ks')


class TestCmdTest:
    def test_report_rows(self, csv_path):
        dataset = cli.load_csv(str(csv_path), 'species')
        config = cli.RunConfig(statistics='all', h=1.0, plan=ResamplingPlan(B=20, seed=1))
        result, rows = cli.cmd_test(dataset, config, select_h_grid=(1.0,))
        assert [row.method for row in rows] == ['Tn Perm', 'Trace Perm', 'MMD', 'energy']
        assert result.h == 1.0

    def test_auto_h_uses_grid(self, csv_path):
        dataset = cli.load_csv(str(csv_path), 'species')
        config = cli.RunConfig(plan=ResamplingPlan(B=10, seed=1))
        result, _ = cli.cmd_test(dataset, config, select_h_grid=(0.6, 1.4), select_h_N=2)
        assert result.h in (0.6, 1.4)

    def test_duplicated_groups(self):
        X = np.random.default_rng(4).standard_normal((15, 2))
        dataset = LabeledDataset(np.vstack([X, X]), np.array(['A'] * 15 + ['B'] * 15), ['a', 'b'])
        result, rows = cli.cmd_test(dataset, cli.RunConfig(h=1.0, plan=ResamplingPlan(B=20)), (1.0,))
        assert np.isfinite(result.statistic_tn)
        assert rows[0].reject in (True, False)


class TestMain:
    def _test_args(self, csv_path, *extra, workers='1', h='1.0'):
        return ['--workers', workers, 'test', '--input', str(csv_path), '--group-col', 'species',
                '--h', h, '--B', '20', '--seed', '7', *extra]

    def test_csv_report(self, csv_path, capsys):
        assert cli.main(self._test_args(csv_path, '--statistic', 'all')) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == 'Method,h,Statistics,critical Value,p-value,reject H0'
        assert len(out.strip().splitlines()) == 5

    def test_report_is_byte_identical(self, csv_path, tmp_path):
        first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
        assert cli.main(self._test_args(csv_path, '--output', str(first))) == 0
        assert cli.main(self._test_args(csv_path, '--output', str(second), workers='4')) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_text_format(self, csv_path, capsys):
        assert cli.main(self._test_args(csv_path, '--format', 'text', '--groups', 'B,A')) == 0
        out = capsys.readouterr().out
        assert out.startswith('KBQD test (B, A)')
        assert 'Tn Perm' in out

    def test_unit_height_kernel(self, csv_path, capsys):
        assert cli.main(self._test_args(csv_path)) == 0
        density = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert cli.main(self._test_args(csv_path, '--kernel', 'unnormalized')) == 0
        unit = pd.read_csv(io.StringIO(capsys.readouterr().out))
        np.testing.assert_allclose(unit['Statistics'], 2 * np.pi * density['Statistics'], rtol=1e-9)
        assert list(unit['p-value']) == list(density['p-value'])

    def test_kernel_config_key(self, csv_path, tmp_path, capsys):
        conf = tmp_path / 'run.env'
        conf.write_text(f'input={csv_path}\ngroup_col=species\nh=1.0\nB=20\nkernel=sideways\n', encoding='utf-8')
        assert cli.main(['--workers', '1', 'test', '--config', str(conf)]) == cli.EXIT_INPUT_ERROR

    def test_config_file_is_overridden_by_flags(self, csv_path, tmp_path, capsys):
        conf = tmp_path / 'run.env'
        conf.write_text(f'input={csv_path}\ngroup_col=species\nh=1.0\nB=20\nmethod=bootstrap\n', encoding='utf-8')
        assert cli.main(['--workers', '1', 'test', '--config', str(conf), '--method', 'subsampling']) == 0
        assert 'Tn Sub' in capsys.readouterr().out

    def test_missing_file_is_input_error(self, tmp_path, capsys):
        code = cli.main(['test', '--input', str(tmp_path / 'missing.csv'), '--group-col', 'g', '--h', '1'])
        assert code == cli.EXIT_INPUT_ERROR
        assert '❌ [CLI]' in capsys.readouterr().err

    def test_bad_bandwidth_is_input_error(self, csv_path):
        assert cli.main(self._test_args(csv_path, h='-1')) == cli.EXIT_INPUT_ERROR

    def test_usage_error(self):
        assert cli.main(['frobnicate']) == cli.EXIT_INPUT_ERROR

    def test_singular_covariance_is_runtime_error(self, tmp_path):
        path = tmp_path / 'flat.csv'
        path.write_text('g,a,b\n' + 'A,1,1\n' * 5 + 'B,1,1\n' * 5, encoding='utf-8')
        code = cli.main(['--workers', '1', 'test', '--input', str(path), '--group-col', 'g', '--B', '5'])
        assert code == cli.EXIT_RUNTIME_ERROR

    def test_select_h(self, csv_path, capsys):
        code = cli.main(['--workers', '1', 'select-h', '--input', str(csv_path), '--group-col', 'species',
                         '--B', '10', '--N', '2', '--seed', '1'])
        assert code == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert set(frame['h']) <= {0.6, 1.0, 1.4, 1.8, 2.2}
        assert frame['selected'].sum() == 1

    def test_simulate_level_config(self, tmp_path):
        conf = tmp_path / 'level.env'
        conf.write_text('name=level\nk=2\nd=1\nn=15\nalt_grid=0\nh_grid=1.0\nN=3\nB=10\nseed=2\n'
                        'methods=permutation,bootstrap\n', encoding='utf-8')
        out = tmp_path / 'level.csv'
        assert cli.main(['--workers', '2', 'simulate', '--config', str(conf), '--output', str(out)]) == 0
        frame = pd.read_csv(out)
        assert len(frame) == 4
        assert frame['rejection_rate'].between(0, 1).all()

    def test_simulate_registered_scenario(self, tmp_path):
        out = tmp_path / 'sim.csv'
        code = cli.main(['--workers', '1', 'simulate', '--scenario', 'gumbel-location', '--N', '1', '--B', '5',
                         '--n', '10', '--methods', 'permutation', '--output', str(out)])
        assert code == 0
        assert set(pd.read_csv(out)['scenario']) == {'gumbel-location'}

    def test_simulate_text_format(self, capsys):
        code = cli.main(['--workers', '1', 'simulate', '--scenario', 'gumbel-location', '--N', '1', '--B', '5',
                         '--n', '10', '--methods', 'permutation', '--format', 'text'])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith('gumbel-location\n')
        assert 'rejection_rate' in out.splitlines()[1]

    def test_simulate_B_sweep(self, tmp_path):
        out = tmp_path / 'level-B.csv'
        code = cli.main(['--workers', '2', 'simulate', '--scenario', 'level-B', '--N', '1', '--n', '8',
                         '--B-grid', '5,7', '--methods', 'permutation', '--output', str(out)])
        assert code == 0
        assert set(pd.read_csv(out)['B']) == {5, 7}

    def test_simulate_single_B_replaces_the_sweep(self, tmp_path):
        out = tmp_path / 'level-B.csv'
        code = cli.main(['--workers', '1', 'simulate', '--scenario', 'level-B', '--N', '1', '--n', '8',
                         '--B', '6', '--methods', 'permutation', '--output', str(out)])
        assert code == 0
        assert set(pd.read_csv(out)['B']) == {6}

    def test_simulate_needs_target(self):
        assert cli.main(['simulate']) == cli.EXIT_INPUT_ERROR

    def test_bench(self, tmp_path):
        out = tmp_path / 'bench.csv'
        code = cli.main(['bench', '--d-grid', '2', '--n-grid', '20', '--B-grid', '10', '--methods', 'perm',
                         '--repetitions', '1', '--output', str(out)])
        assert code == 0
        assert (pd.read_csv(out)['mean_runtime_seconds'] > 0).all()

    def test_bench_text_format(self, capsys):
        code = cli.main(['bench', '--d-grid', '2', '--n-grid', '20', '--B-grid', '10', '--methods', 'perm',
                         '--repetitions', '1', '--format', 'text'])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == 'KBQD timing'
        assert 'mean_runtime_seconds' in lines[1]
