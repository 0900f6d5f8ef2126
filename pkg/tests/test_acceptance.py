"""
Monte Carlo level / power runs. The slow ones are deselected by default;
run them with `pytest -m slow`.
"""
import pytest

from kbqd import cli
from kbqd.models.plans import ResamplingPlan
from kbqd.models.scenario import ScenarioConfig
from kbqd.services import simulation
from kbqd.services.scenario_registry import get_scenario_config


def _rates(result, statistic='tn'):
    return {(r.method, r.alt_param): r.rejection_rate for r in result.rows if r.statistic == statistic}


@pytest.mark.slow
@pytest.mark.parametrize('d', [2, 6])
def test_level_is_calibrated(d):
    config = ScenarioConfig(
        name=f'level-d{d}', k=2, d=d, n=100, alt_grid=(0.0,), h_grid=(1.4,),
        methods=('permutation', 'bootstrap', 'subsampling'), statistics=('tn',),
        plan=ResamplingPlan(B=150, b=0.8, seed=2024), N=500,
    )
    rates = _rates(simulation.run_scenario(config))
    assert 0.03 <= rates[('permutation', 0.0)] <= 0.07
    assert 0.03 <= rates[('bootstrap', 0.0)] <= 0.07
    assert rates[('subsampling', 0.0)] <= rates[('permutation', 0.0)] + 0.01


@pytest.mark.slow
def test_power_grows_with_skewness():
    config = get_scenario_config('scenario1', seed=7, B=150, methods=('permutation',), statistics=('tn',),
                                 h_grid=(2.2,), N=200)
    rates = _rates(simulation.run_scenario(config))
    curve = [rates[('permutation', lam)] for lam in (0.0, 0.1, 0.2, 0.3)]
    # binomial noise at N=200 is about 0.02 near the level
    assert all(b >= a - 0.02 for a, b in zip(curve, curve[1:]))
    assert curve[-1] >= 0.8


@pytest.mark.slow
def test_cauchy_k_sample():
    config = get_scenario_config('cauchy-type1', seed=11, B=150, alt_grid=(0.0, 1.0), methods=('permutation',),
                                 statistics=('tn',), h_grid=(1.4,), N=300)
    rates = _rates(simulation.run_scenario(config))
    level = rates[('permutation', 0.0)]
    assert 0.02 <= level <= 0.09
    assert rates[('permutation', 1.0)] >= level + 0.3


def test_simulate_csv_is_identical_across_thread_counts(tmp_path):
    conf = tmp_path / 'normal-one.env'
    conf.write_text('name=normal-one-small\nk=3\nd=2\nn=12\nalternative_generator=normal_shift_last\n'
                    'alt_grid=0,0.5,1\nh_grid=1.0\nN=2\nB=10\nseed=5\nstatistics=tn,trace,energy\n',
                    encoding='utf-8')
    outputs = []
    for workers in ('1', '4'):
        out = tmp_path / f'out-{workers}.csv'
        assert cli.main(['--workers', workers, 'simulate', '--config', str(conf), '--output', str(out)]) == 0
        frame = out.read_text(encoding='utf-8').splitlines()
        # drop the runtime column before comparing
        outputs.append([','.join(line.split(',')[:9] + line.split(',')[10:]) for line in frame])
    assert outputs[0] == outputs[1]


def test_select_h_csv_is_identical_across_thread_counts(tmp_path):
    gen_rows = ['g,a,b'] + [f'{"A" if i < 15 else "B"},{(i * 37 % 11) / 3:.3f},{(i * 17 % 7) / 2:.3f}'
                            for i in range(30)]
    data = tmp_path / 'data.csv'
    data.write_text('\n'.join(gen_rows) + '\n', encoding='utf-8')
    outputs = []
    for workers in ('1', '4'):
        out = tmp_path / f'h-{workers}.csv'
        code = cli.main(['--workers', workers, 'select-h', '--input', str(data), '--group-col', 'g',
                         '--B', '10', '--N', '3', '--seed', '3', '--output', str(out)])
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
