"""
Command-line surface: CSV ingestion, run configuration and the
`test`, `select-h`, `simulate` and `bench` subcommands.

Usage:
    python app.py test --input penguins.csv --group-col species --groups Adelie,Chinstrap --h 0.8
    python app.py test --input data.csv --group-col group --statistic all --method subsampling
    python app.py select-h --input data.csv --group-col group --family location
    python app.py simulate --scenario normal-one --N 100 --output results/normal-one.csv
    python app.py simulate --config my_scenario.env
    python app.py bench --d-grid 2,10 --n-grid 100,200 --B-grid 150
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from kbqd import create_app
from kbqd.errors import InputError, KBQDError
from kbqd.models.kernel import Centering, validate_bandwidth
from kbqd.models.plans import AlternativeFamily, ResamplingMethod, ResamplingPlan
from kbqd.models.samples import LabeledDataset
from kbqd.models.scenario import ScenarioConfig
from kbqd.services import resampling, simulation, tuning
from kbqd.services.scenario_registry import get_available_scenarios, get_scenario_config
from kbqd.services.worker_pool import set_default_workers

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_RUNTIME_ERROR = 3

KBQD_STATISTICS = ('tn', 'trace')
ALL_STATISTICS = KBQD_STATISTICS + resampling.BASELINE_STATISTICS
PREPROCESSING = ('none', 'standardize')
FORMATS = ('csv', 'text')
KERNELS = ('normalized', 'unnormalized')


def _split(value):
    if value is None:
        return ()
    if isinstance(value, str):
        value = value.replace(';', ',').split(',')
    return tuple(str(v).strip() for v in value if str(v).strip())


def _float_list(value, name):
    try:
        return tuple(float(v) for v in _split(value))
    except ValueError:
        raise InputError(f"{name} must be a comma-separated list of numbers, got {value!r}")


def _int_list(value, name):
    try:
        return tuple(int(v) for v in _split(value))
    except ValueError:
        raise InputError(f"{name} must be a comma-separated list of integers, got {value!r}")


def _flag(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off', ''):
        return False
    raise InputError(f"Expected a boolean, got {value!r}")


# ==================== Data ingestion ====================

def dataset_from_frame(frame, group_column, feature_columns=(), drop_incomplete=False):
    """LabeledDataset from a DataFrame; feature_columns default to every other column."""
    if group_column not in frame.columns:
        raise InputError(f"Group column '{group_column}' not found (columns: {', '.join(map(str, frame.columns))})")
    features = list(feature_columns) or [c for c in frame.columns if c != group_column]
    missing = [c for c in features if c not in frame.columns]
    if missing:
        raise InputError(f"Feature column(s) not found: {', '.join(missing)}")
    if not features:
        raise InputError("No feature columns selected")

    frame = frame[[group_column] + features].copy()
    for column in features:
        raw = frame[column]
        numeric = pd.to_numeric(raw, errors='coerce')
        bad = numeric.isna() & raw.notna() & (raw.astype(str).str.strip() != '')
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise InputError(f"Column '{column}' has a non-numeric value {raw.iloc[row]!r} (data row {row + 1})")
        frame[column] = numeric

    incomplete = frame[features].isna().any(axis=1) | frame[group_column].isna()
    if incomplete.any():
        if not drop_incomplete:
            raise InputError(f"{int(incomplete.sum())} row(s) have missing values; use --drop-incomplete")
        logger.info(f"🧹 [CLI] Dropped {int(incomplete.sum())} incomplete row(s)")
        frame = frame.loc[~incomplete]

    labels = frame[group_column].astype(str).to_numpy()
    dataset = LabeledDataset(data=frame[features].to_numpy(dtype=float), group_labels=labels,
                             column_names=[str(c) for c in features])
    sizes = dataset.group_sizes()
    if len(sizes) < 2:
        raise InputError(f"Need at least 2 groups in '{group_column}', found {len(sizes)}")
    small = [label for label, size in sizes.items() if size < 2]
    if small:
        raise InputError(f"Group(s) with fewer than 2 rows: {', '.join(small)}")
    return dataset


def load_csv(path, group_column, feature_columns=(), drop_incomplete=False):
    """Read a comma-separated UTF-8 file with a header row."""
    if not os.path.isfile(path):
        raise InputError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, encoding='utf-8', dtype=str, keep_default_na=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputError(f"Could not parse {path}: {e}")
    dataset = dataset_from_frame(frame, group_column, feature_columns, drop_incomplete)
    logger.info(f"📥 [CLI] Loaded {len(dataset.group_labels)} rows, {len(dataset.column_names)} features, "
                f"{len(dataset.groups)} groups from {path}")
    return dataset


# ==================== Run configuration ====================

@dataclass(frozen=True)
class RunConfig:
    """Everything `test` and `select-h` need besides the data."""
    input: Optional[str] = None
    group_col: str = 'group'
    features: Tuple[str, ...] = ()
    groups: Tuple[str, ...] = ()
    drop_incomplete: bool = False
    statistics: Tuple[str, ...] = KBQD_STATISTICS
    h: Optional[float] = None
    centering: str = Centering.NONPARAMETRIC.value
    plan: ResamplingPlan = field(default_factory=ResamplingPlan)
    preprocessing: str = 'none'
    output: Optional[str] = None
    format: str = 'csv'
    kernel: str = 'normalized'

    def __post_init__(self):
        statistics = tuple(s.lower() for s in _split(self.statistics))
        if 'all' in statistics:
            statistics = ALL_STATISTICS
        unknown = [s for s in statistics if s not in ALL_STATISTICS]
        if unknown or not statistics:
            raise InputError(f"statistic must be one of {', '.join(ALL_STATISTICS + ('all',))}, got {unknown or '()'}")
        object.__setattr__(self, 'statistics', statistics)
        object.__setattr__(self, 'features', _split(self.features))
        object.__setattr__(self, 'groups', _split(self.groups))
        object.__setattr__(self, 'drop_incomplete', _flag(self.drop_incomplete))
        if self.h is not None and str(self.h).strip().lower() not in ('', 'auto'):
            object.__setattr__(self, 'h', validate_bandwidth(self.h))
        else:
            object.__setattr__(self, 'h', None)
        object.__setattr__(self, 'centering', Centering.parse(self.centering).value)
        if self.preprocessing not in PREPROCESSING:
            raise InputError(f"preprocessing must be one of {PREPROCESSING}, got '{self.preprocessing}'")
        if self.format not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}, got '{self.format}'")
        if self.kernel not in KERNELS:
            raise InputError(f"kernel must be one of {KERNELS}, got '{self.kernel}'")

    @property
    def standardize(self):
        return self.preprocessing == 'standardize'

    @property
    def normalize(self):
        return self.kernel == 'normalized'

    @classmethod
    def from_mapping(cls, mapping, defaults):
        """
        Merge flat key=value settings over a default ResamplingPlan.

        Keys: input, group_col, features, groups, drop_incomplete, statistic, h,
        centering, method, B, b, alpha, seed, preprocessing, output, format, kernel.
        """
        mapping = {str(k).strip(): v for k, v in dict(mapping).items() if v is not None}
        plan_fields = {}
        for key, cast in (('method', str), ('B', int), ('b', float), ('alpha', float), ('seed', int)):
            if key in mapping:
                try:
                    plan_fields[key] = cast(mapping.pop(key))
                except ValueError:
                    raise InputError(f"Invalid value for '{key}'")
        if 'statistic' in mapping:
            mapping['statistics'] = mapping.pop('statistic')
        known = {'input', 'group_col', 'features', 'groups', 'drop_incomplete', 'statistics', 'h',
                 'centering', 'preprocessing', 'output', 'format', 'kernel'}
        unknown = sorted(k for k in mapping if k not in known)
        if unknown:
            raise InputError(f"Unknown config key(s): {', '.join(unknown)}")
        if 'h' in mapping and str(mapping['h']).strip().lower() not in ('', 'auto'):
            try:
                mapping['h'] = float(mapping['h'])
            except ValueError:
                raise InputError(f"Invalid value for 'h': {mapping['h']!r}")
        return cls(plan=replace(defaults, **plan_fields), **mapping)


def read_config_file(path):
    """Flat key=value file (dotenv syntax)."""
    if not path:
        return {}
    if not os.path.isfile(path):
        raise InputError(f"Config file not found: {path}")
    return {k: v for k, v in dotenv_values(path).items() if v is not None}


def _dataset_groups(dataset, config):
    return dataset.to_groups(standardize=config.standardize, only=config.groups)


# ==================== Commands ====================

def cmd_test(dataset, config, select_h_grid, select_h_N=50, workers=1):
    """
    KBQD tests (and any requested comparison tests) on the dataset.

    Returns (TestResult or None, report rows). When no h is configured the
    bandwidth is chosen by select_h first.
    """
    groups = _dataset_groups(dataset, config)
    plan = config.plan
    logger.info(f"🚀 [CLI] {groups.k}-sample test on groups {', '.join(groups.labels)} "
                f"(sizes {groups.sizes}, d={groups.d}, {plan.method.value}, B={plan.B})")
    h = config.h
    if h is None:
        selection = tuning.select_h(groups, AlternativeFamily(h_grid=select_h_grid), plan=plan,
                                    N=select_h_N, centering=config.centering, workers=workers,
                                    normalize=config.normalize)
        h = selection.h_star
        logger.info(f"🎯 [CLI] Selected h={h}")

    result = None
    rows = []
    kbqd_stats = [s for s in config.statistics if s in KBQD_STATISTICS]
    if kbqd_stats:
        result = resampling.critical_value(groups, h, plan, centering=config.centering, workers=workers,
                                            normalize=config.normalize)
        rows.extend(result.report_rows(kbqd_stats))
    for stat in config.statistics:
        if stat in resampling.BASELINE_STATISTICS:
            baseline = resampling.baseline_test(groups, stat, plan, h=h if stat == 'mmd' else None, workers=workers,
                                                normalize=config.normalize)
            rows.extend(baseline.report_rows())
    logger.info(f"✅ [CLI] Test finished ({len(rows)} report rows)")
    return result, rows


def cmd_select_h(dataset, config, family, N=50, workers=1):
    groups = _dataset_groups(dataset, config)
    return tuning.select_h(groups, family, plan=config.plan, N=N, centering=config.centering, workers=workers,
                           normalize=config.normalize)


def cmd_simulate(scenario, workers=None):
    return simulation.run_scenario(scenario, workers=workers)


def cmd_bench(d_grid, n_grid, B_grid, methods, repetitions=3, h=1.0, b=0.8, alpha=0.05, seed=0):
    if not d_grid or not n_grid or not B_grid or not methods:
        raise InputError("bench needs non-empty d, n, B and method grids")
    methods = [ResamplingMethod.parse(m).value for m in methods]
    return simulation.run_timing_benchmark(d_grid, n_grid, B_grid, methods, repetitions=repetitions,
                                           h=validate_bandwidth(h), b=b, alpha=alpha, seed=seed)


# ==================== Output ====================

def report_frame(rows):
    return pd.DataFrame([row.to_dict() for row in rows],
                        columns=['Method', 'h', 'Statistics', 'critical Value', 'p-value', 'reject H0'])


def render(frame, fmt, title=None):
    if fmt == 'text':
        body = frame.to_string(index=False)
        return f"{title}\n{body}\n" if title else f"{body}\n"
    return frame.to_csv(index=False)


def write_output(text, path=None):
    if not path:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
    logger.info(f"💾 [CLI] Wrote {path}")


# ==================== Argument parsing ====================

def _add_data_args(parser):
    parser.add_argument('--input', help='CSV file with a header row')
    parser.add_argument('--group-col', dest='group_col', help='Column holding the group label')
    parser.add_argument('--features', help='Comma-separated feature columns (default: all other columns)')
    parser.add_argument('--groups', help='Comma-separated group labels to keep, in this order')
    parser.add_argument('--drop-incomplete', dest='drop_incomplete', action='store_const', const=True,
                        help='Drop rows with a missing label or feature')
    parser.add_argument('--standardize', dest='preprocessing', action='store_const', const='standardize',
                        help='z-score every feature over the pooled sample')
    parser.add_argument('--centering', choices=[c.value for c in Centering] + ['parametric-normal'])
    parser.add_argument('--method', choices=[m.value for m in ResamplingMethod])
    parser.add_argument('--B', dest='B', type=int, help='Number of resamples (default 150)')
    parser.add_argument('--b', dest='b', type=float, help='Subsample proportion (default 0.8)')
    parser.add_argument('--alpha', type=float, help='Significance level (default 0.05)')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--output', help='Write the report here instead of stdout')
    parser.add_argument('--format', choices=FORMATS)
    parser.add_argument('--kernel', choices=KERNELS,
                        help='Normal density kernel or the unit-height exp(-||x - y||^2 / (2 h^2))')
    parser.add_argument('--config', help='Flat key=value config file; flags override it')


def build_parser():
    parser = argparse.ArgumentParser(prog='kbqd', description='Kernel-based quadratic distance k-sample tests')
    parser.add_argument('--workers', type=int, help='Worker threads (default: KBQD_WORKERS or all cores)')
    sub = parser.add_subparsers(dest='command', required=True)

    test = sub.add_parser('test', help='Run the KBQD tests on a CSV dataset')
    _add_data_args(test)
    test.add_argument('--h', type=float, help='Kernel bandwidth (omit to select it automatically)')
    test.add_argument('--statistic', choices=ALL_STATISTICS + ('all',))

    select = sub.add_parser('select-h', help='Pick the bandwidth by the mid-power rule')
    _add_data_args(select)
    select.add_argument('--family', choices=['location', 'scale', 'skewness'], default='location')
    select.add_argument('--h-grid', dest='h_grid', help='Comma-separated candidate bandwidths')
    select.add_argument('--delta-grid', dest='delta_grid', help='Comma-separated alternative parameters')
    select.add_argument('--N', dest='N', type=int, help='Monte Carlo repetitions per (delta, h)')

    simulate = sub.add_parser('simulate', help='Run a level / power simulation scenario')
    simulate.add_argument('--scenario', help='Registered scenario name')
    simulate.add_argument('--config', help='Flat key=value scenario file')
    simulate.add_argument('--list', action='store_true', help='List registered scenarios')
    simulate.add_argument('--N', dest='N', type=int)
    simulate.add_argument('--n', dest='n', type=int)
    simulate.add_argument('--d', dest='d', type=int)
    simulate.add_argument('--B', dest='B', type=int)
    simulate.add_argument('--b', dest='b', type=float)
    simulate.add_argument('--alpha', type=float)
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--methods', help='Comma-separated resampling methods')
    simulate.add_argument('--B-grid', dest='B_grid', help='Comma-separated B values to sweep')
    simulate.add_argument('--h-policy', dest='h_policy', choices=['fixed', 'auto'])
    simulate.add_argument('--output')
    simulate.add_argument('--format', choices=FORMATS, default='csv')
    simulate.add_argument('--kernel', choices=KERNELS)

    bench = sub.add_parser('bench', help='Time the KBQD test across d, n and B')
    bench.add_argument('--d-grid', dest='d_grid', default='2,10')
    bench.add_argument('--n-grid', dest='n_grid', default='100,200')
    bench.add_argument('--B-grid', dest='B_grid', default='150')
    bench.add_argument('--methods', default='bootstrap,permutation,subsampling')
    bench.add_argument('--repetitions', type=int, default=3)
    bench.add_argument('--h', type=float, default=1.0)
    bench.add_argument('--seed', type=int)
    bench.add_argument('--output')
    bench.add_argument('--format', choices=FORMATS, default='csv')
    return parser


def _run_config(args, app):
    defaults = app.default_plan()
    settings = read_config_file(args.config)
    for key in ('input', 'group_col', 'features', 'groups', 'drop_incomplete', 'centering', 'method',
                'B', 'b', 'alpha', 'seed', 'preprocessing', 'output', 'format', 'kernel'):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, 'h', None) is not None:
        settings['h'] = args.h
    if getattr(args, 'statistic', None) is not None:
        settings['statistic'] = args.statistic
    settings.setdefault('kernel', KERNELS[0] if app.config['NORMALIZE_KERNEL'] else KERNELS[1])
    config = RunConfig.from_mapping(settings, defaults)
    if not config.input:
        raise InputError("No input file given (--input or 'input' in the config file)")
    return config


def _load(config):
    return load_csv(config.input, config.group_col, config.features, config.drop_incomplete)


def _handle_test(args, app):
    config = _run_config(args, app)
    dataset = _load(config)
    _, rows = cmd_test(dataset, config, select_h_grid=app.config['H_GRID'],
                       select_h_N=app.config['SELECT_H_N'], workers=app.workers)
    title = f"KBQD test ({', '.join(config.groups or dataset.groups)})"
    write_output(render(report_frame(rows), config.format, title), config.output)


def _handle_select_h(args, app):
    config = _run_config(args, app)
    dataset = _load(config)
    family = AlternativeFamily(kind=args.family, delta_grid=_float_list(args.delta_grid, 'delta-grid'),
                               h_grid=_float_list(args.h_grid, 'h-grid') or app.config['H_GRID'])
    result = cmd_select_h(dataset, config, family, N=args.N or app.config['SELECT_H_N'], workers=app.workers)
    title = f"h* = {result.h_star} ({'power >= 0.5 reached' if result.achieved else 'max power'})"
    write_output(render(result.to_frame(), config.format, title), config.output)


def _kernel_flag(value):
    return None if value is None else value == KERNELS[0]


def _handle_simulate(args, app):
    if args.list:
        frame = pd.DataFrame(get_available_scenarios())
        write_output(render(frame, 'text'))
        return
    B_grid = _int_list(args.B_grid, 'B-grid') or None
    if B_grid is None and args.B is not None:
        # an explicit --B replaces a registered B sweep
        B_grid = ()
    overrides = {
        'N': args.N, 'n': args.n, 'd': args.d, 'h_policy': args.h_policy,
        'methods': _split(args.methods) or None, 'normalize': _kernel_flag(args.kernel), 'B_grid': B_grid,
    }
    plan_overrides = {'B': args.B, 'b': args.b, 'alpha': args.alpha, 'seed': args.seed}
    if args.config:
        settings = read_config_file(args.config)
        settings.setdefault('normalize', app.config['NORMALIZE_KERNEL'])
        scenario = ScenarioConfig.from_mapping(settings)
        scenario = scenario.with_overrides(**overrides, **plan_overrides)
    elif args.scenario:
        plan = app.default_plan(**{k: v for k, v in plan_overrides.items() if v is not None})
        if overrides['normalize'] is None:
            overrides['normalize'] = app.config['NORMALIZE_KERNEL']
        scenario = get_scenario_config(args.scenario, seed=plan.seed, B=plan.B, b=plan.b, alpha=plan.alpha,
                                       **overrides)
    else:
        raise InputError("simulate needs --scenario NAME or --config FILE (see --list)")
    result = cmd_simulate(scenario, workers=app.workers)
    text = result.to_csv() if args.format == 'csv' else render(result.to_frame(), 'text', scenario.name)
    write_output(text, args.output)


def _handle_bench(args, app):
    seed = app.config['SEED'] if args.seed is None else args.seed
    result = cmd_bench(_int_list(args.d_grid, 'd-grid'), _int_list(args.n_grid, 'n-grid'),
                       _int_list(args.B_grid, 'B-grid'), _split(args.methods), repetitions=args.repetitions,
                       h=args.h, b=app.config['SUBSAMPLE_B'], alpha=app.config['ALPHA'], seed=seed)
    text = result.to_csv() if args.format == 'csv' else render(result.to_frame(), 'text', 'KBQD timing')
    write_output(text, args.output)


HANDLERS = {
    'test': _handle_test,
    'select-h': _handle_select_h,
    'simulate': _handle_simulate,
    'bench': _handle_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT_ERROR

    app = create_app()
    if args.workers is not None:
        if args.workers < 1:
            print(f"❌ [CLI] --workers must be >= 1, got {args.workers}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        app.config['WORKERS'] = args.workers
    set_default_workers(app.workers)

    try:
        HANDLERS[args.command](args, app)
    except (InputError, FileNotFoundError) as e:
        print(f"❌ [CLI] {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except KBQDError as e:
        print(f"❌ [CLI] {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except Exception as e:
        logger.debug("Unhandled error", exc_info=True)
        print(f"❌ [CLI] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    return EXIT_OK
