import os

from dotenv import load_dotenv

basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, '.env'))


def _int_env(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, '') else default


def _float_env(name, default):
    value = os.environ.get(name)
    return float(value) if value not in (None, '') else default


def _bool_env(name, default):
    value = os.environ.get(name)
    if value in (None, ''):
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    # Worker threads for Gram blocks, resampling and simulation grids; default: all cores
    WORKERS = _int_env('KBQD_WORKERS', os.cpu_count() or 1)
    LOG_LEVEL = os.environ.get('KBQD_LOG_LEVEL', 'INFO')

    # Resampling defaults (B=150, b=0.8, 95th quantile)
    SEED = _int_env('KBQD_SEED', 20240101)
    B = _int_env('KBQD_B', 150)
    SUBSAMPLE_B = _float_env('KBQD_SUBSAMPLE_B', 0.8)
    ALPHA = _float_env('KBQD_ALPHA', 0.05)

    # Normal density kernel; false gives the unit-height kernel exp(-||x - y||^2 / (2 h^2))
    NORMALIZE_KERNEL = _bool_env('KBQD_NORMALIZE_KERNEL', True)

    # Bandwidth selection defaults
    H_GRID = (0.6, 1.0, 1.4, 1.8, 2.2)
    SELECT_H_N = _int_env('KBQD_SELECT_H_N', 50)

