from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Tuple

from kbqd.errors import InputError

UINT64_MAX = 2 ** 64 - 1


class ResamplingMethod(str, Enum):
    BOOTSTRAP = 'bootstrap'
    PERMUTATION = 'permutation'
    SUBSAMPLING = 'subsampling'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        short = {'boot': cls.BOOTSTRAP, 'perm': cls.PERMUTATION, 'sub': cls.SUBSAMPLING}
        if key in short:
            return short[key]
        try:
            return cls(key)
        except ValueError:
            choices = ', '.join(m.value for m in cls)
            raise InputError(f"Unknown resampling method '{value}' (expected one of: {choices})")

    @property
    def short_name(self):
        return {'bootstrap': 'Boot', 'permutation': 'Perm', 'subsampling': 'Sub'}[self.value]


@dataclass(frozen=True)
class ResamplingPlan:
    """How critical values are computed: method, replications B, subsample proportion b."""
    method: ResamplingMethod = ResamplingMethod.PERMUTATION
    B: int = 150
    b: float = 0.8
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'method', ResamplingMethod.parse(self.method))
        if int(self.B) != self.B or int(self.B) < 1:
            raise InputError(f"B must be a positive integer, got {self.B}")
        if not 0 < float(self.b) <= 1:
            raise InputError(f"Subsample proportion b must be in (0, 1], got {self.b}")
        if not 0 < float(self.alpha) < 1:
            raise InputError(f"alpha must be in (0, 1), got {self.alpha}")
        if int(self.seed) != self.seed or not 0 <= int(self.seed) <= UINT64_MAX:
            raise InputError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, 'B', int(self.B))
        object.__setattr__(self, 'b', float(self.b))
        object.__setattr__(self, 'alpha', float(self.alpha))
        object.__setattr__(self, 'seed', int(self.seed))

    def with_method(self, method):
        return replace(self, method=ResamplingMethod.parse(method))

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        data = asdict(self)
        data['method'] = self.method.value
        return data


class AlternativeKind(str, Enum):
    LOCATION = 'location'
    SCALE = 'scale'
    SKEWNESS = 'skewness'


DEFAULT_DELTA_GRIDS = {
    AlternativeKind.LOCATION: (0.2, 0.3, 0.4),
    AlternativeKind.SCALE: (0.1, 0.3, 0.5),
    AlternativeKind.SKEWNESS: (0.2, 0.3, 0.6),
}
DEFAULT_H_GRID = (0.6, 1.0, 1.4, 1.8, 2.2)


def _ascending_positive(values, name):
    values = tuple(float(v) for v in values)
    if not values:
        raise InputError(f"{name} must not be empty")
    if any(v <= 0 for v in values):
        raise InputError(f"{name} must contain positive values, got {values}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InputError(f"{name} must be strictly ascending, got {values}")
    return values


@dataclass(frozen=True)
class AlternativeFamily:
    """Target alternatives F_delta used to tune the bandwidth."""
    kind: AlternativeKind = AlternativeKind.LOCATION
    delta_grid: Tuple[float, ...] = ()
    h_grid: Tuple[float, ...] = DEFAULT_H_GRID

    def __post_init__(self):
        try:
            kind = AlternativeKind(str(getattr(self.kind, 'value', self.kind)).lower())
        except ValueError:
            raise InputError(f"Unknown alternative family '{self.kind}'")
        delta_grid = self.delta_grid or DEFAULT_DELTA_GRIDS[kind]
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'delta_grid', _ascending_positive(delta_grid, 'delta_grid'))
        object.__setattr__(self, 'h_grid', _ascending_positive(self.h_grid, 'h_grid'))
