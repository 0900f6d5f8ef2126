from dataclasses import dataclass, field, replace
from typing import Tuple

from kbqd.errors import InputError
from kbqd.models.kernel import Centering
from kbqd.models.plans import ResamplingMethod, ResamplingPlan

STATISTICS = ('tn', 'trace', 'mmd', 'energy')
ALTERNATIVE_GROUPS = ('last', 'all')


def _floats(value):
    if isinstance(value, str):
        value = [v for v in value.replace(';', ',').split(',') if v.strip()]
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise InputError(f"Expected a list of numbers, got {value!r}")


def _ints(value):
    values = _floats(value)
    if any(not v.is_integer() for v in values):
        raise InputError(f"Expected a list of integers, got {value!r}")
    return tuple(int(v) for v in values)


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise InputError(f"Expected a boolean, got {value!r}")


def _names(value):
    if isinstance(value, str):
        value = [v for v in value.replace(';', ',').split(',')]
    return tuple(str(v).strip().lower() for v in value if str(v).strip())


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation study: generators, parameter grid, test settings and repetitions."""
    name: str
    k: int = 2
    d: int = 2
    n: int = 100
    null_generator: str = 'normal'
    null_param: float = 0.0
    alternative_generator: str = 'normal'
    alt_grid: Tuple[float, ...] = (0.0,)
    alternative_groups: str = 'last'
    h_policy: str = 'fixed'
    h_grid: Tuple[float, ...] = (0.6, 1.4, 2.2, 4.2)
    methods: Tuple[str, ...] = ('permutation',)
    plan: ResamplingPlan = field(default_factory=ResamplingPlan)
    N: int = 200
    statistics: Tuple[str, ...] = ('tn', 'trace')
    centering: str = 'nonparametric'
    select_h_N: int = 50
    normalize: bool = True
    B_grid: Tuple[int, ...] = ()

    def __post_init__(self):
        from kbqd.services.simulation import GENERATORS

        if not self.name:
            raise InputError("Scenario needs a name")
        for key in ('k', 'd', 'n', 'N', 'select_h_N'):
            value = int(getattr(self, key))
            if value < 1:
                raise InputError(f"{key} must be >= 1, got {value}")
            object.__setattr__(self, key, value)
        if self.k < 2:
            raise InputError(f"k must be >= 2, got {self.k}")
        if self.n < 2:
            raise InputError(f"n must be >= 2, got {self.n}")
        for key in ('null_generator', 'alternative_generator'):
            if getattr(self, key) not in GENERATORS:
                raise InputError(f"Unknown generator '{getattr(self, key)}' for {key} "
                                 f"(available: {', '.join(sorted(GENERATORS))})")
        object.__setattr__(self, 'alt_grid', _floats(self.alt_grid))
        object.__setattr__(self, 'h_grid', _floats(self.h_grid))
        if not self.alt_grid:
            raise InputError("alt_grid must not be empty")
        if self.alternative_groups not in ALTERNATIVE_GROUPS:
            raise InputError(f"alternative_groups must be one of {ALTERNATIVE_GROUPS}")
        if self.h_policy not in ('fixed', 'auto'):
            raise InputError(f"h_policy must be 'fixed' or 'auto', got '{self.h_policy}'")
        if self.h_policy == 'fixed' and (not self.h_grid or any(h <= 0 for h in self.h_grid)):
            raise InputError(f"h_grid must contain positive values, got {self.h_grid}")
        methods = tuple(ResamplingMethod.parse(m).value for m in _names(self.methods))
        if not methods:
            raise InputError("methods must not be empty")
        object.__setattr__(self, 'methods', methods)
        statistics = _names(self.statistics)
        unknown = [s for s in statistics if s not in STATISTICS]
        if unknown or not statistics:
            raise InputError(f"statistics must be a non-empty subset of {STATISTICS}, got {statistics}")
        object.__setattr__(self, 'statistics', statistics)
        object.__setattr__(self, 'centering', Centering.parse(self.centering).value)
        object.__setattr__(self, 'normalize', _bool(self.normalize))
        B_grid = _ints(self.B_grid)
        if any(B < 1 for B in B_grid):
            raise InputError(f"B_grid must contain positive integers, got {B_grid}")
        object.__setattr__(self, 'B_grid', B_grid)

    @property
    def sizes(self):
        return (self.n,) * self.k

    @property
    def B_values(self):
        """Resample counts to run; the plan's B unless a B sweep is configured."""
        return self.B_grid or (self.plan.B,)

    def with_overrides(self, **overrides):
        plan_keys = {'B', 'b', 'alpha', 'seed'}
        plan_overrides = {k: v for k, v in overrides.items() if k in plan_keys and v is not None}
        other = {k: v for k, v in overrides.items() if k not in plan_keys and v is not None}
        plan = replace(self.plan, **plan_overrides) if plan_overrides else self.plan
        return replace(self, plan=plan, **other)

    @classmethod
    def from_mapping(cls, mapping):
        """Build from flat key=value text (every value may be a string)."""
        mapping = {str(k).strip(): v for k, v in dict(mapping).items()}
        plan_fields = {}
        for key, cast in (('B', int), ('b', float), ('alpha', float), ('seed', int)):
            if key in mapping:
                plan_fields[key] = _cast(cast, mapping.pop(key), key)
        casts = {
            'name': str, 'k': int, 'd': int, 'n': int, 'N': int, 'select_h_N': int,
            'null_generator': str, 'null_param': float, 'alternative_generator': str,
            'alternative_groups': str, 'h_policy': str, 'centering': str,
            'alt_grid': _floats, 'h_grid': _floats, 'methods': _names, 'statistics': _names,
            'normalize': _bool, 'B_grid': _ints,
        }
        unknown = [k for k in mapping if k not in casts]
        if unknown:
            raise InputError(f"Unknown scenario config key(s): {', '.join(sorted(unknown))}")
        fields_ = {key: _cast(casts[key], value, key) for key, value in mapping.items()}
        if 'name' not in fields_:
            raise InputError("Scenario config must set 'name'")
        return cls(plan=ResamplingPlan(**plan_fields), **fields_)


def _cast(cast, value, key):
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise InputError(f"Invalid value {value!r} for '{key}'")
