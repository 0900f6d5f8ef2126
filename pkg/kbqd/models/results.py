import math
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Tuple

import pandas as pd

from kbqd.models.plans import ResamplingPlan


@dataclass(frozen=True)
class TestResult:
    """Observed KBQD statistics with their resampled critical values."""
    __test__ = False  # not a pytest test class

    statistic_trace: float
    statistic_tn: float
    critical_trace: float
    critical_tn: float
    pvalue_trace: float
    pvalue_tn: float
    h: float
    plan: ResamplingPlan
    centering: str = 'nonparametric'

    @property
    def reject_trace(self):
        return self.statistic_trace > self.critical_trace

    @property
    def reject_tn(self):
        return self.statistic_tn > self.critical_tn

    def to_dict(self):
        return {
            'statistic_trace': self.statistic_trace,
            'statistic_tn': self.statistic_tn,
            'critical_trace': self.critical_trace,
            'critical_tn': self.critical_tn,
            'pvalue_trace': self.pvalue_trace,
            'pvalue_tn': self.pvalue_tn,
            'reject_trace': self.reject_trace,
            'reject_tn': self.reject_tn,
            'h': self.h,
            'centering': self.centering,
            **self.plan.to_dict(),
        }

    def report_rows(self, statistics=('tn', 'trace')):
        """Rows shaped like the Method / h / Statistics / critical value / p-value / reject table."""
        rows = []
        short = self.plan.method.short_name
        if 'tn' in statistics:
            rows.append(ReportRow(f'Tn {short}', self.h, self.statistic_tn, self.critical_tn,
                                  self.pvalue_tn, self.reject_tn))
        if 'trace' in statistics:
            rows.append(ReportRow(f'Trace {short}', self.h, self.statistic_trace, self.critical_trace,
                                  self.pvalue_trace, self.reject_trace))
        return rows


@dataclass(frozen=True)
class BaselineResult:
    """Resampled test for one of the comparison statistics (MMD, energy)."""
    statistic_name: str
    statistic: float
    critical: float
    pvalue: float
    h: Optional[float]
    plan: ResamplingPlan

    @property
    def reject(self):
        return self.statistic > self.critical

    def to_dict(self):
        return {
            'statistic_name': self.statistic_name,
            'statistic': self.statistic,
            'critical': self.critical,
            'pvalue': self.pvalue,
            'reject': self.reject,
            'h': self.h,
            **self.plan.to_dict(),
        }

    def report_rows(self):
        label = {'mmd': 'MMD', 'energy': 'energy'}.get(self.statistic_name, self.statistic_name)
        return [ReportRow(label, self.h, self.statistic, self.critical, self.pvalue, self.reject)]


@dataclass(frozen=True)
class ReportRow:
    method: str
    h: Optional[float]
    statistic: float
    critical_value: float
    pvalue: float
    reject: bool

    def to_dict(self):
        return {
            'Method': self.method,
            'h': self.h,
            'Statistics': self.statistic,
            'critical Value': self.critical_value,
            'p-value': self.pvalue,
            'reject H0': bool(self.reject),
        }


@dataclass
class HSelectionResult:
    h_star: float
    power_table: Dict[Tuple[float, float], float] = field(default_factory=dict)
    achieved: bool = False
    delta_star: Optional[float] = None

    def to_frame(self):
        rows = [
            {'h': h, 'delta': delta, 'power': power, 'selected': h == self.h_star and delta == self.delta_star}
            for (h, delta), power in sorted(self.power_table.items(), key=lambda item: (item[0][1], item[0][0]))
        ]
        return pd.DataFrame(rows, columns=['h', 'delta', 'power', 'selected'])

    def to_dict(self):
        return {
            'h_star': self.h_star,
            'achieved': self.achieved,
            'delta_star': self.delta_star,
            'power_table': [
                {'h': h, 'delta': delta, 'power': power}
                for (h, delta), power in sorted(self.power_table.items())
            ],
        }


SCENARIO_COLUMNS = ('scenario', 'statistic', 'method', 'd', 'n', 'k', 'h', 'alt_param',
                    'rejection_rate', 'mean_runtime_seconds', 'N', 'B', 'seed')


@dataclass(frozen=True)
class ScenarioRow:
    scenario: str
    statistic: str
    method: str
    d: int
    n: int
    k: int
    h: Optional[float]
    alt_param: float
    rejection_rate: float
    mean_runtime_seconds: float
    N: int
    B: int
    seed: int

    def sort_key(self):
        return (self.scenario, self.statistic, self.method, self.d, self.n, self.k,
                -1.0 if self.h is None else self.h, self.alt_param, self.B)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class ScenarioResult:
    rows: List[ScenarioRow] = field(default_factory=list)

    def sorted(self):
        return ScenarioResult(sorted(self.rows, key=ScenarioRow.sort_key))

    def to_frame(self):
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=list(SCENARIO_COLUMNS))

    def to_csv(self, path_or_buffer=None):
        """UTF-8, comma separated, header row, '.' decimal; missing h written as an empty cell."""
        return self.to_frame().to_csv(path_or_buffer, index=False, encoding='utf-8')

    @classmethod
    def from_frame(cls, frame):
        rows = []
        for record in frame.to_dict('records'):
            h = record['h']
            rows.append(ScenarioRow(
                scenario=str(record['scenario']),
                statistic=str(record['statistic']),
                method=str(record['method']),
                d=int(record['d']),
                n=int(record['n']),
                k=int(record['k']),
                h=None if h is None or (isinstance(h, float) and math.isnan(h)) else float(h),
                alt_param=float(record['alt_param']),
                rejection_rate=float(record['rejection_rate']),
                mean_runtime_seconds=float(record['mean_runtime_seconds']),
                N=int(record['N']),
                B=int(record['B']),
                seed=int(record['seed']),
            ))
        return cls(rows)

    @classmethod
    def read_csv(cls, path_or_buffer):
        return cls.from_frame(pd.read_csv(path_or_buffer, encoding='utf-8', float_precision='round_trip'))
