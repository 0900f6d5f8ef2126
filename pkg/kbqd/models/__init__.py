from kbqd.models.kernel import Centering, GramMatrix, NormalModelParams, validate_bandwidth
from kbqd.models.plans import AlternativeFamily, AlternativeKind, ResamplingMethod, ResamplingPlan
from kbqd.models.results import (BaselineResult, HSelectionResult, ReportRow, ScenarioResult,
                                 ScenarioRow, TestResult)
from kbqd.models.samples import DistanceMatrix, GroupedSamples, LabeledDataset, StatisticPair
from kbqd.models.scenario import ScenarioConfig
