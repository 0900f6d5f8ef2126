from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from kbqd.errors import InputError


def as_data_matrix(data, name='sample'):
    """Coerce to a finite float n x d array (1-D input becomes one column)."""
    array = np.asarray(data, dtype=float)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise InputError(f"{name} must be an n x d matrix, got {array.ndim} dimensions")
    if array.shape[1] < 1:
        raise InputError(f"{name} must have at least one column")
    if not np.all(np.isfinite(array)):
        raise InputError(f"{name} contains non-finite values")
    return array


@dataclass(frozen=True)
class GroupedSamples:
    """k samples sharing the dimension d; rows are pooled in group order."""
    samples: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        samples = tuple(as_data_matrix(s, name=f'sample {i + 1}') for i, s in enumerate(self.samples))
        if len(samples) < 2:
            raise InputError(f"Need at least 2 samples, got {len(samples)}")
        dims = {s.shape[1] for s in samples}
        if len(dims) != 1:
            raise InputError(f"All samples must share the dimension d, got {sorted(dims)}")
        for i, s in enumerate(samples):
            if s.shape[0] < 2:
                raise InputError(f"Sample {i + 1} has {s.shape[0]} rows; every sample needs at least 2")
        labels = tuple(str(label) for label in self.labels) or tuple(str(i + 1) for i in range(len(samples)))
        if len(labels) != len(samples):
            raise InputError(f"Got {len(labels)} labels for {len(samples)} samples")
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'labels', labels)

    @classmethod
    def from_pooled(cls, pooled, sizes, labels=()):
        pooled = as_data_matrix(pooled, name='pooled sample')
        sizes = tuple(int(s) for s in sizes)
        if sum(sizes) != pooled.shape[0]:
            raise InputError(f"Group sizes {sizes} do not add up to {pooled.shape[0]} pooled rows")
        bounds = np.cumsum((0,) + sizes)
        return cls(tuple(pooled[bounds[i]:bounds[i + 1]] for i in range(len(sizes))), labels)

    @property
    def k(self):
        return len(self.samples)

    @property
    def d(self):
        return self.samples[0].shape[1]

    @property
    def sizes(self):
        return tuple(s.shape[0] for s in self.samples)

    @property
    def n(self):
        return sum(self.sizes)

    @property
    def offsets(self):
        """Start row of every group in the pooled order, plus the total."""
        return tuple(int(v) for v in np.cumsum((0,) + self.sizes))

    @property
    def pooled(self):
        return np.concatenate(self.samples, axis=0)

    @property
    def pooled_index(self):
        """(group, within-group row) origin of every pooled row."""
        return np.array([(g, r) for g, size in enumerate(self.sizes) for r in range(size)], dtype=int)

    def relabel(self, order):
        """Reorder the groups (used to check permutation symmetry)."""
        return GroupedSamples(tuple(self.samples[i] for i in order), tuple(self.labels[i] for i in order))


@dataclass(frozen=True)
class DistanceMatrix:
    """Empirical k x k matrix distance (U-statistic diagonal, V-statistic off-diagonal)."""
    values: np.ndarray
    sizes: Tuple[int, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        k = len(self.sizes)
        if values.shape != (k, k):
            raise InputError(f"Distance matrix must be {k}x{k}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("Distance matrix has non-finite entries")
        scale = max(float(np.max(np.abs(values))), 1.0)
        if not np.allclose(values, values.T, rtol=0.0, atol=1e-12 * scale):
            raise InputError("Distance matrix is not symmetric")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'sizes', tuple(int(s) for s in self.sizes))

    @property
    def k(self):
        return len(self.sizes)


@dataclass(frozen=True)
class StatisticPair:
    trace: float
    tn: float

    def to_dict(self):
        return {'trace': self.trace, 'tn': self.tn}


@dataclass
class LabeledDataset:
    """Rows of features with one categorical group label each."""
    data: np.ndarray
    group_labels: np.ndarray
    column_names: List[str] = field(default_factory=list)

    @property
    def groups(self):
        """Distinct labels in order of first appearance."""
        seen = []
        for label in self.group_labels:
            if label not in seen:
                seen.append(label)
        return seen

    def group_sizes(self):
        return {label: int(np.sum(self.group_labels == label)) for label in self.groups}

    def to_groups(self, standardize=False, only: Sequence[str] = ()):
        data = np.asarray(self.data, dtype=float)
        labels = np.asarray(self.group_labels)
        if only:
            missing = [g for g in only if g not in self.groups]
            if missing:
                raise InputError(f"Unknown group label(s): {', '.join(missing)}")
            mask = np.isin(labels, list(only))
            data, labels = data[mask], labels[mask]
            order = list(only)
        else:
            order = self.groups
        if standardize:
            scale = data.std(axis=0, ddof=1)
            if np.any(scale == 0):
                raise InputError("Cannot standardize a constant feature column")
            data = (data - data.mean(axis=0)) / scale
        return GroupedSamples(tuple(data[labels == g] for g in order), tuple(order))
