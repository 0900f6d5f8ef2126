#!/usr/bin/env python3
"""
Penguin check: find which preprocessing reproduces the reference Adelie vs
Chinstrap numbers, then report the KBQD statistics under that preprocessing.

The energy statistic is sensitive to feature scaling, so it is computed under
every candidate preprocessing and compared against the reference value; the
closest candidate is used for T_n and MMD at h=0.8, each computed with the
normal density kernel and with the unit-height kernel.

Usage:
    python tools/check_penguins.py                          # data from the palmerpenguins package
    python tools/check_penguins.py --input penguins.csv     # data from a CSV with the same columns
    python tools/check_penguins.py --B 150 --method subsampling --seed 7
"""

import sys
import os
import argparse

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pandas as pd

from kbqd import create_app
from kbqd.cli import dataset_from_frame, load_csv
from kbqd.errors import KBQDError
from kbqd.models.samples import LabeledDataset
from kbqd.services import baselines, resampling

FEATURES = ['bill_length_mm', 'bill_depth_mm', 'flipper_length_mm', 'body_mass_g']
GROUPS = ('Adelie', 'Chinstrap')
REFERENCE = {'energy': 671.89, 'tn': 1.346008, 'mmd': 0.0127364}
REFERENCE_H = 0.8


def load_penguins(path=None):
    if path:
        return load_csv(path, 'species', FEATURES, drop_incomplete=True)
    try:
        from palmerpenguins import load_penguins as _load
    except ImportError:
        print("❌ [Penguins] palmerpenguins is not installed; pass --input penguins.csv", file=sys.stderr)
        sys.exit(2)
    return dataset_from_frame(_load(), 'species', FEATURES, drop_incomplete=True)


def candidate_groups(dataset):
    """Grouped samples for each preprocessing candidate."""
    data = np.asarray(dataset.data, dtype=float)
    all_scaled = LabeledDataset((data - data.mean(axis=0)) / data.std(axis=0, ddof=1),
                                dataset.group_labels, dataset.column_names)
    return {
        'raw': dataset.to_groups(only=GROUPS),
        'standardized (both species)': dataset.to_groups(standardize=True, only=GROUPS),
        'standardized (all species)': all_scaled.to_groups(only=GROUPS),
    }


def main():
    parser = argparse.ArgumentParser(description='Resolve penguin preprocessing against reference statistics')
    parser.add_argument('--input', type=str, default=None, help='Penguin CSV (default: palmerpenguins package)')
    parser.add_argument('--method', type=str, default='subsampling', help='Resampling method for critical values')
    parser.add_argument('--B', type=int, default=None, help='Number of resamples (default: KBQD_B)')
    parser.add_argument('--seed', type=int, default=None)
    args = parser.parse_args()

    app = create_app()

    try:
        # ── Step 1: Load data ───────────────────────────────────
        print("🕐 [Penguins] Step 1/3 — Loading penguin measurements...")
        dataset = load_penguins(args.input)
        print(f"✅ [Penguins] {len(dataset.group_labels)} complete rows, sizes {dataset.group_sizes()}")

        # ── Step 2: Match the energy statistic ──────────────────
        print(f"🕐 [Penguins] Step 2/3 — Matching energy statistic {REFERENCE['energy']}...")
        rows = []
        candidates = candidate_groups(dataset)
        for name, groups in candidates.items():
            x, y = groups.samples
            rows.append({
                'preprocessing': name,
                'energy (weighted)': baselines.energy_k_sample(groups),
                'energy (unweighted)': baselines.energy_two_sample(x, y),
            })
        table = pd.DataFrame(rows)
        table['distance'] = table[['energy (weighted)', 'energy (unweighted)']].sub(REFERENCE['energy']).abs().min(axis=1)
        print(table.to_string(index=False))
        best = table.loc[table['distance'].idxmin(), 'preprocessing']
        print(f"✅ [Penguins] Closest preprocessing: {best}")

        # ── Step 3: KBQD statistics under the matched preprocessing, both kernels ──
        print(f"🕐 [Penguins] Step 3/3 — Tests at h={REFERENCE_H} ({args.method}), density and unit-height kernels...")
        groups = candidates[best]
        plan = app.default_plan(method=args.method, B=args.B, seed=args.seed)
        rows = []
        for kernel, normalize in (('density', True), ('unit-height', False)):
            result = resampling.critical_value(groups, REFERENCE_H, plan, workers=app.workers, normalize=normalize)
            mmd = resampling.baseline_test(groups, 'mmd', plan, h=REFERENCE_H, workers=app.workers,
                                           normalize=normalize)
            rows.append({
                'kernel': kernel,
                'Tn': result.statistic_tn,
                'Tn critical': result.critical_tn,
                'Tn p': result.pvalue_tn,
                'trace': result.statistic_trace,
                'MMD': mmd.statistic,
                'MMD p': mmd.pvalue,
            })
        table = pd.DataFrame(rows)
        print(table.to_string(index=False))
        for column, key in (('Tn', 'tn'), ('MMD', 'mmd')):
            closest = table.loc[(table[column] - REFERENCE[key]).abs().idxmin()]
            print(f"   {column}: reference {REFERENCE[key]}, closest {closest[column]:.7f} ({closest['kernel']} kernel)")
    except KBQDError as e:
        print(f"❌ [Penguins] {e}", file=sys.stderr)
        sys.exit(3)

    print("🎉 [Penguins] Done.")


if __name__ == '__main__':
    main()
