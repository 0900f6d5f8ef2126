"""
Desk-scale simulation scenarios.

Every entry mirrors one of the reference level/power studies with shrunken
grids (minutes, not cluster-days). The full-size settings stay reachable
through overrides, e.g. get_scenario_config('scenario2', d=50, n=3000, N=100).
"""
from kbqd.errors import InputError
from kbqd.models.plans import ResamplingPlan
from kbqd.models.scenario import ScenarioConfig

KBQD_METHODS = ('bootstrap', 'permutation', 'subsampling')

SCENARIO_REGISTRY = {
    # ===== Two-sample, skew-normal alternatives =====
    "scenario1": {
        "description": "N_d(0, I) vs SN_d(0, I, lambda * 1)",
        "k": 2, "d": 6, "n": 500,
        "null_generator": "normal",
        "alternative_generator": "skew_normal",
        "alt_grid": (0.0, 0.1, 0.2, 0.3),
        "h_grid": (0.6, 1.4, 2.2, 4.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "scenario2": {
        "description": "High-dimensional N_d(0, I) vs SN_d(0, I, lambda * 1)",
        "k": 2, "d": 20, "n": 500,
        "null_generator": "normal",
        "alternative_generator": "skew_normal",
        "alt_grid": (0.0, 0.05, 0.1, 0.3),
        "h_grid": (1.4, 2.2, 4.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 50,
    },
    "scenario3": {
        "description": "N_d(0, I) vs SN_d(0, I, (lambda, 0, ..., 0))",
        "k": 2, "d": 4, "n": 100,
        "null_generator": "normal",
        "alternative_generator": "skew_normal_first",
        "alt_grid": (0.0, 0.05, 0.1, 0.2, 0.3),
        "h_grid": (0.6, 1.4, 2.2, 4.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    # ===== k-sample, bivariate normal =====
    "normal-none": {
        "description": "Three samples from N_2(0, I)",
        "k": 3, "d": 2, "n": 100,
        "null_generator": "normal",
        "alternative_generator": "normal",
        "alt_grid": (0.0,),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "normal-one": {
        "description": "Two samples from N_2(0, I), one from N_2((0, eps), I)",
        "k": 3, "d": 2, "n": 100,
        "null_generator": "normal",
        "alternative_generator": "normal_shift_last",
        "alt_grid": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "normal-all": {
        "description": "Three normal samples with means on a triangle of side eps",
        "k": 3, "d": 2, "n": 100,
        "null_generator": "normal",
        "alternative_generator": "normal_triangle",
        "alternative_groups": "all",
        "alt_grid": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    # ===== k-sample, heavy tails =====
    "cauchy-type1": {
        "description": "Cauchy(0, I) samples, one from Cauchy((eps, ..., eps), I)",
        "k": 3, "d": 2, "n": 50,
        "null_generator": "cauchy",
        "alternative_generator": "cauchy",
        "alt_grid": (0.0, 0.25, 0.5, 1.0),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 300,
    },
    "cauchy-type2": {
        "description": "Cauchy(0, I) samples, one shifted by eps in the first half of the coordinates",
        "k": 5, "d": 6, "n": 50,
        "null_generator": "cauchy",
        "alternative_generator": "cauchy_half",
        "alt_grid": (0.0, 0.25, 0.5, 1.0),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "t4-type1": {
        "description": "t_4(0, I) samples, one from t_4((eps, ..., eps), I)",
        "k": 3, "d": 2, "n": 50,
        "null_generator": "t4",
        "alternative_generator": "t4",
        "alt_grid": (0.0, 0.25, 0.5, 1.0),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "t4-type2": {
        "description": "t_4(0, I) samples, one shifted by eps in the first half of the coordinates",
        "k": 5, "d": 6, "n": 50,
        "null_generator": "t4",
        "alternative_generator": "t4_half",
        "alt_grid": (0.0, 0.25, 0.5, 1.0),
        "h_grid": (0.6, 1.4, 2.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    # ===== Univariate asymmetric =====
    "lognormal": {
        "description": "logN(0, 0.8) vs logN(0, sigma)",
        "k": 2, "d": 1, "n": 100,
        "null_generator": "lognormal", "null_param": 0.8,
        "alternative_generator": "lognormal",
        "alt_grid": (0.6, 0.65, 0.7, 0.75, 0.8),
        "h_grid": (0.2, 0.6, 1.0),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "gumbel-scale": {
        "description": "Gumbel(0, 1) vs Gumbel(0, sigma)",
        "k": 2, "d": 1, "n": 100,
        "null_generator": "gumbel_scale", "null_param": 1.0,
        "alternative_generator": "gumbel_scale",
        "alt_grid": (0.8, 0.9, 1.0, 1.1, 1.2),
        "h_grid": (0.2, 0.6, 1.0),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    "gumbel-location": {
        "description": "Gumbel(0, 1) vs Gumbel(mu, 1)",
        "k": 2, "d": 1, "n": 100,
        "null_generator": "gumbel_location", "null_param": 0.0,
        "alternative_generator": "gumbel_location",
        "alt_grid": (0.0, 0.1, 0.2, 0.3),
        "h_grid": (0.2, 0.6, 1.0),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace", "mmd", "energy"),
        "N": 200,
    },
    # ===== Replication-count study =====
    "level-B": {
        "description": "Level of the KBQD tests under N_2(0, I) for B in 50, 100, 150, 300",
        "k": 2, "d": 2, "n": 100,
        "null_generator": "normal",
        "alternative_generator": "normal",
        "alt_grid": (0.0,),
        "h_grid": (0.6, 1.4, 2.2, 4.2),
        "methods": KBQD_METHODS,
        "statistics": ("tn", "trace"),
        "N": 500,
        "B_grid": (50, 100, 150, 300),
    },
}


def get_scenario_config(name, seed=0, B=150, b=0.8, alpha=0.05, **overrides):
    """ScenarioConfig for a registered scenario; keyword overrides replace registry values."""
    entry = SCENARIO_REGISTRY.get(name)
    if entry is None:
        raise InputError(f"Unknown scenario '{name}' (available: {', '.join(sorted(SCENARIO_REGISTRY))})")
    fields = {key: value for key, value in entry.items() if key != 'description'}
    fields.update({key: value for key, value in overrides.items() if value is not None})
    plan = ResamplingPlan(B=B, b=b, alpha=alpha, seed=seed)
    return ScenarioConfig(name=name, plan=plan, **fields)


def get_available_scenarios():
    """Scenario names with their descriptions, for listing in the CLI."""
    return [
        {"name": name, "description": entry["description"], "k": entry["k"], "d": entry["d"], "n": entry["n"]}
        for name, entry in SCENARIO_REGISTRY.items()
    ]
