"""
Report tables collated from MetricReports.

The MSE table has one row per (metric, model) and one column per
experiment; cells read "mean ± std" with values scaled by 10². A cell
backed by one report uses the spread across test trajectories; a cell
backed by several seeds uses the mean and spread of the per-seed means.
"""

from collections import OrderedDict
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from eval.metrics import MetricReport

SCALE = 100.0


def _cell(values: Sequence[Tuple[float, float]], scale: float) -> str:
    if len(values) == 1:
        mean, std = values[0]
    else:
        means = np.array([v[0] for v in values])
        mean, std = float(means.mean()), float(means.std())
    return f"{mean * scale:.2f} ± {std * scale:.2f}"


def collate_reports(reports: Sequence[MetricReport], scale: float = SCALE) -> pd.DataFrame:
    """
    Build the test MSE table.

    Args:
        reports: Metric reports, any mix of experiments, models and seeds
        scale: Multiplier applied to every value

    Returns:
        DataFrame indexed by (Metric, Model) with one column per experiment;
        missing combinations read "N/A"
    """
    experiments: List[str] = list(OrderedDict.fromkeys(r.experiment_id for r in reports))
    models: List[str] = list(OrderedDict.fromkeys(r.model_label for r in reports))
    cells: Dict[Tuple[str, str, str], List[Tuple[float, float]]] = {}
    for r in reports:
        cells.setdefault(("Traj.", r.model_label, r.experiment_id), []).append(
            (r.trajectory_mse.mean, r.trajectory_mse.std))
        if r.energy_mse is not None:
            cells.setdefault(("Energy", r.model_label, r.experiment_id), []).append(
                (r.energy_mse.mean, r.energy_mse.std))

    rows = []
    index = []
    for metric in ("Traj.", "Energy"):
        if not any(key[0] == metric for key in cells):
            continue
        for model in models:
            index.append((metric, model))
            rows.append([
                _cell(cells[(metric, model, exp)], scale) if (metric, model, exp) in cells else "N/A"
                for exp in experiments
            ])
    return pd.DataFrame(rows, index=pd.MultiIndex.from_tuples(index, names=["Metric", "Model"]),
                        columns=experiments)


def component_table(reports: Sequence[MetricReport], groups: Dict[str, Sequence[int]],
                    scale: float = SCALE) -> pd.DataFrame:
    """
    Per-group MSE table, e.g. per mass for two-mass data.

    Args:
        reports: Reports carrying per-component MSE
        groups: Column label -> component indices averaged into it
        scale: Multiplier applied to every value

    Returns:
        DataFrame indexed by model, one column per group, "mean ± std"
        across seeds
    """
    models = list(OrderedDict.fromkeys(r.model_label for r in reports))
    rows = []
    for model in models:
        selected = [r for r in reports if r.model_label == model]
        row = []
        for indices in groups.values():
            values = np.array([np.mean([r.component_mse[i] for i in indices]) for r in selected])
            row.append(f"{values.mean() * scale:.2f} ± {values.std() * scale:.2f}")
        rows.append(row)
    return pd.DataFrame(rows, index=pd.Index(models, name="Model"), columns=list(groups))


# Mass 1 is (q1, p1), mass 2 is (q2, p2) in the (q1, q2, p1, p2) state order
TWO_MASS_GROUPS = {'Mass 1 MSE': (0, 2), 'Mass 2 MSE': (1, 3)}
