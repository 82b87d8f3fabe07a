"""Aggregation statistics module."""

from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import trim_mean

from exceptions import GridMismatch
from models.experiment import RankReport

CI_Z = 1.96


def interquartile_mean(values: Sequence[float]) -> float:
    """
    Mean after dropping ``floor(0.25 k)`` values from each end of the sorted sample.

    :param values: nonempty sample
    :return: interquartile mean
    """
    return float(trim_mean(np.asarray(values, dtype=float), 0.25))


def iqm_curve(curves: Sequence[Sequence[float]]) -> list[float]:
    """
    Per-step IQM across runs.

    :param curves: one equally long curve per run
    :return: IQM at every step
    :raises GridMismatch: if the curves differ in length
    """
    lengths = {len(c) for c in curves}
    if len(lengths) != 1:
        raise GridMismatch(f"curves have different lengths {sorted(lengths)}")
    stacked = np.asarray(curves, dtype=float)
    return [float(v) for v in trim_mean(stacked, 0.25, axis=0)]


def min_max_normalize(values: Sequence[float]) -> list[float]:
    """
    Scale values to [0, 1]; a constant sample maps to zeros.

    :param values: sample
    :return: normalized values
    """
    array = np.asarray(values, dtype=float)
    low, high = array.min(), array.max()
    if high == low:
        return [0.0] * len(array)
    return [float(v) for v in (array - low) / (high - low)]


def ranks_per_step(curves: Mapping[str, Mapping[str, Sequence[float]]]) -> RankReport:
    """
    Rank schedules per task and step, then aggregate over tasks.

    Lower IQM regret ranks better; ties share the average rank. The final table
    is the IQM over tasks of each schedule's final-step rank.

    :param curves: ``{task: {schedule: per-step IQM regret}}``
    :return: rank report
    :raises GridMismatch: if schedules or step grids differ
    """
    if not curves:
        raise GridMismatch("no tasks to rank")
    tasks = list(curves)
    schedules = list(curves[tasks[0]])
    task_ranks: dict[str, dict[str, list[float]]] = {}
    frames = []
    for task in tasks:
        if set(curves[task]) != set(schedules):
            raise GridMismatch(f"task {task} has a different schedule set")
        lengths = {len(curves[task][s]) for s in schedules}
        if len(lengths) != 1:
            raise GridMismatch(f"task {task} has step grids {sorted(lengths)}")
        frame = pd.DataFrame({s: list(curves[task][s]) for s in schedules}, dtype=float)
        ranks = frame.rank(axis=1, method="average")
        frames.append(ranks)
        task_ranks[task] = {s: ranks[s].tolist() for s in schedules}

    if len({len(f) for f in frames}) != 1:
        raise GridMismatch("tasks have different step grids")

    stacked = np.stack([f[schedules].to_numpy() for f in frames])
    mean = stacked.mean(axis=0)
    if len(tasks) > 1:
        spread = CI_Z * stacked.std(axis=0, ddof=1) / np.sqrt(len(tasks))
    else:
        spread = np.zeros_like(mean)

    return RankReport(
        schedules=schedules,
        tasks=tasks,
        iqm_regret={
            t: {s: [float(v) for v in curves[t][s]] for s in schedules} for t in tasks
        },
        task_ranks=task_ranks,
        mean_ranks={s: mean[:, j].tolist() for j, s in enumerate(schedules)},
        ci_ranks={s: spread[:, j].tolist() for j, s in enumerate(schedules)},
        final_ranks={
            s: interquartile_mean(stacked[:, -1, j]) for j, s in enumerate(schedules)
        },
    )
