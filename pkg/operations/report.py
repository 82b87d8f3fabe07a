"""Report emission module."""

import json
import math
from pathlib import Path
from typing import Optional, Union

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from loguru import logger

from exceptions import MissingManifest
from models.controller import SchedulePolicy
from models.experiment import Manifest, RankReport
from operations.experiment_runner import ExperimentRunner
from operations.statistics import interquartile_mean, ranks_per_step
from settings import Settings

mpl.use("Agg")
mpl.rcParams.update(
    {
        "svg.hashsalt": "sawei-report",
        "svg.fonttype": "path",
        "figure.figsize": (6.0, 3.5),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "legend.fontsize": 7,
    }
)

# BO steps averaged on either side of an EI->PI switch
SWITCH_WINDOW = 5
PathLike = Union[str, Path]


class ReportEmitter:
    """Turns an experiment directory into rank tables, diagnostics and plots."""

    def __init__(self, settings: Settings):
        """
        Inject class dependencies.

        :param settings: application settings
        """
        self.settings = settings

    @staticmethod
    def _load_aggregates(
        in_dir: Path, manifest: Manifest
    ) -> dict[str, dict[str, dict]]:
        aggregates: dict[str, dict[str, dict]] = {}
        for task, by_schedule in manifest.aggregates.items():
            for schedule, relative in by_schedule.items():
                with open(in_dir / relative, "r", encoding="utf-8") as file:
                    aggregates.setdefault(task, {})[schedule] = json.load(file)
        return aggregates

    @staticmethod
    def _rank(
        aggregates: dict[str, dict[str, dict]], manifest: Manifest
    ) -> Optional[RankReport]:
        """Rank the schedules with aggregates over the tasks that have all of them."""
        schedules = [
            s
            for s in manifest.schedules
            if any(s in by_schedule for by_schedule in aggregates.values())
        ]
        for schedule in manifest.schedules:
            if schedule not in schedules:
                logger.warning(f"Schedule {schedule} has no finished runs, not ranked")
        complete = {
            task: by_schedule
            for task, by_schedule in aggregates.items()
            if set(schedules) <= set(by_schedule)
        }
        for task in manifest.tasks:
            if task not in complete:
                logger.warning(f"Task {task} misses schedules, not ranked")
        if not schedules or not complete:
            logger.warning("Nothing to rank, rank tables skipped")
            return None
        return ranks_per_step(
            {
                task: {s: by_schedule[s]["iqm_regret"] for s in schedules}
                for task, by_schedule in complete.items()
            }
        )

    def emit_report(self, in_dir: PathLike, plots: bool = False) -> list[Path]:
        """
        Write rank tables, regret summaries and diagnostics for an experiment.

        :param in_dir: experiment directory holding ``manifest.json``
        :param plots: also write figures
        :return: written files
        :raises MissingManifest: if there is no manifest or no schedule in it
        """
        in_dir = Path(in_dir)
        manifest = ExperimentRunner.load_manifest(in_dir)
        if manifest is None:
            raise MissingManifest(f"No manifest in {in_dir}")
        if not manifest.schedules:
            raise MissingManifest(f"Manifest in {in_dir} lists no schedules")

        aggregates = self._load_aggregates(in_dir, manifest)
        report = self._rank(aggregates, manifest)

        out = in_dir / "report"
        out.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        if report is not None:
            written += [
                self._write_ranks(report, out),
                self._write_final_ranks(report, out),
            ]
        written += [
            *self._write_final_regret(aggregates, manifest, out),
            self._write_ubr_switch(aggregates, manifest, out),
            self._write_alpha_drift(aggregates, manifest, out),
        ]
        if plots:
            written += self._plot_all(report, aggregates, manifest, out)
        logger.info(f"Report: {len(written)} files written to {out}")
        return written

    @staticmethod
    def _csv(frame: pd.DataFrame, path: Path) -> Path:
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.10g")
        return path

    def _write_ranks(self, report: RankReport, out: Path) -> Path:
        steps = len(next(iter(report.mean_ranks.values())))
        frame = pd.DataFrame({"step": np.arange(1, steps + 1)})
        for schedule in report.schedules:
            frame[schedule] = report.mean_ranks[schedule]
            frame[f"{schedule} ci95"] = report.ci_ranks[schedule]
        return self._csv(frame, out / "ranks_per_step.csv")

    def _write_final_ranks(self, report: RankReport, out: Path) -> Path:
        frame = pd.DataFrame(
            {
                "schedule": report.schedules,
                "final_rank": [report.final_ranks[s] for s in report.schedules],
            }
        )
        return self._csv(frame, out / "final_ranks.csv")

    def _write_final_regret(
        self, aggregates: dict[str, dict[str, dict]], manifest: Manifest, out: Path
    ) -> list[Path]:
        """Per-run final log regrets and their summary per (task, schedule)."""
        runs, summary = [], []
        for task in manifest.tasks:
            for schedule in manifest.schedules:
                if schedule not in aggregates.get(task, {}):
                    continue
                finals = aggregates[task][schedule]["final_log10_regret"]
                runs += [
                    {
                        "task": task,
                        "schedule": schedule,
                        "run": i,
                        "final_log10_regret": v,
                    }
                    for i, v in enumerate(finals)
                ]
                q25, median, q75 = np.percentile(finals, [25, 50, 75])
                summary.append(
                    {
                        "task": task,
                        "schedule": schedule,
                        "runs": len(finals),
                        "iqm": interquartile_mean(finals),
                        "median": median,
                        "q25": q25,
                        "q75": q75,
                        "min": min(finals),
                        "max": max(finals),
                    }
                )
        return [
            self._csv(pd.DataFrame(summary), out / "final_regret_summary.csv"),
            self._csv(pd.DataFrame(runs), out / "final_regret_runs.csv"),
        ]

    @staticmethod
    def switch_step(policy: SchedulePolicy, bo_budget: int) -> Optional[int]:
        """
        0-based BO step where an EI->PI schedule starts using PI.

        :param policy: schedule policy
        :param bo_budget: BO budget
        :return: step, or None for other schedules
        """
        if policy.kind != "switch_ei_pi":
            return None
        return math.floor(policy.fraction * bo_budget)

    def _write_ubr_switch(
        self, aggregates: dict[str, dict[str, dict]], manifest: Manifest, out: Path
    ) -> Path:
        """Smoothed UBR around each EI->PI switch."""
        rows = []
        for policy in manifest.policies:
            switch = self.switch_step(policy, manifest.bo_budget)
            if switch is None:
                continue
            for task in manifest.tasks:
                aggregate = aggregates.get(task, {}).get(policy.name)
                if aggregate is None:
                    continue
                ubr = np.asarray(aggregate["iqm_ubr_smoothed"], dtype=float)
                before = ubr[max(0, switch - SWITCH_WINDOW) : switch]
                after = ubr[switch : switch + SWITCH_WINDOW]
                rows.append(
                    {
                        "task": task,
                        "schedule": policy.name,
                        "switch_step": switch + 1,
                        "iteration": aggregate["steps"][switch],
                        "ubr_before": float(before.mean()) if len(before) else math.nan,
                        "ubr_after": float(after.mean()) if len(after) else math.nan,
                    }
                )
        frame = pd.DataFrame(
            rows,
            columns=[
                "task",
                "schedule",
                "switch_step",
                "iteration",
                "ubr_before",
                "ubr_after",
            ],
        )
        frame["ubr_change"] = frame["ubr_after"] - frame["ubr_before"]
        return self._csv(frame, out / "ubr_switch.csv")

    def _write_alpha_drift(
        self, aggregates: dict[str, dict[str, dict]], manifest: Manifest, out: Path
    ) -> Path:
        """Mean SAWEI alpha in the first and second half of the BO phase."""
        rows = []
        for policy in manifest.policies:
            if policy.kind != "sawei":
                continue
            for task in manifest.tasks:
                aggregate = aggregates.get(task, {}).get(policy.name)
                if aggregate is None:
                    continue
                alpha = np.asarray(aggregate["mean_alpha"], dtype=float)
                half = len(alpha) // 2
                first = float(np.mean(alpha[:half])) if half else math.nan
                second = float(np.mean(alpha[half:]))
                rows.append(
                    {
                        "task": task,
                        "schedule": policy.name,
                        "alpha_first_half": first,
                        "alpha_second_half": second,
                        "drift": second - first,
                    }
                )
        frame = pd.DataFrame(
            rows,
            columns=[
                "task",
                "schedule",
                "alpha_first_half",
                "alpha_second_half",
                "drift",
            ],
        )
        return self._csv(frame, out / "alpha_drift.csv")

    def _save(self, fig: plt.Figure, path: Path) -> Path:
        fmt = self.settings.plot_format
        path = path.with_suffix(f".{fmt}")
        # fixed metadata keeps regenerated figures identical
        metadata = {"Date": None} if fmt == "svg" else None
        fig.savefig(path, format=fmt, metadata=metadata, bbox_inches="tight")
        plt.close(fig)
        return path

    def _plot_all(
        self,
        report: Optional[RankReport],
        aggregates: dict[str, dict[str, dict]],
        manifest: Manifest,
        out: Path,
    ) -> list[Path]:
        written = [self._plot_ranks(report, out)] if report is not None else []
        switches = {
            p.name: self.switch_step(p, manifest.bo_budget) for p in manifest.policies
        }
        for task in manifest.tasks:
            by_schedule = aggregates.get(task, {})
            if not by_schedule:
                continue
            written.append(
                self._plot_curves(
                    by_schedule,
                    "iqm_log10_regret",
                    "log10 regret (IQM)",
                    out / f"log_regret_{task}",
                )
            )
            written.append(
                self._plot_curves(
                    by_schedule,
                    "iqm_ubr_smoothed",
                    "UBR (IQM)",
                    out / f"ubr_{task}",
                    switches,
                )
            )
            weighted = {
                s: a
                for s, a in by_schedule.items()
                if any(v is not None for v in a["mean_alpha"])
            }
            if weighted:
                written.append(
                    self._plot_curves(
                        weighted, "mean_alpha", "alpha", out / f"alpha_{task}"
                    )
                )
        return written

    def _plot_ranks(self, report: RankReport, out: Path) -> Path:
        fig, ax = plt.subplots()
        for schedule in report.schedules:
            mean = np.asarray(report.mean_ranks[schedule])
            spread = np.asarray(report.ci_ranks[schedule])
            steps = np.arange(1, len(mean) + 1)
            (line,) = ax.plot(steps, mean, label=schedule)
            ax.fill_between(
                steps, mean - spread, mean + spread, color=line.get_color(), alpha=0.15
            )
        ax.set_xlim(1, max(len(next(iter(report.mean_ranks.values()))), 2))
        ax.set_xlabel("BO step")
        ax.set_ylabel("mean rank")
        ax.legend(loc="upper left", ncol=2)
        return self._save(fig, out / "ranks_per_step")

    def _plot_curves(
        self,
        by_schedule: dict[str, dict],
        key: str,
        ylabel: str,
        path: Path,
        switches: Optional[dict[str, Optional[int]]] = None,
    ) -> Path:
        fig, ax = plt.subplots()
        for schedule, aggregate in by_schedule.items():
            values = [math.nan if v is None else v for v in aggregate[key]]
            (line,) = ax.plot(aggregate["steps"], values, label=schedule)
            switch = (switches or {}).get(schedule)
            if switch is not None and switch < len(aggregate["steps"]):
                ax.axvline(
                    aggregate["steps"][switch], color=line.get_color(), linestyle="--"
                )
        ax.set_xlabel("function evaluation")
        ax.set_ylabel(ylabel)
        ax.legend(loc="best")
        return self._save(fig, path)
