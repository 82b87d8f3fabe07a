"""Experiment runner module."""

import hashlib
import itertools
import json
import math
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from exceptions import FitError, NumericalError
from models.controller import ControllerSettings, SchedulePolicy
from models.experiment import (
    AblationGrid,
    ExperimentConfig,
    Manifest,
    RunEntry,
    TaskSpec,
)
from models.run import RunConfig
from operations.bo_loop import run_bo
from operations.objectives import Objective, load_tabular, make_synthetic
from operations.statistics import interquartile_mean, iqm_curve, min_max_normalize
from settings import Settings

MANIFEST_FILE = "manifest.json"
PathLike = Union[str, Path]


def build_objective(task: TaskSpec, instance: int) -> Objective:
    """
    Objective of one task instance.

    :param task: task spec
    :param instance: instance id (ignored by tabular tasks)
    :return: objective
    """
    if task.kind == "tabular":
        return load_tabular(task.path)
    return make_synthetic(str(task.function), task.dimension, instance)


def _task_instances(task: TaskSpec) -> list[int]:
    return list(task.instances) if task.kind == "synthetic" else [1]


def _execute_run(
    task: TaskSpec, instance: int, config: RunConfig, out: Path, entry: RunEntry
) -> RunEntry:
    """Worker body: one BO run written to its own files."""
    try:
        trace = run_bo(build_objective(task, instance), config, instance)
    except (FitError, NumericalError) as exc:
        logger.error(
            f"Run {task.name} / {config.schedule.name} / seed {config.seed} "
            f"aborted: {exc}"
        )
        return entry.model_copy(
            update={
                "status": "aborted",
                "trace": None,
                "summary": None,
                "error": str(exc),
            }
        )

    trace_path = out / str(entry.trace)
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    trace.to_csv(trace_path)
    with open(out / str(entry.summary), "w", encoding="utf-8") as file:
        json.dump(trace.summary(), file, indent=2)
    return entry


def _nan_to_none(values: list[float]) -> list[Optional[float]]:
    return [None if math.isnan(v) else float(v) for v in values]


class ExperimentRunner:
    """Runs experiments and ablation sweeps and writes their artifacts."""

    def __init__(self, settings: Settings, workers: Optional[int] = None):
        """
        Inject class dependencies.

        :param settings: application settings
        :param workers: worker pool size, defaults to ``settings.workers``
        """
        self.settings = settings
        self.workers = workers or settings.workers

    def fingerprint(self, cfg: ExperimentConfig) -> str:
        """
        Hash of everything that determines the run artifacts.

        :param cfg: experiment config
        :return: hex digest
        """
        payload = cfg.model_dump(mode="json", exclude={"output_dir"})
        payload["seed_offset"] = self.settings.seed_offset
        encoded = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(encoded).hexdigest()

    @staticmethod
    def load_manifest(out: PathLike) -> Optional[Manifest]:
        """
        Manifest of an output directory, if any.

        :param out: output directory
        :return: manifest or None
        """
        path = Path(out) / MANIFEST_FILE
        if not path.is_file():
            return None
        with open(path, "r", encoding="utf-8") as file:
            return Manifest.model_validate_json(file.read())

    def _run_config(
        self, cfg: ExperimentConfig, schedule: SchedulePolicy, task: TaskSpec, seed: int
    ) -> RunConfig:
        template = cfg.run
        return RunConfig(
            objective_id=task.name,
            dimension=task.dimension,
            init_design=template.init_design,
            bo_budget=template.bo_budget,
            schedule=schedule,
            controller=template.controller,
            gp=template.gp,
            search=template.search,
            beta=template.beta,
            seed=seed + self.settings.seed_offset,
        )

    def run_experiment(
        self, cfg: ExperimentConfig, out: Optional[PathLike] = None
    ) -> Manifest:
        """
        Execute every (task, instance, schedule, seed) run and aggregate.

        Existing traces are reused when the stored fingerprint matches.

        :param cfg: experiment config
        :param out: output directory, defaults to ``cfg.output_dir``
        :return: manifest, listing aborted runs
        """
        out = Path(out or cfg.output_dir or "results")
        out.mkdir(parents=True, exist_ok=True)
        fingerprint = self.fingerprint(cfg)
        previous = self.load_manifest(out)
        reusable = previous is not None and previous.fingerprint == fingerprint

        entries: list[Optional[RunEntry]] = []
        jobs = []
        for task in cfg.tasks:
            for schedule, instance, seed in itertools.product(
                cfg.schedules, _task_instances(task), cfg.seeds
            ):
                config = self._run_config(cfg, schedule, task, seed)
                folder = f"traces/{task.name}/{schedule.slug}"
                stem = f"{folder}/inst{instance}_seed{config.seed}"
                entry = RunEntry(
                    task=task.name,
                    schedule=schedule.name,
                    instance=instance,
                    seed=config.seed,
                    trace=f"{stem}.csv",
                    summary=f"{stem}.json",
                )
                if reusable and all(
                    (out / str(p)).is_file() for p in (entry.trace, entry.summary)
                ):
                    entries.append(entry)
                    continue
                entries.append(None)
                jobs.append(delayed(_execute_run)(task, instance, config, out, entry))

        logger.info(
            f"Experiment: {len(jobs)} runs to execute, "
            f"{len(entries) - len(jobs)} reused, {self.workers} worker(s)"
        )
        results = iter(Parallel(n_jobs=self.workers)(jobs))
        runs = [entry if entry is not None else next(results) for entry in entries]

        manifest = Manifest(
            fingerprint=fingerprint,
            tasks=[t.name for t in cfg.tasks],
            schedules=[s.name for s in cfg.schedules],
            seeds=[s + self.settings.seed_offset for s in cfg.seeds],
            bo_budget=cfg.run.bo_budget,
            policies=cfg.schedules,
            runs=runs,
        )
        manifest.aggregates = self._write_aggregates(cfg, manifest, out)

        with open(out / MANIFEST_FILE, "w", encoding="utf-8") as file:
            file.write(manifest.model_dump_json(indent=2))
        if manifest.aborted:
            logger.warning(f"{len(manifest.aborted)} run(s) aborted")
        logger.info(f"Experiment written to {out}")
        return manifest

    def _write_aggregates(
        self, cfg: ExperimentConfig, manifest: Manifest, out: Path
    ) -> dict[str, dict[str, str]]:
        """Per (task, schedule) IQM curves over seeds and instances."""
        (out / "aggregates").mkdir(parents=True, exist_ok=True)
        index: dict[str, dict[str, str]] = {}
        for task in cfg.tasks:
            for schedule in cfg.schedules:
                ok = [
                    r
                    for r in manifest.runs
                    if r.task == task.name
                    and r.schedule == schedule.name
                    and r.status == "ok"
                ]
                if not ok:
                    logger.warning(f"No completed runs: {task.name} / {schedule.name}")
                    continue
                frames = [pd.read_csv(out / str(r.trace)) for r in ok]
                bo = [f[f["phase"] == "bo"] for f in frames]
                alpha = pd.DataFrame([b["alpha"].to_numpy(dtype=float) for b in bo])
                payload = {
                    "task": task.name,
                    "schedule": schedule.name,
                    "runs": len(ok),
                    "steps": bo[0]["iteration"].astype(int).tolist(),
                    "iqm_regret": iqm_curve([b["regret"].tolist() for b in bo]),
                    "iqm_log10_regret": iqm_curve(
                        [b["log10_regret"].tolist() for b in bo]
                    ),
                    # NaN columns belong to schedules without a WEI weight
                    "mean_alpha": _nan_to_none(alpha.mean(axis=0).tolist()),
                    "iqm_ubr_smoothed": iqm_curve(
                        [b["ubr_smoothed"].tolist() for b in bo]
                    ),
                    "final_log10_regret": [
                        float(f["log10_regret"].iloc[-1]) for f in frames
                    ],
                }
                relative = f"aggregates/{task.name}__{schedule.slug}.json"
                with open(out / relative, "w", encoding="utf-8") as file:
                    json.dump(payload, file, indent=2)
                index.setdefault(task.name, {})[schedule.name] = relative
        return index

    def ablation_sweep(
        self,
        cfg: ExperimentConfig,
        grid: Optional[AblationGrid] = None,
        out: Optional[PathLike] = None,
    ) -> pd.DataFrame:
        """
        Run SAWEI for every grid combination and summarize normalized regrets.

        Final log regrets (IQM over seeds and instances) are min-max normalized
        per task across combinations.

        :param cfg: base experiment config; its schedules are replaced by SAWEI
        :param grid: hyperparameter grid, the full default grid if omitted
        :param out: output directory, defaults to ``cfg.output_dir``
        :return: summary table
        """
        grid = grid or AblationGrid()
        out = Path(out or cfg.output_dir or "results")
        rows = []
        for combo in grid.combinations():
            label = (
                f"da{combo['delta_alpha']:g}_{combo['attitude_mode']}"
                f"_eps{combo['epsilon']:g}"
            )
            controller = ControllerSettings.model_validate(
                {**cfg.run.controller.model_dump(), **combo}
            )
            sub = cfg.model_copy(
                update={
                    "schedules": [SchedulePolicy(kind="sawei")],
                    "run": cfg.run.model_copy(update={"controller": controller}),
                }
            )
            logger.info(f"Ablation combo {label}")
            combo_dir = out / "combos" / label
            manifest = self.run_experiment(sub, combo_dir)
            for task, by_schedule in manifest.aggregates.items():
                path = combo_dir / by_schedule["SAWEI"]
                with open(path, "r", encoding="utf-8") as file:
                    finals = json.load(file)["final_log10_regret"]
                rows.append(
                    {
                        "combo": label,
                        **combo,
                        "task": task,
                        "final_log10_regret": interquartile_mean(finals),
                    }
                )

        summary = pd.DataFrame(rows)
        if summary.empty:
            logger.warning("Ablation produced no completed combinations")
            return summary
        summary["normalized"] = 0.0
        for _, group in summary.groupby("task", sort=False):
            summary.loc[group.index, "normalized"] = min_max_normalize(
                group["final_log10_regret"].tolist()
            )
        out.mkdir(parents=True, exist_ok=True)
        summary.to_csv(out / "ablation_summary.csv", index=False, lineterminator="\n")

        marginals = []
        for parameter in ("delta_alpha", "attitude_mode", "epsilon"):
            stats = summary.groupby(parameter, sort=False)["normalized"].agg(
                ["mean", "std"]
            )
            for value, row in stats.iterrows():
                marginals.append(
                    {
                        "parameter": parameter,
                        "value": value,
                        "mean": row["mean"],
                        "std": 0.0 if pd.isna(row["std"]) else row["std"],
                    }
                )
        pd.DataFrame(marginals).to_csv(
            out / "ablation_marginals.csv", index=False, lineterminator="\n"
        )
        return summary


def load_experiment_config(path: PathLike) -> ExperimentConfig:
    """
    Read an experiment config from a JSON file.

    :param path: config file
    :return: validated config
    :raises pydantic.ValidationError: if the file does not match the schema
    """
    with open(path, "r", encoding="utf-8") as file:
        return ExperimentConfig.model_validate_json(file.read())


def load_ablation_grid(source: str) -> AblationGrid:
    """
    Ablation grid from ``default`` or a JSON file.

    :param source: ``default`` or a path
    :return: validated grid
    """
    if source == "default":
        return AblationGrid()
    with open(source, "r", encoding="utf-8") as file:
        return AblationGrid.model_validate_json(file.read())
