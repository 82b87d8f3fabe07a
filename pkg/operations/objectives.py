"""Benchmark objectives module."""

import json
import math
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
import pandas as pd
from loguru import logger
from scipy.optimize import minimize_scalar
from scipy.stats import special_ortho_group

from exceptions import EmptyTable, ParseError, UnknownFunction
from models.search import SearchSpace

FUNCTION_IDS = (
    "sphere",
    "rosenbrock",
    "rastrigin",
    "schwefel",
    "katsuura",
    "gallagher101",
)
BOX_LOWER, BOX_UPPER = -5.0, 5.0
OBJECTIVE_COLUMN = "objective"


class Objective(Protocol):
    """Anything a BO run can minimize over the unit cube."""

    name: str
    f_opt: float
    exact_optimum: bool

    @property
    def search_space(self) -> SearchSpace: ...

    def __call__(self, unit_point: np.ndarray) -> float: ...


def _schwefel_term(u: np.ndarray) -> np.ndarray:
    return -u * np.sin(np.sqrt(np.abs(u)))


_SCHWEFEL_ARGMIN = float(
    minimize_scalar(
        lambda u: float(_schwefel_term(np.asarray(u))),
        bounds=(400.0, 440.0),
        method="bounded",
        options={"xatol": 1e-12},
    ).x
)
_SCHWEFEL_MIN = float(_schwefel_term(np.asarray(_SCHWEFEL_ARGMIN)))


def _sphere(z: np.ndarray, _: dict) -> float:
    return float(np.sum(z**2))


def _rosenbrock(z: np.ndarray, _: dict) -> float:
    w = max(1.0, math.sqrt(len(z)) / 8.0) * z + 1.0
    if len(w) == 1:
        return float((w[0] - 1.0) ** 2)
    return float(np.sum(100.0 * (w[:-1] ** 2 - w[1:]) ** 2 + (w[:-1] - 1.0) ** 2))


def _rastrigin(z: np.ndarray, _: dict) -> float:
    return float(np.sum(10.0 * (1.0 - np.cos(2.0 * np.pi * z)) + z**2))


def _schwefel(z: np.ndarray, _: dict) -> float:
    u = np.clip(_SCHWEFEL_ARGMIN + 100.0 * z, -500.0, 500.0)
    # floored at the optimum to absorb rounding around the argmin
    terms = np.maximum(_schwefel_term(u) - _SCHWEFEL_MIN, 0.0)
    return float(np.sum(terms) / len(z))


def _katsuura(z: np.ndarray, _: dict) -> float:
    d = len(z)
    powers = 2.0 ** np.arange(1, 33)
    scaled = powers[None, :] * z[:, None]
    inner = np.sum(np.abs(scaled - np.round(scaled)) / powers[None, :], axis=1)
    product = np.prod((1.0 + np.arange(1, d + 1) * inner) ** (10.0 / d**1.2))
    return float(10.0 / d**2 * (product - 1.0))


def _gallagher101(z: np.ndarray, extra: dict) -> float:
    # z is the rotated offset to the global peak; peaks live in the same frame
    offsets = z[None, :] - extra["peaks"]
    exponent = np.sum(offsets**2 * extra["conditioning"], axis=1) / (2.0 * len(z))
    best = np.max(extra["weights"] * np.exp(-exponent))
    return float((10.0 - best) ** 2)


_FUNCTIONS: dict[str, Callable[[np.ndarray, dict], float]] = {
    "sphere": _sphere,
    "rosenbrock": _rosenbrock,
    "rastrigin": _rastrigin,
    "schwefel": _schwefel,
    "katsuura": _katsuura,
    "gallagher101": _gallagher101,
}


def _gallagher_peaks(
    rng: np.random.Generator, dimension: int, rotation: np.ndarray, x_opt: np.ndarray
) -> dict:
    n_peaks = 101
    weights = np.append(10.0, 1.1 + 8.0 * np.arange(n_peaks - 1) / (n_peaks - 2))
    conditions = np.append(
        1000.0,
        rng.permutation(1000.0 ** (2.0 * np.arange(n_peaks - 1) / (n_peaks - 2))),
    )
    exponents = 0.5 * np.arange(dimension) / max(dimension - 1, 1)
    conditioning = np.stack(
        [rng.permutation(c**exponents) / c**0.25 for c in conditions]
    )
    locations = rng.uniform(-4.9, 4.9, size=(n_peaks, dimension))
    locations[0] = x_opt
    peaks = (locations - x_opt) @ rotation.T
    return {"weights": weights, "conditioning": conditioning, "peaks": peaks}


class SyntheticObjective:
    """Shifted and rotated benchmark function on ``[-5, 5]^d`` with ``f_opt = 0``."""

    exact_optimum = False

    def __init__(self, function_id: str, dimension: int, instance: int):
        """
        Build the instance transformation.

        :param function_id: one of FUNCTION_IDS
        :param dimension: search-space dimension
        :param instance: instance id seeding the shift and rotation
        """
        self.function_id = function_id
        self.dimension = dimension
        self.instance = instance
        self.name = f"{function_id}_{dimension}d_i{instance}"
        self.f_opt = 0.0

        rng = np.random.default_rng(
            [FUNCTION_IDS.index(function_id), dimension, instance]
        )
        self.x_opt = rng.uniform(-4.0, 4.0, size=dimension)
        if dimension > 1:
            self.rotation = special_ortho_group.rvs(dimension, random_state=rng)
        else:
            self.rotation = np.ones((1, 1))
        self.extra = (
            _gallagher_peaks(rng, dimension, self.rotation, self.x_opt)
            if function_id == "gallagher101"
            else {}
        )
        self._function = _FUNCTIONS[function_id]

    @property
    def search_space(self) -> SearchSpace:
        """Unit cube; evaluation maps it onto the box."""
        return SearchSpace.unit_cube(self.dimension)

    def evaluate(self, x: np.ndarray) -> float:
        """
        Objective in original coordinates.

        :param x: point in ``[-5, 5]^d``
        :return: objective value
        """
        z = self.rotation @ (np.asarray(x, dtype=float) - self.x_opt)
        return self._function(z, self.extra)

    def to_box(self, unit_point: np.ndarray) -> np.ndarray:
        """Map a unit-cube point to the box."""
        return BOX_LOWER + np.asarray(unit_point, dtype=float) * (BOX_UPPER - BOX_LOWER)

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        """Map a box point to the unit cube."""
        return (np.asarray(x, dtype=float) - BOX_LOWER) / (BOX_UPPER - BOX_LOWER)

    def __call__(self, unit_point: np.ndarray) -> float:
        """
        Objective of a unit-cube point.

        :param unit_point: point in ``[0, 1]^d``
        :return: objective value
        """
        return self.evaluate(self.to_box(unit_point))


def make_synthetic(
    function_id: str, dimension: int, instance: int
) -> SyntheticObjective:
    """
    Build a synthetic benchmark instance.

    :param function_id: function id
    :param dimension: dimension >= 1
    :param instance: instance id >= 1
    :return: objective
    :raises UnknownFunction: for unsupported ids
    """
    if function_id not in FUNCTION_IDS:
        raise UnknownFunction(
            f"Unknown function {function_id!r}; supported: {', '.join(FUNCTION_IDS)}"
        )
    if dimension < 1 or instance < 1:
        raise ValueError("dimension and instance must be >= 1")
    return SyntheticObjective(function_id, dimension, instance)


class TabularObjective:
    """Lookup table of configurations with recorded objective values."""

    exact_optimum = True

    def __init__(self, name: str, parameters: list[str], table: pd.DataFrame):
        """
        Index the table.

        :param name: task name
        :param parameters: parameter column names
        :param table: parsed table with numeric parameter and objective columns
        """
        self.name = name
        self.parameters = parameters
        raw = table[parameters].to_numpy(dtype=float)
        low, high = raw.min(axis=0), raw.max(axis=0)
        span = np.where(high > low, high - low, 1.0)
        self.candidates = (raw - low) / span
        self.values = table[OBJECTIVE_COLUMN].to_numpy(dtype=float)
        self.f_opt = float(self.values.min())
        self._lookup = {tuple(row): i for i, row in enumerate(self.candidates)}

    @property
    def search_space(self) -> SearchSpace:
        """Discrete space over the table rows."""
        return SearchSpace.table(self.candidates)

    def __call__(self, unit_point: np.ndarray) -> float:
        """
        Recorded objective of a table row.

        :param unit_point: normalized configuration, exactly a table row
        :return: objective value
        """
        key = tuple(float(v) for v in np.asarray(unit_point, dtype=float))
        if key not in self._lookup:
            raise ValueError(f"{key} is not a row of table {self.name}")
        return float(self.values[self._lookup[key]])


def _read_table(path: Path) -> pd.DataFrame:
    if path.suffix.lower() == ".json":
        with open(path, "r", encoding="utf-8") as file:
            payload = json.load(file)
        rows = payload.get("rows", []) if isinstance(payload, dict) else payload
        return pd.DataFrame(rows)
    return pd.read_csv(path)


def load_tabular(path) -> TabularObjective:
    """
    Load a tabular benchmark from CSV or JSON.

    The schema is one column per parameter plus a final ``objective`` column.
    JSON files hold a list of row objects or ``{"rows": [...]}``.

    :param path: table file
    :return: tabular objective
    :raises ParseError: on schema violations, with row/column context
    :raises EmptyTable: if the table has no rows
    """
    path = Path(path)
    try:
        table = _read_table(path)
    except pd.errors.EmptyDataError as exc:
        raise EmptyTable(f"Table {path} is empty") from exc
    except (ValueError, pd.errors.ParserError) as exc:
        raise ParseError(f"Cannot parse {path}: {exc}") from exc

    if table.empty:
        raise EmptyTable(f"Table {path} has no rows")
    columns = [str(c) for c in table.columns]
    if columns[-1] != OBJECTIVE_COLUMN:
        raise ParseError(
            f"Last column must be '{OBJECTIVE_COLUMN}'", column=columns[-1]
        )
    parameters = columns[:-1]
    if not parameters:
        raise ParseError("Table needs at least one parameter column")

    for column in columns:
        numeric = pd.to_numeric(table[column], errors="coerce")
        bad = numeric.isna() | ~np.isfinite(numeric.fillna(0.0))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0]) + 1
            raise ParseError("Non-numeric or missing value", row=row, column=column)
        table[column] = numeric.astype(float)

    duplicated = table.duplicated(subset=parameters, keep="first")
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0]) + 1
        raise ParseError("Duplicate configuration", row=row)

    logger.info(f"Loaded table {path.name} with {len(table)} rows")
    return TabularObjective(path.stem, parameters, table)
