"""State-level explanatory variables: loading, z-scoring, cross-correlation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DataIntegrityError,
    DegenerateVariableError,
)
from .states import STATE_SET
from .stats_core import pearson

# Canonical attribute columns, grouped the way the regression suites use them.
ATTRIBUTE_GROUPS: dict[str, list[str]] = {
    "personality_culture": [
        "openness", "conscientiousness", "extraversion",
        "agreeableness", "neuroticism", "cultural_tightness",
    ],
    "socioeconomic": ["density", "gdp", "minority", "no_highschool", "population"],
    "political": ["political", "republican", "swing_state"],
}
ATTRIBUTE_COLUMNS: list[str] = [
    c for cols in ATTRIBUTE_GROUPS.values() for c in cols
]
# "adoption" is joined from geolocation output rather than sourced from a file
OPTIONAL_COLUMNS = ["adoption"]

MODEL_GROUPS: dict[str, list[str]] = dict(ATTRIBUTE_GROUPS)
MODEL_GROUPS["all"] = list(ATTRIBUTE_COLUMNS)
MODEL_GROUPS["all_minus_personality"] = (
    ATTRIBUTE_GROUPS["socioeconomic"] + ATTRIBUTE_GROUPS["political"]
)

_PERCENT_COLUMNS = ("minority", "no_highschool")


@dataclass
class StateAttributeTable:
    columns: list[str]
    values: dict[str, dict[str, float | None]]  # state -> column -> value

    def states(self) -> list[str]:
        return sorted(self.values)

    def complete_states(self, columns: list[str]) -> list[str]:
        """States with no missing value among `columns`, sorted."""
        return sorted(
            s for s, row in self.values.items()
            if all(row.get(c) is not None for c in columns)
        )

    def column(self, name: str, states: list[str]) -> np.ndarray:
        return np.array([self.values[s][name] for s in states], dtype=float)

    def with_column(self, name: str, data: dict[str, float]) -> "StateAttributeTable":
        columns = self.columns + [name] if name not in self.columns else self.columns
        values = {
            s: {**row, name: data.get(s)} for s, row in self.values.items()
        }
        return StateAttributeTable(columns=list(columns), values=values)


def load_attributes(path: str) -> StateAttributeTable:
    """Read the attribute CSV (header `state` plus known columns)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "state" not in header:
            raise ConfigurationError("attribute CSV is missing a 'state' column")
        known = set(ATTRIBUTE_COLUMNS) | set(OPTIONAL_COLUMNS)
        for col in header:
            if col != "state" and col not in known:
                raise ConfigurationError(f"unknown attribute column {col!r}")
        columns = [c for c in header if c != "state"]
        values: dict[str, dict[str, float | None]] = {}
        for row in reader:
            state = row["state"].strip().upper()
            if state not in STATE_SET:
                raise DataIntegrityError(f"unknown state code {state!r}")
            if state in values:
                raise DataIntegrityError(f"duplicate state row {state!r}")
            parsed: dict[str, float | None] = {}
            for col in columns:
                cell = (row.get(col) or "").strip()
                parsed[col] = float(cell) if cell else None
            _validate_row(state, parsed)
            values[state] = parsed
    return StateAttributeTable(columns=columns, values=values)


def _validate_row(state: str, row: dict[str, float | None]) -> None:
    swing = row.get("swing_state")
    if swing is not None and swing not in (0.0, 1.0):
        raise DataIntegrityError(f"{state}: swing_state must be 0 or 1, got {swing}")
    for col in _PERCENT_COLUMNS:
        v = row.get(col)
        if v is not None and not 0.0 <= v <= 100.0:
            raise DataIntegrityError(f"{state}: {col}={v} outside [0, 100]")
    pop = row.get("population")
    if pop is not None and pop <= 0:
        raise DataIntegrityError(f"{state}: population must be positive")


def zscore(
    table: StateAttributeTable, variables: list[str]
) -> tuple[StateAttributeTable, list[str]]:
    """Standardize `variables` to mean 0, sample sd 1 over complete-case states.

    Returns the standardized table (restricted to the complete-case states)
    and the list of dropped states.
    """
    included = table.complete_states(variables)
    dropped = sorted(set(table.values) - set(included))
    if len(included) < 2:
        raise DegenerateVariableError("fewer than 2 complete-case states")
    values: dict[str, dict[str, float | None]] = {
        s: dict(table.values[s]) for s in included
    }
    for var in variables:
        col = table.column(var, included)
        sd = col.std(ddof=1)
        if sd == 0.0 or not math.isfinite(sd):
            raise DegenerateVariableError(f"variable {var!r} has zero variance")
        mean = col.mean()
        for s, z in zip(included, (col - mean) / sd):
            values[s][var] = float(z)
    return StateAttributeTable(columns=list(table.columns), values=values), dropped


@dataclass
class CorrelationMatrix:
    variables: list[str]
    r: np.ndarray
    p: np.ndarray
    insignificant: np.ndarray    # bool, p >= alpha
    available: np.ndarray        # bool, enough complete pairs
    alpha: float = 0.05


def cross_correlation(
    table: StateAttributeTable, variables: list[str], alpha: float = 0.05
) -> CorrelationMatrix:
    """Pairwise-complete Pearson r and two-sided p for every variable pair."""
    m = len(variables)
    r = np.eye(m)
    p = np.zeros((m, m))
    insig = np.zeros((m, m), dtype=bool)
    avail = np.ones((m, m), dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            states = table.complete_states([variables[i], variables[j]])
            if len(states) < 3:
                avail[i, j] = avail[j, i] = False
                r[i, j] = r[j, i] = np.nan
                p[i, j] = p[j, i] = np.nan
                continue
            rij, pij = pearson(table.column(variables[i], states),
                               table.column(variables[j], states))
            r[i, j] = r[j, i] = rij
            p[i, j] = p[j, i] = pij
            if pij >= alpha:
                insig[i, j] = insig[j, i] = True
    return CorrelationMatrix(variables=list(variables), r=r, p=p,
                             insignificant=insig, available=avail, alpha=alpha)
