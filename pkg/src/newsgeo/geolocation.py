"""User-to-state inference from activity in state-matched subreddits.

A user is assigned the state holding the strict plurality of their comments
in mapped subreddits; ties leave the user unassigned. Comments by the
deleted-author sentinel never contribute.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus_ingest import CommentRecord
from .errors import ConfigurationError, InsufficientDataError
from .news_catalog import NewsComment
from .states import STATE_SET
from .stats_core import ols_fit

logger = logging.getLogger(__name__)


@dataclass
class UserLocation:
    author: str
    state: str | None                       # None means unassigned (tie)
    state_counts: dict[str, int] = field(default_factory=dict)


@dataclass
class AssignmentSummary:
    mapped_authors: int
    assigned: int
    unassigned: int
    fraction_single_state: float
    fraction_at_most_two: float
    fraction_unassigned: float


@dataclass
class AdoptionRow:
    state: str
    reddit_users: int
    population: int
    adoption: float


def load_subreddit_state_map(path: str) -> dict[str, str]:
    """CSV `subreddit,state_code` -> lowercase subreddit -> state code.

    Codes outside the 50 states (e.g. DC) and conflicting duplicate rows are
    configuration errors.
    """
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip().lower() == "subreddit":
                continue
            if len(row) < 2:
                raise ConfigurationError(f"bad subreddit map row: {row!r}")
            subreddit = row[0].strip().lower()
            state = row[1].strip().upper()
            if state not in STATE_SET:
                raise ConfigurationError(
                    f"{state!r} is not one of the 50 state codes (row {row!r})"
                )
            existing = mapping.get(subreddit)
            if existing is not None and existing != state:
                raise ConfigurationError(
                    f"subreddit {subreddit!r} mapped to both {existing} and {state}"
                )
            mapping[subreddit] = state
    return mapping


def tally_user_states(
    corpus: Iterable[CommentRecord], subreddit_states: dict[str, str]
) -> dict[str, dict[str, int]]:
    """Per-author, per-state mapped-comment counts. Merges associatively."""
    tallies: dict[str, dict[str, int]] = {}
    for rec in corpus:
        if rec.is_deleted_author:
            continue
        state = subreddit_states.get(rec.subreddit.lower())
        if state is None:
            continue
        per_state = tallies.setdefault(rec.author, {})
        per_state[state] = per_state.get(state, 0) + 1
    return tallies


def resolve_assignments(
    tallies: dict[str, dict[str, int]]
) -> tuple[dict[str, UserLocation], AssignmentSummary]:
    """Strict-argmax assignment over per-author tallies; tie -> unassigned."""
    locations: dict[str, UserLocation] = {}
    single = at_most_two = unassigned = 0
    for author in sorted(tallies):
        counts = tallies[author]
        best = max(counts.values())
        winners = [s for s, c in counts.items() if c == best]
        state = winners[0] if len(winners) == 1 else None
        if state is None:
            unassigned += 1
        if len(counts) == 1:
            single += 1
        if len(counts) <= 2:
            at_most_two += 1
        locations[author] = UserLocation(author=author, state=state,
                                         state_counts=dict(counts))
    n = len(tallies)
    summary = AssignmentSummary(
        mapped_authors=n,
        assigned=n - unassigned,
        unassigned=unassigned,
        fraction_single_state=single / n if n else 0.0,
        fraction_at_most_two=at_most_two / n if n else 0.0,
        fraction_unassigned=unassigned / n if n else 0.0,
    )
    return locations, summary


def assign_user_states(
    corpus: Iterable[CommentRecord], subreddit_states: dict[str, str]
) -> tuple[dict[str, UserLocation], AssignmentSummary]:
    return resolve_assignments(tally_user_states(corpus, subreddit_states))


def state_user_counts(locations: dict[str, UserLocation]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for loc in locations.values():
        if loc.state is not None:
            counts[loc.state] = counts.get(loc.state, 0) + 1
    return counts


@dataclass
class AdoptionResult:
    rows: list[AdoptionRow]
    beta: float
    r2: float
    excluded_states: list[str]   # zero-user states, left out of the log fit


def adoption_and_scaling(
    locations: dict[str, UserLocation], populations: dict[str, int]
) -> AdoptionResult:
    """Adoption per state plus the log-log OLS fit of users vs population."""
    users = state_user_counts(locations)
    rows = []
    excluded = []
    log_pop = []
    log_users = []
    for state in sorted(populations):
        pop = populations[state]
        if pop <= 0:
            raise ConfigurationError(f"population for {state} must be positive")
        n = users.get(state, 0)
        rows.append(AdoptionRow(state=state, reddit_users=n, population=pop,
                                adoption=n / pop))
        if n > 0:
            log_pop.append(np.log(pop))
            log_users.append(np.log(n))
        else:
            excluded.append(state)
    if len(log_pop) < 3:
        raise InsufficientDataError("fewer than 3 states with users")
    fit = ols_fit(np.array(log_pop), np.array(log_users), names=["log_population"])
    return AdoptionResult(rows=rows, beta=fit.coefficient_of("log_population"),
                         r2=fit.r2, excluded_states=excluded)


@dataclass
class CohortStats:
    users: int
    mean_comments: float
    sharer_fraction: dict[str, float]    # label -> fraction with >=1 news comment


@dataclass
class CohortComparison:
    geotagged: CohortStats
    non_geotagged: CohortStats


def cohort_compare(
    geotagged: set[str],
    non_geotagged: set[str],
    corpus: Iterable[CommentRecord],
    news_comments: Iterable[NewsComment],
) -> CohortComparison:
    """Mean comment volume and per-type news-sharer fractions per cohort."""
    if not geotagged or not non_geotagged:
        raise InsufficientDataError("both cohorts must be non-empty")
    comment_counts: dict[str, int] = {}
    for rec in corpus:
        comment_counts[rec.author] = comment_counts.get(rec.author, 0) + 1
    sharers: dict[str, set[str]] = {}
    for nc in news_comments:
        sharers.setdefault(nc.label, set()).add(nc.author)

    def stats_for(cohort: set[str]) -> CohortStats:
        total = sum(comment_counts.get(a, 0) for a in cohort)
        fractions = {
            label: len(authors & cohort) / len(cohort)
            for label, authors in sorted(sharers.items())
        }
        return CohortStats(users=len(cohort),
                           mean_comments=total / len(cohort),
                           sharer_fraction=fractions)

    return CohortComparison(geotagged=stats_for(geotagged),
                            non_geotagged=stats_for(non_geotagged))
