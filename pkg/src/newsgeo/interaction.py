"""User-to-user reply pairs and the distance-binned connectivity profile.

A pair exists when one geotagged user replied to another's comment (or post,
when a submissions index is supplied). Connectivity at distance d is the
number of interacting pairs in the d bin divided by the exact number of
possible geotagged user pairs whose state centroids fall in that bin.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

from .corpus_ingest import CommentRecord
from .errors import ConfigurationError, NewsgeoError
from .geolocation import UserLocation, state_user_counts
from .states import STATE_SET

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

SCOPES = ("all_subreddits", "non_location_subreddits")


def load_centroids(path: str) -> dict[str, tuple[float, float]]:
    """CSV `state,lat,lon` -> state -> (lat, lon) in degrees."""
    centroids: dict[str, tuple[float, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#") or \
               row[0].strip().lower() == "state":
                continue
            state = row[0].strip().upper()
            if state not in STATE_SET:
                raise ConfigurationError(f"unknown state {state!r} in centroid file")
            centroids[state] = (float(row[1]), float(row[2]))
    return centroids


def centroid_distance(
    a: str, b: str, centroids: dict[str, tuple[float, float]]
) -> float:
    """Haversine great-circle km between state centroids; 0 for a == b."""
    if a == b:
        return 0.0
    try:
        lat1, lon1 = centroids[a]
        lat2, lon2 = centroids[b]
    except KeyError as exc:
        raise NewsgeoError(f"no centroid for state {exc.args[0]!r}") from exc
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + \
        math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


@dataclass
class PairSet:
    """Unordered geotagged user pairs with interaction counts."""

    counts: dict[tuple[str, str], int] = field(default_factory=dict)
    unresolved_parents: int = 0
    skipped: int = 0

    def add(self, a: str, b: str, weight: int = 1) -> None:
        pair = (a, b) if a <= b else (b, a)
        self.counts[pair] = self.counts.get(pair, 0) + weight

    def merge(self, other: "PairSet") -> "PairSet":
        merged = PairSet(counts=dict(self.counts),
                         unresolved_parents=self.unresolved_parents + other.unresolved_parents,
                         skipped=self.skipped + other.skipped)
        for pair, w in other.counts.items():
            merged.counts[pair] = merged.counts.get(pair, 0) + w
        return merged


def build_interaction_pairs(
    corpus: Iterable[CommentRecord],
    author_index: dict[str, str],
    locations: dict[str, UserLocation],
    scope: str = "all_subreddits",
    state_subreddits: dict[str, str] | None = None,
    submission_index: dict[str, str] | None = None,
) -> PairSet:
    """Extract the unordered reply-pair set between geotagged users.

    t1_ parents resolve through the comment author index, t3_ parents
    through the optional submissions index (skipped otherwise). Self-replies
    and pairs involving deleted or non-geotagged users are excluded. Under
    the non-location scope, replies inside state-mapped subreddits do not
    count (the possible-pair denominator is unaffected).
    """
    if scope not in SCOPES:
        raise ConfigurationError(f"unknown scope {scope!r}")
    if scope == "non_location_subreddits" and state_subreddits is None:
        raise ConfigurationError("non-location scope needs the subreddit map")
    pairs = PairSet()
    for rec in corpus:
        if rec.parent_id is None or rec.is_deleted_author:
            continue
        if scope == "non_location_subreddits" and \
           rec.subreddit.lower() in state_subreddits:
            pairs.skipped += 1
            continue
        prefix, _, raw_id = rec.parent_id.partition("_")
        if prefix == "t1":
            parent_author = author_index.get(raw_id)
        elif prefix == "t3" and submission_index is not None:
            parent_author = submission_index.get(raw_id)
        else:
            parent_author = None
        if parent_author is None:
            pairs.unresolved_parents += 1
            continue
        if parent_author == rec.author:
            continue
        loc_a = locations.get(rec.author)
        loc_b = locations.get(parent_author)
        if loc_a is None or loc_b is None or \
           loc_a.state is None or loc_b.state is None:
            pairs.skipped += 1
            continue
        pairs.add(rec.author, parent_author)
    return pairs


@dataclass
class ConnectivityBin:
    d_km: float
    interacting_pairs: int
    possible_pairs: int

    @property
    def connectivity(self) -> float:
        return self.interacting_pairs / self.possible_pairs


@dataclass
class ConnectivityProfile:
    scope: str
    bin_km: float
    bins: list[ConnectivityBin]


def _bin_of(distance: float, same_state: bool, bin_km: float) -> float:
    if same_state:
        return 0.0
    return round(distance / bin_km) * bin_km


def connectivity_profile(
    pairs: PairSet,
    locations: dict[str, UserLocation],
    centroids: dict[str, tuple[float, float]],
    bin_km: float = 100.0,
    scope: str = "all_subreddits",
) -> ConnectivityProfile:
    """Interacting vs possible geotagged pairs per distance bin.

    Possible pairs are counted exactly: C(n, 2) within a state (bin 0) and
    n_a * n_b across each distinct state pair, placed in the bin of the
    centroid distance. Bins with no possible pairs are omitted.
    """
    users = state_user_counts(locations)
    states = sorted(users)
    possible: dict[float, int] = {}
    for i, a in enumerate(states):
        n_a = users[a]
        possible[0.0] = possible.get(0.0, 0) + n_a * (n_a - 1) // 2
        for b in states[i + 1:]:
            d = centroid_distance(a, b, centroids)
            key = _bin_of(d, same_state=False, bin_km=bin_km)
            possible[key] = possible.get(key, 0) + n_a * users[b]

    interacting: dict[float, int] = {}
    for (u, v) in pairs.counts:
        sa = locations[u].state
        sb = locations[v].state
        same = sa == sb
        d = centroid_distance(sa, sb, centroids)
        key = _bin_of(d, same_state=same, bin_km=bin_km)
        interacting[key] = interacting.get(key, 0) + 1

    bins = [
        ConnectivityBin(d_km=d, interacting_pairs=interacting.get(d, 0),
                        possible_pairs=n)
        for d, n in sorted(possible.items())
        if n > 0
    ]
    return ConnectivityProfile(scope=scope, bin_km=bin_km, bins=bins)
