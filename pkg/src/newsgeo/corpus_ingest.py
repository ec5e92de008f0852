"""Streaming ingestion of newline-delimited comment archives.

One JSON record per line (Pushshift layout by default). Parsing is
single-pass and tolerant: malformed lines are counted and skipped, never
abort the stream. Field names are remappable so non-Pushshift dumps can be
read without rewriting them first.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator
from urllib.parse import urlsplit

from .errors import DataIntegrityError, FormatError

logger = logging.getLogger(__name__)

DELETED_AUTHOR = "[deleted]"

# >50% malformed in this many leading lines means we are reading the wrong file
_FORMAT_PROBE_LINES = 10_000


@dataclass(frozen=True)
class CommentRecord:
    comment_id: str
    author: str
    subreddit: str
    created_utc: int
    body: str
    parent_id: str | None = None
    link_id: str | None = None

    @property
    def is_deleted_author(self) -> bool:
        return self.author == DELETED_AUTHOR


@dataclass(frozen=True)
class UrlMention:
    comment_id: str
    author: str
    subreddit: str
    created_utc: int
    url: str
    host: str


@dataclass(frozen=True)
class FieldMap:
    """Maps archive JSON keys onto CommentRecord fields."""

    comment_id: str = "id"
    author: str = "author"
    subreddit: str = "subreddit"
    created_utc: str = "created_utc"
    body: str = "body"
    parent_id: str = "parent_id"
    link_id: str = "link_id"


@dataclass
class StreamLedger:
    """Per-stream counters; merges associatively across shards."""

    records: int = 0
    malformed: int = 0
    deleted_author: int = 0

    def merge(self, other: "StreamLedger") -> "StreamLedger":
        return StreamLedger(
            records=self.records + other.records,
            malformed=self.malformed + other.malformed,
            deleted_author=self.deleted_author + other.deleted_author,
        )


_VALID_PARENT_PREFIXES = ("t1_", "t3_")


def _parse_line(line: str, fmap: FieldMap) -> CommentRecord | None:
    try:
        obj = json.loads(line)
    except ValueError:
        return None
    if not isinstance(obj, dict):
        return None
    try:
        comment_id = str(obj[fmap.comment_id])
        author = str(obj[fmap.author])
        subreddit = str(obj[fmap.subreddit])
        created = int(obj[fmap.created_utc])
        body = str(obj[fmap.body])
    except (KeyError, TypeError, ValueError):
        return None
    if not comment_id or created <= 0:
        return None
    parent = obj.get(fmap.parent_id)
    if parent is not None:
        parent = str(parent)
        if not parent.startswith(_VALID_PARENT_PREFIXES):
            return None
    link = obj.get(fmap.link_id)
    return CommentRecord(
        comment_id=comment_id,
        author=author,
        subreddit=subreddit,
        created_utc=created,
        body=body,
        parent_id=parent,
        link_id=str(link) if link is not None else None,
    )


def stream_comments(
    lines: Iterable[str],
    field_map: FieldMap | None = None,
    ledger: StreamLedger | None = None,
) -> Iterator[CommentRecord]:
    """Yield CommentRecords from an iterable of NDJSON lines, in file order.

    Malformed lines are skipped and counted on `ledger`. If more than half of
    the first 10k lines are malformed the stream is almost certainly not a
    comment archive and a FormatError is raised.
    """
    fmap = field_map or FieldMap()
    led = ledger if ledger is not None else StreamLedger()
    seen = 0
    for line in lines:
        if not line.strip():
            continue
        seen += 1
        record = _parse_line(line, fmap)
        if record is None:
            led.malformed += 1
            if seen <= _FORMAT_PROBE_LINES and led.malformed * 2 > seen and seen >= 20:
                raise FormatError(
                    f"{led.malformed}/{seen} leading lines malformed; "
                    "input does not look like a comment archive"
                )
            continue
        led.records += 1
        if record.is_deleted_author:
            led.deleted_author += 1
        yield record


# Scheme-anchored scanner; deliberately conservative (recall on bare links
# dominates in comment text, full markdown parsing is not worth the edge cases).
_URL_RE = re.compile(r"https?://[^\s<>\"'`\\]+", re.IGNORECASE)
_TRAILING_PUNCT = ".,;:!?)]}>*"


def extract_urls(body: str) -> list[str]:
    """Every http/https URL in `body`, in order, duplicates preserved.

    Handles bare URLs and markdown link targets; trailing punctuation is
    stripped from matches.
    """
    urls = []
    for m in _URL_RE.finditer(body):
        url = m.group(0).rstrip(_TRAILING_PUNCT)
        if url.lower() in ("http://", "https://"):
            continue
        urls.append(url)
    return urls


def host_of(url: str) -> str | None:
    """Lowercased authority of `url` with any leading "www." removed."""
    try:
        host = urlsplit(url).hostname
    except ValueError:
        return None
    if not host:
        return None
    host = host.lower()
    if host.startswith("www."):
        host = host[4:]
    return host or None


def iter_url_mentions(records: Iterable[CommentRecord]) -> Iterator[UrlMention]:
    """Compose stream + extract into a deterministic UrlMention stream."""
    for rec in records:
        for url in extract_urls(rec.body):
            host = host_of(url)
            if host is None:
                continue
            yield UrlMention(
                comment_id=rec.comment_id,
                author=rec.author,
                subreddit=rec.subreddit,
                created_utc=rec.created_utc,
                url=url,
                host=host,
            )


def build_author_index(records: Iterable[CommentRecord]) -> dict[str, str]:
    """comment_id -> author for every non-deleted-author comment.

    Raises DataIntegrityError on a duplicate id with conflicting authors.
    """
    index: dict[str, str] = {}
    for rec in records:
        if rec.is_deleted_author:
            continue
        existing = index.get(rec.comment_id)
        if existing is not None and existing != rec.author:
            raise DataIntegrityError(
                f"comment id {rec.comment_id!r} maps to both "
                f"{existing!r} and {rec.author!r}"
            )
        index[rec.comment_id] = rec.author
    return index
