import json

import numpy as np
import pytest

from newsgeo.corpus_ingest import CommentRecord
from newsgeo.news_catalog import load_catalog


def make_record(comment_id, author="alice", subreddit="general",
                created_utc=1_451_606_400, body="", parent_id=None):
    return CommentRecord(comment_id=comment_id, author=author,
                         subreddit=subreddit, created_utc=created_utc,
                         body=body, parent_id=parent_id)


def ndjson_line(comment_id, author="alice", subreddit="general",
                created_utc=1_451_606_400, body="", parent_id=None):
    rec = {"id": comment_id, "author": author, "subreddit": subreddit,
           "created_utc": created_utc, "body": body}
    if parent_id is not None:
        rec["parent_id"] = parent_id
    return json.dumps(rec)


@pytest.fixture
def rng():
    return np.random.default_rng(20160101)


@pytest.fixture
def catalog(tmp_path):
    """Small catalog with one deliberate cross-list conflict."""
    files = []
    for label, domains in [
        ("fake", ["fakery.com", "hoax.net", "sharedsite.org"]),
        ("lowcred", ["clickbait.io", "rumormill.co"]),
        ("satire", ["parody.news"]),
        ("reputable", ["nytimes.com", "bbc.co.uk", "sharedsite.org"]),
    ]:
        path = tmp_path / f"{label}.txt"
        path.write_text("\n".join(domains) + "\n")
        files.append((str(path), label))
    return load_catalog(files)
