"""State-to-state contagion graphs from URL timelines.

A URL qualifies when enough distinct states posted it. Its events reduce to
the first post per state, in time order; the chain rule links consecutive
first exposures, the star rule links the origin state to every later one.
Both rules deposit (#states - 1) units of weight per URL, a conservation
property the tests exploit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .diffusion import UrlTimeline
from .errors import AlignmentError, ConvergenceError, UndefinedCorrelationError

logger = logging.getLogger(__name__)

RULES = ("chain", "star")


@dataclass
class StateGraph:
    edges: dict[tuple[str, str], float] = field(default_factory=dict)
    metadata: dict[str, object] = field(default_factory=dict)

    @property
    def nodes(self) -> list[str]:
        seen = set()
        for src, dst in self.edges:
            seen.add(src)
            seen.add(dst)
        return sorted(seen)

    def total_weight(self) -> float:
        return sum(self.edges.values())

    def add_edge(self, src: str, dst: str, weight: float = 1.0) -> None:
        if src == dst:
            return
        self.edges[(src, dst)] = self.edges.get((src, dst), 0.0) + weight


def first_exposure_order(timeline: UrlTimeline) -> list[str]:
    """States in order of their first event on the timeline."""
    order: list[str] = []
    seen: set[str] = set()
    for e in timeline.events:
        if e.state is None or e.state in seen:
            continue
        seen.add(e.state)
        order.append(e.state)
    return order


def infer_state_network(
    timelines: Iterable[UrlTimeline],
    news_type: str,
    min_states: int = 5,
    rule: str = "chain",
) -> StateGraph:
    """Accumulate directed first-exposure edges over qualifying URLs."""
    if rule not in RULES:
        raise ValueError(f"unknown inference rule {rule!r}")
    graph = StateGraph(metadata={"news_type": news_type, "rule": rule,
                                 "min_states": min_states, "urls": 0})
    for tl in timelines:
        if tl.label != news_type:
            continue
        order = first_exposure_order(tl)
        if len(order) < min_states:
            continue
        graph.metadata["urls"] = graph.metadata["urls"] + 1
        if rule == "chain":
            for src, dst in zip(order, order[1:]):
                graph.add_edge(src, dst)
        else:
            for dst in order[1:]:
                graph.add_edge(order[0], dst)
    if graph.metadata["urls"] == 0:
        logger.warning("no %s URL reached %d states; graph is empty",
                       news_type, min_states)
    return graph


def pagerank(
    graph: StateGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> dict[str, float]:
    """Weighted PageRank with out-weight-proportional transitions and
    uniform redistribution of dangling mass. Scores sum to 1."""
    nodes = graph.nodes
    if not nodes:
        raise ValueError("pagerank on an empty graph")
    n = len(nodes)
    idx = {s: i for i, s in enumerate(nodes)}
    out_weight = np.zeros(n)
    for (src, _), w in graph.edges.items():
        out_weight[idx[src]] += w
    # transition entries grouped by source for the sparse push
    outgoing: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (src, dst), w in graph.edges.items():
        i = idx[src]
        outgoing[i].append((idx[dst], w / out_weight[i]))

    scores = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = np.zeros(n)
        dangling = 0.0
        for i in range(n):
            if outgoing[i]:
                for j, p in outgoing[i]:
                    nxt[j] += damping * scores[i] * p
            else:
                dangling += scores[i]
        nxt += (damping * dangling + (1.0 - damping)) / n
        if float(np.abs(nxt - scores).sum()) < tol:
            scores = nxt
            break
        scores = nxt
    else:
        raise ConvergenceError(
            f"pagerank did not converge in {max_iter} iterations",
            last_iterate={s: float(scores[idx[s]]) for s in nodes},
        )
    scores /= scores.sum()
    return {s: float(scores[idx[s]]) for s in nodes}


def pagerank_differential(
    scores_a: dict[str, float], scores_b: dict[str, float]
) -> dict[str, float]:
    """Elementwise score_a - score_b over a shared node set."""
    if set(scores_a) != set(scores_b):
        raise AlignmentError("score maps cover different node sets")
    return {s: scores_a[s] - scores_b[s] for s in sorted(scores_a)}


def assortativity(graph: StateGraph, attribute: dict[str, float]) -> float:
    """Weighted scalar assortativity: Pearson correlation of the attribute
    across edge endpoints, each directed edge weighted by its weight."""
    if len(graph.edges) < 2:
        raise ValueError("assortativity needs at least 2 edges")
    xs, ys, ws = [], [], []
    for (src, dst), w in sorted(graph.edges.items()):
        if src not in attribute or dst not in attribute:
            raise AlignmentError(f"attribute missing for edge {src}->{dst}")
        xs.append(attribute[src])
        ys.append(attribute[dst])
        ws.append(w)
    x = np.array(xs)
    y = np.array(ys)
    w = np.array(ws)
    total = w.sum()
    mx = float(w @ x) / total
    my = float(w @ y) / total
    cov = float(w @ ((x - mx) * (y - my))) / total
    vx = float(w @ ((x - mx) ** 2)) / total
    vy = float(w @ ((y - my) ** 2)) / total
    if vx <= 0.0 or vy <= 0.0:
        raise UndefinedCorrelationError(
            "endpoint attribute has zero variance over the edge list"
        )
    return max(-1.0, min(1.0, cov / math.sqrt(vx * vy)))
