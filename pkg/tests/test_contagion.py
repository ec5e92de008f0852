import numpy as np
import pytest

from newsgeo.contagion import (
    StateGraph,
    assortativity,
    first_exposure_order,
    infer_state_network,
    pagerank,
    pagerank_differential,
)
from newsgeo.diffusion import TimelineEvent, UrlTimeline
from newsgeo.errors import AlignmentError, UndefinedCorrelationError


def timeline(url, label, state_order, start=0, gap=100):
    events = []
    for i, state in enumerate(state_order):
        events.append(TimelineEvent(created_utc=start + i * gap,
                                    author=f"a{i}", state=state,
                                    subreddit="s", comment_id=f"{url}_{i}"))
    tl = UrlTimeline(url=url, label=label, events=events)
    tl.sort()
    return tl


def random_graph(rng, n=10, p=0.5):
    graph = StateGraph()
    nodes = [f"S{i}" for i in range(n)]
    for a in nodes:
        for b in nodes:
            if a != b and rng.random() < p:
                graph.add_edge(a, b, float(rng.integers(1, 6)))
    return graph


def pagerank_dense_oracle(graph, damping=0.85, iterations=500):
    """Dense power iteration on the explicit Google matrix."""
    nodes = graph.nodes
    n = len(nodes)
    idx = {s: i for i, s in enumerate(nodes)}
    W = np.zeros((n, n))
    for (a, b), w in graph.edges.items():
        W[idx[a], idx[b]] = w
    out = W.sum(axis=1)
    P = np.zeros((n, n))
    for i in range(n):
        if out[i] > 0:
            P[i] = W[i] / out[i]
        else:
            P[i] = 1.0 / n
    G = damping * P + (1 - damping) / n
    v = np.full(n, 1.0 / n)
    for _ in range(iterations):
        v = v @ G
    v /= v.sum()
    return {s: float(v[idx[s]]) for s in nodes}


class TestInference:
    def test_chain_rule_edges(self):
        tl = timeline("u", "fake", ["CA", "TX", "NY"])
        graph = infer_state_network([tl], "fake", min_states=2)
        assert graph.edges == {("CA", "TX"): 1.0, ("TX", "NY"): 1.0}

    def test_star_rule_edges(self):
        tl = timeline("u", "fake", ["CA", "TX", "NY"])
        graph = infer_state_network([tl], "fake", min_states=2, rule="star")
        assert graph.edges == {("CA", "TX"): 1.0, ("CA", "NY"): 1.0}

    def test_min_states_cut(self):
        tls = [timeline("u1", "fake", ["CA", "TX"]),
               timeline("u2", "fake", ["CA", "TX", "NY", "WA", "OH"])]
        graph = infer_state_network(tls, "fake", min_states=5)
        assert graph.metadata["urls"] == 1

    def test_repeat_posts_after_first_exposure_ignored(self):
        events = [TimelineEvent(created_utc=t, author=f"a{t}", state=s,
                                subreddit="x", comment_id=f"c{t}")
                  for t, s in [(0, "CA"), (1, "TX"), (2, "CA"), (3, "NY")]]
        tl = UrlTimeline(url="u", label="fake", events=events)
        assert first_exposure_order(tl) == ["CA", "TX", "NY"]

    def test_rule_invariant_total_weight(self, rng):
        tls = []
        states = [f"S{i}" for i in range(12)]
        expected = 0.0
        for u in range(100):
            k = int(rng.integers(2, 9))
            order = [states[int(i)] for i in
                     rng.choice(len(states), size=k, replace=False)]
            tls.append(timeline(f"u{u}", "fake", order))
            expected += k - 1
        chain = infer_state_network(tls, "fake", min_states=2, rule="chain")
        star = infer_state_network(tls, "fake", min_states=2, rule="star")
        assert chain.total_weight() == pytest.approx(expected)
        assert star.total_weight() == pytest.approx(expected)

    def test_brute_force_edge_accumulation(self, rng):
        states = [f"S{i}" for i in range(8)]
        tls = []
        expected = {}
        for u in range(100):
            k = int(rng.integers(2, 6))
            order = [states[int(i)] for i in
                     rng.choice(len(states), size=k, replace=False)]
            tls.append(timeline(f"u{u}", "fake", order))
            for a, b in zip(order, order[1:]):
                expected[(a, b)] = expected.get((a, b), 0.0) + 1.0
        graph = infer_state_network(tls, "fake", min_states=2)
        assert graph.edges == expected

    def test_empty_graph_diagnostic(self):
        graph = infer_state_network([], "fake")
        assert graph.edges == {}
        assert graph.metadata["urls"] == 0


class TestPagerank:
    def test_symmetric_complete_graph(self):
        graph = StateGraph()
        nodes = ["A", "B", "C", "D"]
        for a in nodes:
            for b in nodes:
                if a != b:
                    graph.add_edge(a, b, 1.0)
        scores = pagerank(graph)
        for s in nodes:
            assert scores[s] == pytest.approx(0.25, abs=1e-10)

    def test_sink_attracts_mass(self):
        graph = StateGraph()
        graph.add_edge("A", "B", 1.0)
        scores = pagerank(graph)
        assert scores["B"] > scores["A"]
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-12)

    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            graph = random_graph(rng)
            scores = pagerank(graph)
            oracle = pagerank_dense_oracle(graph)
            for s in graph.nodes:
                assert scores[s] == pytest.approx(oracle[s], abs=1e-8)

    def test_invariant_under_weight_scaling(self, rng):
        graph = random_graph(rng)
        scaled = StateGraph(edges={e: 17.0 * w for e, w in graph.edges.items()})
        a = pagerank(graph)
        b = pagerank(scaled)
        for s in graph.nodes:
            assert a[s] == pytest.approx(b[s], abs=1e-10)

    def test_scores_sum_to_one(self, rng):
        graph = random_graph(rng)
        assert sum(pagerank(graph).values()) == pytest.approx(1.0, abs=1e-12)


class TestDifferential:
    def test_identical_maps_zero(self):
        s = {"A": 0.5, "B": 0.5}
        assert pagerank_differential(s, dict(s)) == {"A": 0.0, "B": 0.0}

    def test_differentials_sum_to_zero(self, rng):
        graph = random_graph(rng)
        a = pagerank(graph, damping=0.85)
        b = pagerank(graph, damping=0.7)
        diff = pagerank_differential(a, b)
        assert sum(diff.values()) == pytest.approx(0.0, abs=1e-12)

    def test_node_set_mismatch(self):
        with pytest.raises(AlignmentError):
            pagerank_differential({"A": 1.0}, {"B": 1.0})

    def test_random_pair_hand_computed(self, rng):
        nodes = [f"S{i}" for i in range(6)]
        a = {s: float(rng.random()) for s in nodes}
        b = {s: float(rng.random()) for s in nodes}
        diff = pagerank_differential(a, b)
        for s in nodes:
            assert diff[s] == a[s] - b[s]


class TestAssortativity:
    def test_perfectly_assortative(self):
        graph = StateGraph()
        graph.add_edge("A1", "A2", 2.0)   # attribute 1 on both ends
        graph.add_edge("B1", "B2", 1.0)   # attribute 5 on both ends
        attr = {"A1": 1.0, "A2": 1.0, "B1": 5.0, "B2": 5.0}
        assert assortativity(graph, attr) == pytest.approx(1.0)

    def test_perfectly_disassortative(self):
        graph = StateGraph()
        graph.add_edge("H1", "L1", 1.0)
        graph.add_edge("L2", "H2", 3.0)
        attr = {"H1": 2.0, "H2": 2.0, "L1": -2.0, "L2": -2.0}
        assert assortativity(graph, attr) == pytest.approx(-1.0)

    def test_edge_expansion_oracle(self, rng):
        graph = StateGraph()
        nodes = [f"S{i}" for i in range(12)]
        attr = {s: float(rng.standard_normal()) for s in nodes}
        for a in nodes:
            for b in nodes:
                if a != b and rng.random() < 0.4:
                    graph.add_edge(a, b, float(rng.integers(1, 5)))
        coefficient = assortativity(graph, attr)
        # oracle: expand each edge into w copies, plain Pearson
        xs, ys = [], []
        for (a, b), w in graph.edges.items():
            xs += [attr[a]] * int(w)
            ys += [attr[b]] * int(w)
        x, y = np.array(xs), np.array(ys)
        expected = float(((x - x.mean()) @ (y - y.mean())) /
                         np.sqrt(((x - x.mean()) ** 2).sum() *
                                 ((y - y.mean()) ** 2).sum()))
        assert coefficient == pytest.approx(expected, abs=1e-10)

    def test_affine_invariance(self, rng):
        graph = random_graph(rng, n=8)
        attr = {s: float(rng.standard_normal()) for s in graph.nodes}
        base = assortativity(graph, attr)
        shifted = {s: 4.0 * v - 11.0 for s, v in attr.items()}
        assert abs(assortativity(graph, shifted) - base) < 1e-10

    def test_zero_variance_rejected(self):
        graph = StateGraph()
        graph.add_edge("A", "B", 1.0)
        graph.add_edge("B", "C", 1.0)
        with pytest.raises(UndefinedCorrelationError):
            assortativity(graph, {"A": 1.0, "B": 1.0, "C": 1.0})
