import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from graphflame import WeightedGraph

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(seed: int, n: int, extra: float = 0.3, mu_range=(0.5, 2.0)) -> WeightedGraph:
    """Connected graph: random spanning tree plus Bernoulli(extra) chords."""
    rng = np.random.default_rng(seed)
    edges = {}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges[(j, i)] = rng.uniform(0.1, 2.0)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra:
                edges[(i, j)] = rng.uniform(0.1, 2.0)
    width = len(str(n - 1))
    ids = [f"n{i:0{width}d}" for i in range(n)]
    mu = dict(zip(ids, rng.uniform(*mu_range, size=n)))
    return WeightedGraph.from_edges(mu, [(ids[i], ids[j], w) for (i, j), w in edges.items()])


graph_seeds = st.integers(min_value=0, max_value=2**31 - 1)
graph_sizes = st.integers(min_value=1, max_value=14)


@pytest.fixture
def path3():
    """a - b - c, unit weights, unit measure."""
    return WeightedGraph.from_edges({"a": 1, "b": 1, "c": 1}, [("a", "b", 1), ("b", "c", 1)])
