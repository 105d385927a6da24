import itertools

import networkx as nx
import numpy as np
import pytest

from progbc.graph import Graph


def from_nx(G):
    directed = G.is_directed()
    G = nx.convert_node_labels_to_integers(G)
    edges = np.array(list(G.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(edges, directed=directed, n=G.number_of_nodes())


def all_shortest_paths(g, s, t):
    """Every shortest s-t path, enumerated by networkx."""
    G = g.to_networkx()
    try:
        return [tuple(p) for p in nx.all_shortest_paths(G, s, t)]
    except nx.NetworkXNoPath:
        return []


def brute_betweenness(g):
    """Ordered-pair betweenness by explicit path enumeration."""
    G = g.to_networkx()
    n = g.n
    b = np.zeros(n)
    for s, t in itertools.permutations(range(n), 2):
        try:
            paths = list(nx.all_shortest_paths(G, s, t))
        except nx.NetworkXNoPath:
            continue
        for p in paths:
            for v in p[1:-1]:
                b[v] += 1.0 / len(paths)
    return b / (n * (n - 1))


def random_graph(rng, n, p, directed=False):
    G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)),
                            directed=directed)
    return from_nx(G)


def multipath_graphs():
    """Hand-built graphs with several shortest paths between 0 and a
    target, each as (graph, s, t)."""
    out = []
    # grids: C(a+b, a) monotone paths corner to corner
    for a, b in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)]:
        G = nx.grid_2d_graph(a + 1, b + 1)
        out.append((G, (0, 0), (a, b)))
    # complete bipartite layers
    for w in (2, 3, 4, 5):
        G = nx.DiGraph()
        for x in range(w):
            G.add_edge("s", ("a", x))
            for y in range(w - 1):
                G.add_edge(("a", x), ("b", y))
        for y in range(w - 1):
            G.add_edge(("b", y), "t")
        out.append((G, "s", "t"))
    # hypercubes between antipodes
    for d in (2, 3, 4):
        G = nx.hypercube_graph(d)
        out.append((G, (0,) * d, (1,) * d))
    # cycles of even length between opposite nodes
    for k in (4, 6, 8, 10):
        out.append((nx.cycle_graph(k), 0, k // 2))
    # chained diamonds with uneven widths
    for widths in [(2, 3), (3, 2, 2), (1, 4), (2, 2, 2, 2)]:
        G = nx.Graph()
        prev = "s"
        for j, w in enumerate(widths):
            nxt = ("hub", j)
            for x in range(w):
                G.add_edge(prev, (j, x))
                G.add_edge((j, x), nxt)
            prev = nxt
        out.append((G, "s", prev))
    assert len(out) == 20
    res = []
    for G, s, t in out:
        H = nx.convert_node_labels_to_integers(G, label_attribute="old")
        idx = {d["old"]: v for v, d in H.nodes(data=True)}
        res.append((from_nx(H), idx[s], idx[t]))
    return res


@pytest.fixture
def path3():
    return Graph.from_edges([[0, 1], [1, 2]])


@pytest.fixture
def star3():
    return Graph.from_edges([[0, 1], [0, 2], [0, 3]])


@pytest.fixture
def k4():
    return from_nx(nx.complete_graph(4))


@pytest.fixture
def cycle4():
    return from_nx(nx.cycle_graph(4))


@pytest.fixture
def diamond():
    # s=0 -> {1, 2} -> t=3
    return Graph.from_edges([[0, 1], [0, 2], [1, 3], [2, 3]], directed=True)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
