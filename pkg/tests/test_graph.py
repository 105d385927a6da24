import io

import networkx as nx
import numpy as np
import pytest

from progbc.errors import DegenerateGraphError, EmptyGraphError, ParseError
from progbc.graph import (Graph, brandes_exact, exact_vertex_diameter,
                          load_edge_list, vertex_diameter_upper_bound,
                          write_centrality_csv)

from conftest import brute_betweenness, from_nx, random_graph


def test_load_path():
    g = load_edge_list(b"0 1\n1 2")
    assert g.n == 3
    assert g.out_degree().tolist() == [1, 2, 1]


def test_load_duplicate_collapses():
    g = load_edge_list(b"# c\n5 7\n7 5")
    assert g.n == 2
    assert g.n_edges == 1
    assert g.labels.tolist() == [5, 7]


def test_load_directed_keeps_both_arcs():
    g = load_edge_list(b"5 7\n7 5\n", directed=True)
    assert g.n_edges == 2
    assert g.out_degree().tolist() == [1, 1]


def test_load_stream_and_path(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("% header\n\n1\t2\n2 3  \n")
    a = load_edge_list(str(p))
    b = load_edge_list(io.StringIO(p.read_text()))
    assert a.n == b.n == 3
    assert np.array_equal(a.fidx, b.fidx)


def test_load_gzip(tmp_path):
    import gzip

    p = tmp_path / "g.txt.gz"
    with gzip.open(p, "wt") as fh:
        fh.write("# x\n1 2\n2 3\n")
    assert load_edge_list(p).n == 3


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as ei:
        load_edge_list(b"0 1\n# ok\n1 x\n")
    assert ei.value.lineno == 3
    with pytest.raises(ParseError):
        load_edge_list(b"0\n")
    with pytest.raises(ParseError):
        load_edge_list(b"0 -1\n")


def test_empty_graph():
    with pytest.raises(EmptyGraphError):
        load_edge_list(b"# nothing\n")
    with pytest.raises(EmptyGraphError):
        load_edge_list(b"3 3\n")


def test_brandes_examples(path3, star3, k4):
    assert np.allclose(brandes_exact(path3), [0, 1 / 3, 0], atol=1e-15)
    assert np.allclose(brandes_exact(star3), [0.5, 0, 0, 0], atol=1e-15)
    assert np.all(brandes_exact(k4) == 0)


def test_brandes_degenerate():
    g = Graph.from_edges(np.empty((0, 2), dtype=np.int64), n=1)
    with pytest.raises(DegenerateGraphError):
        brandes_exact(g)


@pytest.mark.parametrize("directed", [False, True])
def test_brandes_vs_enumeration(directed):
    rng = np.random.default_rng(11)
    for _ in range(12):
        n = int(rng.integers(5, 40))
        g = random_graph(rng, n, float(rng.uniform(0.05, 0.3)), directed)
        assert np.allclose(brandes_exact(g), brute_betweenness(g),
                           atol=1e-12, rtol=0)


def test_brandes_matches_networkx_and_blocks():
    G = nx.barabasi_albert_graph(300, 3, seed=2)
    g = from_nx(G)
    ref = nx.betweenness_centrality(G, normalized=False)
    ref = np.array([ref[v] for v in range(300)]) * 2 / (300 * 299)
    b1 = brandes_exact(g, blocks=1)
    b16 = brandes_exact(g, blocks=16)
    assert np.allclose(b1, ref, atol=1e-12)
    assert np.allclose(b16, ref, atol=1e-12)
    assert np.array_equal(brandes_exact(g), brandes_exact(g, max_seconds=60))


def test_rho_at_most_vertex_diameter():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_graph(rng, 60, 0.06)
        assert brandes_exact(g).sum() <= exact_vertex_diameter(g)


def test_exact_diameter_examples(k4):
    assert exact_vertex_diameter(from_nx(nx.path_graph(5))) == 5
    assert exact_vertex_diameter(k4) == 2
    assert exact_vertex_diameter(Graph.from_edges([[0, 1]])) == 2


def test_upper_bound_examples(k4):
    p5 = from_nx(nx.path_graph(5))
    for seed in range(5):
        ub = vertex_diameter_upper_bound(p5, rng=seed, exact_below=0)
        assert 5 <= ub <= 9
    assert vertex_diameter_upper_bound(k4, exact_below=0) >= 2
    assert vertex_diameter_upper_bound(k4) == 2
    assert vertex_diameter_upper_bound(p5, override=42) == 42


def test_upper_bound_dominates_exact():
    rng = np.random.default_rng(8)
    for _ in range(15):
        n = int(rng.integers(20, 512))
        G = nx.gnp_random_graph(n, 2.5 / n, seed=int(rng.integers(1 << 30)))
        g = from_nx(G)
        true = exact_vertex_diameter(g)
        assert vertex_diameter_upper_bound(g, exact_below=0, rng=1) >= true


def test_directed_bound_is_heuristic(caplog):
    g = from_nx(nx.DiGraph([(0, 1), (1, 2), (2, 3)]))
    with caplog.at_level("WARNING"):
        ub = vertex_diameter_upper_bound(g, exact_below=0, rng=0)
    assert ub >= 4
    assert "heuristic" in caplog.text


def test_csv_is_ordered_by_label():
    g = load_edge_list(b"9 3\n3 1\n")
    buf = io.StringIO()
    write_centrality_csv(buf, g, brandes_exact(g))
    assert buf.getvalue().splitlines() == ["node,bc", "1,0", "3,0.333333333333",
                                           "9,0"]
