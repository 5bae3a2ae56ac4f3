import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphdual.core.errors import GraphError, GuardError, PreconditionError
from graphdual.engine.graph_core import (
    GraphSpec,
    algebraic_connectivity,
    builtin_graph,
    connectivity_lower_bound,
    enumerate_independent_sets,
    is_independent_set,
    laplacian_spectrum,
    load_graph,
    parse_edge_list,
    reduce_graph,
)


def test_builtin_names_resolve():
    assert builtin_graph("C4").edges == ((0, 1), (0, 3), (1, 2), (2, 3))
    star = builtin_graph("S3")
    assert star.vertex_count == 4
    assert list(star.degrees) == [3, 1, 1, 1]
    bip = builtin_graph("K3,2")
    assert bip.vertex_count == 5 and bip.edge_count == 6
    assert builtin_graph("Petersen").edge_count == 15
    assert builtin_graph("nope") is None


def test_builtin_rejects_degenerate_sizes():
    with pytest.raises(GraphError):
        builtin_graph("C2")


def test_from_edges_rejects_bad_input():
    with pytest.raises(GraphError, match="not connected"):
        GraphSpec.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(GraphError, match="self-loop"):
        GraphSpec.from_edges(2, [(0, 1), (1, 1)])
    with pytest.raises(GraphError, match="out of range"):
        GraphSpec.from_edges(2, [(0, 2)])


def test_duplicate_edges_merge():
    g = GraphSpec.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    assert g.edge_count == 2


def test_is_independent_set(c4):
    assert is_independent_set(c4, [])
    assert is_independent_set(c4, [0, 2])
    assert not is_independent_set(c4, [0, 1])
    with pytest.raises(GraphError):
        is_independent_set(c4, [7])


@given(st.sampled_from(["K4", "C5", "S3", "P4", "K3,2", "Petersen"]))
def test_singletons_are_independent(name):
    g = builtin_graph(name)
    assert all(is_independent_set(g, [v]) for v in range(g.vertex_count))


def test_reduce_graph_merges_twin_vertices(c4):
    reduced = reduce_graph(c4, 0, 2)
    assert reduced.vertex_count == 3
    assert reduced.edges == ((0, 1), (0, 2))


def test_reduce_graph_needs_identical_neighbourhoods(c4):
    with pytest.raises(PreconditionError):
        reduce_graph(c4, 0, 1)
    with pytest.raises(PreconditionError):
        reduce_graph(c4, 1, 1)


def test_laplacian_spectrum_known_graphs(c4, k4):
    np.testing.assert_allclose(laplacian_spectrum(c4), [0, 2, 2, 4], atol=1e-12)
    np.testing.assert_allclose(laplacian_spectrum(k4), [0, 4, 4, 4], atol=1e-12)
    assert algebraic_connectivity(c4) == pytest.approx(2.0)
    assert connectivity_lower_bound(c4) == pytest.approx(0.5)


@given(st.sampled_from(["K5", "C6", "S4", "P5", "K3,2", "Petersen"]))
def test_connectivity_bound_holds(name):
    g = builtin_graph(name)
    spectrum = laplacian_spectrum(g)
    assert spectrum[0] == 0.0
    assert spectrum == sorted(spectrum)
    assert algebraic_connectivity(g) >= connectivity_lower_bound(g) - 1e-12


def test_enumerate_independent_sets(c4):
    everything = enumerate_independent_sets(c4)
    assert everything == [
        frozenset({0}), frozenset({0, 2}), frozenset({1}), frozenset({1, 3}), frozenset({2}), frozenset({3}),
    ]
    assert enumerate_independent_sets(c4, maximal_only=True) == [frozenset({0, 2}), frozenset({1, 3})]


def test_enumeration_guard():
    with pytest.raises(GuardError):
        enumerate_independent_sets(builtin_graph("C6"), guard=5)


def test_edge_list_and_json_files(tmp_path):
    edge_file = tmp_path / "path3.txt"
    edge_file.write_text("# a path\n1 2\n2 3\n", encoding="utf-8")
    g = load_graph(str(edge_file))
    assert g.vertex_count == 3 and g.name == "path3"

    doc = {"name": "tri", "vertices": 3, "edges": [[1, 2], [1, 3], [2, 3]]}
    json_file = tmp_path / "tri.json"
    json_file.write_text(json.dumps(doc), encoding="utf-8")
    tri = load_graph(str(json_file))
    assert tri.edge_count == 3 and tri.to_document() == doc


def test_malformed_inputs(tmp_path):
    with pytest.raises(GraphError, match="line 1"):
        parse_edge_list("1 2 3\n")
    with pytest.raises(GraphError, match="1-based"):
        parse_edge_list("0 1\n")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(GraphError):
        load_graph(str(bad))
    with pytest.raises(GraphError, match="unknown graph"):
        load_graph(str(tmp_path / "missing.txt"))


def test_star_leaves_reduce_to_an_edge(s2):
    reduced = reduce_graph(s2, 1, 2)
    k2 = builtin_graph("K2")
    assert reduced.vertex_count == k2.vertex_count
    assert reduced.edges == k2.edges


def test_star_spectrum(s2):
    np.testing.assert_allclose(laplacian_spectrum(s2), [0.0, 1.0, 3.0], atol=1e-12)


def test_complete_bipartite_maximal_sets():
    g = builtin_graph("K3,2")
    assert enumerate_independent_sets(g, maximal_only=True) == [frozenset({0, 1, 2}), frozenset({3, 4})]


def test_complete_graph_sets_are_singletons():
    g = builtin_graph("K5")
    assert enumerate_independent_sets(g) == [frozenset({v}) for v in range(5)]
