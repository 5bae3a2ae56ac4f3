# graphdual/engine/graph_core.py
"""
Undirected connected graphs and the vertex-set logic used everywhere else.

Vertices are 0-based inside the library. Files, JSON documents, built-in
names and CLI flags are 1-based; ``load_graph`` and ``to_document`` are the
only places that translate.
"""
from __future__ import annotations
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional

import networkx as nx
import numpy as np
import structlog
from scipy import linalg

from graphdual.core.errors import GraphError, GuardError, PreconditionError
from graphdual.core.settings import settings
from graphdual.schemas.validator import GRAPH_SCHEMA, validate_or_raise

log = structlog.get_logger(__name__)

VertexSet = frozenset  # frozenset[int] of 0-based vertices

ZERO_TOL = 1e-10


@dataclass(frozen=True)
class GraphSpec:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    # ---------------- constructors ----------------

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]], name: str = "") -> "GraphSpec":
        """Build from 0-based edges. Duplicates are merged; loops and disconnection are rejected."""
        if vertex_count < 1:
            raise GraphError(f"vertex count must be positive, got {vertex_count}")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            for w in (u, v):
                if not 0 <= w < vertex_count:
                    raise GraphError(f"vertex {w + 1} out of range 1..{vertex_count}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u + 1}")
            seen.add((min(u, v), max(u, v)))
        g = cls(vertex_count=vertex_count, edges=tuple(sorted(seen)), name=name)
        if not nx.is_connected(g.to_networkx()):
            raise GraphError(f"graph {name or '(unnamed)'} is not connected")
        return g

    @classmethod
    def from_networkx(cls, graph: nx.Graph, name: str = "") -> "GraphSpec":
        nodes = sorted(graph.nodes())
        index = {node: k for k, node in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in graph.edges()), name=name)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        graph.add_edges_from(self.edges)
        return graph

    # ---------------- derived structure ----------------

    @cached_property
    def neighbours(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(n) for n in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.array([len(n) for n in self.neighbours], dtype=np.int64)
        deg.setflags(write=False)
        return deg

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.vertex_count, self.vertex_count), dtype=bool)
        for u, v in self.edges:
            adj[u, v] = adj[v, u] = True
        adj.setflags(write=False)
        return adj

    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) over every ordered pair i~j, grouped by src as in the rate matrix."""
        src = [i for i in range(self.vertex_count) for _ in sorted(self.neighbours[i])]
        dst = [j for i in range(self.vertex_count) for j in sorted(self.neighbours[i])]
        out = (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))
        for arr in out:
            arr.setflags(write=False)
        return out

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @property
    def label(self) -> str:
        return self.name or f"graph(r={self.vertex_count},|E|={self.edge_count})"

    def is_adjacent(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def induced_edge_count(self, vertices: Iterable[int]) -> int:
        members = set(vertices)
        return sum(1 for u, v in self.edges if u in members and v in members)

    def diameter(self) -> int:
        return int(nx.diameter(self.to_networkx()))

    def check_vertices(self, vertices: Iterable[int]) -> frozenset[int]:
        members = frozenset(int(v) for v in vertices)
        for v in members:
            if not 0 <= v < self.vertex_count:
                raise GraphError(f"vertex {v + 1} out of range 1..{self.vertex_count}")
        return members

    def to_document(self) -> dict:
        return {
            "name": self.label,
            "vertices": self.vertex_count,
            "edges": [[u + 1, v + 1] for u, v in self.edges],
        }


# ---------------- operations ----------------

def is_independent_set(g: GraphSpec, s: Iterable[int]) -> bool:
    members = sorted(g.check_vertices(s))
    adj = g.adjacency
    for k, u in enumerate(members):
        for v in members[k + 1:]:
            if adj[u, v]:
                return False
    return True


def reduce_graph(g: GraphSpec, i: int, j: int) -> GraphSpec:
    """Identify two vertices with identical neighbourhoods; the merged vertex keeps index min(i, j)."""
    g.check_vertices((i, j))
    if i == j:
        raise PreconditionError("cannot identify a vertex with itself")
    if g.neighbours[i] != g.neighbours[j]:
        raise PreconditionError(
            f"vertices {i + 1} and {j + 1} have different neighbourhoods; reduction undefined"
        )
    keep, drop = min(i, j), max(i, j)

    def relabel(v: int) -> int:
        if v == drop:
            return keep
        return v - 1 if v > drop else v

    edges = {tuple(sorted((relabel(u), relabel(v)))) for u, v in g.edges}
    name = f"{g.label}/({keep + 1}+{drop + 1})"
    return GraphSpec.from_edges(g.vertex_count - 1, edges, name=name)


def laplacian_matrix(g: GraphSpec) -> np.ndarray:
    return np.diag(g.degrees.astype(float)) - g.adjacency.astype(float)


def laplacian_spectrum(g: GraphSpec) -> list[float]:
    eig = linalg.eigvalsh(laplacian_matrix(g))
    eig = np.sort(eig)
    eig[np.abs(eig) < ZERO_TOL] = 0.0
    return [float(v) for v in eig]


def algebraic_connectivity(g: GraphSpec) -> float:
    if g.vertex_count < 2:
        return 0.0
    return laplacian_spectrum(g)[1]


def connectivity_lower_bound(g: GraphSpec) -> float:
    """4 / (r * diam) bound on the algebraic connectivity of a connected graph."""
    if g.vertex_count < 2:
        return 0.0
    return 4.0 / (g.vertex_count * g.diameter())


def _independent_sets(g: GraphSpec) -> Iterator[tuple[int, ...]]:
    r = g.vertex_count
    nbr_mask = [sum(1 << j for j in g.neighbours[i]) for i in range(r)]

    def extend(current: tuple[int, ...], blocked: int, start: int) -> Iterator[tuple[int, ...]]:
        for v in range(start, r):
            if blocked >> v & 1:
                continue
            chosen = current + (v,)
            yield chosen
            yield from extend(chosen, blocked | nbr_mask[v] | (1 << v), v + 1)

    yield from extend((), 0, 0)


def enumerate_independent_sets(
    g: GraphSpec, maximal_only: bool = False, *, guard: Optional[int] = None
) -> list[frozenset[int]]:
    """All non-empty (or all maximal) independent sets, in lexicographic order of sorted members."""
    guard = guard or settings.ENUMERATION_GUARD
    if g.vertex_count > guard:
        raise GuardError(f"exhaustive enumeration limited to {guard} vertices, graph has {g.vertex_count}")
    out: list[frozenset[int]] = []
    for members in _independent_sets(g):
        if maximal_only:
            chosen = set(members)
            addable = any(
                v not in chosen and not (g.neighbours[v] & chosen) for v in range(g.vertex_count)
            )
            if addable:
                continue
        out.append(frozenset(members))
    return out


# ---------------- named graphs and files ----------------

_BIPARTITE = re.compile(r"^K(\d+),(\d+)$")
_FAMILY = re.compile(r"^([KCSP])(\d+)$")


def builtin_graph(name: str) -> Optional[GraphSpec]:
    """Resolve K<r>, C<r>, S<k> (star, centre 1), P<r>, K<r>,<s> and Petersen; None if unknown."""
    key = name.strip()
    if key.lower() == "petersen":
        return GraphSpec.from_networkx(nx.petersen_graph(), name="Petersen")
    m = _BIPARTITE.match(key)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if p < 1 or q < 1:
            raise GraphError(f"invalid bipartite sizes in {name!r}")
        return GraphSpec.from_networkx(nx.complete_bipartite_graph(p, q), name=key)
    m = _FAMILY.match(key)
    if not m:
        return None
    family, size = m.group(1), int(m.group(2))
    if family == "K":
        if size < 1:
            raise GraphError("K<r> needs r >= 1")
        return GraphSpec.from_networkx(nx.complete_graph(size), name=key)
    if family == "C":
        if size < 3:
            raise GraphError("C<r> needs r >= 3")
        return GraphSpec.from_networkx(nx.cycle_graph(size), name=key)
    if family == "S":
        if size < 1:
            raise GraphError("S<k> needs k >= 1")
        return GraphSpec.from_networkx(nx.star_graph(size), name=key)
    if size < 1:
        raise GraphError("P<r> needs r >= 1")
    return GraphSpec.from_networkx(nx.path_graph(size), name=key)


def graph_from_document(document: dict, name: str = "") -> GraphSpec:
    validate_or_raise(document, GRAPH_SCHEMA)
    r = document["vertices"]
    edges = [(u - 1, v - 1) for u, v in document["edges"]]
    return GraphSpec.from_edges(r, edges, name=document.get("name") or name)


def parse_edge_list(text: str, name: str = "") -> GraphSpec:
    """One ``i j`` pair per line (1-based), ``#`` comments; the vertex count is the largest label."""
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphError(f"line {lineno}: expected 'i j', got {raw!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphError(f"line {lineno}: vertex labels must be integers")
        if u < 1 or v < 1:
            raise GraphError(f"line {lineno}: vertices are 1-based")
        edges.append((u - 1, v - 1))
    if not edges:
        raise GraphError("edge list is empty")
    r = max(max(e) for e in edges) + 1
    return GraphSpec.from_edges(r, edges, name=name)


def load_graph(ref: str) -> GraphSpec:
    """Built-in names resolve before file paths."""
    g = builtin_graph(ref)
    if g is not None:
        return g
    path = Path(ref)
    if not path.is_file():
        raise GraphError(f"unknown graph {ref!r}: not a built-in name and no such file")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise GraphError(f"malformed graph JSON {ref}: {e}") from e
        g = graph_from_document(document, name=path.stem)
    else:
        g = parse_edge_list(text, name=path.stem)
    log.debug("graph.loaded", ref=ref, vertices=g.vertex_count, edges=g.edge_count)
    return g
