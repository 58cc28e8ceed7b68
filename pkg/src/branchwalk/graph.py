"""Complex-weighted graphs as Hermitian Hamiltonians.

An :class:`Edge` ``(u, v, amp)`` contributes ``amp |u><v| + conj(amp) |v><u|``
to the Hamiltonian, i.e. ``H[u, v] = amp`` and ``H[v, u] = conj(amp)``.
Self-loops are not edges; they are real on-site energies kept in
``WeightedGraph.diag``. Row order of the matrix follows ``nodes``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _jsonfmt
from .errors import (
    DuplicateEdge,
    DuplicateNode,
    GraphValidationError,
    HasDiagonal,
    ParseError,
    SelfLoopAsEdge,
    UnknownEndpoint,
    UnknownNode,
)

__all__ = [
    "Edge",
    "WeightedGraph",
    "build_graph",
    "graph_from_matrix",
    "bipartite_partition",
    "graph_to_json",
    "json_to_graph",
]


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    amp: complex

    def __post_init__(self):
        object.__setattr__(self, "amp", complex(self.amp))


@dataclass(frozen=True, eq=True)
class WeightedGraph:
    """Immutable Hermitian adjacency Hamiltonian.

    Use :func:`build_graph` to construct; it validates labels and edges.
    """

    nodes: tuple
    edges: tuple
    diag: tuple = field(default=())

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.nodes)}

    @cached_property
    def _matrix(self) -> np.ndarray:
        n = len(self.nodes)
        h = np.zeros((n, n), dtype=complex)
        idx = self.index
        for e in self.edges:
            i, j = idx[e.source], idx[e.target]
            h[i, j] = e.amp
            h[j, i] = np.conj(e.amp)
        for label, energy in self.diag:
            h[idx[label], idx[label]] = energy
        h.setflags(write=False)
        return h

    def matrix(self) -> np.ndarray:
        """Dense Hamiltonian (a read-only array; copy before mutating)."""
        return self._matrix

    @property
    def size(self) -> int:
        return len(self.nodes)

    def position(self, label) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise UnknownNode(f"unknown node {label!r}") from None

    def element(self, u, v) -> complex:
        """Matrix element <u|H|v>."""
        return complex(self._matrix[self.position(u), self.position(v)])

    def energy(self, label) -> float:
        return float(self._matrix[self.position(label), self.position(label)].real)

    def neighbors(self, label) -> list[str]:
        i = self.position(label)
        row = self._matrix[i]
        return [self.nodes[j] for j in range(self.size) if j != i and row[j] != 0]

    @cached_property
    def has_diagonal(self) -> bool:
        return any(e != 0 for _, e in self.diag)

    def basis_vector(self, label) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[self.position(label)] = 1.0
        return v


def build_graph(nodes, edges=(), diag=()) -> WeightedGraph:
    """Validate and freeze a graph.

    ``edges`` items may be :class:`Edge` or ``(source, target, amp)`` tuples;
    ``diag`` items are ``(label, energy)`` pairs with real energy.
    """
    labels = tuple(str(n) for n in nodes)
    seen = set()
    for label in labels:
        if not label:
            raise GraphValidationError("node labels must be non-empty")
        if label in seen:
            raise DuplicateNode(f"duplicate node {label!r}")
        seen.add(label)

    frozen_edges = []
    pairs = set()
    for e in edges:
        if not isinstance(e, Edge):
            e = Edge(str(e[0]), str(e[1]), e[2])
        for end in (e.source, e.target):
            if end not in seen:
                raise UnknownEndpoint(f"edge endpoint {end!r} is not a declared node")
        if e.source == e.target:
            raise SelfLoopAsEdge(f"self-loop on {e.source!r} must be a diagonal entry")
        key = frozenset((e.source, e.target))
        if key in pairs:
            raise DuplicateEdge(f"duplicate edge between {e.source!r} and {e.target!r}")
        pairs.add(key)
        frozen_edges.append(e)

    frozen_diag = []
    diag_seen = set()
    for label, energy in diag:
        label = str(label)
        if label not in seen:
            raise UnknownEndpoint(f"diagonal entry on undeclared node {label!r}")
        if label in diag_seen:
            raise DuplicateNode(f"duplicate diagonal entry for {label!r}")
        if isinstance(energy, complex):
            if energy.imag != 0:
                raise GraphValidationError(f"diagonal energy on {label!r} must be real")
            energy = energy.real
        diag_seen.add(label)
        frozen_diag.append((label, float(energy)))

    return WeightedGraph(labels, tuple(frozen_edges), tuple(frozen_diag))


def graph_from_matrix(labels, h, *, atol=0.0) -> WeightedGraph:
    """Read a graph back from a Hermitian matrix.

    Edges are taken from the upper triangle (``source`` precedes ``target`` in
    ``labels``); entries with modulus ``<= atol`` are dropped. The diagonal
    must be real to ``atol``.
    """
    h = np.asarray(h, dtype=complex)
    n = len(labels)
    if h.shape != (n, n):
        raise GraphValidationError(f"matrix shape {h.shape} does not match {n} labels")
    edges = []
    diag = []
    for i in range(n):
        d = h[i, i]
        if abs(d.imag) > atol:
            raise GraphValidationError(f"diagonal entry {i} is not real: {d}")
        if abs(d.real) > atol:
            diag.append((labels[i], d.real))
        for j in range(i + 1, n):
            if abs(h[i, j]) > atol:
                edges.append((labels[i], labels[j], h[i, j]))
    return build_graph(labels, edges, diag)


def bipartite_partition(g: WeightedGraph):
    """Two-color the graph by breadth-first traversal.

    Returns ``(set_a, set_b)`` or ``None`` when an odd cycle exists. The first
    node (in ``g.nodes`` order) of each connected component goes to ``set_a``.
    """
    if g.has_diagonal:
        raise HasDiagonal("graph has diagonal entries; bipartiteness is undefined here")
    adjacency = {label: [] for label in g.nodes}
    for e in g.edges:
        if e.amp == 0:
            continue
        adjacency[e.source].append(e.target)
        adjacency[e.target].append(e.source)

    color: dict[str, int] = {}
    for root in g.nodes:
        if root in color:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if v not in color:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    set_a = {label for label, c in color.items() if c == 0}
    set_b = {label for label, c in color.items() if c == 1}
    return set_a, set_b


def graph_to_json(g: WeightedGraph) -> str:
    doc = {
        "nodes": list(g.nodes),
        "edges": [
            {"from": e.source, "to": e.target, "amp": [e.amp.real, e.amp.imag]}
            for e in g.edges
        ],
        "diag": [{"node": label, "energy": energy} for label, energy in g.diag],
    }
    return _jsonfmt.dumps(doc)


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", where)
    return float(value)


def json_to_graph(text: str) -> WeightedGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object", "/")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise ParseError("'nodes' must be a list of strings", "/nodes")

    edges = []
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise ParseError("'edges' must be a list", "/edges")
    for k, item in enumerate(raw_edges):
        where = f"/edges/{k}"
        if not isinstance(item, dict):
            raise ParseError("edge must be an object", where)
        for key in ("from", "to", "amp"):
            if key not in item:
                raise ParseError(f"missing field {key!r}", where)
        if not isinstance(item["from"], str) or not isinstance(item["to"], str):
            raise ParseError("'from' and 'to' must be strings", where)
        amp = item["amp"]
        if not isinstance(amp, list) or len(amp) != 2:
            raise ParseError("'amp' must be a [re, im] pair", where + "/amp")
        re_, im_ = (_number(v, where + "/amp") for v in amp)
        edges.append(Edge(item["from"], item["to"], complex(re_, im_)))

    diag = []
    raw_diag = doc.get("diag", [])
    if not isinstance(raw_diag, list):
        raise ParseError("'diag' must be a list", "/diag")
    for k, item in enumerate(raw_diag):
        where = f"/diag/{k}"
        if not isinstance(item, dict) or "node" not in item or "energy" not in item:
            raise ParseError("diag entry must have 'node' and 'energy'", where)
        if not isinstance(item["node"], str):
            raise ParseError("'node' must be a string", where)
        diag.append((item["node"], _number(item["energy"], where + "/energy")))

    return build_graph(nodes, edges, diag)
