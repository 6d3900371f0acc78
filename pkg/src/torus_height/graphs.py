"""Finite directed graphs, subgraphs, edge paths and their invariants.

A graph is a finite 1-complex: a set of vertices and a set of edges, each edge
carrying an initial vertex (``tail``) and a terminal vertex (``head``).  Ids are
opaque hashables (strings or integers in user input, tuples for cells created by
subdivision).  Graphs are immutable after construction; a subgraph is simply a
graph whose cells are contained in an ambient graph.

Degrees count a loop twice at its vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping

__all__ = [
    "GraphError",
    "Graph",
    "EdgePath",
    "ComponentInfo",
    "ComponentReport",
    "idkey",
    "euler_char",
    "boundary_vertices",
    "classify_components",
    "components",
    "core",
    "is_forest",
    "diameter",
    "ball_edge_count",
]

Direction = tuple[Hashable, int]


class GraphError(ValueError):
    """Structural error: dangling incidence, foreign cell, broken path."""


def idkey(x) -> tuple:
    """Total sort key over mixed ids (str, int, tuples thereof)."""
    if isinstance(x, bool):
        return (1, int(x))
    if isinstance(x, int):
        return (1, x)
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, tuple):
        return (3, tuple(idkey(y) for y in x))
    return (4, repr(x))


def _sorted(items: Iterable) -> tuple:
    return tuple(sorted(items, key=idkey))


class Graph:
    """Finite directed graph with incidence maps ``tail`` and ``head``.

    ``edges`` may be a mapping ``id -> (tail, head)`` or an iterable of
    ``(id, tail, head)`` triples.
    """

    __slots__ = ("_vertices", "_vset", "_tail", "_head", "_edges", "_hash", "_dirs")

    def __init__(self, vertices: Iterable = (), edges=()):
        if isinstance(edges, Mapping):
            triples = [(e, t, h) for e, (t, h) in edges.items()]
        else:
            triples = [tuple(x) for x in edges]
        vset = frozenset(vertices)
        tail, head = {}, {}
        for e, t, h in triples:
            if e in tail:
                raise GraphError(f"duplicate edge id {e!r}")
            if t not in vset or h not in vset:
                raise GraphError(f"edge {e!r} has an endpoint outside the vertex set")
            tail[e] = t
            head[e] = h
        self._vset = vset
        self._vertices = _sorted(vset)
        self._tail = tail
        self._head = head
        self._edges = _sorted(tail)
        self._hash = None
        self._dirs = None

    # -- basic access -------------------------------------------------
    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def edges(self) -> tuple:
        return self._edges

    def tail(self, e) -> Hashable:
        return self._tail[e]

    def head(self, e) -> Hashable:
        return self._head[e]

    def ends(self, e) -> tuple:
        return self._tail[e], self._head[e]

    def has_vertex(self, v) -> bool:
        return v in self._vset

    def has_edge(self, e) -> bool:
        return e in self._tail

    def edge_triples(self) -> tuple:
        return tuple((e, self._tail[e], self._head[e]) for e in self._edges)

    def is_empty(self) -> bool:
        return not self._vertices

    def __len__(self) -> int:
        return len(self._vertices) + len(self._edges)

    def degree(self, v) -> int:
        return len(self.directions(v))

    def directions(self, v) -> tuple:
        """Half-edges at ``v``: ``(e, +1)`` leaves along e, ``(e, -1)`` leaves against it."""
        if self._dirs is None:
            dirs: dict = {u: [] for u in self._vertices}
            for e in self._edges:
                dirs[self._tail[e]].append((e, 1))
                dirs[self._head[e]].append((e, -1))
            self._dirs = {u: tuple(ds) for u, ds in dirs.items()}
        return self._dirs[v]

    def origin(self, d: Direction):
        e, s = d
        return self._tail[e] if s > 0 else self._head[e]

    def far(self, d: Direction):
        e, s = d
        return self._head[e] if s > 0 else self._tail[e]

    # -- construction helpers ---------------------------------------------
    def subgraph(self, vertices: Iterable = (), edges: Iterable = (), close: bool = False) -> "Graph":
        """Subgraph on the given cells.  With ``close`` the endpoints of the
        edges are added automatically; otherwise they must be listed."""
        es = list(edges)
        vs = set(vertices)
        for v in vs:
            if v not in self._vset:
                raise GraphError(f"vertex {v!r} is not in the ambient graph")
        for e in es:
            if e not in self._tail:
                raise GraphError(f"edge {e!r} is not in the ambient graph")
            if close:
                vs.add(self._tail[e])
                vs.add(self._head[e])
        return Graph(vs, [(e, self._tail[e], self._head[e]) for e in es])

    def edge_subgraph(self, edges: Iterable) -> "Graph":
        return self.subgraph((), edges, close=True)

    def is_subgraph_of(self, other: "Graph") -> bool:
        if not self._vset <= other._vset:
            return False
        return all(e in other._tail and other.ends(e) == self.ends(e) for e in self._edges)

    def union(self, other: "Graph") -> "Graph":
        edges = dict((e, self.ends(e)) for e in self._edges)
        for e in other.edges:
            if e in edges and edges[e] != other.ends(e):
                raise GraphError(f"edge {e!r} has conflicting incidence")
            edges[e] = other.ends(e)
        return Graph(self._vset | other._vset, edges)

    def intersection(self, other: "Graph") -> "Graph":
        es = [e for e in self._edges if e in other._tail and other.ends(e) == self.ends(e)]
        return Graph(self._vset & other._vset, [(e, *self.ends(e)) for e in es])

    def without_edges(self, edges: Iterable) -> "Graph":
        drop = set(edges)
        return Graph(self._vset, [t for t in self.edge_triples() if t[0] not in drop])

    # -- identity ------------------------------------------------------
    def _key(self):
        return (frozenset(self._vset), frozenset(self.edge_triples()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._vset == other._vset and self._tail == other._tail and self._head == other._head

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self) -> str:
        es = ", ".join(f"{e!r}:{t!r}->{h!r}" for e, t, h in self.edge_triples())
        return f"Graph(V={list(self._vertices)!r}, E=[{es}])"


@dataclass(frozen=True)
class EdgePath:
    """An edge path: a base vertex and a sequence of ``(edge, ±1)`` steps.

    The empty path sits at ``start``.  Endpoints are resolved against a graph.
    """

    start: Hashable
    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def end(self, graph: Graph):
        v = self.start
        for e, s in self.steps:
            if graph.origin((e, s)) != v:
                raise GraphError(f"path step {(e, s)!r} does not start at {v!r}")
            v = graph.far((e, s))
        return v

    def vertices(self, graph: Graph) -> list:
        out = [self.start]
        for d in self.steps:
            out.append(graph.far(d))
        return out

    def check(self, graph: Graph) -> None:
        if not graph.has_vertex(self.start):
            raise GraphError(f"path base {self.start!r} is not a vertex")
        for e, s in self.steps:
            if not graph.has_edge(e) or s not in (1, -1):
                raise GraphError(f"bad path step {(e, s)!r}")
        self.end(graph)

    def is_reduced(self) -> bool:
        return all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(self.steps, self.steps[1:]))

    def reduced(self) -> "EdgePath":
        out: list = []
        for e, s in self.steps:
            if out and out[-1] == (e, -s):
                out.pop()
            else:
                out.append((e, s))
        return EdgePath(self.start, tuple(out))

    def inverse(self, graph: Graph) -> "EdgePath":
        return EdgePath(self.end(graph), tuple((e, -s) for e, s in reversed(self.steps)))

    def then(self, other: "EdgePath") -> "EdgePath":
        return EdgePath(self.start, self.steps + other.steps)

    def edge_set(self) -> frozenset:
        return frozenset(e for e, _ in self.steps)

    def tokens(self) -> list[str]:
        return [f"{e}{'+' if s > 0 else '-'}" for e, s in self.steps]

    @classmethod
    def from_tokens(cls, start, tokens: Iterable[str]) -> "EdgePath":
        steps = []
        for tok in tokens:
            if len(tok) < 2 or tok[-1] not in "+-":
                raise GraphError(f"bad path token {tok!r}; expected 'x+' or 'x-'")
            steps.append((tok[:-1], 1 if tok[-1] == "+" else -1))
        return cls(start, tuple(steps))


def euler_char(g: Graph) -> int:
    return len(g.vertices) - len(g.edges)


def boundary_vertices(ambient: Graph, h: Graph) -> frozenset:
    """Vertices of ``h`` where the ambient graph has strictly larger degree."""
    if not h.is_subgraph_of(ambient):
        raise GraphError("boundary requested for a graph that is not a subgraph")
    return frozenset(v for v in h.vertices if ambient.degree(v) > h.degree(v))


def components(g: Graph) -> list[Graph]:
    """Connected components, ordered by their smallest vertex."""
    seen: set = set()
    out = []
    for v in g.vertices:
        if v in seen:
            continue
        comp_v, comp_e = {v}, set()
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for d in g.directions(u):
                comp_e.add(d[0])
                w = g.far(d)
                if w not in comp_v:
                    comp_v.add(w)
                    queue.append(w)
        seen |= comp_v
        out.append(g.subgraph(comp_v, comp_e))
    return out


def _eccentricities(g: Graph) -> Iterator[int]:
    for v in g.vertices:
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for d in g.directions(u):
                w = g.far(d)
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        yield max(dist.values())


def diameter(g: Graph) -> int:
    """Largest edge-distance between two vertices in a common component (0 if empty)."""
    return max(_eccentricities(g), default=0)


def ball_edge_count(g: Graph, center, radius: int) -> int:
    """Number of edges having an endpoint at distance < ``radius`` from ``center``."""
    dist = {center: 0}
    queue = deque([center])
    edges = set()
    while queue:
        u = queue.popleft()
        if dist[u] >= radius:
            continue
        for d in g.directions(u):
            edges.add(d[0])
            w = g.far(d)
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return len(edges)


@dataclass(frozen=True)
class ComponentInfo:
    vertices: tuple
    edges: tuple
    chi: int
    is_tree: bool
    circle_free: bool
    diameter: int


@dataclass(frozen=True)
class ComponentReport:
    components: tuple
    is_forest: bool
    is_trivial: bool
    has_leaf: bool

    @property
    def diameters(self) -> tuple:
        return tuple(c.diameter for c in self.components)


def classify_components(g: Graph) -> ComponentReport:
    infos = []
    for comp in components(g):
        chi = euler_char(comp)
        infos.append(
            ComponentInfo(
                vertices=comp.vertices,
                edges=comp.edges,
                chi=chi,
                is_tree=chi == 1,
                circle_free=chi == 1,
                diameter=diameter(comp),
            )
        )
    return ComponentReport(
        components=tuple(infos),
        is_forest=all(c.is_tree for c in infos),
        is_trivial=not g.edges,
        has_leaf=any(g.degree(v) == 1 for v in g.vertices),
    )


def is_forest(g: Graph) -> bool:
    # forest iff chi equals the number of components
    return euler_char(g) == len(components(g))


def core(g: Graph) -> Graph:
    """Maximal subgraph without vertices of degree <= 1.

    Repeatedly strips leaves with their spurs and isolated vertices, so tree
    components vanish entirely.
    """
    deg = {v: g.degree(v) for v in g.vertices}
    alive_e = set(g.edges)
    alive_v = set(g.vertices)
    stack = [v for v, k in deg.items() if k <= 1]
    while stack:
        v = stack.pop()
        if v not in alive_v:
            continue
        alive_v.discard(v)
        for e, _ in g.directions(v):
            if e in alive_e:
                alive_e.discard(e)
                for w in g.ends(e):
                    if w in alive_v:
                        deg[w] -= 1
                        if deg[w] <= 1:
                            stack.append(w)
    return g.subgraph(alive_v, alive_e)
