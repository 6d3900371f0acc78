"""Cellular graph maps, generalized composition and the domain filtration.

A :class:`GraphMap` sends vertices to vertices and each edge to an edge path
between the images of its endpoints (an empty path collapses the edge).  For a
partial self-map ``psi: H -> F`` with ``H`` a subgraph of ``F``, the
combinatorial domains ``D_i`` of the iterates are computed by

    D_0 = F,   D_{i+1} = largest subgraph of {x in H : psi(x) in D_i},

which stabilises at ``D_inf``.  The directed height is the least ``i`` with
``D_{i+1}`` a forest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, NamedTuple

from .graphs import (
    EdgePath,
    Graph,
    GraphError,
    classify_components,
    diameter,
    idkey,
    is_forest,
)

__all__ = [
    "MapError",
    "NotAnImmersion",
    "GraphMap",
    "MapFlags",
    "Piece",
    "Mid",
    "Subdivision",
    "identity_map",
    "validate_map",
    "subdivide_to_combinatorial",
    "generalized_compose",
    "ComposeResult",
    "DomainFiltration",
    "domain_filtration",
    "directed_height",
    "Fan",
    "fan_from_edge",
    "norm",
    "INFINITE",
]

INFINITE = float("inf")


class MapError(GraphError):
    """A map whose edge images do not match its vertex images."""


class NotAnImmersion(ValueError):
    """Raised by immersion-only operations; route the map through folding."""


class Piece(NamedTuple):
    """Edge created by subdividing ``edge``; ``k`` counts from its tail."""

    edge: Hashable
    k: int


class Mid(NamedTuple):
    """Vertex created inside ``edge`` after ``k`` pieces."""

    edge: Hashable
    k: int


class GraphMap:
    """Cellular map ``domain -> codomain``."""

    __slots__ = ("domain", "codomain", "vertex_images", "edge_images", "_flags")

    def __init__(self, domain: Graph, codomain: Graph, vertex_images: Mapping, edge_images: Mapping):
        self.domain = domain
        self.codomain = codomain
        self.vertex_images = dict(vertex_images)
        imgs = {}
        for e, p in edge_images.items():
            if not isinstance(p, EdgePath):
                p = EdgePath(self.vertex_images.get(domain.tail(e)), tuple(p))
            imgs[e] = p
        self.edge_images = imgs
        self._flags = None
        self._check()

    def _check(self) -> None:
        for v in self.domain.vertices:
            if v not in self.vertex_images:
                raise MapError(f"vertex {v!r} has no image")
            if not self.codomain.has_vertex(self.vertex_images[v]):
                raise MapError(f"image of vertex {v!r} is not in the codomain")
        for e in self.domain.edges:
            if e not in self.edge_images:
                raise MapError(f"edge {e!r} has no image")
            p = self.edge_images[e]
            t, h = self.domain.ends(e)
            if p.start != self.vertex_images[t]:
                raise MapError(f"image of edge {e!r} does not start at the image of its tail")
            try:
                p.check(self.codomain)
                end = p.end(self.codomain)
            except GraphError as exc:
                raise MapError(f"image of edge {e!r}: {exc}") from None
            if end != self.vertex_images[h]:
                raise MapError(f"image of edge {e!r} does not end at the image of its head")

    # -- flags ---------------------------------------------------------
    @property
    def flags(self) -> "MapFlags":
        if self._flags is None:
            self._flags = _compute_flags(self)
        return self._flags

    @property
    def is_combinatorial(self) -> bool:
        return self.flags.combinatorial

    @property
    def is_immersion(self) -> bool:
        return self.flags.immersion

    # -- images --------------------------------------------------------
    def direction_image(self, d):
        """Image of a half-edge: first step of the edge image, read from ``d``'s origin."""
        e, s = d
        p = self.edge_images[e]
        if not p.steps:
            return None
        if s > 0:
            return p.steps[0]
        le, ls = p.steps[-1]
        return (le, -ls)

    def path_image(self, path: EdgePath) -> EdgePath:
        steps: list = []
        for e, s in path.steps:
            img = self.edge_images[e].steps
            if s > 0:
                steps.extend(img)
            else:
                steps.extend((f, -t) for f, t in reversed(img))
        return EdgePath(self.vertex_images[path.start], tuple(steps))

    def edge_path(self, e) -> EdgePath:
        return self.edge_images[e]

    def image_subgraph(self, sub: Graph | None = None) -> Graph:
        sub = self.domain if sub is None else sub
        vs = {self.vertex_images[v] for v in sub.vertices}
        es = {f for e in sub.edges for f, _ in self.edge_images[e].steps}
        return self.codomain.subgraph(vs, es, close=True)

    def restrict(self, sub: Graph) -> "GraphMap":
        return GraphMap(
            sub,
            self.codomain,
            {v: self.vertex_images[v] for v in sub.vertices},
            {e: self.edge_images[e] for e in sub.edges},
        )

    def with_codomain(self, codomain: Graph) -> "GraphMap":
        return GraphMap(self.domain, codomain, self.vertex_images, self.edge_images)

    def preimage(self, sub: Graph) -> Graph:
        """Largest subgraph of the domain mapping into ``sub``.

        For a combinatorial map this is the whole point-set preimage.
        """
        vs = [v for v in self.domain.vertices if sub.has_vertex(self.vertex_images[v])]
        vset = set(vs)
        es = [
            e
            for e in self.domain.edges
            if set(self.domain.ends(e)) <= vset and all(sub.has_edge(f) for f, _ in self.edge_images[e].steps)
        ]
        return self.domain.subgraph(vs, es)

    def norm(self) -> int:
        return max((len(p) for p in self.edge_images.values()), default=1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphMap):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.vertex_images == other.vertex_images
            and self.edge_images == other.edge_images
        )

    def __hash__(self):
        return hash((self.domain, self.codomain))

    def __repr__(self) -> str:
        imgs = ", ".join(f"{e!r}->{' '.join(p.tokens()) or '@' + repr(p.start)}" for e, p in sorted(self.edge_images.items(), key=lambda kv: idkey(kv[0])))
        return f"GraphMap({imgs})"


def identity_map(g: Graph, codomain: Graph | None = None) -> GraphMap:
    return GraphMap(
        g,
        g if codomain is None else codomain,
        {v: v for v in g.vertices},
        {e: EdgePath(g.tail(e), ((e, 1),)) for e in g.edges},
    )


@dataclass(frozen=True)
class MapFlags:
    cellular: bool
    combinatorial: bool
    immersion: bool


def _compute_flags(m: GraphMap) -> MapFlags:
    combinatorial = all(len(p) == 1 for p in m.edge_images.values())
    immersion = all(len(p) >= 1 and p.is_reduced() for p in m.edge_images.values())
    if immersion:
        for v in m.domain.vertices:
            seen = set()
            for d in m.domain.directions(v):
                img = m.direction_image(d)
                if img in seen:
                    immersion = False
                    break
                seen.add(img)
            if not immersion:
                break
    return MapFlags(cellular=True, combinatorial=combinatorial, immersion=immersion)


def validate_map(m: GraphMap) -> MapFlags:
    """Flags ``cellular``, ``combinatorial`` and ``immersion``.

    Endpoint mismatches are rejected when the map is constructed, so any
    existing map is cellular.
    """
    m._check()
    return m.flags


@dataclass(frozen=True)
class Subdivision:
    """Correspondence between a subdivided graph and the original.

    ``pieces[e]`` lists the edges replacing ``e`` from tail to head (a single
    entry ``e`` when unchanged).  ``collapsing`` holds edges whose image is a
    vertex.
    """

    pieces: Mapping
    collapsing: frozenset = frozenset()

    def parent(self, new_edge):
        return new_edge.edge if isinstance(new_edge, Piece) else new_edge


def subdivide_to_combinatorial(m: GraphMap, ambient: Graph | None = None):
    """Subdivide the domain so that every edge maps to one edge or one vertex.

    Returns ``(m2, sub)`` or, when ``ambient`` is given (a graph containing
    ``m.domain``), ``(m2, ambient2, sub)`` where ``ambient2`` carries the same
    subdivision.  Edges with image length 0 or 1 are left alone.
    """
    dom = m.domain
    vertices = list(dom.vertices)
    edges = []
    vimg = dict(m.vertex_images)
    eimg = {}
    pieces = {}
    replace = {}
    collapsing = set()
    for e in dom.edges:
        p = m.edge_images[e]
        t, h = dom.ends(e)
        if len(p) <= 1:
            edges.append((e, t, h))
            eimg[e] = p
            pieces[e] = (e,)
            if not p.steps:
                collapsing.add(e)
            continue
        n = len(p)
        mids = [Mid(e, k) for k in range(1, n)]
        chain = [t, *mids, h]
        vertices.extend(mids)
        here = p.start
        ps = []
        for k, step in enumerate(p.steps):
            pe = Piece(e, k)
            edges.append((pe, chain[k], chain[k + 1]))
            eimg[pe] = EdgePath(here, (step,))
            here = m.codomain.far(step)
            vimg[chain[k + 1]] = here
            ps.append(pe)
        pieces[e] = tuple(ps)
        replace[e] = (mids, [(pe, chain[k], chain[k + 1]) for k, pe in enumerate(ps)])
    new_dom = Graph(vertices, edges)
    m2 = GraphMap(new_dom, m.codomain, vimg, eimg)
    sub = Subdivision(pieces, frozenset(collapsing))
    if ambient is None:
        return m2, sub
    amb_v = list(ambient.vertices)
    amb_e = []
    for e, t, h in ambient.edge_triples():
        if e in replace:
            mids, trip = replace[e]
            amb_v.extend(mids)
            amb_e.extend(trip)
        else:
            amb_e.append((e, t, h))
    return m2, Graph(amb_v, amb_e), sub


@dataclass(frozen=True)
class ComposeResult:
    """``beta . alpha`` on the preimage ``alpha^{-1}(dom beta)``.

    ``map`` has as domain the preimage inside the subdivided domain of
    ``alpha``; ``subdivided_domain`` is that whole subdivided domain (and
    ``subdivided_ambient`` the subdivided ambient graph when one was passed).
    """

    map: GraphMap
    subdivided_domain: Graph
    subdivision: Subdivision
    subdivided_ambient: Graph | None = None

    @property
    def domain(self) -> Graph:
        return self.map.domain


def generalized_compose(beta: GraphMap, alpha: GraphMap, ambient: Graph | None = None) -> ComposeResult:
    """Partial composition ``beta o alpha|_{alpha^{-1}(dom beta)}``.

    Computed after subdividing ``alpha`` to combinatorial normal form, where the
    point-set preimage of a subgraph is a subgraph.
    """
    if not beta.domain.is_subgraph_of(alpha.codomain):
        raise MapError("domain of beta is not a subgraph of the codomain of alpha")
    if ambient is None:
        a2, sub = subdivide_to_combinatorial(alpha)
        amb2 = None
    else:
        a2, amb2, sub = subdivide_to_combinatorial(alpha, ambient)
    pre = a2.preimage(beta.domain)
    comp = GraphMap(
        pre,
        beta.codomain,
        {v: beta.vertex_images[a2.vertex_images[v]] for v in pre.vertices},
        {e: beta.path_image(a2.edge_images[e]) for e in pre.edges},
    )
    return ComposeResult(comp, a2.domain, sub, amb2)


def norm(psi: GraphMap) -> int:
    """Longest edge image; an edgeless domain has norm 1."""
    if not psi.domain.edges:
        return 1
    return max(len(p) for p in psi.edge_images.values())


@dataclass(frozen=True)
class DomainFiltration:
    """Nested combinatorial domains ``D_0 = F ⊇ D_1 = H ⊇ ... ⊇ D_p = D_inf``."""

    domains: tuple
    stabilization_index: int
    d_infinity: Graph
    strata: tuple
    m: int
    norm: int
    diam_d_infinity: int
    stratum_of: Mapping = field(default_factory=dict)

    def D(self, i: int) -> Graph:
        return self.domains[min(i, len(self.domains) - 1)]


def _check_partial_self_map(psi: GraphMap, H: Graph | None) -> Graph:
    H = psi.domain if H is None else H
    if H != psi.domain:
        raise GraphError("H must be the domain of psi")
    if not H.is_subgraph_of(psi.codomain):
        raise GraphError("H is not a subgraph of the codomain")
    return H


def _filtration_step(psi: GraphMap, H: Graph, D: Graph) -> Graph:
    vs = [v for v in H.vertices if D.has_vertex(psi.vertex_images[v])]
    es = [e for e in H.edges if all(D.has_edge(f) for f, _ in psi.edge_images[e].steps)]
    vset = set(vs)
    es = [e for e in es if set(H.ends(e)) <= vset]
    return H.subgraph(vs, es)


def domain_filtration(psi: GraphMap, H: Graph | None = None, *, require_immersion: bool = True) -> DomainFiltration:
    """Compute ``D_i`` until it stabilises, with strata, ``m`` and ``||psi||``."""
    H = _check_partial_self_map(psi, H)
    if require_immersion and not psi.is_immersion:
        raise NotAnImmersion("domain_filtration needs an immersion; use folding.directed_height_general")
    domains = [psi.codomain, H]
    while True:
        nxt = _filtration_step(psi, H, domains[-1])
        if nxt == domains[-1]:
            break
        domains.append(nxt)
    p = len(domains) - 1
    d_inf = domains[-1]
    strata = []
    stratum_of = {}
    for i in range(1, p):
        Di, Dn = domains[i], domains[i + 1]
        es = [e for e in Di.edges if not Dn.has_edge(e)]
        strata.append(Di.edge_subgraph(es))
        for e in es:
            stratum_of[e] = i
    m = max((i for i, s in enumerate(strata, start=1) if s.edges), default=0)
    return DomainFiltration(
        domains=tuple(domains),
        stabilization_index=p,
        d_infinity=d_inf,
        strata=tuple(strata),
        m=m,
        norm=norm(psi),
        diam_d_infinity=diameter(d_inf),
        stratum_of=stratum_of,
    )


def directed_height(psi: GraphMap, H: Graph | None = None, filtration: DomainFiltration | None = None):
    """Least ``i`` with ``psi^{-i}(H)`` a forest, or ``INFINITE``."""
    filt = domain_filtration(psi, H) if filtration is None else filtration
    for i in range(0, filt.stabilization_index + 1):
        if is_forest(filt.D(i + 1)):
            return i
    return INFINITE


@dataclass(frozen=True)
class Fan:
    """Iterated images of one edge of ``H``.

    ``rims[0]`` is the edge itself and ``rims[j+1] = psi(rims[j])``; the last
    rim leaves ``H`` unless the fan is ``infinite``.
    """

    edge: Hashable
    rims: tuple
    length: int
    infinite: bool


def fan_from_edge(psi: GraphMap, H: Graph | None, e, max_len: int | None = None) -> Fan:
    H = _check_partial_self_map(psi, H)
    if not H.has_edge(e):
        raise GraphError(f"edge {e!r} is not in H")
    if max_len is None:
        max_len = domain_filtration(psi, H, require_immersion=False).stabilization_index + 1
    rim = EdgePath(H.tail(e), ((e, 1),))
    rims = [rim]
    length = 0
    while all(H.has_edge(f) for f, _ in rim.steps) and H.has_vertex(rim.start):
        length += 1
        if length >= max_len:
            return Fan(e, tuple(rims), length, True)
        rim = psi.path_image(rim)
        rims.append(rim)
    return Fan(e, tuple(rims), length, False)


def component_diameters(g: Graph) -> tuple:
    return classify_components(g).diameters
