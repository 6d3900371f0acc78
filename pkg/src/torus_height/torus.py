"""Mapping tori of partial graph maps and the negative-immersions decision.

For ``psi: H -> F`` with ``H ⊆ F`` the mapping torus ``X`` has 1-skeleton ``F``
plus one horizontal edge ``t_v: v -> psi(v)`` per vertex of ``H`` and one
2-cell per edge ``e`` of ``H`` attached along ``e · t_{head e} · psi(e)^-1 ·
t_{tail e}^-1``.

``decide_negative_immersions`` returns either explicit constants
``(M, N, c)`` with ``chi(Y) <= -c |Y|_2`` for every collapsed immersion
``Y -> X`` without isolated edges, or a zero Euler characteristic subcomplex
witnessing failure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping

from .folding import core_graph_of_words, directed_height_general, fold_to_immersion, Unknown
from .graphs import (
    EdgePath,
    Graph,
    GraphError,
    boundary_vertices,
    classify_components,
    components,
    core,
    euler_char,
    idkey,
    is_forest,
)
from .maps import (
    INFINITE,
    GraphMap,
    domain_filtration,
    directed_height,
    subdivide_to_combinatorial,
)
from .words import format_word, multiply, invert, reduce_word

__all__ = [
    "VERTICAL",
    "HORIZONTAL",
    "TwoComplex",
    "GraphOfSpaces",
    "MappingTorus",
    "ComplexChecks",
    "ContractError",
    "NotPi1Injective",
    "NegativeImmersions",
    "MalnormalBound",
    "ZeroEulerWitness",
    "Undecided",
    "ReducibilityWitness",
    "build_mapping_torus",
    "complex_checks",
    "check_combinatorial_immersion",
    "compute_N",
    "malnormal_bound",
    "decide_negative_immersions",
    "invariant_core",
    "zero_euler_witness",
    "reducibility_witness",
]

VERTICAL = "vertical"
HORIZONTAL = "horizontal"


class ContractError(ValueError):
    """Operation called outside its precondition."""


class NotPi1Injective(ValueError):
    """The decision procedure only applies to pi_1-injective maps."""


class TwoComplex:
    """Combinatorial 2-complex with labelled (vertical/horizontal) edges.

    ``faces`` maps a face id to its closed, nonempty attaching path in the
    1-skeleton.  ``provenance`` optionally links cells to the cells of ``H``
    they arise from.
    """

    __slots__ = ("skeleton", "kinds", "faces", "provenance")

    def __init__(self, vertices, edges: Mapping, faces: Mapping, provenance: Mapping | None = None):
        self.skeleton = Graph(vertices, {e: (t, h) for e, (t, h, _) in edges.items()})
        self.kinds = {e: k for e, (_, _, k) in edges.items()}
        for e, k in self.kinds.items():
            if k not in (VERTICAL, HORIZONTAL):
                raise GraphError(f"edge {e!r} has unknown kind {k!r}")
        self.faces = dict(faces)
        for f, p in self.faces.items():
            p.check(self.skeleton)
            if not p.steps:
                raise GraphError(f"face {f!r} has an empty attaching path")
            if p.end(self.skeleton) != p.start:
                raise GraphError(f"attaching path of face {f!r} is not closed")
        self.provenance = dict(provenance or {})

    @property
    def vertices(self) -> tuple:
        return self.skeleton.vertices

    @property
    def edges(self) -> tuple:
        return self.skeleton.edges

    def edge_record(self, e) -> tuple:
        return (*self.skeleton.ends(e), self.kinds[e])

    def vertical_graph(self) -> Graph:
        return self.skeleton.subgraph(self.vertices, [e for e in self.edges if self.kinds[e] == VERTICAL])

    @property
    def chi(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def occurrences(self) -> Counter:
        occ = Counter({e: 0 for e in self.edges})
        for p in self.faces.values():
            for e, _ in p.steps:
                occ[e] += 1
        return occ

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwoComplex):
            return NotImplemented
        return (
            self.skeleton == other.skeleton
            and self.kinds == other.kinds
            and self.faces == other.faces
            and self.provenance == other.provenance
        )

    def __hash__(self):
        return hash(self.skeleton)

    def __repr__(self) -> str:
        return f"TwoComplex(V={len(self.vertices)}, E={len(self.edges)}, F={len(self.faces)}, chi={self.chi})"


@dataclass(frozen=True)
class GraphOfSpaces:
    """Graph-of-graphs decomposition with attaching maps per edge-space."""

    gamma: Graph
    vertex_spaces: Mapping
    edge_spaces: Mapping
    outgoing: Mapping
    incoming: Mapping

    @property
    def chi(self) -> int:
        return sum(euler_char(g) for g in self.vertex_spaces.values()) - sum(
            euler_char(g) for g in self.edge_spaces.values()
        )

    def outgoing_union(self, v) -> Graph:
        """``O_v``: union of images of outgoing edge-spaces inside ``Y_v``."""
        space = self.vertex_spaces[v]
        out = Graph()
        for ge in self.gamma.edges:
            if self.gamma.tail(ge) == v:
                out = out.union(self.outgoing[ge].image_subgraph())
        return space.subgraph(out.vertices, out.edges)

    def boundary(self, v) -> frozenset:
        return boundary_vertices(self.vertex_spaces[v], self.outgoing_union(v))


@dataclass(frozen=True)
class MappingTorus:
    psi: GraphMap
    H: Graph
    F: Graph
    complex: TwoComplex
    graph_of_spaces: GraphOfSpaces
    horizontal: Mapping
    face_of: Mapping

    @property
    def chi(self) -> int:
        return self.complex.chi


def horizontal_id(v):
    return ("t", v)


def face_id(e):
    return ("f", e)


def build_mapping_torus(psi: GraphMap, H: Graph | None = None, F: Graph | None = None) -> MappingTorus:
    H = psi.domain if H is None else H
    F = psi.codomain if F is None else F
    if not H.is_subgraph_of(F) or H != psi.domain or F != psi.codomain:
        raise GraphError("mapping torus needs psi: H -> F with H a subgraph of F")
    edges = {e: (F.tail(e), F.head(e), VERTICAL) for e in F.edges}
    horizontal = {}
    prov = {}
    for v in H.vertices:
        t = horizontal_id(v)
        if t in edges:
            raise GraphError(f"horizontal edge id {t!r} clashes with an edge of F")
        edges[t] = (v, psi.vertex_images[v], HORIZONTAL)
        horizontal[v] = t
        prov[t] = v
    faces = {}
    face_of = {}
    for e in H.edges:
        a, b = H.ends(e)
        img = psi.edge_images[e]
        steps = ((e, 1), (horizontal[b], 1)) + tuple((f, -s) for f, s in reversed(img.steps)) + ((horizontal[a], -1),)
        fid = face_id(e)
        faces[fid] = EdgePath(a, steps)
        face_of[e] = fid
        prov[fid] = e
    X = TwoComplex(F.vertices, edges, faces, prov)
    gamma = Graph(["v"], [("e", "v", "v")])
    gos = GraphOfSpaces(
        gamma=gamma,
        vertex_spaces={"v": F},
        edge_spaces={"e": H},
        outgoing={"e": GraphMap(H, F, {v: v for v in H.vertices}, {e: EdgePath(H.tail(e), ((e, 1),)) for e in H.edges})},
        incoming={"e": psi},
    )
    return MappingTorus(psi, H, F, X, gos, horizontal, face_of)


@dataclass(frozen=True)
class ComplexChecks:
    chi: int
    collapsed: bool
    free_faces: tuple
    isolated_edges: tuple
    is_point: bool
    connected: bool


def complex_checks(Y: TwoComplex) -> ComplexChecks:
    """A free face is an edge occurring exactly once among all attaching paths."""
    occ = Y.occurrences()
    free = tuple(sorted((e for e, k in occ.items() if k == 1), key=idkey))
    iso = tuple(sorted((e for e, k in occ.items() if k == 0), key=idkey))
    return ComplexChecks(
        chi=Y.chi,
        collapsed=not free,
        free_faces=free,
        isolated_edges=iso,
        is_point=len(Y.vertices) == 1 and not Y.edges and not Y.faces,
        connected=len(components(Y.skeleton)) == 1,
    )


def _corners(Y: TwoComplex, f) -> list:
    """Corners of face ``f`` as ``(vertex, incoming direction, outgoing direction, position)``."""
    p = Y.faces[f]
    n = len(p.steps)
    verts = p.vertices(Y.skeleton)
    out = []
    for k in range(n):
        e_in, s_in = p.steps[k - 1]
        out.append((verts[k], (e_in, -s_in), p.steps[k], k))
    return out


def check_combinatorial_immersion(Y: TwoComplex, X: TwoComplex, cells: Mapping) -> bool:
    """Whether ``cells`` (Y-cell -> X-cell) is a combinatorial immersion.

    Faces must map to faces with attaching paths matching step by step from the
    same starting position; edges keep their kind and orientation; the induced
    map on every vertex link is injective on directions and on corners.
    """
    Ys, Xs = Y.skeleton, X.skeleton
    for v in Y.vertices:
        if not Xs.has_vertex(cells.get(v)):
            return False
    for e in Y.edges:
        x = cells.get(e)
        if x is None or not Xs.has_edge(x) or Y.kinds[e] != X.kinds[x]:
            return False
        if (cells[Ys.tail(e)], cells[Ys.head(e)]) != Xs.ends(x):
            return False
    for f, p in Y.faces.items():
        g = cells.get(f)
        if g not in X.faces:
            return False
        q = X.faces[g]
        if cells[p.start] != q.start or len(p.steps) != len(q.steps):
            return False
        if any(cells[e] != x or s != t for (e, s), (x, t) in zip(p.steps, q.steps)):
            return False
    for v in Y.vertices:
        seen = set()
        for e, s in Ys.directions(v):
            img = (cells[e], s)
            if img in seen:
                return False
            seen.add(img)
    corner_seen = set()
    for f in Y.faces:
        for v, _, _, k in _corners(Y, f):
            key = (v, cells[f], k)
            if key in corner_seen:
                return False
            corner_seen.add(key)
    return True


def compute_N(F: Graph, M: int) -> int:
    """Edges in a radius-``M`` ball of the regular tree of degree ``max deg F``.

    Bounds the number of edges within distance ``M`` of a vertex in any graph
    immersing into ``F``.
    """
    if M < 0:
        raise ValueError("M must be non-negative")
    delta = max((F.degree(v) for v in F.vertices), default=0)
    total = sum(delta * (delta - 1) ** (k - 1) for k in range(1, M + 1))
    return max(1, total)


@dataclass(frozen=True)
class MalnormalBound:
    """Constant for the case where ``psi^{-1}(H)`` is a forest: ``c' = 1/(2 M3)``."""

    d: int
    M3: int
    c_prime: Fraction


@dataclass(frozen=True)
class NegativeImmersions:
    directed_height: int
    norm: int
    m: int
    M: int
    N: int
    c: Fraction
    diam_d_infinity: int
    malnormal: MalnormalBound | None = None
    immersion: bool = True

    @property
    def constants(self) -> tuple:
        out = (self.c,)
        if self.malnormal is not None:
            out += (self.malnormal.c_prime,)
        return out


@dataclass(frozen=True)
class ReducibilityWitness:
    """``psi^n(H') ⊆ g^-1 H' g`` for the free factor ``H'`` carried by an invariant core."""

    n: int
    base: Hashable
    generators: tuple
    g: tuple
    images: tuple
    proper: bool
    verified: bool
    subgraph: Graph = field(compare=False, default=None)

    def generator_strings(self) -> list[str]:
        return [format_word(w) for w in self.generators]


@dataclass(frozen=True)
class ZeroEulerWitness:
    directed_height: float
    Y: TwoComplex
    immersion: Mapping
    invariant_subgraph: Graph
    reducibility: ReducibilityWitness | None = None


@dataclass(frozen=True)
class Undecided:
    reason: str
    cap: int | None = None


def malnormal_bound(psi: GraphMap, H: Graph | None = None) -> MalnormalBound | None:
    """``c' = 1/(2 M3)`` with ``M3 = N(F, d)`` when ``psi^{-1}(H)`` is a forest.

    ``d`` is the largest diameter of a component of the preimage after
    subdividing so that ``psi`` is combinatorial.
    """
    H = psi.domain if H is None else H
    m2, _ = subdivide_to_combinatorial(psi)
    pre = m2.preimage(H)
    rep = classify_components(pre)
    if not rep.is_forest:
        return None
    d = max(rep.diameters, default=0)
    M3 = compute_N(psi.codomain, d)
    return MalnormalBound(d, M3, Fraction(1, 2 * M3))


def decide_negative_immersions(psi: GraphMap, H: Graph | None = None, F: Graph | None = None, cap: int | None = None):
    """Certificate for (or against) negative immersions of the mapping torus.

    Immersions use the domain filtration directly.  Other cellular maps must be
    pi_1-injective (else :class:`NotPi1Injective`) and go through iterated
    Stallings factorizations; a verdict not reached within ``cap`` iterates
    yields :class:`Undecided`.
    """
    H = psi.domain if H is None else H
    F = psi.codomain if F is None else F
    immersion = psi.is_immersion
    if immersion:
        filt = domain_filtration(psi, H)
        ht = directed_height(psi, H, filt)
    else:
        fact = fold_to_immersion(psi)
        if not fact.pi1_injective:
            bad = [mv for mv in fact.rho.moves if not mv.rank_preserving]
            raise NotPi1Injective(f"map is not pi1-injective: {len(bad)} rank-dropping move(s), first {bad[0]!r}")
        filt = domain_filtration(psi, H, require_immersion=False)
        ht = directed_height_general(psi, H, cap)
        if isinstance(ht, Unknown):
            return Undecided("no forest preimage found and no invariant circle detected", ht.cap)
    if ht == INFINITE:
        return zero_euler_witness(psi, H, F, _height=ht)
    nrm = max(1, filt.norm)
    m = filt.m
    M = filt.diam_d_infinity + nrm**m
    N = compute_N(F, M)
    c = Fraction(1, 2 * (m + 1) * nrm**m * N)
    return NegativeImmersions(
        directed_height=ht,
        norm=filt.norm,
        m=m,
        M=M,
        N=N,
        c=c,
        diam_d_infinity=filt.diam_d_infinity,
        malnormal=malnormal_bound(psi, H) if immersion else None,
        immersion=immersion,
    )


def _forward_invariant(psi: GraphMap, G: Graph) -> Graph:
    while True:
        vs = [v for v in G.vertices if G.has_vertex(psi.vertex_images[v])]
        vset = set(vs)
        es = [
            e
            for e in G.edges
            if set(G.ends(e)) <= vset and all(G.has_edge(f) for f, _ in psi.edge_images[e].steps)
        ]
        nxt = G.subgraph(vs, es)
        if nxt == G:
            return G
        G = nxt


def _stable_image(psi: GraphMap, G: Graph) -> Graph:
    while True:
        nxt = psi.image_subgraph(G)
        if nxt == G:
            return G
        G = nxt


def invariant_core(psi: GraphMap, H: Graph | None = None) -> Graph:
    """Largest leafless subgraph ``E`` of ``H`` with ``psi(E) = E``.

    Alternates between restricting to the forward-invariant part, taking the
    eventual image and stripping trees and hair, until nothing changes.
    """
    H = psi.domain if H is None else H
    G = domain_filtration(psi, H, require_immersion=False).d_infinity
    while True:
        nxt = core(_stable_image(psi, _forward_invariant(psi, G)))
        if nxt == G:
            return G
        G = nxt


def _component_cycle(psi: GraphMap, E: Graph) -> tuple[list, int]:
    comps = components(E)
    idx = {}
    for i, c in enumerate(comps):
        for v in c.vertices:
            idx[v] = i
    step = {i: idx[psi.vertex_images[c.vertices[0]]] for i, c in enumerate(comps)}
    cycle = [0]
    while step[cycle[-1]] != 0:
        cycle.append(step[cycle[-1]])
        if len(cycle) > len(comps):
            raise ContractError("psi does not permute the components of the invariant core")
    return [comps[i] for i in cycle], len(cycle)


def zero_euler_witness(psi: GraphMap, H: Graph | None = None, F: Graph | None = None, *, _height=None) -> ZeroEulerWitness:
    """Subcomplex ``Y ⊆ X`` with ``chi(Y) = 0``, collapsed and without isolated edges.

    ``Y`` is the mapping torus of ``psi`` restricted to one cycle of components
    of :func:`invariant_core`.  Every property is checked before returning.
    """
    H = psi.domain if H is None else H
    F = psi.codomain if F is None else F
    ht = _height
    if ht is None:
        ht = directed_height(psi, H) if psi.is_immersion else directed_height_general(psi, H)
    if ht != INFINITE:
        raise ContractError(f"zero_euler_witness needs infinite directed height (got {ht})")
    E = invariant_core(psi, H)
    if not E.edges:
        raise ContractError("no invariant circle found")
    cyc, _ = _component_cycle(psi, E)
    sub = cyc[0]
    for c in cyc[1:]:
        sub = sub.union(c)
    torus = build_mapping_torus(psi, H, F)
    X = torus.complex
    cells = {}
    edges = {}
    for v in sub.vertices:
        cells[v] = v
    for e in sub.edges:
        edges[e] = (*sub.ends(e), VERTICAL)
        cells[e] = e
    for v in sub.vertices:
        t = torus.horizontal[v]
        edges[t] = X.edge_record(t)
        cells[t] = t
    faces = {}
    for e in sub.edges:
        f = torus.face_of[e]
        faces[f] = X.faces[f]
        cells[f] = f
    Y = TwoComplex(sub.vertices, edges, faces, {k: X.provenance[k] for k in list(faces) + [torus.horizontal[v] for v in sub.vertices]})
    chk = complex_checks(Y)
    if not (chk.chi == 0 and chk.collapsed and not chk.isolated_edges and chk.connected):
        raise AssertionError(f"witness failed validation: {chk}")
    if not check_combinatorial_immersion(Y, X, cells):
        raise AssertionError("witness does not immerse into the mapping torus")
    red = None
    if psi.is_immersion or fold_to_immersion(psi).pi1_injective:
        red = reducibility_witness(psi, H, F, _height=ht, _core=E)
    return ZeroEulerWitness(ht, Y, cells, sub, red)


# -- words in pi_1(F, b) ----------------------------------------------------


class _Pi1:
    """Words for loops in ``F`` based at ``base`` using a BFS spanning tree."""

    def __init__(self, F: Graph, base):
        self.F = F
        self.base = base
        self.parent = {base: None}
        order = [base]
        for u in order:
            for d in F.directions(u):
                w = F.far(d)
                if w not in self.parent:
                    self.parent[w] = d
                    order.append(w)
        self.tree = {d[0] for d in self.parent.values() if d is not None}
        self.generators = tuple(e for e in F.edges if e not in self.tree and F.tail(e) in self.parent)

    def tree_path(self, v) -> EdgePath:
        """Path from the base to ``v`` inside the spanning tree."""
        steps = []
        while self.parent[v] is not None:
            d = self.parent[v]
            steps.append(d)
            v = self.F.origin(d)
        return EdgePath(self.base, tuple(reversed(steps)))

    def word(self, path: EdgePath) -> tuple:
        return reduce_word((e, s) for e, s in path.steps if e not in self.tree)


def _tree_paths(G: Graph, base) -> dict:
    parent = {base: None}
    order = [base]
    for u in order:
        for d in G.directions(u):
            w = G.far(d)
            if w not in parent:
                parent[w] = d
                order.append(w)

    def path(v) -> EdgePath:
        steps = []
        while parent[v] is not None:
            d = parent[v]
            steps.append(d)
            v = G.origin(d)
        return EdgePath(base, tuple(reversed(steps)))

    return {v: path(v) for v in parent}, {d[0] for d in parent.values() if d is not None}


def _inv(path: EdgePath, g: Graph) -> EdgePath:
    return path.inverse(g)


def reducibility_witness(psi: GraphMap, H: Graph | None = None, F: Graph | None = None, *, _height=None, _core=None) -> ReducibilityWitness:
    """Free factor ``H' = pi_1(C, b)`` of an invariant core component ``C`` with
    ``psi^n(H') ⊆ g^-1 H' g``, checked by membership in the Stallings graph of ``H'``.

    ``n`` is the period of ``C`` under ``psi`` (1 unless ``psi`` permutes several
    invariant components).  ``proper`` records whether ``H'`` is smaller than
    the fundamental group of the component of ``H`` containing it.
    """
    H = psi.domain if H is None else H
    F = psi.codomain if F is None else F
    ht = _height
    if ht is None:
        ht = directed_height(psi, H) if psi.is_immersion else directed_height_general(psi, H)
    if ht != INFINITE:
        raise ContractError(f"reducibility witness needs infinite directed height (got {ht})")
    if not psi.is_immersion and not fold_to_immersion(psi).pi1_injective:
        raise ContractError("reducibility witness needs a pi1-injective map")
    E = invariant_core(psi, H) if _core is None else _core
    cyc, n = _component_cycle(psi, E)
    C = cyc[0]
    b = C.vertices[0]
    pi = _Pi1(F, b)
    cpaths, ctree = _tree_paths(C, b)
    loops = []
    for e in C.edges:
        if e in ctree:
            continue
        t, h = C.ends(e)
        loops.append(cpaths[t].then(EdgePath(t, ((e, 1),))).then(_inv(cpaths[h], C)))
    gens = tuple(pi.word(lp) for lp in loops)
    # psi^n on loops; every iterate stays inside the invariant core
    def iterate(path: EdgePath) -> EdgePath:
        for _ in range(n):
            path = psi.path_image(path)
        return path

    bn = iterate(EdgePath(b, ())).start
    delta = pi.tree_path(bn)
    sigma = cpaths[bn]
    g = pi.word(sigma.then(_inv(delta, F)))
    images = tuple(pi.word(delta.then(iterate(lp)).then(_inv(delta, F))) for lp in loops)
    cg = core_graph_of_words(len(pi.generators), gens, basis=pi.generators)
    verified = all(cg.contains(multiply(g, w, invert(g))) for w in images)
    hcomp = next(c for c in components(H) if c.has_vertex(b))
    rank_c = 1 - euler_char(C)
    rank_h = 1 - euler_char(hcomp)
    return ReducibilityWitness(
        n=n,
        base=b,
        generators=gens,
        g=g,
        images=images,
        proper=rank_c < rank_h,
        verified=verified,
        subgraph=C,
    )
