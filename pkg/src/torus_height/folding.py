"""Stallings factorization of cellular maps and its consequences.

Every cellular map ``psi`` factors as ``theta o rho`` where ``rho`` is a
sequence of edge collapses and folds and ``theta`` is an immersion.  A move is
rank preserving when it is a homotopy equivalence (collapsing a non-loop, or
folding two edges with distinct far endpoints); ``psi`` is pi_1-injective
exactly when every move is.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from typing import Hashable, Sequence

from .graphs import EdgePath, Graph, GraphError, components, core, euler_char, idkey, is_forest
from .maps import (
    INFINITE,
    GraphMap,
    domain_filtration,
    generalized_compose,
    identity_map,
    subdivide_to_combinatorial,
)
from .words import Word, WordError, is_reduced, parse_word

__all__ = [
    "Collapse",
    "Fold",
    "FoldSequence",
    "Factorization",
    "fold_to_immersion",
    "is_pi1_injective",
    "homotopy_equivalence_oracle",
    "ImageTrace",
    "image_trace",
    "Unknown",
    "directed_height_general",
    "rose",
    "CoreGraph",
    "core_graph_of_words",
    "fiber_product",
]


@dataclass(frozen=True)
class Collapse:
    edge: Hashable
    rank_preserving: bool


@dataclass(frozen=True)
class Fold:
    edge: Hashable
    onto: Hashable
    reversed: bool
    rank_preserving: bool


@dataclass(frozen=True)
class FoldSequence:
    """Moves applied to the subdivided domain, with the resulting quotient map."""

    moves: tuple
    quotient: GraphMap

    @property
    def rank_preserving(self) -> bool:
        return all(mv.rank_preserving for mv in self.moves)

    def __len__(self) -> int:
        return len(self.moves)


@dataclass(frozen=True)
class Factorization:
    """``normal_form = theta o rho.quotient`` with ``theta`` an immersion."""

    normal_form: GraphMap
    rho: FoldSequence
    theta: GraphMap

    @property
    def pi1_injective(self) -> bool:
        return self.rho.rank_preserving

    def check(self) -> bool:
        """Cell-by-cell comparison of ``theta o rho`` with the normal form."""
        q, th, nf = self.rho.quotient, self.theta, self.normal_form
        for v in nf.domain.vertices:
            if th.vertex_images[q.vertex_images[v]] != nf.vertex_images[v]:
                return False
        for e in nf.domain.edges:
            if th.path_image(q.edge_images[e]).steps != nf.edge_images[e].steps:
                return False
        return True


class _Folder:
    """Mutable working copy of a combinatorial map being folded."""

    def __init__(self, m: GraphMap):
        self.codomain = m.codomain
        self.vimg = dict(m.vertex_images)
        self.edges = {}
        self.vrep = {v: v for v in m.domain.vertices}
        self.erep = {}
        for e in m.domain.edges:
            p = m.edge_images[e]
            t, h = m.domain.ends(e)
            step = p.steps[0] if p.steps else None
            self.edges[e] = [t, h, step]
            self.erep[e] = (e, 1)
        self.vertices = set(m.domain.vertices)
        self.moves: list = []

    def find(self, v):
        while self.vrep[v] != v:
            self.vrep[v] = self.vrep[self.vrep[v]]
            v = self.vrep[v]
        return v

    def _merge(self, keep, drop) -> None:
        self.vrep[drop] = keep
        self.vertices.discard(drop)
        for rec in self.edges.values():
            if rec[0] == drop:
                rec[0] = keep
            if rec[1] == drop:
                rec[1] = keep

    def _pick(self, a, b):
        return (a, b) if idkey(a) <= idkey(b) else (b, a)

    def collapse_all(self) -> None:
        for e in sorted(self.edges, key=idkey):
            rec = self.edges[e]
            if rec[2] is not None:
                continue
            t, h = rec[0], rec[1]
            del self.edges[e]
            self.erep[e] = (None, t)
            if t == h:
                self.moves.append(Collapse(e, False))
            else:
                keep, drop = self._pick(t, h)
                self._merge(keep, drop)
                self.moves.append(Collapse(e, True))

    def _dir_image(self, e, s):
        f, sg = self.edges[e][2]
        return (f, sg * s)

    def collisions(self) -> list:
        at: dict = {}
        for e in sorted(self.edges, key=idkey):
            t, h, _ = self.edges[e]
            at.setdefault(t, []).append((e, 1))
            at.setdefault(h, []).append((e, -1))
        out = []
        for v in sorted(at, key=idkey):
            seen = {}
            for d in at[v]:
                img = self._dir_image(*d)
                if img in seen:
                    out.append((seen[img], d))
                else:
                    seen[img] = d
        return out

    def fold(self, d1, d2) -> None:
        (e1, s1), (e2, s2) = d1, d2
        far1 = self.edges[e1][1] if s1 > 0 else self.edges[e1][0]
        far2 = self.edges[e2][1] if s2 > 0 else self.edges[e2][0]
        rev = s1 * s2 < 0
        del self.edges[e2]
        for k, (tgt, sg) in list(self.erep.items()):
            if tgt == e2:
                self.erep[k] = (e1, sg * (-1 if rev else 1))
        if far1 == far2:
            self.moves.append(Fold(e2, e1, rev, False))
        else:
            keep, drop = self._pick(far1, far2)
            self._merge(keep, drop)
            self.moves.append(Fold(e2, e1, rev, True))

    def run(self, rng: _random.Random | None = None) -> None:
        self.collapse_all()
        while True:
            cols = self.collisions()
            if not cols:
                return
            d1, d2 = cols[0] if rng is None else rng.choice(cols)
            self.fold(d1, d2)

    def result(self, nf: GraphMap) -> tuple[FoldSequence, GraphMap]:
        folded = Graph(self.vertices, [(e, t, h) for e, (t, h, _) in self.edges.items()])
        theta = GraphMap(
            folded,
            self.codomain,
            {v: self.vimg[v] for v in self.vertices},
            {e: EdgePath(self.vimg[t], (st,)) for e, (t, h, st) in self.edges.items()},
        )
        qv = {v: self.find(v) for v in nf.domain.vertices}
        qe = {}
        for e in nf.domain.edges:
            tgt, sg = self.erep[e]
            if tgt is None:
                qe[e] = EdgePath(qv[nf.domain.tail(e)], ())
            else:
                qe[e] = EdgePath(qv[nf.domain.tail(e)], ((tgt, sg),))
        quotient = GraphMap(nf.domain, folded, qv, qe)
        return FoldSequence(tuple(self.moves), quotient), theta


def fold_to_immersion(m: GraphMap, rng: _random.Random | None = None) -> Factorization:
    """Stallings factorization of a cellular map.

    The map is first subdivided to combinatorial normal form, then edges mapping
    to vertices are collapsed, then folds are applied until the map is locally
    injective.  Without ``rng`` the fold order is canonical (smallest vertex,
    then smallest edge); with ``rng`` a random admissible fold is taken each time.
    """
    nf, _ = subdivide_to_combinatorial(m)
    folder = _Folder(nf)
    folder.run(rng)
    rho, theta = folder.result(nf)
    return Factorization(nf, rho, theta)


def is_pi1_injective(m: GraphMap) -> bool:
    return fold_to_immersion(m).pi1_injective


def homotopy_equivalence_oracle(fact: Factorization) -> bool:
    """Whether the quotient induces a bijection on components preserving each chi.

    Computed from the quotient map alone, ignoring the recorded move flags.
    """
    q = fact.rho.quotient
    src = components(q.domain)
    tgt = components(q.codomain)
    if len(src) != len(tgt):
        return False
    hit = {}
    for comp in src:
        v = comp.vertices[0]
        w = q.vertex_images[v]
        idx = next(i for i, c in enumerate(tgt) if c.has_vertex(w))
        if idx in hit:
            return False
        hit[idx] = comp
    return all(euler_char(hit[i]) == euler_char(tgt[i]) for i in hit)


@dataclass(frozen=True)
class ImageTrace:
    """``A_0 = H`` and ``A_{i+1} = psi(A_i) ∩ H`` until stable."""

    images: tuple
    stabilization_index: int

    @property
    def stable(self) -> Graph:
        return self.images[-1]

    @property
    def stable_rank_positive(self) -> bool:
        return not is_forest(self.stable)


def image_trace(psi: GraphMap, H: Graph | None = None, cap: int | None = None) -> ImageTrace:
    H = psi.domain if H is None else H
    if cap is None:
        cap = len(H) + 1
    images = [H]
    while True:
        nxt = psi.image_subgraph(images[-1]).intersection(H)
        if nxt == images[-1]:
            return ImageTrace(tuple(images), len(images) - 1)
        if not nxt.is_subgraph_of(images[-1]) or len(images) > cap:
            raise RuntimeError("image trace failed to stabilise; nesting violated")
        images.append(nxt)


@dataclass(frozen=True)
class Unknown:
    """No verdict within ``cap`` iterations."""

    cap: int

    def __str__(self) -> str:
        return f"unknown({self.cap})"


def directed_height_general(psi: GraphMap, H: Graph | None = None, cap: int | None = None):
    """Least ``i`` such that ``theta_i^{-1}(H)`` is a forest, where
    ``psi^i = theta_i o rho_i`` is the Stallings factorization of the i-th
    partial iterate.

    Returns an integer, ``INFINITE`` when the pi_1-injective map keeps a circle
    of ``H`` inside ``H`` forever, or :class:`Unknown` once ``cap`` iterates
    have been examined without a verdict.
    """
    H = psi.domain if H is None else H
    F = psi.codomain
    if cap is None:
        cap = len(H) + 2
    injective = is_pi1_injective(psi)
    filt = domain_filtration(psi, H, require_immersion=False)
    invariant_circle = not is_forest(filt.d_infinity)
    if injective and invariant_circle:
        # a circle of D_inf survives every rho_i and lands in theta_i^{-1}(H)
        return INFINITE
    current = identity_map(F)
    for i in range(cap + 1):
        fact = fold_to_immersion(current)
        if is_forest(fact.theta.preimage(H)):
            return i
        current = generalized_compose(psi, current).map
    return Unknown(cap)


def rose(basis: Sequence[str], vertex="v") -> Graph:
    return Graph([vertex], [(x, vertex, vertex) for x in basis])


@dataclass(frozen=True)
class CoreGraph:
    """Folded based graph immersing into the rose on ``basis``."""

    graph: Graph
    immersion: GraphMap
    base: Hashable
    basis: tuple

    def read(self, word: Word):
        """Endpoint of the path spelling ``word`` from the base, or ``None``."""
        labels = {}
        for e in self.graph.edges:
            (x, s), = self.immersion.edge_images[e].steps
            labels[(self.graph.tail(e), (x, s))] = self.graph.head(e)
            labels[(self.graph.head(e), (x, -s))] = self.graph.tail(e)
        v = self.base
        for letter in word:
            v = labels.get((v, letter))
            if v is None:
                return None
        return v

    def contains(self, word: Word) -> bool:
        return self.read(word) == self.base

    @property
    def rank(self) -> int:
        return 1 - euler_char(self.graph) if self.graph.edges else 0


def core_graph_of_words(rank: int, words, basis: Sequence[str] | None = None) -> CoreGraph:
    """Stallings graph of the subgroup generated by ``words``.

    Words may be strings (upper case = inverse), token lists, or tuples of
    ``(generator, ±1)``.
    """
    if basis is None:
        basis = "abcdefghijklmnopqrstuvwxyz"[:rank]
    basis = tuple(basis)
    if len(basis) != rank:
        raise WordError("basis length does not match rank")
    R = rose(basis)
    parsed = []
    for w in words:
        pw = w if isinstance(w, tuple) else parse_word(w, basis)
        if not pw:
            raise WordError("empty word")
        if not is_reduced(pw):
            raise WordError(f"word {w!r} is not reduced")
        parsed.append(pw)
    vertices = [0]
    edges = []
    eimg = {}
    nxt = 1
    for i, w in enumerate(parsed):
        prev = 0
        for k, letter in enumerate(w):
            if k == len(w) - 1:
                cur = 0
            else:
                cur = nxt
                nxt += 1
                vertices.append(cur)
            edges.append(((i, k), prev, cur))
            eimg[(i, k)] = EdgePath("v", (letter,))
            prev = cur
    wedge = Graph(vertices, edges)
    m = GraphMap(wedge, R, {v: "v" for v in vertices}, eimg)
    fact = fold_to_immersion(m)
    base = fact.rho.quotient.vertex_images[0]
    return CoreGraph(fact.theta.domain, fact.theta, base, basis)


def fiber_product(alpha: GraphMap, beta: GraphMap):
    """Pullback of two immersions with a common codomain.

    Returns ``(graph, proj_alpha, proj_beta)``; vertices are pairs with equal
    images and edges pairs of edges with equal images (oriented along the
    first factor).
    """
    if alpha.codomain != beta.codomain:
        raise GraphError("fiber product needs a common codomain")
    a, _ = subdivide_to_combinatorial(alpha)
    b, _ = subdivide_to_combinatorial(beta)
    A, B = a.domain, b.domain
    vertices = [(u, w) for u in A.vertices for w in B.vertices if a.vertex_images[u] == b.vertex_images[w]]
    edges = []
    pa, pb = {}, {}
    for e in A.edges:
        (ge, se), = a.edge_images[e].steps
        for f in B.edges:
            (gf, sf), = b.edge_images[f].steps
            if ge != gf:
                continue
            if se == sf:
                edges.append(((e, f), (A.tail(e), B.tail(f)), (A.head(e), B.head(f))))
                pb[(e, f)] = (f, 1)
            else:
                edges.append(((e, f), (A.tail(e), B.head(f)), (A.head(e), B.tail(f))))
                pb[(e, f)] = (f, -1)
            pa[(e, f)] = (e, 1)
    P = Graph(vertices, edges)
    proj_a = GraphMap(P, A, {v: v[0] for v in vertices}, {k: EdgePath(P.tail(k)[0], (pa[k],)) for k in P.edges})
    proj_b = GraphMap(P, B, {v: v[1] for v in vertices}, {k: EdgePath(P.tail(k)[1], (pb[k],)) for k in P.edges})
    return P, proj_a, proj_b
