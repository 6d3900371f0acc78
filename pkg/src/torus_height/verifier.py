"""Independent checks of the decision procedure on small instances.

* :func:`brute_force_preimage` computes ``psi^{-i}(H)`` literally by iterated
  subdivision, as a check on the domain filtration.
* :func:`audit_instance` enumerates every collapsed immersion ``Y -> X`` with
  at most ``K`` 2-cells and checks the Euler characteristic bound, the
  splitting bound and the graph-of-spaces structure of each ``Y``.
* :func:`rose_corpus` lists all immersions of sub-roses with short images up
  to relabelling and inverting petals.
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Iterator

from .enumeration import Enumerator, State, state_to_complex
from .folding import rose
from .graphs import EdgePath, Graph, boundary_vertices, classify_components, components, euler_char
from .maps import INFINITE, GraphMap, Mid, Piece, generalized_compose, identity_map, subdivide_to_combinatorial
from .serialize import complex_to_json, rational_to_json
from .torus import (
    HORIZONTAL,
    VERTICAL,
    GraphOfSpaces,
    MappingTorus,
    NegativeImmersions,
    TwoComplex,
    build_mapping_torus,
    check_combinatorial_immersion,
    complex_checks,
    decide_negative_immersions,
)
from .words import format_word

__all__ = [
    "PreimageReport",
    "brute_force_preimage",
    "origin_cell",
    "decompose",
    "StructureReport",
    "structure_checks",
    "YRecord",
    "AuditReport",
    "PreconditionError",
    "audit_instance",
    "check_isolated_edge_extension",
    "enumerate_immersions",
    "ImmersionInstance",
    "CorpusInstance",
    "rose_corpus",
    "RetryError",
    "random_instance",
    "random_cellular_map",
]


class PreconditionError(ValueError):
    """Audit requested for an instance without a negative-immersions certificate."""


class RetryError(RuntimeError):
    """Rejection sampling ran out of attempts."""


# -- brute-force preimages --------------------------------------------------


def origin_cell(x):
    """Original cell of a (possibly repeatedly) subdivided cell id."""
    while isinstance(x, (Piece, Mid)):
        x = x.edge
    return x


@dataclass(frozen=True)
class PreimageReport:
    i: int
    is_forest: bool
    preimage: Graph
    largest_subgraph: Graph


def brute_force_preimage(psi: GraphMap, H: Graph | None = None, i: int = 1, cap: int = 8) -> PreimageReport:
    """``Z = psi^{-i}(H)`` by ``i`` rounds of subdivide-and-restrict.

    ``largest_subgraph`` is the largest subgraph of ``H`` whose closed cells
    lie entirely in ``Z``; an edge qualifies when no piece of it was ever
    discarded.
    """
    H = psi.domain if H is None else H
    if i < 0 or i > cap:
        raise ValueError(f"iteration count {i} outside [0, {cap}]")
    cur = identity_map(H, psi.codomain)
    broken = set()
    for _ in range(i):
        res = generalized_compose(psi, cur)
        kept = res.map.domain
        for e in res.subdivided_domain.edges:
            if not kept.has_edge(e):
                broken.add(origin_cell(e))
        cur = res.map
    m2, _ = subdivide_to_combinatorial(cur)
    Z = m2.preimage(H)
    for e in m2.domain.edges:
        if not Z.has_edge(e):
            broken.add(origin_cell(e))
    seen = {origin_cell(e) for e in Z.edges}
    es = [e for e in H.edges if e in seen and e not in broken]
    vs = [v for v in H.vertices if Z.has_vertex(v)]
    largest = H.subgraph(vs, es)
    return PreimageReport(i, classify_components(Z).is_forest, Z, largest)


# -- graph-of-spaces structure of an enumerated Y ---------------------------


def decompose(Y: TwoComplex) -> tuple[GraphOfSpaces, dict]:
    """Vertex-spaces (components of the vertical graph) and edge-spaces.

    An edge-space has the horizontal edges as vertices and the 2-cells as
    edges.  Every 2-cell must have the shape ``e · t · p^-1 · s^-1`` with
    ``e`` vertical, ``t, s`` horizontal and ``p`` vertical.  Returns the
    decomposition and a table of which vertex-space each vertex of ``Y`` lies
    in.
    """
    vert = Y.vertical_graph()
    vspaces = components(vert)
    where = {}
    for i, c in enumerate(vspaces):
        for v in c.vertices:
            where[v] = i
    horiz = [e for e in Y.edges if Y.kinds[e] == HORIZONTAL]
    ends = {}
    bottoms = {}
    tops = {}
    for f, p in Y.faces.items():
        st = p.steps
        if len(st) < 3 or Y.kinds[st[0][0]] != VERTICAL or st[0][1] != 1:
            raise ValueError(f"2-cell {f!r} does not start with a positive vertical edge")
        (t, ts), (s, ss) = st[1], st[-1]
        if Y.kinds[t] != HORIZONTAL or ts != 1 or Y.kinds[s] != HORIZONTAL or ss != -1:
            raise ValueError(f"2-cell {f!r} is not bounded by two horizontal edges")
        middle = st[2:-1]
        if any(Y.kinds[e] != VERTICAL for e, _ in middle):
            raise ValueError(f"2-cell {f!r} has a horizontal edge in its top")
        ends[f] = (s, t)
        bottoms[f] = st[0][0]
        tops[f] = EdgePath(Y.skeleton.head(s), tuple((e, -sg) for e, sg in reversed(middle)))
    espace_all = Graph(horiz, [(f, s, t) for f, (s, t) in ends.items()])
    espaces = components(espace_all)
    gamma_e = []
    outgoing, incoming = {}, {}
    for k, es in enumerate(espaces):
        t0 = es.vertices[0]
        src = where[Y.skeleton.tail(t0)]
        dst = where[Y.skeleton.head(t0)]
        gamma_e.append((k, src, dst))
        outgoing[k] = GraphMap(
            es,
            vspaces[src],
            {t: Y.skeleton.tail(t) for t in es.vertices},
            {f: EdgePath(Y.skeleton.tail(es.tail(f)), ((bottoms[f], 1),)) for f in es.edges},
        )
        incoming[k] = GraphMap(
            es,
            vspaces[dst],
            {t: Y.skeleton.head(t) for t in es.vertices},
            {f: tops[f] for f in es.edges},
        )
    gamma = Graph(range(len(vspaces)), gamma_e)
    gos = GraphOfSpaces(
        gamma=gamma,
        vertex_spaces=dict(enumerate(vspaces)),
        edge_spaces=dict(enumerate(espaces)),
        outgoing=outgoing,
        incoming=incoming,
    )
    return gos, where


@dataclass(frozen=True)
class StructureReport:
    """Structural properties every collapsed immersion into a mapping torus has."""

    outgoing_embeddings: bool
    outgoing_disjoint: bool
    covered_by_incoming: bool
    edge_spaces_leafless: bool
    vertex_spaces_leafless: bool
    no_trivial_spaces: bool
    incoming_immersions: bool
    vertex_spaces_chi_nonpositive: bool
    chi_formula: bool

    @property
    def ok(self) -> bool:
        return all(getattr(self, k) for k in self.__dataclass_fields__)

    def failed(self) -> list[str]:
        return [k for k in self.__dataclass_fields__ if not getattr(self, k)]


def _leafless(g: Graph) -> bool:
    return all(g.degree(v) != 1 for v in g.vertices)


def structure_checks(Y: TwoComplex, gos: GraphOfSpaces) -> StructureReport:
    emb = True
    for k, m in gos.outgoing.items():
        vi = list(m.vertex_images.values())
        ei = [p.steps for p in m.edge_images.values()]
        if len(set(vi)) != len(vi) or len(set(ei)) != len(ei) or any(len(s) != 1 for s in ei):
            emb = False
    disjoint = True
    for v in gos.vertex_spaces:
        seen = set()
        for k, ge in enumerate(gos.gamma.edges):
            if gos.gamma.tail(ge) != v:
                continue
            img = set(gos.outgoing[ge].vertex_images.values())
            if seen & img:
                disjoint = False
            seen |= img
    covered = True
    for v, space in gos.vertex_spaces.items():
        hit = set()
        for ge in gos.gamma.edges:
            if gos.gamma.head(ge) == v:
                for p in gos.incoming[ge].edge_images.values():
                    hit.update(e for e, _ in p.steps)
        if not set(space.edges) <= hit:
            covered = False
    trivial = any(not g.edges for g in gos.vertex_spaces.values()) or any(not g.edges for g in gos.edge_spaces.values())
    return StructureReport(
        outgoing_embeddings=emb,
        outgoing_disjoint=disjoint,
        covered_by_incoming=covered,
        edge_spaces_leafless=all(_leafless(g) for g in gos.edge_spaces.values()),
        vertex_spaces_leafless=all(_leafless(g) for g in gos.vertex_spaces.values()),
        no_trivial_spaces=not trivial,
        incoming_immersions=all(m.is_immersion for m in gos.incoming.values()),
        vertex_spaces_chi_nonpositive=all(euler_char(g) <= 0 for g in gos.vertex_spaces.values()),
        chi_formula=gos.chi == Y.chi,
    )


# -- enumeration and audit --------------------------------------------------


@dataclass(frozen=True)
class ImmersionInstance:
    """An enumerated ``Y`` with its cell map into ``X`` and canonical code."""

    Y: TwoComplex
    cells: dict
    code: str
    n_isolated: int = 0


def enumerate_immersions(torus: MappingTorus, K: int, *, max_isolated: int = 0) -> Iterator[ImmersionInstance]:
    """Every connected collapsed immersion ``Y -> X`` with ``1 <= |Y|_2 <= K``,
    once per isomorphism class.

    With ``max_isolated > 0`` up to that many edges on no 2-cell are allowed.
    """
    if K < 1:
        return
    en = Enumerator(torus, K, max_isolated)
    for st in en.run():
        Y, cells = state_to_complex(en.sk, st)
        yield ImmersionInstance(Y, cells, st.code(en.sk.D).hex(), st.n_isolated)


@dataclass(frozen=True)
class YRecord:
    faces: int
    chi: int
    chi_O: int | None
    vertices: int
    edges: int
    isolated_edges: int
    bound_ok: bool
    splitting_ok: bool | None
    structure_ok: bool | None
    boundary_ok: bool | None
    malnormal_ok: bool | None
    code: str

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class AuditReport:
    name: str
    K: int
    c: Fraction
    c_prime: Fraction | None
    isolated_edges_allowed: int
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    elapsed: float = 0.0
    enumerated_states: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def count(self) -> int:
        return len(self.records)

    @property
    def max_faces(self) -> int:
        return max((r.faces for r in self.records), default=0)

    def counts_by_faces(self) -> dict:
        out = {}
        for r in self.records:
            out[r.faces] = out.get(r.faces, 0) + 1
        return dict(sorted(out.items()))

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "K": self.K,
            "c": rational_to_json(self.c),
            "c_prime": None if self.c_prime is None else rational_to_json(self.c_prime),
            "isolated_edges_allowed": self.isolated_edges_allowed,
            "count": self.count,
            "max_faces": self.max_faces,
            "counts_by_faces": {str(k): v for k, v in self.counts_by_faces().items()},
            "records": [r.to_json() for r in sorted(self.records, key=lambda r: (r.faces, r.code))],
            "failures": self.failures,
            "ok": self.ok,
        }
        if include_timing:
            out["elapsed"] = self.elapsed
            out["enumerated_states"] = self.enumerated_states
        return out


def _audit_one(inst: ImmersionInstance, torus: MappingTorus, c: Fraction, c_prime: Fraction | None, immersion: bool):
    Y = inst.Y
    chk = complex_checks(Y)
    problems = []
    if not chk.collapsed:
        problems.append("not collapsed")
    if not chk.connected:
        problems.append("not connected")
    if inst.n_isolated == 0 and chk.isolated_edges:
        problems.append("isolated edges")
    if not check_combinatorial_immersion(Y, torus.complex, inst.cells):
        problems.append("not a combinatorial immersion")
    size = Y.n_faces
    bound_ok = Fraction(chk.chi) <= -c * size
    if not bound_ok:
        problems.append(f"chi(Y) = {chk.chi} > -c |Y|_2 = {-c * size}")
    mal_ok = None
    if c_prime is not None:
        mal_ok = Fraction(chk.chi) <= -c_prime * size
        if not mal_ok:
            problems.append(f"chi(Y) = {chk.chi} > -c' |Y|_2 = {-c_prime * size}")
    chi_O = split_ok = struct_ok = bnd_ok = None
    if inst.n_isolated == 0:
        gos, _ = decompose(Y)
        chi_O = sum(euler_char(gos.outgoing_union(v)) for v in gos.vertex_spaces)
        split_ok = Fraction(chi_O) >= Fraction(chk.chi) / c
        if not split_ok:
            problems.append(f"chi(O_Y) = {chi_O} < chi(Y)/c = {Fraction(chk.chi) / c}")
        if immersion:
            rep = structure_checks(Y, gos)
            struct_ok = rep.ok
            if not struct_ok:
                problems.append(f"structure: {', '.join(rep.failed())}")
            bnd_ok = True
            for v, space in gos.vertex_spaces.items():
                O = gos.outgoing_union(v)
                if 2 * (euler_char(space) - euler_char(O)) > -len(boundary_vertices(space, O)):
                    bnd_ok = False
            if not bnd_ok:
                problems.append("boundary inequality fails for some vertex-space")
    rec = YRecord(
        faces=size,
        chi=chk.chi,
        chi_O=chi_O,
        vertices=len(Y.vertices),
        edges=len(Y.edges),
        isolated_edges=len(chk.isolated_edges),
        bound_ok=bound_ok,
        splitting_ok=split_ok,
        structure_ok=struct_ok,
        boundary_ok=bnd_ok,
        malnormal_ok=mal_ok,
        code=inst.code,
    )
    return rec, problems


def audit_instance(
    psi: GraphMap,
    H: Graph | None = None,
    F: Graph | None = None,
    K: int = 4,
    *,
    max_isolated: int = 0,
    name: str = "instance",
    certificate=None,
) -> AuditReport:
    """Check every enumerated ``Y`` against the certificate's constants."""
    H = psi.domain if H is None else H
    F = psi.codomain if F is None else F
    cert = decide_negative_immersions(psi, H, F) if certificate is None else certificate
    if not isinstance(cert, NegativeImmersions):
        raise PreconditionError("audit needs finite directed height; run the analysis first")
    c_prime = cert.malnormal.c_prime if cert.malnormal is not None else None
    torus = build_mapping_torus(psi, H, F)
    report = AuditReport(name, K, cert.c, c_prime, max_isolated)
    t0 = time.perf_counter()
    if K >= 1:
        en = Enumerator(torus, K, max_isolated)
        for st in en.run():
            Y, cells = state_to_complex(en.sk, st)
            inst = ImmersionInstance(Y, cells, st.code(en.sk.D).hex(), st.n_isolated)
            rec, problems = _audit_one(inst, torus, cert.c, c_prime, psi.is_immersion)
            report.records.append(rec)
            if problems:
                report.failures.append({"problems": problems, "Y": complex_to_json(Y), "code": inst.code})
        report.enumerated_states = en.stats["states"]
    report.elapsed = time.perf_counter() - t0
    return report


def check_isolated_edge_extension(psi: GraphMap, H: Graph | None = None, F: Graph | None = None, K: int = 3, max_isolated: int = 2, **kw) -> AuditReport:
    """Re-run the audit allowing up to ``max_isolated`` edges on no 2-cell."""
    return audit_instance(psi, H, F, K, max_isolated=max_isolated, **kw)


# -- corpus -----------------------------------------------------------------


@dataclass(frozen=True)
class CorpusInstance:
    name: str
    psi: GraphMap

    @property
    def H(self) -> Graph:
        return self.psi.domain

    @property
    def F(self) -> Graph:
        return self.psi.codomain


PETALS = "abcdefgh"


def _reduced_words(n: int, max_len: int) -> list:
    letters = [(PETALS[i], s) for i in range(n) for s in (1, -1)]
    out = []
    for length in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=length):
            if all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(w, w[1:])):
                out.append(w)
    return out


def _direction_injective(images) -> bool:
    dirs = []
    for w in images:
        dirs.append(w[0])
        g, s = w[-1]
        dirs.append((g, -s))
    return len(set(dirs)) == len(dirs)


def _symmetries(n: int, k: int):
    for p1 in itertools.permutations(range(k)):
        for p2 in itertools.permutations(range(k, n)):
            perm = p1 + p2
            for signs in itertools.product((1, -1), repeat=n):
                yield perm, signs


def _conjugate(phi, images, n):
    perm, signs = phi
    idx = {PETALS[i]: i for i in range(n)}

    def image_word(w):
        return tuple((PETALS[perm[idx[g]]], s * signs[idx[g]]) for g, s in w)

    new = [None] * len(images)
    for x, w in enumerate(images):
        im = image_word(w)
        new[perm[x]] = im if signs[x] == 1 else tuple((g, -s) for g, s in reversed(im))
    return tuple(new)


def rose_corpus(max_petals: int = 3, max_norm: int = 2, min_h: int = 1) -> list[CorpusInstance]:
    """Immersions ``psi: R_k -> R_n`` (first ``k`` petals) with ``||psi|| <= max_norm``.

    One instance per orbit of the group of petal permutations and inversions
    preserving the sub-rose; the representative is the least image tuple.
    """
    out = []
    for n in range(1, max_petals + 1):
        words = _reduced_words(n, max_norm)
        for k in range(min_h, n + 1):
            group = list(_symmetries(n, k))
            seen = set()
            for images in itertools.product(words, repeat=k):
                if not _direction_injective(images):
                    continue
                rep = min(_conjugate(g, images, n) for g in group)
                if rep in seen:
                    continue
                seen.add(rep)
                F = rose(PETALS[:n])
                H = rose(PETALS[:k])
                psi = GraphMap(H, F, {"v": "v"}, {PETALS[i]: EdgePath("v", w) for i, w in enumerate(rep)})
                name = f"R{n}/R{k}:" + ",".join(f"{PETALS[i]}->{format_word(w)}" for i, w in enumerate(rep))
                out.append(CorpusInstance(name, psi))
    return out


# -- random instances -------------------------------------------------------


def random_instance(seed: int, petals: int = 2, h_edges: int = 1, max_image_len: int = 2, attempts: int = 10000):
    """Pseudo-random immersion ``R_h -> R_petals`` with images of length ``<= max_image_len``.

    Returns ``(F, H, psi)``; identical seeds give identical instances.
    """
    if not (1 <= h_edges <= petals <= len(PETALS)) or max_image_len < 1:
        raise ValueError("need 1 <= h_edges <= petals <= 8 and max_image_len >= 1")
    rng = random.Random(seed)
    F = rose(PETALS[:petals])
    H = rose(PETALS[:h_edges])
    letters = [(PETALS[i], s) for i in range(petals) for s in (1, -1)]
    for _ in range(attempts):
        images = []
        for _ in range(h_edges):
            length = rng.randint(1, max_image_len)
            w = [rng.choice(letters)]
            while len(w) < length:
                g, s = rng.choice(letters)
                if (g, s) != (w[-1][0], -w[-1][1]):
                    w.append((g, s))
            images.append(tuple(w))
        if _direction_injective(images):
            psi = GraphMap(H, F, {"v": "v"}, {PETALS[i]: EdgePath("v", w) for i, w in enumerate(images)})
            return F, H, psi
    raise RetryError(f"no immersion found in {attempts} attempts")


def _random_graph(rng: random.Random, n_vertices: int, n_edges: int, prefix: str, connected: bool) -> Graph:
    vs = [f"{prefix}{i}" for i in range(n_vertices)]
    es = []
    if connected:
        for i in range(1, n_vertices):
            j = rng.randrange(i)
            es.append((f"{prefix}e{len(es)}", vs[j], vs[i]) if rng.random() < 0.5 else (f"{prefix}e{len(es)}", vs[i], vs[j]))
    while len(es) < n_edges:
        es.append((f"{prefix}e{len(es)}", rng.choice(vs), rng.choice(vs)))
    return Graph(vs, es)


def _random_path(rng: random.Random, g: Graph, start, end, extra: int) -> EdgePath:
    steps = []
    v = start
    for _ in range(extra):
        dirs = g.directions(v)
        if not dirs:
            break
        d = rng.choice(dirs)
        steps.append(d)
        v = g.far(d)
    # finish along a shortest path
    prev = {v: None}
    queue = [v]
    for u in queue:
        if u == end:
            break
        for d in g.directions(u):
            w = g.far(d)
            if w not in prev:
                prev[w] = d
                queue.append(w)
    tail = []
    u = end
    while prev[u] is not None:
        d = prev[u]
        tail.append(d)
        u = g.origin(d)
    return EdgePath(start, tuple(steps + tail[::-1]))


def random_cellular_map(rng: random.Random, max_vertices: int = 4, max_edges: int = 6, max_extra: int = 3) -> GraphMap:
    """Random cellular map between small graphs; edge images may backtrack or be empty."""
    nv = rng.randint(1, max_vertices)
    dom = _random_graph(rng, nv, rng.randint(0, max_edges), "x", connected=rng.random() < 0.7)
    cv = rng.randint(1, max_vertices)
    cod = _random_graph(rng, cv, rng.randint(cv - 1, max_edges), "y", connected=True)
    vimg = {v: rng.choice(cod.vertices) for v in dom.vertices}
    eimg = {}
    for e, t, h in dom.edge_triples():
        eimg[e] = _random_path(rng, cod, vimg[t], vimg[h], rng.randint(0, max_extra))
    return GraphMap(dom, cod, vimg, eimg)


def run_parallel(fn, items: Iterable, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally across processes; order preserved."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))
