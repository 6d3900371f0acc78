"""Exhaustive enumeration of immersions ``Y -> X`` into a mapping torus.

``Y`` is grown one 2-cell at a time.  Its 1-skeleton is kept as an immersed
labelled graph over the 1-skeleton of ``X``: every vertex of ``Y`` carries a
vertex of ``F`` and has at most one neighbour along each direction of ``X``.
A 2-cell of ``Y`` is a lift of a 2-cell of ``X`` and is determined by its
``H``-edge and the lift of its starting vertex, so ``Y -> X`` is an immersion
exactly when the 1-skeleton map is and no lift is repeated.

Growth rule from a partial complex ``P``: when some edge lies on exactly one
2-cell, pick the edge with the fewest admissible ways to be covered again and
branch over them; otherwise ``P`` is itself a candidate and any 2-cell through
any vertex may be added.  Every connected ``Y`` with all edges covered twice is
reached along some sequence of such moves, and isomorphic partial complexes are
merged by canonical code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .graphs import EdgePath, Graph, idkey
from .kernels import canonical_code
from .torus import HORIZONTAL, VERTICAL, MappingTorus, TwoComplex

__all__ = ["TorusSkeleton", "State", "Enumerator", "enumerate_states", "state_to_complex"]


class TorusSkeleton:
    """Integer tables for the 1-skeleton and 2-cells of a mapping torus.

    Edge ``j`` of ``X`` has directions ``2j`` (from its tail) and ``2j+1``
    (from its head).
    """

    def __init__(self, torus: MappingTorus):
        X = torus.complex
        self.torus = torus
        self.fverts = list(X.vertices)
        vidx = {v: i for i, v in enumerate(self.fverts)}
        self.xedges = [e for e in X.edges if X.kinds[e] == VERTICAL] + [e for e in X.edges if X.kinds[e] == HORIZONTAL]
        eidx = {e: j for j, e in enumerate(self.xedges)}
        self.eidx = eidx
        self.D = 2 * len(self.xedges)
        self.origin = [0] * self.D
        self.far = [0] * self.D
        for j, e in enumerate(self.xedges):
            t, h = X.skeleton.ends(e)
            self.origin[2 * j], self.far[2 * j] = vidx[t], vidx[h]
            self.origin[2 * j + 1], self.far[2 * j + 1] = vidx[h], vidx[t]
        self.hedges = list(torus.H.edges)
        if len(self.hedges) > 31:
            raise ValueError("enumeration supports at most 31 edges in H")
        self.boundary = []
        for h in self.hedges:
            p = X.faces[torus.face_of[h]]
            self.boundary.append(tuple(2 * eidx[e] + (0 if s > 0 else 1) for e, s in p.steps))
        self.lmax = max((len(b) for b in self.boundary), default=0)
        self.slots = [[] for _ in self.xedges]
        for hi, b in enumerate(self.boundary):
            for k, d in enumerate(b):
                self.slots[d >> 1].append((hi, k))


@dataclass(frozen=True)
class State:
    """Immutable partial complex.

    ``adj`` is the flat ``n*D`` neighbour table, ``faces`` a sorted tuple of
    ``(h, y0)`` lifts, ``cover`` maps ``(tail vertex, X-edge)`` to the number
    of times 2-cell boundaries run over that edge.
    """

    labels: tuple
    adj: tuple
    faces: tuple
    cover: tuple
    n_isolated: int

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def cover_dict(self) -> dict:
        return dict(self.cover)

    def code(self, D: int) -> bytes:
        masks = [0] * self.n
        for h, y in self.faces:
            masks[y] |= 1 << h
        return canonical_code(self.n, D, self.labels, masks, self.adj)

    @property
    def deficient(self) -> list:
        return [k for k, c in self.cover if c == 1]

    @property
    def closed(self) -> bool:
        return all(c != 1 for _, c in self.cover)


class _Work:
    """Mutable copy of a state used while walking a new 2-cell boundary."""

    def __init__(self, sk: TorusSkeleton, st: State | None = None):
        self.sk = sk
        D = sk.D
        if st is None:
            self.labels, self.adj, self.faces, self.cover, self.n_isolated = [], [], set(), {}, 0
        else:
            self.labels = list(st.labels)
            self.adj = list(st.adj)
            self.faces = set(st.faces)
            self.cover = dict(st.cover)
            self.n_isolated = st.n_isolated
        self.D = D

    def freeze(self) -> State:
        return State(
            tuple(self.labels),
            tuple(self.adj),
            tuple(sorted(self.faces)),
            tuple(sorted(self.cover.items())),
            self.n_isolated,
        )

    def new_vertex(self, label: int) -> int:
        self.labels.append(label)
        self.adj.extend([-1] * self.D)
        return len(self.labels) - 1

    def drop_vertex(self) -> None:
        self.labels.pop()
        del self.adj[-self.D :]

    def link(self, u: int, d: int, w: int) -> None:
        self.adj[u * self.D + d] = w
        self.adj[w * self.D + (d ^ 1)] = u

    def unlink(self, u: int, d: int, w: int) -> None:
        self.adj[u * self.D + d] = -1
        self.adj[w * self.D + (d ^ 1)] = -1

    def nbr(self, u: int, d: int) -> int:
        return self.adj[u * self.D + d]

    def edge_key(self, u: int, d: int, w: int) -> tuple:
        return (u, d >> 1) if d & 1 == 0 else (w, d >> 1)

    def targets(self, u: int, d: int) -> list:
        """Existing vertices that may be the far end of a new edge from ``u`` along ``d``."""
        lab = self.sk.far[d]
        back = d ^ 1
        D = self.D
        return [w for w in range(len(self.labels)) if self.labels[w] == lab and self.adj[w * D + back] < 0 and (w != u or self.adj[u * D + d] < 0)]


def _walk(work: _Work, h: int, k0: int, start: int, budget: int | None = None) -> Iterator[State]:
    """All ways of adding the lift of 2-cell ``h`` whose step ``k0`` leaves ``start``.

    With ``budget`` set, branches that must end with more than ``budget`` edges
    lying on exactly one 2-cell are cut.
    """
    sk = work.sk
    bd = sk.boundary[h]
    n = len(bd)
    seq = [bd[(k0 + i) % n] for i in range(n)]
    y0_index = (n - k0) % n
    cover = work.cover
    if budget is None:
        budget = n + len(cover)

    def rec(i: int, cur: int, y0: int, deficit: int) -> Iterator[State]:
        if deficit - (n - i) > budget:
            return
        if i == y0_index:
            y0 = cur
        if i == n:
            if cur != start or (h, y0) in work.faces:
                return
            work.faces.add((h, y0))
            yield work.freeze()
            work.faces.discard((h, y0))
            return
        d = seq[i]
        last = i == n - 1
        w = work.nbr(cur, d)
        if w >= 0:
            if last and w != start:
                return
            key = work.edge_key(cur, d, w)
            prev = cover.get(key)
            c = 0 if prev is None else prev
            cover[key] = c + 1
            yield from rec(i + 1, w, y0, deficit + (c == 0) - (c == 1))
            if prev is None:
                del cover[key]
            else:
                cover[key] = prev
            return
        if last:
            options = [start] if start in work.targets(cur, d) else []
        else:
            options = work.targets(cur, d) + [None]
        for w in options:
            fresh = w is None
            if fresh:
                w = work.new_vertex(sk.far[d])
            work.link(cur, d, w)
            key = work.edge_key(cur, d, w)
            cover[key] = 1
            yield from rec(i + 1, w, y0, deficit + 1)
            del cover[key]
            work.unlink(cur, d, w)
            if fresh:
                work.drop_vertex()

    start_deficit = sum(1 for c in cover.values() if c == 1)
    yield from rec(0, start, start if y0_index == 0 else -1, start_deficit)


def _isolated_moves(work: _Work) -> Iterator[State]:
    sk = work.sk
    for u in range(len(work.labels)):
        for d in range(sk.D):
            if sk.origin[d] != work.labels[u] or work.nbr(u, d) >= 0:
                continue
            for w in work.targets(u, d) + [None]:
                fresh = w is None
                if fresh:
                    w = work.new_vertex(sk.far[d])
                work.link(u, d, w)
                key = work.edge_key(u, d, w)
                work.cover[key] = 0
                work.n_isolated += 1
                yield work.freeze()
                work.n_isolated -= 1
                del work.cover[key]
                work.unlink(u, d, w)
                if fresh:
                    work.drop_vertex()


class Enumerator:
    """Breadth-first generation of partial complexes up to isomorphism.

    ``max_faces`` bounds the number of 2-cells and ``max_isolated`` the number
    of edges lying on no 2-cell.  ``run`` yields every closed state (no edge on
    exactly one 2-cell, at least one 2-cell) exactly once per isomorphism
    class.
    """

    def __init__(self, torus: MappingTorus, max_faces: int, max_isolated: int = 0):
        self.sk = TorusSkeleton(torus)
        self.K = max_faces
        self.L = max_isolated
        self.stats = {"states": 0, "pruned": 0, "closed": 0}

    def _slot_start(self, work: _Work, edge: tuple, h: int, k: int):
        """Vertex where step ``k`` of 2-cell ``h`` would begin on ``edge``, and whether that lift exists."""
        u, j = edge
        d = self.sk.boundary[h][k]
        start = u if d & 1 == 0 else work.nbr(u, 2 * j)
        bd = self.sk.boundary[h]
        v = start
        for i in range(k - 1, -1, -1):
            v = work.nbr(v, bd[i] ^ 1)
            if v < 0:
                return start, False
        return start, (h, v) in work.faces

    def _viable(self, st: State) -> bool:
        """Cheap necessary condition for a state to extend to a closed one."""
        need = sum(1 for _, c in st.cover if c == 1)
        return need <= (self.K - st.n_faces) * self.sk.lmax

    def initial(self) -> Iterator[State]:
        sk = self.sk
        if self.K < 1:
            return
        for h in range(len(sk.boundary)):
            work = _Work(sk)
            s = work.new_vertex(sk.origin[sk.boundary[h][0]])
            yield from _walk(work, h, 0, s, (self.K - 1) * sk.lmax)

    def expand(self, st: State) -> Iterator[State]:
        sk = self.sk
        work = _Work(sk, st)
        deficient = st.deficient
        budget = (self.K - st.n_faces - 1) * sk.lmax
        if deficient:
            room = self.K - st.n_faces
            if len(deficient) > room * sk.lmax:
                self.stats["pruned"] += 1
                return
            best = None
            for edge in deficient:
                free = []
                for h, k in sk.slots[edge[1]]:
                    start, used = self._slot_start(work, edge, h, k)
                    if not used:
                        free.append((h, k, start))
                if best is None or len(free) < len(best):
                    best = free
                    if not free:
                        break
            if not best:
                self.stats["pruned"] += 1
                return
            for h, k, start in best:
                yield from _walk(work, h, k, start, budget)
            return
        if st.n_faces < self.K:
            for y in range(st.n):
                for h, bd in enumerate(sk.boundary):
                    for k, d in enumerate(bd):
                        if sk.origin[d] == st.labels[y]:
                            yield from _walk(work, h, k, y, budget)
        if st.n_isolated < self.L:
            yield from _isolated_moves(work)

    def run(self) -> Iterator[State]:
        D = self.sk.D
        seen = set()
        frontier = []
        for st in self.initial():
            if not self._viable(st):
                continue
            c = st.code(D)
            if c not in seen:
                seen.add(c)
                frontier.append((c, st))
        while frontier:
            frontier.sort(key=lambda cs: cs[0])
            nxt = []
            for _, st in frontier:
                self.stats["states"] += 1
                if st.n_faces >= 1 and st.closed:
                    self.stats["closed"] += 1
                    yield st
                for child in self.expand(st):
                    if not self._viable(child):
                        self.stats["pruned"] += 1
                        continue
                    c = child.code(D)
                    if c not in seen:
                        seen.add(c)
                        nxt.append((c, child))
            frontier = nxt


def enumerate_states(torus: MappingTorus, max_faces: int, max_isolated: int = 0) -> Iterator[State]:
    return Enumerator(torus, max_faces, max_isolated).run()


def state_to_complex(sk: TorusSkeleton, st: State) -> tuple[TwoComplex, dict]:
    """Realise a state as a :class:`TwoComplex` with its cell map into ``X``."""
    torus = sk.torus
    X = torus.complex
    D = sk.D
    cells = {}
    verts = [f"y{i}" for i in range(st.n)]
    for i, v in enumerate(verts):
        cells[v] = sk.fverts[st.labels[i]]
    edges = {}
    edge_name = {}
    for u in range(st.n):
        for j in range(len(sk.xedges)):
            w = st.adj[u * D + 2 * j]
            if w < 0:
                continue
            x = sk.xedges[j]
            name = f"e{len(edges)}"
            edges[name] = (verts[u], verts[w], X.kinds[x])
            edge_name[(u, j)] = name
            cells[name] = x
    faces = {}
    for n_f, (h, y0) in enumerate(st.faces):
        steps = []
        v = y0
        for d in sk.boundary[h]:
            w = st.adj[v * D + d]
            j = d >> 1
            if d & 1 == 0:
                steps.append((edge_name[(v, j)], 1))
            else:
                steps.append((edge_name[(w, j)], -1))
            v = w
        name = f"c{n_f}"
        faces[name] = EdgePath(verts[y0], tuple(steps))
        cells[name] = torus.face_of[sk.hedges[h]]
    prov = {}
    for name, (t, hd, kind) in edges.items():
        if kind == HORIZONTAL:
            prov[name] = X.provenance[cells[name]]
    for name in faces:
        prov[name] = X.provenance[cells[name]]
    return TwoComplex(verts, edges, faces, prov), cells
