import itertools
import json
import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rose_map
from torus_height.graphs import EdgePath, Graph, components
from torus_height.maps import domain_filtration
from torus_height.torus import TwoComplex, build_mapping_torus, check_combinatorial_immersion, complex_checks, decide_negative_immersions
from torus_height.verifier import (
    PreconditionError,
    audit_instance,
    brute_force_preimage,
    check_isolated_edge_extension,
    decompose,
    enumerate_immersions,
    random_instance,
    rose_corpus,
    structure_checks,
)


# -- direct enumeration oracle ----------------------------------------------


def _polygons(X, face_ids):
    """Boundary polygons: vertex labels and directed labelled edges per polygon."""
    verts, edges = [], []
    for f in face_ids:
        path = X.faces[f]
        base = len(verts)
        n = len(path.steps)
        v = path.start
        for k, (e, s) in enumerate(path.steps):
            verts.append(v)
            a, b = base + k, base + (k + 1) % n
            edges.append((a, b, e) if s == 1 else (b, a, e))
            v = X.skeleton.head(e) if s == 1 else X.skeleton.tail(e)
    return verts, edges


def _partitions(labels, edges):
    """Label-respecting set partitions whose quotient has no direction clash."""
    n = len(labels)
    block = [None] * n
    by_vertex = [[] for _ in range(n)]
    for a, b, e in edges:
        by_vertex[a].append((a, b, e))
        by_vertex[b].append((a, b, e))

    def clash():
        out, inc = {}, {}
        for a, b, e in edges:
            if block[a] is None or block[b] is None:
                continue
            u, w = block[a], block[b]
            if out.setdefault((u, e), w) != w or inc.setdefault((w, e), u) != u:
                return True
        return False

    def rec(i, nblocks, block_label):
        if i == n:
            yield list(block)
            return
        for k in range(nblocks + 1):
            if k < nblocks and block_label[k] != labels[i]:
                continue
            block[i] = k
            new = block_label + [labels[i]] if k == nblocks else block_label
            if not clash():
                yield from rec(i + 1, max(nblocks, k + 1), new)
            block[i] = None

    yield from rec(0, 0, [])


def _quotient(X, face_ids, blocks, verts, poly_edges):
    vnames = {b: f"q{b}" for b in set(blocks)}
    cells = {vnames[b]: verts[i] for i, b in enumerate(blocks)}
    ename = {}
    edges = {}
    for a, b, e in poly_edges:
        key = (blocks[a], blocks[b], e)
        if key not in ename:
            ename[key] = f"d{len(ename)}"
            edges[ename[key]] = (vnames[blocks[a]], vnames[blocks[b]], X.kinds[e])
            cells[ename[key]] = e
    faces = {}
    pos = 0
    for k, f in enumerate(face_ids):
        path = X.faces[f]
        n = len(path.steps)
        steps = []
        for j, (e, s) in enumerate(path.steps):
            a, b = pos + j, pos + (j + 1) % n
            key = (blocks[a], blocks[b], e) if s == 1 else (blocks[b], blocks[a], e)
            steps.append((ename[key], s))
        faces[f"g{k}"] = EdgePath(vnames[blocks[pos]], tuple(steps))
        cells[f"g{k}"] = f
        pos += n
    return TwoComplex(sorted(vnames.values()), edges, faces), cells


def _labelled(Y, cells):
    g = nx.Graph()
    for v in Y.vertices:
        g.add_node(("v", v), label=("v", cells[v]))
    for e in Y.edges:
        t, h, _ = Y.edge_record(e)
        g.add_node(("e", e), label=("e", cells[e]))
        g.add_edge(("e", e), ("v", t), role="tail")
        g.add_edge(("e", e), ("v", h), role="head")
    for f, p in Y.faces.items():
        g.add_node(("f", f), label=("f", cells[f]))
        g.add_edge(("f", f), ("v", p.start), role="base")
    return g


def _iso(g1, g2):
    return nx.is_isomorphic(g1, g2, node_match=lambda a, b: a["label"] == b["label"], edge_match=lambda a, b: a["role"] == b["role"])


def _dedup(graphs):
    classes = []
    for g in graphs:
        key = nx.weisfeiler_lehman_graph_hash(g, node_attr="label", edge_attr="role")
        if not any(k == key and _iso(g, h) for k, h in classes):
            classes.append((key, g))
    return classes


def direct_immersions(torus, K):
    X = torus.complex
    found = []
    for k in range(1, K + 1):
        for face_ids in itertools.combinations_with_replacement(sorted(X.faces, key=repr), k):
            verts, poly_edges = _polygons(X, face_ids)
            for blocks in _partitions(verts, poly_edges):
                Y, cells = _quotient(X, face_ids, blocks, verts, poly_edges)
                chk = complex_checks(Y)
                if chk.connected and chk.collapsed and check_combinatorial_immersion(Y, X, cells):
                    found.append(_labelled(Y, cells))
    return _dedup(found)


@pytest.mark.parametrize("fixture", ["shift", "fixed_loop", "ascending", "two_loops", "chain"])
@pytest.mark.parametrize("K", [1, 2])
def test_growth_matches_direct_enumeration(request, fixture, K):
    psi = request.getfixturevalue(fixture)
    torus = build_mapping_torus(psi)
    direct = direct_immersions(torus, K)
    grown = [_labelled(inst.Y, inst.cells) for inst in enumerate_immersions(torus, K)]
    assert len(grown) == len(direct)
    for g in grown:
        key = nx.weisfeiler_lehman_graph_hash(g, node_attr="label", edge_attr="role")
        assert sum(k == key and _iso(g, h) for k, h in direct) == 1


# -- preimages --------------------------------------------------------------


def test_brute_force_preimage_examples(shift, chain, fixed_loop):
    rep = brute_force_preimage(shift, i=1)
    assert rep.is_forest and not rep.largest_subgraph.edges
    rep = brute_force_preimage(chain, i=1)
    assert not rep.is_forest
    assert brute_force_preimage(chain, i=2).is_forest
    rep = brute_force_preimage(fixed_loop, i=5)
    assert not rep.is_forest and rep.largest_subgraph == fixed_loop.domain
    with pytest.raises(ValueError):
        brute_force_preimage(shift, i=9)


def test_brute_force_matches_filtration_on_corpus():
    for ci in rose_corpus(2, 2):
        filt = domain_filtration(ci.psi)
        for i in range(4):
            rep = brute_force_preimage(ci.psi, i=i)
            assert rep.largest_subgraph == filt.D(i + 1), ci.name


# -- enumeration and audit --------------------------------------------------


def test_enumeration_examples(shift, fixed_loop):
    assert list(enumerate_immersions(build_mapping_torus(shift), 0)) == []
    assert list(enumerate_immersions(build_mapping_torus(shift), 4)) == []
    t = build_mapping_torus(fixed_loop)
    (inst,) = enumerate_immersions(t, 1)
    assert inst.Y.chi == 0 and len(inst.Y.faces) == 1


def test_structure_of_enumerated(two_loops):
    t = build_mapping_torus(two_loops)
    n = 0
    for inst in enumerate_immersions(t, 3):
        gos, where = decompose(inst.Y)
        assert structure_checks(inst.Y, gos).ok
        assert set(where) == set(inst.Y.vertices)
        n += 1
    assert n > 0


def test_audit_examples(shift, chain, two_loops, fixed_loop):
    for psi in (shift, chain):
        rep = audit_instance(psi, K=4)
        assert rep.ok and rep.count == 0
    rep = audit_instance(two_loops, K=4)
    assert rep.ok and rep.count > 0 and rep.max_faces <= 4
    assert all(r.bound_ok and r.splitting_ok and r.structure_ok and r.boundary_ok and r.malnormal_ok for r in rep.records)
    with pytest.raises(PreconditionError):
        audit_instance(fixed_loop, K=2)


def test_isolated_edge_extension(shift, two_loops):
    rep = check_isolated_edge_extension(shift, K=3)
    assert rep.ok and rep.isolated_edges_allowed == 2
    rep = check_isolated_edge_extension(two_loops, K=3, max_isolated=1)
    assert rep.ok and any(r.isolated_edges == 1 for r in rep.records)
    assert rep.count > audit_instance(two_loops, K=3).count


def test_report_json_is_deterministic(two_loops):
    a = audit_instance(two_loops, K=3).to_json()
    b = audit_instance(two_loops, K=3).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert "elapsed" not in a


# -- random instances -------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_random_instances(seed, h, length):
    F, H, psi = random_instance(seed, petals=3, h_edges=h, max_image_len=length)
    assert psi.is_immersion
    assert max(len(p.steps) for p in psi.edge_images.values()) <= length
    F2, H2, psi2 = random_instance(seed, petals=3, h_edges=h, max_image_len=length)
    assert psi2.edge_images == psi.edge_images


def test_random_instance_rejects_bad_sizes():
    with pytest.raises(ValueError):
        random_instance(0, petals=2, h_edges=3)


def test_corpus_size():
    corpus = rose_corpus()
    assert len({c.name for c in corpus}) == len(corpus)
    assert all(c.psi.is_immersion for c in corpus)
    finite = [c for c in corpus if decide_negative_immersions(c.psi).__class__.__name__ == "NegativeImmersions"]
    assert 0 < len(finite) < len(corpus)


def test_separating_isolated_edge_splits_chi(two_loops):
    t = build_mapping_torus(two_loops)
    c = decide_negative_immersions(two_loops).c
    seen = 0
    for inst in enumerate_immersions(t, 4, max_isolated=1):
        Y = inst.Y
        for e in complex_checks(Y).isolated_edges:
            rest = Graph(Y.vertices, [(x, *Y.edge_record(x)[:2]) for x in Y.edges if x != e])
            parts = components(rest)
            if len(parts) != 2:
                continue
            chis = []
            for p in parts:
                faces = sum(1 for f in Y.faces.values() if p.has_vertex(f.start))
                chis.append(len(p.vertices) - len(p.edges) + faces)
            assert Y.chi == chis[0] + chis[1] - 1
            assert Y.chi <= -c * Y.n_faces
            seen += 1
    assert seen > 0
