import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from torus_height import _kernels_py, kernels

compiled = pytest.importorskip("torus_height._kernels") if kernels.BACKEND == "cython" else None


def random_state(seed, n_max=7, n_labels=2, n_edge_labels=2):
    """Connected graph whose edge labels act as partial injections, with vertex labels and masks."""
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    D = 2 * n_edge_labels
    adj = [-1] * (n * D)
    for v in range(1, n):
        # attach v to an earlier vertex along some free direction pair
        for _ in range(50):
            u = rng.randrange(v)
            j = rng.randrange(n_edge_labels)
            fwd = rng.random() < 0.5
            a, b = (u, v) if fwd else (v, u)
            if adj[a * D + 2 * j] < 0 and adj[b * D + 2 * j + 1] < 0:
                adj[a * D + 2 * j] = b
                adj[b * D + 2 * j + 1] = a
                break
        else:
            return random_state(seed + 1_000_003, n_max, n_labels, n_edge_labels)
    for _ in range(rng.randint(0, n)):
        a, b, j = rng.randrange(n), rng.randrange(n), rng.randrange(n_edge_labels)
        if adj[a * D + 2 * j] < 0 and adj[b * D + 2 * j + 1] < 0:
            adj[a * D + 2 * j] = b
            adj[b * D + 2 * j + 1] = a
    labels = [rng.randrange(n_labels) for _ in range(n)]
    masks = [rng.randrange(4) for _ in range(n)]
    return n, D, labels, masks, adj


def relabel(state, perm):
    n, D, labels, masks, adj = state
    inv = [0] * n
    for old, new in enumerate(perm):
        inv[new] = old
    adj2 = [-1] * (n * D)
    for v in range(n):
        for d in range(D):
            w = adj[v * D + d]
            adj2[perm[v] * D + d] = -1 if w < 0 else perm[w]
    return n, D, [labels[inv[i]] for i in range(n)], [masks[inv[i]] for i in range(n)], adj2


def to_nx(state):
    n, D, labels, masks, adj = state
    g = nx.MultiDiGraph()
    for v in range(n):
        g.add_node(v, label=(labels[v], masks[v]))
    for v in range(n):
        for d in range(0, D, 2):
            if adj[v * D + d] >= 0:
                g.add_edge(v, adj[v * D + d], label=d)
    return g


def test_single_vertex():
    code = _kernels_py.canonical_code(1, 2, [3], [1], [-1, -1])
    assert code == bytes(__import__("array").array("i", [3, 1, -1, -1]))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=400, deadline=None)
def test_backends_agree(seed):
    if compiled is None:
        pytest.skip("compiled kernel not built")
    s = random_state(seed)
    assert compiled.canonical_code(*s) == _kernels_py.canonical_code(*s)


@given(st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
@settings(max_examples=400, deadline=None)
def test_code_is_relabelling_invariant(seed, rnd):
    s = random_state(seed)
    perm = list(range(s[0]))
    rnd.shuffle(perm)
    assert kernels.canonical_code(*relabel(s, perm)) == kernels.canonical_code(*s)


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
@settings(max_examples=400, deadline=None)
def test_equal_codes_iff_isomorphic(seed1, seed2):
    a = random_state(seed1, n_max=4)
    b = random_state(seed2, n_max=4)
    same = kernels.canonical_code(*a) == kernels.canonical_code(*b)
    iso = nx.is_isomorphic(
        to_nx(a), to_nx(b), node_match=lambda x, y: x["label"] == y["label"], edge_match=lambda x, y: sorted(e["label"] for e in x.values()) == sorted(e["label"] for e in y.values())
    )
    assert same == iso


def test_pure_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, TORUS_HEIGHT_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from torus_height import kernels; print(kernels.BACKEND)"], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
