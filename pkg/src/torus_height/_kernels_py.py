"""Pure-Python canonical code for connected immersed labelled graphs.

A state has ``n`` vertices, ``D`` direction slots per vertex, a label and a
face bitmask per vertex, and ``adj[v*D + d]`` = neighbour reached along
direction ``d`` (or -1).  The code of a root is the breadth-first encoding
``label, mask, pos(adj[v][0]), ..., pos(adj[v][D-1])`` over vertices in
discovery order; the canonical code is the least code over all roots.
"""

from array import array


def _code_from(root, n, D, labels, masks, adj):
    pos = [-1] * n
    pos[root] = 0
    order = [root]
    out = []
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        out.append(labels[v])
        out.append(masks[v])
        base = v * D
        for d in range(D):
            w = adj[base + d]
            if w < 0:
                out.append(-1)
                continue
            if pos[w] < 0:
                pos[w] = len(order)
                order.append(w)
            out.append(pos[w])
    return out


def canonical_code(n, D, labels, masks, adj):
    """Least breadth-first code over all roots, as bytes of int32 values.

    The graph must be connected.
    """
    best = None
    for r in range(n):
        code = _code_from(r, n, D, labels, masks, adj)
        if best is None or code < best:
            best = code
    if best is None:
        best = []
    return array("i", best).tobytes()
