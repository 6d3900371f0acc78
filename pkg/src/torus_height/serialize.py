"""JSON and DOT forms of graphs, maps, complexes, certificates and fold dumps.

Cell ids are JSON strings or integers; subdivision ids and other tuples are
written as ``{"piece": [edge, k]}``, ``{"mid": [edge, k]}`` or
``{"tuple": [...]}`` so that every dump reads back to an equal value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .folding import Collapse, Factorization, Fold, FoldSequence, Unknown, rose
from .graphs import EdgePath, Graph, GraphError, idkey
from .maps import INFINITE, GraphMap, Mid, Piece
from .torus import (
    MalnormalBound,
    NegativeImmersions,
    ReducibilityWitness,
    TwoComplex,
    Undecided,
    ZeroEulerWitness,
)
from .words import WordError, parse_word

__all__ = [
    "FormatError",
    "Instance",
    "encode_id",
    "decode_id",
    "graph_to_json",
    "graph_from_json",
    "subgraph_to_json",
    "subgraph_from_json",
    "path_to_json",
    "path_from_json",
    "map_to_json",
    "map_from_json",
    "complex_to_json",
    "complex_from_json",
    "rational_to_json",
    "rational_from_json",
    "certificate_to_json",
    "certificate_from_json",
    "factorization_to_json",
    "factorization_from_json",
    "instance_to_json",
    "instance_from_json",
    "load_instance",
    "to_dot",
    "dumps",
]


class FormatError(ValueError):
    """Malformed input file."""


def encode_id(x) -> Any:
    if isinstance(x, bool):
        raise FormatError(f"boolean is not a valid id: {x!r}")
    if isinstance(x, (str, int)):
        return x
    if isinstance(x, Piece):
        return {"piece": [encode_id(x.edge), x.k]}
    if isinstance(x, Mid):
        return {"mid": [encode_id(x.edge), x.k]}
    if isinstance(x, tuple):
        return {"tuple": [encode_id(y) for y in x]}
    raise FormatError(f"cannot encode id {x!r}")


def decode_id(x) -> Any:
    if isinstance(x, bool):
        raise FormatError(f"boolean is not a valid id: {x!r}")
    if isinstance(x, (str, int)):
        return x
    if isinstance(x, dict) and len(x) == 1:
        (kind, val), = x.items()
        if kind == "piece":
            return Piece(decode_id(val[0]), int(val[1]))
        if kind == "mid":
            return Mid(decode_id(val[0]), int(val[1]))
        if kind == "tuple":
            return tuple(decode_id(y) for y in val)
    raise FormatError(f"cannot decode id {x!r}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


# -- graphs and maps --------------------------------------------------------


def graph_to_json(g: Graph) -> dict:
    return {
        "vertices": [encode_id(v) for v in g.vertices],
        "edges": [{"id": encode_id(e), "from": encode_id(t), "to": encode_id(h)} for e, t, h in g.edge_triples()],
    }


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise FormatError(f"{where}: missing key {key!r}")
    return d[key]


def graph_from_json(d) -> Graph:
    try:
        vs = [decode_id(v) for v in _require(d, "vertices", "graph")]
        es = []
        for rec in _require(d, "edges", "graph"):
            es.append((decode_id(_require(rec, "id", "edge")), decode_id(_require(rec, "from", "edge")), decode_id(_require(rec, "to", "edge"))))
        return Graph(vs, es)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc
    except TypeError as exc:
        raise FormatError(f"graph: {exc}") from exc


def subgraph_to_json(h: Graph) -> dict:
    return {"vertices": [encode_id(v) for v in h.vertices], "edges": [encode_id(e) for e in h.edges]}


def subgraph_from_json(d, ambient: Graph) -> Graph:
    vs = [decode_id(v) for v in _require(d, "vertices", "subgraph")]
    es = [decode_id(e) for e in _require(d, "edges", "subgraph")]
    for v in vs:
        if not ambient.has_vertex(v):
            raise FormatError(f"subgraph vertex {v!r} is not in the ambient graph")
    for e in es:
        if not ambient.has_edge(e):
            raise FormatError(f"subgraph edge {e!r} is not in the ambient graph")
    try:
        return ambient.subgraph(vs, es)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


def path_to_json(p: EdgePath) -> dict:
    return {"start": encode_id(p.start), "steps": [[encode_id(e), s] for e, s in p.steps]}


def _steps_from(tokens) -> tuple:
    steps = []
    for tok in tokens:
        if isinstance(tok, str):
            if len(tok) < 2 or tok[-1] not in "+-":
                raise FormatError(f"bad step token {tok!r}")
            steps.append((tok[:-1], 1 if tok[-1] == "+" else -1))
        elif isinstance(tok, list) and len(tok) == 2 and tok[1] in (1, -1):
            steps.append((decode_id(tok[0]), tok[1]))
        else:
            raise FormatError(f"bad step {tok!r}")
    return tuple(steps)


def path_from_json(d, default_start=None) -> EdgePath:
    if isinstance(d, list):
        if default_start is None:
            raise FormatError("a bare step list needs a known start vertex")
        return EdgePath(default_start, _steps_from(d))
    start = decode_id(d["start"]) if "start" in d else decode_id(d["at"]) if "at" in d else default_start
    if start is None:
        raise FormatError("path without start vertex")
    return EdgePath(start, _steps_from(_require(d, "steps", "path")))


def _pairs(d) -> list:
    """Accept ``{key: value}`` (string keys) or ``[[key, value], ...]``."""
    if isinstance(d, dict):
        return list(d.items())
    if isinstance(d, list) and all(isinstance(x, list) and len(x) == 2 for x in d):
        return [(k, v) for k, v in d]
    raise FormatError(f"expected an object or a list of pairs, got {type(d).__name__}")


def map_to_json(m: GraphMap, *, include_graphs: bool = True) -> dict:
    out = {
        "vertex_images": [[encode_id(v), encode_id(m.vertex_images[v])] for v in m.domain.vertices],
        "edge_images": [[encode_id(e), path_to_json(m.edge_images[e])] for e in m.domain.edges],
    }
    if include_graphs:
        out["domain"] = graph_to_json(m.domain)
        out["codomain"] = graph_to_json(m.codomain)
    return out


def map_from_json(d, domain: Graph | None = None, codomain: Graph | None = None) -> GraphMap:
    domain = graph_from_json(d["domain"]) if domain is None else domain
    codomain = graph_from_json(d["codomain"]) if codomain is None else codomain
    vimg = {}
    for k, v in _pairs(_require(d, "vertex_images", "map")):
        vimg[decode_id(k)] = decode_id(v)
    eimg = {}
    for k, p in _pairs(_require(d, "edge_images", "map")):
        k = decode_id(k)
        if not domain.has_edge(k):
            raise FormatError(f"edge image given for unknown edge {k!r}")
        tail = domain.tail(k)
        if tail not in vimg:
            raise FormatError(f"no image for vertex {tail!r}")
        eimg[k] = path_from_json(p, vimg[tail])
    missing_v = [v for v in domain.vertices if v not in vimg]
    missing_e = [e for e in domain.edges if e not in eimg]
    if missing_v or missing_e:
        raise FormatError(f"map is missing images for {missing_v + missing_e!r}")
    try:
        return GraphMap(domain, codomain, vimg, eimg)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


# -- complexes --------------------------------------------------------------


def complex_to_json(Y: TwoComplex) -> dict:
    return {
        "vertices": [encode_id(v) for v in Y.vertices],
        "edges": [
            {"id": encode_id(e), "from": encode_id(t), "to": encode_id(h), "kind": Y.kinds[e]}
            for e, t, h in Y.skeleton.edge_triples()
        ],
        "faces": [
            {"id": encode_id(f), **path_to_json(Y.faces[f])} for f in sorted(Y.faces, key=idkey)
        ],
        "provenance": [[encode_id(k), encode_id(Y.provenance[k])] for k in sorted(Y.provenance, key=idkey)],
    }


def complex_from_json(d) -> TwoComplex:
    vs = [decode_id(v) for v in d["vertices"]]
    edges = {decode_id(r["id"]): (decode_id(r["from"]), decode_id(r["to"]), r["kind"]) for r in d["edges"]}
    faces = {decode_id(r["id"]): path_from_json(r) for r in d["faces"]}
    prov = {decode_id(k): decode_id(v) for k, v in d.get("provenance", [])}
    try:
        return TwoComplex(vs, edges, faces, prov)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


# -- certificates -----------------------------------------------------------


def rational_to_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def rational_from_json(d) -> Fraction:
    return Fraction(int(d["num"]), int(d["den"]))


def _height_to_json(h):
    if h == INFINITE:
        return "infinite"
    if isinstance(h, Unknown):
        return {"unknown": h.cap}
    return h


def _height_from_json(h):
    if h == "infinite":
        return INFINITE
    if isinstance(h, dict):
        return Unknown(h["unknown"])
    return h


def _word_to_json(w) -> list:
    return [[encode_id(g), s] for g, s in w]


def _word_from_json(w) -> tuple:
    return tuple((decode_id(g), s) for g, s in w)


def certificate_to_json(cert) -> dict:
    if isinstance(cert, NegativeImmersions):
        mal = cert.malnormal
        return {
            "verdict": "negative_immersions",
            "directed_height": cert.directed_height,
            "norm": cert.norm,
            "m": cert.m,
            "M": cert.M,
            "N": cert.N,
            "c": rational_to_json(cert.c),
            "diam_d_infinity": cert.diam_d_infinity,
            "immersion": cert.immersion,
            "malnormal": None if mal is None else {"d": mal.d, "M3": mal.M3, "c_prime": rational_to_json(mal.c_prime)},
        }
    if isinstance(cert, ZeroEulerWitness):
        red = cert.reducibility
        return {
            "verdict": "zero_euler_witness",
            "directed_height": _height_to_json(cert.directed_height),
            "Y": complex_to_json(cert.Y),
            "immersion": [[encode_id(k), encode_id(v)] for k, v in sorted(cert.immersion.items(), key=lambda kv: idkey(kv[0]))],
            "invariant_subgraph": graph_to_json(cert.invariant_subgraph),
            "reducibility": None if red is None else {
                "n": red.n,
                "base": encode_id(red.base),
                "generators": [_word_to_json(w) for w in red.generators],
                "g": _word_to_json(red.g),
                "images": [_word_to_json(w) for w in red.images],
                "proper": red.proper,
                "verified": red.verified,
                "subgraph": None if red.subgraph is None else graph_to_json(red.subgraph),
            },
        }
    if isinstance(cert, Undecided):
        return {"verdict": "unknown", "reason": cert.reason, "cap": cert.cap}
    raise TypeError(f"not a certificate: {cert!r}")


def certificate_from_json(d):
    kind = d.get("verdict")
    if kind == "negative_immersions":
        mal = d.get("malnormal")
        return NegativeImmersions(
            directed_height=d["directed_height"],
            norm=d["norm"],
            m=d["m"],
            M=d["M"],
            N=d["N"],
            c=rational_from_json(d["c"]),
            diam_d_infinity=d["diam_d_infinity"],
            malnormal=None if mal is None else MalnormalBound(mal["d"], mal["M3"], rational_from_json(mal["c_prime"])),
            immersion=d["immersion"],
        )
    if kind == "zero_euler_witness":
        r = d.get("reducibility")
        red = None
        if r is not None:
            red = ReducibilityWitness(
                n=r["n"],
                base=decode_id(r["base"]),
                generators=tuple(_word_from_json(w) for w in r["generators"]),
                g=_word_from_json(r["g"]),
                images=tuple(_word_from_json(w) for w in r["images"]),
                proper=r["proper"],
                verified=r["verified"],
                subgraph=None if r["subgraph"] is None else graph_from_json(r["subgraph"]),
            )
        return ZeroEulerWitness(
            directed_height=_height_from_json(d["directed_height"]),
            Y=complex_from_json(d["Y"]),
            immersion={decode_id(k): decode_id(v) for k, v in d["immersion"]},
            invariant_subgraph=graph_from_json(d["invariant_subgraph"]),
            reducibility=red,
        )
    if kind == "unknown":
        return Undecided(d["reason"], d["cap"])
    raise FormatError(f"unknown certificate verdict {kind!r}")


# -- fold dumps -------------------------------------------------------------


def _move_to_json(mv) -> dict:
    if isinstance(mv, Collapse):
        return {"type": "collapse", "edge": encode_id(mv.edge), "rank_preserving": mv.rank_preserving}
    return {
        "type": "fold",
        "edge": encode_id(mv.edge),
        "onto": encode_id(mv.onto),
        "reversed": mv.reversed,
        "rank_preserving": mv.rank_preserving,
    }


def _move_from_json(d):
    if d["type"] == "collapse":
        return Collapse(decode_id(d["edge"]), d["rank_preserving"])
    return Fold(decode_id(d["edge"]), decode_id(d["onto"]), d["reversed"], d["rank_preserving"])


def factorization_to_json(fact: Factorization) -> dict:
    return {
        "pi1_injective": fact.pi1_injective,
        "moves": [_move_to_json(mv) for mv in fact.rho.moves],
        "normal_form": map_to_json(fact.normal_form),
        "quotient": map_to_json(fact.rho.quotient),
        "theta": map_to_json(fact.theta),
    }


def factorization_from_json(d) -> Factorization:
    nf = map_from_json(d["normal_form"])
    quotient = map_from_json(d["quotient"])
    theta = map_from_json(d["theta"])
    rho = FoldSequence(tuple(_move_from_json(m) for m in d["moves"]), quotient)
    return Factorization(nf, rho, theta)


# -- instance files ---------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A partial map ``psi: H -> F`` with optional name and comment."""

    F: Graph
    H: Graph
    psi: GraphMap
    name: str | None = None
    comment: str | None = None


def instance_to_json(inst: Instance) -> dict:
    out = {
        "F": graph_to_json(inst.F),
        "H": subgraph_to_json(inst.H),
        "psi": map_to_json(inst.psi, include_graphs=False),
    }
    if inst.name is not None:
        out["name"] = inst.name
    if inst.comment is not None:
        out["comment"] = inst.comment
    return out


def _algebraic(d) -> tuple:
    rank = d["rank"]
    basis = d["basis"]
    if not isinstance(basis, list) or not all(isinstance(x, str) and x for x in basis):
        raise FormatError("basis must be a list of non-empty strings")
    if len(basis) != rank or len(set(basis)) != rank:
        raise FormatError("rank must equal the number of distinct basis elements")
    hgens = d["H_generators"]
    if not isinstance(hgens, list) or len(set(hgens)) != len(hgens) or not set(hgens) <= set(basis):
        raise FormatError(
            "H_generators must be a subset of the basis; other free factors are not supported"
        )
    images = d["images"]
    if not isinstance(images, dict) or set(images) != set(hgens):
        raise FormatError("images must give exactly one word per H generator")
    F = rose(basis)
    H = rose([x for x in basis if x in hgens])
    eimg = {}
    for x in H.edges:
        w = images[x]
        try:
            word = parse_word(w, basis) if all(len(b) == 1 for b in basis) or not isinstance(w, str) else parse_word(w.split(), basis)
        except WordError as exc:
            raise FormatError(f"image of {x!r}: {exc}") from exc
        eimg[x] = EdgePath("v", word)
    return F, H, GraphMap(H, F, {"v": "v"}, eimg)


def instance_from_json(d) -> Instance:
    if not isinstance(d, dict):
        raise FormatError("instance must be a JSON object")
    geometric = "F" in d or "H" in d or "psi" in d
    algebraic = "rank" in d or "basis" in d or "images" in d or "H_generators" in d
    if geometric == algebraic:
        raise FormatError("instance must use exactly one of the geometric form (F, H, psi) or the algebraic form (rank, basis, H_generators, images)")
    try:
        if geometric:
            F = graph_from_json(_require(d, "F", "instance"))
            H = subgraph_from_json(_require(d, "H", "instance"), F)
            psi = map_from_json(_require(d, "psi", "instance"), H, F)
        else:
            for key in ("rank", "basis", "H_generators", "images"):
                _require(d, key, "instance")
            F, H, psi = _algebraic(d)
    except (KeyError, TypeError, GraphError) as exc:
        raise FormatError(f"malformed instance: {exc}") from exc
    return Instance(F, H, psi, d.get("name"), d.get("comment"))


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc
    return instance_from_json(data)


# -- DOT --------------------------------------------------------------------


def _dot_id(x) -> str:
    s = x if isinstance(x, str) else json.dumps(encode_id(x), sort_keys=True)
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Graph | TwoComplex, name: str = "G", highlight: Graph | None = None) -> str:
    """DOT digraph of a graph or of the 1-skeleton of a complex.

    Vertical edges are solid and horizontal edges dashed; edges of
    ``highlight`` are drawn bold.
    """
    kinds = g.kinds if isinstance(g, TwoComplex) else {}
    sk = g.skeleton if isinstance(g, TwoComplex) else g
    lines = [f"digraph {_dot_id(name)} {{"]
    for v in sk.vertices:
        lines.append(f"  {_dot_id(v)};")
    for e, t, h in sk.edge_triples():
        attrs = [f"label={_dot_id(e)}"]
        attrs.append("style=dashed" if kinds.get(e) == "horizontal" else "style=solid")
        if highlight is not None and highlight.has_edge(e):
            attrs.append("penwidth=2")
        lines.append(f"  {_dot_id(t)} -> {_dot_id(h)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
