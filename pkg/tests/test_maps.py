import pytest
from hypothesis import given, settings, strategies as st

from conftest import rose_map
from torus_height.folding import rose
from torus_height.graphs import EdgePath, Graph, GraphError, is_forest
from torus_height.maps import (
    INFINITE,
    GraphMap,
    MapError,
    NotAnImmersion,
    directed_height,
    domain_filtration,
    fan_from_edge,
    generalized_compose,
    identity_map,
    norm,
    validate_map,
)
from torus_height.verifier import random_instance


def test_flags(shift, folded_circle):
    f = validate_map(shift)
    assert f.cellular and f.combinatorial and f.immersion
    assert not validate_map(folded_circle).immersion
    assert validate_map(identity_map(rose("ab"))).immersion


def test_direction_collision_in_folded_circle(folded_circle):
    # at w the backward direction of a1 and the forward direction of a2 both map to a1^-1
    assert folded_circle.direction_image(("a1", -1)) == folded_circle.direction_image(("a2", 1))


def test_endpoint_mismatch_rejected():
    F = Graph(["v", "w"], [("a", "v", "w")])
    with pytest.raises(MapError):
        GraphMap(F, F, {"v": "v", "w": "w"}, {"a": EdgePath("v", ())})


def test_compose_examples(shift, chain):
    F = shift.codomain
    res = generalized_compose(shift, identity_map(F))
    assert res.map.domain == shift.domain and res.map.edge_images == shift.edge_images
    assert generalized_compose(shift, shift).domain.edges == ()
    res = generalized_compose(chain, chain)
    assert res.domain.edges == ("a",)
    assert res.map.edge_images["a"].steps == (("c", 1),)


def test_compose_needs_containment(shift):
    other = rose_map("xy", "x", {"x": "y"})
    with pytest.raises(MapError):
        generalized_compose(other, shift)


def test_filtrations(shift, fixed_loop, chain):
    f = domain_filtration(shift)
    assert f.D(1) == rose("a") and f.D(2) == Graph(["v"]) and f.d_infinity == Graph(["v"]) and f.m == 1
    f = domain_filtration(fixed_loop)
    assert all(f.D(i) == rose("a") for i in range(1, 6))
    assert not is_forest(f.d_infinity)
    f = domain_filtration(chain)
    assert f.D(1) == rose("ab") and f.D(2) == rose("a") and f.D(3) == Graph(["v"]) and f.m == 2


def test_filtration_needs_immersion(ascending):
    with pytest.raises(NotAnImmersion):
        domain_filtration(ascending)


def test_heights(shift, fixed_loop, chain):
    assert directed_height(shift) == 1
    assert directed_height(fixed_loop) == INFINITE
    assert directed_height(chain) == 2


def test_fans(chain, fixed_loop):
    fb = fan_from_edge(chain, None, "b")
    assert fb.length == 1 and not fb.infinite
    assert [r.steps for r in fb.rims] == [(("b", 1),), (("c", 1),)]
    assert fan_from_edge(chain, None, "a").length == 2
    assert fan_from_edge(fixed_loop, None, "a").infinite
    with pytest.raises(GraphError):
        fan_from_edge(chain, None, "c")


def test_norms(shift, ascending):
    assert norm(shift) == 1
    assert norm(ascending) == 2
    assert norm(rose_map("ab", "a", {"a": "abab"})) == 4
    empty = GraphMap(Graph(["v"]), rose("a"), {"v": "v"}, {})
    assert norm(empty) == 1


@st.composite
def immersions(draw):
    petals = draw(st.integers(1, 4))
    k = draw(st.integers(1, petals))
    seed = draw(st.integers(0, 10**6))
    _, _, psi = random_instance(seed, petals, k, draw(st.integers(1, 3)))
    return psi


@given(immersions())
@settings(max_examples=150, deadline=None)
def test_filtration_invariants(psi):
    f = domain_filtration(psi)
    H = psi.domain
    for i in range(1, f.stabilization_index + 2):
        assert f.D(i + 1).is_subgraph_of(f.D(i))
    assert f.stabilization_index <= len(H.vertices) + len(H.edges)
    counted = sum(len(s.edges) for s in f.strata) + len(f.d_infinity.edges)
    assert counted == len(H.edges)
    ht = directed_height(psi)
    if ht != INFINITE:
        assert is_forest(f.d_infinity)
        for j in range(ht, f.stabilization_index + 2):
            assert is_forest(f.D(j + 1))
    assert (ht == 0) == is_forest(H)
    finite = []
    for e in H.edges:
        fan = fan_from_edge(psi, H, e)
        if e in f.stratum_of:
            assert fan.length == f.stratum_of[e] and not fan.infinite
            finite.append(fan.length)
        else:
            assert fan.infinite
    assert f.m == max(finite, default=0)
