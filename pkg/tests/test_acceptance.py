"""Acceptance criteria 1-10, one PASS/FAIL line each."""

import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import ACCEPTANCE
from torus_height.cli import analyze
from torus_height.folding import fold_to_immersion, homotopy_equivalence_oracle
from torus_height.graphs import is_forest
from torus_height.maps import Piece, domain_filtration
from torus_height.serialize import load_instance
from torus_height.torus import (
    NegativeImmersions,
    ZeroEulerWitness,
    build_mapping_torus,
    check_combinatorial_immersion,
    complex_checks,
    decide_negative_immersions,
)
from torus_height.verifier import audit_instance, brute_force_preimage, random_cellular_map, rose_corpus

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
K_MAIN = 6
ISOLATED_RUNS = ((6, 1), (4, 2))


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    out = []
    for ci in rose_corpus():
        out.append((ci, decide_negative_immersions(ci.psi)))
    return out


@pytest.fixture(scope="module")
def finite(corpus):
    return [(ci, cert) for ci, cert in corpus if isinstance(cert, NegativeImmersions)]


@pytest.fixture(scope="module")
def infinite(corpus):
    return [(ci, cert) for ci, cert in corpus if isinstance(cert, ZeroEulerWitness)]


@pytest.fixture(scope="module")
def main_audits(finite):
    return [(ci, cert, audit_instance(ci.psi, K=K_MAIN, name=ci.name, certificate=cert)) for ci, cert in finite]


def test_criterion_01_fixture_verdicts():
    t0 = time.perf_counter()
    expected = [("shift", 1), ("fixed_loop", "infinite"), ("chain", 2), ("ascending", "infinite"), ("folded_circle", 1)]
    got = {}
    for name, _ in expected:
        rep, code, _ = analyze(load_instance(INSTANCES / f"{name}.json"), None)
        got[name] = (rep["directed_height"], rep["pi1_injective"], code)
    elapsed = time.perf_counter() - t0
    ok = all(got[n][0] == h for n, h in expected)
    ok &= got["folded_circle"][1] is False and got["folded_circle"][2] == 4
    ok &= all(got[n][1] for n, _ in expected[:4])
    ok &= elapsed < 1.0
    heights = ", ".join(str(got[n][0]) for n, _ in expected)
    report(1, ok, f"heights ({heights}); folded_circle pi1-injective={got['folded_circle'][1]}; {elapsed:.2f}s")


def test_criterion_02_filtration_matches_brute_force():
    t0 = time.perf_counter()
    corpus = rose_corpus()
    checks = mismatches = 0
    for ci in corpus:
        filt = domain_filtration(ci.psi)
        for i in range(5):
            rep = brute_force_preimage(ci.psi, i=i)
            checks += 1
            if rep.is_forest != is_forest(filt.D(i + 1)):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    report(2, mismatches == 0 and elapsed < 60, f"{len(corpus)} instances, {checks} checks, {mismatches} mismatches; {elapsed:.1f}s")


def test_criterion_03_main_bound(main_audits):
    count = sum(r.count for _, _, r in main_audits)
    bad = [(ci.name, f) for ci, _, r in main_audits for f in r.failures]
    worst = max(r.elapsed for _, _, r in main_audits)
    fails = sum(not rec.bound_ok for _, _, r in main_audits for rec in r.records)
    ok = not bad and fails == 0 and worst < 600
    report(3, ok, f"{len(main_audits)} finite instances, {count} Y with |Y|_2 <= {K_MAIN}, {fails} bound failures; worst instance {worst:.1f}s")


def test_criterion_04_zero_euler_witnesses(infinite):
    fails = 0
    for ci, cert in infinite:
        X = build_mapping_torus(ci.psi).complex
        chk = complex_checks(cert.Y)
        good = chk.chi == 0 and chk.collapsed and not chk.isolated_edges and chk.connected
        good &= check_combinatorial_immersion(cert.Y, X, cert.immersion)
        fails += not good
    report(4, fails == 0 and len(infinite) > 0, f"{len(infinite)} infinite-height instances, {fails} failures")


def test_criterion_05_constants(corpus):
    cs = [cert.c for _, cert in corpus if isinstance(cert, NegativeImmersions)]
    cs += [cert.malnormal.c_prime for _, cert in corpus if isinstance(cert, NegativeImmersions) and cert.malnormal]
    in_range = all(0 < c < 1 for c in cs)
    c_a = decide_negative_immersions(load_instance(INSTANCES / "shift.json").psi).c
    c_c = decide_negative_immersions(load_instance(INSTANCES / "chain.json").psi).c
    ok = in_range and c_a == Fraction(1, 16) and c_c == Fraction(1, 36)
    report(5, ok, f"{len(cs)} constants in (0,1): {in_range}; shift c = {c_a}, chain c = {c_c}")


def test_criterion_06_splitting_bound(main_audits):
    recs = [rec for _, _, r in main_audits for rec in r.records]
    fails = sum(rec.splitting_ok is not True for rec in recs)
    report(6, fails == 0, f"{len(recs)} Y checked for chi(O_Y) >= chi(Y)/c, {fails} failures")


def test_criterion_07_forest_preimage_constant(corpus, main_audits):
    forest = {ci.name for ci, _ in corpus if brute_force_preimage(ci.psi, i=1).is_forest}
    emitted = {ci.name for ci, cert in corpus if isinstance(cert, NegativeImmersions) and cert.malnormal}
    audited = [(ci, r) for ci, _, r in main_audits if ci.name in forest]
    fails = sum(rec.malnormal_ok is not True for _, r in audited for rec in r.records)
    count = sum(r.count for _, r in audited)
    ok = forest == emitted and fails == 0
    report(7, ok, f"{len(forest)} forest-preimage instances, c' emitted for {len(emitted & forest)}, {count} Y checked, {fails} failures")


def test_criterion_08_folding():
    t0 = time.perf_counter()
    n = 10_000
    bad = 0
    for seed in range(n):
        psi = random_cellular_map(random.Random(seed))
        fact = fold_to_immersion(psi)
        q, th = fact.rho.quotient, fact.theta
        good = fact.check() and th.is_immersion
        for v in psi.domain.vertices:
            good &= th.vertex_images[q.vertex_images[v]] == psi.vertex_images[v]
        pieces = {}
        for p in fact.normal_form.domain.edges:
            e, k = (p.edge, p.k) if isinstance(p, Piece) else (p, 0)
            pieces.setdefault(e, []).append((k, p))
        for e in psi.domain.edges:
            steps = ()
            for _, p in sorted(pieces.get(e, []), key=lambda kp: kp[0]):
                steps += th.path_image(q.edge_images[p]).steps
            good &= steps == psi.edge_images[e].steps
        good &= fact.pi1_injective == homotopy_equivalence_oracle(fact)
        bad += not good
    elapsed = time.perf_counter() - t0
    report(8, bad == 0, f"{n} random cellular maps, {bad} disagreements; {elapsed:.1f}s")


def test_criterion_09_reducibility(infinite):
    fails = 0
    for _, cert in infinite:
        red = cert.reducibility
        fails += red is None or red.n != 1 or not red.verified
    report(9, fails == 0 and len(infinite) > 0, f"{len(infinite)} infinite-height instances, {fails} unverified witnesses")


def test_criterion_10_isolated_edges(finite):
    parts = []
    ok = True
    for K, L in ISOLATED_RUNS:
        t0 = time.perf_counter()
        count = fails = with_isolated = 0
        for ci, cert in finite:
            r = audit_instance(ci.psi, K=K, max_isolated=L, name=ci.name, certificate=cert)
            count += r.count
            fails += len(r.failures)
            with_isolated += sum(rec.isolated_edges > 0 for rec in r.records)
        ok &= fails == 0
        parts.append(f"K={K} with <= {L} isolated edges: {count} Y ({with_isolated} with isolated edges), {fails} failures, {time.perf_counter() - t0:.0f}s")
    report(10, ok, "; ".join(parts))
