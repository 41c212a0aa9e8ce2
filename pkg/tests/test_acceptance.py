"""Acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import sys
import time

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles as O  # noqa: E402
from measfol import generators as G  # noqa: E402
from measfol.approx import (circle_degree, circle_power_map, local_isometry_field, pullback_naturality_check,  # noqa: E402
                            sampled_winding, simplicial_approximation, star_condition_check, torus_cover)
from measfol.cancellation import (DualPath, Exhaustion, balanced_pairs, cancel, cancel_with_exhaustion,  # noqa: E402
                                  euler_representative, leaf_lower_bound, leaf_oriented, pairing_with_fundamental,
                                  path_coboundary)
from measfol.cochain import Cochain, boundary, coboundary, kronecker  # noqa: E402
from measfol.fields import (apply_difference, certify_nowhere_zero, characteristic_field, gauss_bonnet,  # noqa: E402
                            levi_civita, obstruction_cocycle, parallel_field, poincare_hopf_check,
                            random_direction_field)
from measfol.hodge import betti_vector  # noqa: E402
from measfol.measure import chi_mu, subdivide  # noqa: E402
from measfol.simplicial import SurfaceGeometry, dual_graph  # noqa: E402

CRITERIA = []


def criterion(number: int, title: str):
    def register(fn):
        CRITERIA.append((number, title, fn))
        return fn
    return register


def _link_oracle(X, v):
    faces = []
    for f in X.leaf.facets_at[v]:
        order = X.leaf.positive_order(f)
        k = order.index(v)
        P, V = X.points[f], X.vectors[f]
        faces.append((P[k], P[(k + 1) % 3], P[(k + 2) % 3], V[(k + 1) % 3], V[(k + 2) % 3]))
    return O.dense_link_index(faces)


@criterion(1, "Poincare-Hopf for the characteristic field")
def poincare_hopf():
    notes, ok = [], True
    for name, chi in (("octahedron", 2), ("icosahedron", 2), ("torus_grid(8,8)", 0), ("genus(2)", -2)):
        M = G.all_generators()[name]
        t = time.perf_counter()
        Z = characteristic_field(M.leaves[0], M.geometry_of(0))
        res = poincare_hopf_check(M, {0: Z})
        dt = time.perf_counter() - t
        good = res.passed and res.lhs == res.rhs == chi and dt < 1.0
        ok &= good
        notes.append(f"{name} {res.rhs:g} in {dt:.2f}s")
    return ok, "; ".join(notes)


@criterion(2, "characteristic indices equal (-1)^dim and the link-winding oracle")
def characteristic_indices():
    checked, bad = 0, []
    for name, M in G.all_generators().items():
        for leaf in M.leaves:
            Z = characteristic_field(leaf, M.geometry_of(leaf.leaf_id))
            sd2 = Z.field.leaf
            sd1 = sd2.parent
            for (kind, v), k in Z.raw_indices.items():
                base = sd1.provenance[sd2.provenance[v][0]]
                checked += 1
                if kind != "vertex" or k != (-1) ** (len(base) - 1) or _link_oracle(Z.field, v) != k:
                    bad.append((name, base))
            if len(Z.indices) != sum(leaf.count(p) for p in range(3)):
                bad.append((name, "missing zeros"))
    return not bad, f"{checked} zeros checked, {len(bad)} mismatches"


def _field_with_obstruction(M, conn, c):
    """A field whose obstruction cocycle is c, built from shortest dual paths (networkx)."""
    graph = dual_graph(M.leaves[0])
    lv = leaf_oriented(M, c)
    plus = sorted(f for f, v in lv.items() if v > 0)
    minus = sorted(f for f, v in lv.items() if v < 0)
    omega = Cochain.zero(1)
    for a, b in zip(plus, minus):
        path = DualPath(tuple(nx.shortest_path(graph, b, a)))
        omega = omega - path_coboundary(M, path)
    return apply_difference(parallel_field(conn), omega)


@criterion(3, "exact cancellation of balanced pairs on the 8x8 torus")
def cancellation_exactness():
    M = G.torus_grid(8, 8)
    conn = levi_civita(M)
    worst, ok = 0.0, True
    for k in range(1, 11):
        c = balanced_pairs(M, k, np.random.default_rng(100 + k))
        g = _field_with_obstruction(M, conn, c)
        ok &= obstruction_cocycle(g, conn) == c
        t = time.perf_counter()
        eta, _ = cancel(M, c)
        cert = certify_nowhere_zero(apply_difference(g, eta), conn)
        dt = time.perf_counter() - t
        worst = max(worst, dt)
        ok &= coboundary(eta, M) == c and bool(cert) and dt < 1.0
    return ok, f"k = 1..10, slowest {worst * 1000:.1f} ms"


@criterion(4, "octahedron traces stay above the obstruction and conserve the pairing")
def obstruction_lower_bound():
    M = G.octahedron()
    steps, ok = 0, True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        c = balanced_pairs(M, seed % 4, rng, euler_representative(M))
        _, trace = cancel(M, c, strict=False)
        for step in trace:
            steps += 1
            ok &= step.norm >= 2 and pairing_with_fundamental(M, step.cocycle) == 2
    return ok, f"{steps} steps over 20 inputs"


@criterion(5, "charge cannot cross leaves (sphere plus genus 2)")
def leaf_separation():
    M = G.two_leaf()
    c = euler_representative(M)
    _, trace = cancel(M, c)
    sums = {}
    for f, v in leaf_oriented(M, c).items():
        i = M.leaf_of(f).leaf_id
        sums[i] = sums.get(i, 0) + v
    bound = O.per_leaf_lower_bound(M.measure.weights, sums)
    ok = chi_mu(M) == 0 and trace.final.norm == 4 == bound == leaf_lower_bound(M, c)
    return ok, f"chi_mu {chi_mu(M):g}, residual {trace.final.norm:g}, bound {bound:g}"


@criterion(6, "exhaustion stability on the 16x16 torus")
def exhaustion_stability():
    M = G.torus_grid(16, 16)
    B = Exhaustion.concentric(M)
    ok = True
    for seed in range(10):
        c = balanced_pairs(M, 10, np.random.default_rng(seed))
        results, _ = cancel_with_exhaustion(M, c, B)
        for r in range(len(results) - 1):
            edges = B.edges(r)
            ok &= results[r + 1].eta.restricted(edges) == results[r].eta.restricted(edges)
        ok &= coboundary(results[-1].eta, M) == c
    return ok, f"{len(B)} stages, 10 inputs"


@criterion(7, "Betti numbers, Euler identity and subdivision invariance")
def hodge_euler():
    expected = {"octahedron": (1, 0, 1), "torus_grid(8,8)": (1, 2, 1), "genus(2)": (1, 4, 1)}
    ok, notes = True, []
    for name, want in expected.items():
        M = G.all_generators()[name]
        t = time.perf_counter()
        b = betti_vector(M)
        b_sd = betti_vector(subdivide(M))
        dt = time.perf_counter() - t
        alt = sum((-1) ** p * x for p, x in enumerate(b))
        ok &= all(abs(x - round(x)) <= 1e-6 for x in b) and np.allclose(b, want, atol=1e-6)
        ok &= abs(alt - chi_mu(M)) <= 1e-6 and np.allclose(b_sd, b, atol=1e-6) and dt < 5.0
        ok &= tuple(O.betti_by_rank(M.leaves[0].facets)) == want
        notes.append(f"{name} {tuple(int(round(x)) for x in b)} {dt:.2f}s")
    return ok, "; ".join(notes)


@criterion(8, "cochain calculus")
def cochain_calculus():
    ok, worst = True, 0.0
    for name, M in G.all_generators().items():
        rng = np.random.default_rng(8)
        for _ in range(100):
            p = int(rng.integers(0, 2))
            ci = Cochain(p, "int", {s: int(rng.integers(-9, 10)) for s in M.simplices(p)})
            zi = Cochain(p + 1, "int", {s: int(rng.integers(-9, 10)) for s in M.simplices(p + 1)})
            if p == 0:
                ok &= coboundary(coboundary(ci, M), M).is_zero()
            else:
                ok &= boundary(boundary(zi)).is_zero()
            c = Cochain(p, "real", {s: float(rng.normal()) for s in M.simplices(p)})
            z = Cochain(p + 1, "real", {s: float(rng.normal()) for s in M.simplices(p + 1)})
            err = abs(kronecker(coboundary(c, M), z, M) - kronecker(c, boundary(z), M))
            worst = max(worst, err)
    ok &= worst <= 1e-10
    return ok, f"max adjointness error {worst:.1e}"


@criterion(9, "Gauss-Bonnet for unit-length metrics")
def gauss_bonnet_all():
    worst = 0.0
    for M in G.all_generators().values():
        for leaf in M.leaves:
            res = gauss_bonnet(SurfaceGeometry.unit(leaf))
            worst = max(worst, abs(res.total_defect - res.expected))
    return worst <= 1e-9, f"max error {worst:.1e}"


@criterion(10, "simplicial approximation and naturality")
def approximation_naturality():
    g = circle_power_map(12, 12, 3)
    h = simplicial_approximation(g, max_level=5)
    ok = circle_degree(h) == 3 == sampled_winding(g) and star_condition_check(g, h).passed and h.is_simplicial()
    phi = torus_cover(2, 8, 8)
    conn = levi_civita(SurfaceGeometry.unit(phi.target))
    src_geo = SurfaceGeometry.unit(phi.source)
    src_conn = levi_civita(src_geo)
    for seed in range(10):
        field = random_direction_field(conn, np.random.default_rng(seed), seed % 3)
        res = pullback_naturality_check(phi, field, conn)
        local = local_isometry_field(phi, field, conn, src_geo, src_conn)
        ok &= res.passed and obstruction_cocycle(local, src_conn) == res.pulled_back_cocycle
    return ok, f"degree {circle_degree(h)} at level {h.level}; 10 fields on the double cover"


def _line(number, title, passed, detail):
    return f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    from conftest import ACCEPTANCE_LINES

    passed, detail = fn()
    line = _line(number, title, passed, detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


if __name__ == "__main__":
    failures = 0
    for number, title, fn in CRITERIA:
        passed, detail = fn()
        failures += not passed
        print(_line(number, title, passed, detail))
    sys.exit(1 if failures else 0)
