from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from measfol import generators as G
from measfol.cochain import (Cochain, boundary, coboundary, coboundary_matrix, from_vector, fundamental_cycle,
                             kronecker, kronecker_oriented, l1_norm, to_vector)
from measfol.errors import DegreeMismatch, DegreeOverflow, DegreeUnderflow, UnknownSimplex
from measfol.simplicial import OrientedSimplex

MODELS = {name: M for name, M in G.all_generators().items()}


def random_cochain(M, p, rng, ring="int", lo=-3, hi=3):
    if ring == "int":
        return Cochain(p, "int", {s: int(rng.integers(lo, hi + 1)) for s in M.simplices(p)})
    return Cochain(p, "real", {s: float(rng.normal()) for s in M.simplices(p)})


def test_vertex_indicator_coboundary():
    M = G.octahedron()
    v = 0
    dc = coboundary(Cochain.indicator([(v,)], 0), M)
    expected = {e: (1 if e[1] == v else -1) for e in M.simplices(1) if v in e}
    assert dc.values == expected and len(expected) == 4


def test_zero_and_degree_errors():
    M = G.octahedron()
    assert coboundary(Cochain.zero(1), M).is_zero()
    with pytest.raises(DegreeOverflow):
        coboundary(Cochain.zero(2), M)
    with pytest.raises(DegreeUnderflow):
        boundary(Cochain.zero(0))
    with pytest.raises(DegreeMismatch):
        kronecker(Cochain.zero(1), Cochain.zero(2), M)
    with pytest.raises(UnknownSimplex):
        coboundary(Cochain.indicator([(999,)], 0), M)
    with pytest.raises(ValueError):
        Cochain(1, "int", {(0, 2): 0.5})
    with pytest.raises(ValueError):
        Cochain(1, "int", {(2, 0): 1})


def test_single_face_boundary():
    z = Cochain.indicator([OrientedSimplex((1, 2, 3), 1)], 2)
    assert boundary(z).values == {(2, 3): 1, (1, 3): -1, (1, 2): 1}


def test_antisymmetric_evaluation():
    c = Cochain(1, "int", {(0, 2): 5})
    assert c(OrientedSimplex((0, 2), -1)) == -5 and c((0, 2)) == 5


def test_constant_pairings():
    M = G.octahedron(0.5)
    one = Cochain(2, "int", {f: 1 for f in M.facets})
    assert kronecker(one, one, M) == 4.0
    assert kronecker_oriented(one, one, M) == 4.0
    assert l1_norm(Cochain.indicator(G.octahedron().facets[:3], 2), G.octahedron()) == 3


@pytest.mark.parametrize("name", sorted(MODELS))
def test_coboundary_matrices_match_oracle_boundary(name):
    """The transpose of d equals the boundary matrix built directly from the facet list."""
    M = MODELS[name]
    for leaf in M.leaves:
        for p in (0, 1):
            D = coboundary_matrix(leaf, p).toarray()
            lo = {s: i for i, s in enumerate(leaf.skeleton[p])}
            faces = O.all_faces(leaf.facets)
            oracle = np.zeros_like(D)
            for r, row in enumerate(O.boundary_rows(leaf.facets, p + 1)):
                sigma = faces[p + 1][r]
                for col, v in row.items():
                    oracle[leaf.index[p + 1][sigma], lo[faces[p][col]]] = v
            assert np.array_equal(D, oracle)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_d_squared_and_boundary_squared_vanish(name):
    M = MODELS[name]
    rng = np.random.default_rng(1)
    c = random_cochain(M, 0, rng)
    assert coboundary(coboundary(c, M), M).is_zero()
    z = random_cochain(M, 2, rng)
    assert boundary(boundary(z)).is_zero()


@pytest.mark.parametrize("name", sorted(MODELS))
@given(seed=st.integers(0, 2 ** 32 - 1), p=st.sampled_from([0, 1]))
def test_adjointness_of_d_and_boundary(name, seed, p):
    M = MODELS[name]
    rng = np.random.default_rng(seed)
    c = random_cochain(M, p, rng, "real")
    z = random_cochain(M, p + 1, rng, "real")
    lhs = kronecker(coboundary(c, M), z, M)
    rhs = kronecker(c, boundary(z), M)
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-10)


def test_fundamental_cycle_is_a_cycle():
    for M in MODELS.values():
        assert boundary(fundamental_cycle(M)).is_zero()


def test_vector_round_trip():
    M = G.torus_grid(4, 4)
    rng = np.random.default_rng(3)
    c = random_cochain(M, 1, rng, "real")
    leaf = M.leaves[0]
    back = from_vector(to_vector(c, leaf), leaf, 1)
    assert back == c


@given(st.dictionaries(st.sampled_from(G.octahedron().simplices(1)), st.integers(-5, 5)),
       st.dictionaries(st.sampled_from(G.octahedron().simplices(1)), st.integers(-5, 5)))
def test_cochain_arithmetic_is_linear(a, b):
    M = G.octahedron()
    A, B = Cochain(1, "int", a), Cochain(1, "int", b)
    assert coboundary(A + B, M) == coboundary(A, M) + coboundary(B, M)
    assert (A - A).is_zero()
    assert l1_norm(A + B, M) <= l1_norm(A, M) + l1_norm(B, M)
