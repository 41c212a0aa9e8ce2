from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from measfol import generators as G
from measfol.errors import LeafViolation
from measfol.measure import (SimplexTypeTable, chi_by_leaves, chi_mu, mass_transport_check, mu, subdivide)


def test_mu_of_simple_sets():
    M = G.octahedron(0.5)
    assert mu(M, M.simplices(2)) == 4.0
    assert mu(M, []) == 0
    T = G.two_leaf((1.0, 2.0))
    one_each = [T.leaves[0].facets[0], T.leaves[1].facets[0]]
    assert mu(T, one_each) == 3.0


@pytest.mark.parametrize("M, chi", [(G.octahedron(), 2), (G.torus_grid(8, 8, 0.3), 0), (G.two_leaf(), 0),
                                    (G.genus(2), -2), (G.suspension(1, 5), 0)])
def test_chi_mu(M, chi):
    assert math.isclose(chi_mu(M), chi, abs_tol=1e-12)
    assert math.isclose(chi_by_leaves(M), chi, abs_tol=1e-12)


def test_mass_transport_least_vertex():
    M = G.octahedron()
    res = mass_transport_check(M, M.simplices(2), M.simplices(0), lambda f: (f[0],), lambda f: 1.0)
    assert res.lhs == res.rhs == 8 and res.passed


@given(st.lists(st.integers(-50, 50), min_size=8, max_size=8))
def test_mass_transport_identity_and_first_face(values):
    M = G.octahedron(0.7)
    f = dict(zip(M.facets, values))
    assert mass_transport_check(M, M.facets, M.facets, lambda s: s, f).passed
    res = mass_transport_check(M, M.facets, M.simplices(1), lambda s: s[1:], f)
    assert res.passed and math.isclose(res.lhs, 0.7 * sum(values))


def test_mass_transport_refuses_to_cross_leaves():
    M = G.two_leaf()
    a, b = M.leaves[0].facets[0], M.leaves[1].facets[0]
    with pytest.raises(LeafViolation):
        mass_transport_check(M, [a], [b], lambda s: b, lambda s: 1.0)


def test_suspension_types_have_q_instances_of_weight_one_over_q():
    M = G.suspension(1, 5)
    sizes = {len(inst) for inst in M.types.instances.values()}
    assert sizes == {5}
    assert math.isclose(M.measure[0], 0.2)
    assert M.ergodic_model


def test_two_leaf_is_not_ergodic_model():
    assert not G.two_leaf().ergodic_model


def test_type_table_must_respect_dimension():
    M = G.octahedron()
    K = M.leaves[0]
    table = dict(SimplexTypeTable.singletons(M.leaves).type_of)
    table[K.skeleton[1][0]] = table[K.skeleton[0][0]]
    with pytest.raises(ValueError, match="mixes dimensions"):
        SimplexTypeTable(table).validate(M.leaves)
    with pytest.raises(ValueError, match="mismatch"):
        SimplexTypeTable({K.skeleton[0][0]: 0}).validate(M.leaves)


@given(st.floats(0.01, 100.0))
def test_chi_mu_is_linear_in_weights(lam):
    M = G.two_leaf((1.0, 3.0))
    assert math.isclose(chi_mu(M.scaled(lam)), lam * chi_mu(M), rel_tol=1e-12, abs_tol=1e-9)


def test_subdivision_keeps_chi_mu():
    M = G.two_leaf((0.25, 1.5))
    assert math.isclose(chi_mu(subdivide(M)), chi_mu(M), abs_tol=1e-12)
