"""Flat equilateral torus grids developed into the plane, for building PL fields by hand."""

from __future__ import annotations

import math
from typing import Dict, Mapping, Tuple

import numpy as np

from measfol.fields import PLTangentField
from measfol.generators import torus_grid_leaf

E1 = np.array([1.0, 0.0])
E2 = np.array([-0.5, math.sqrt(3) / 2])


def _det(P: np.ndarray) -> float:
    u, v = P[1] - P[0], P[2] - P[0]
    return float(u[0] * v[1] - u[1] * v[0])


def developed_torus(a: int, b: int, offset: int = 0, leaf_id: int = 0):
    """Leaf plus, for every facet, planar corner positions in positive order.

    All charts share one global frame (the developing map is a translation
    on each triangle), so one vertex vector per vertex gives a compatible
    PL field.
    """
    leaf, _ = torus_grid_leaf(a, b, offset=offset, leaf_id=leaf_id)
    vid = lambda i, j: offset + (i % a) * b + (j % b)
    where: Dict[Tuple[int, ...], Dict[int, np.ndarray]] = {}
    for i in range(a):
        for j in range(b):
            pos = {(di, dj): (i + di) * E1 + (j + dj) * E2 for di in (0, 1) for dj in (0, 1)}
            for tri in (((0, 0), (1, 0), (1, 1)), ((0, 0), (1, 1), (0, 1))):
                ids = [vid(i + di, j + dj) for di, dj in tri]
                where[tuple(sorted(ids))] = {v: pos[t] for v, t in zip(ids, tri)}
    flip = None
    charts = {}
    for f in leaf.facets:
        order = leaf.positive_order(f)
        P = np.array([where[f][v] for v in order])
        det = _det(P)
        if flip is None:
            flip = det < 0
        if flip:
            P = P * np.array([1.0, -1.0])
        assert _det(P) > 0
        charts[f] = P
    return leaf, charts


def field_on(leaf, charts, vectors: Mapping[int, np.ndarray]) -> PLTangentField:
    vecs = {f: np.array([vectors[v] for v in leaf.positive_order(f)], dtype=float) for f in leaf.facets}
    return PLTangentField(leaf, charts, vecs)
