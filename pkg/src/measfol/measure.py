"""Finite measured complexes: leaves, per-leaf transverse weights, simplex types."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx

from .errors import LeafViolation, UnknownSimplex
from .simplicial import (
    LeafComplex,
    Simplex,
    SurfaceGeometry,
    barycentric_subdivision,
    euler_char,
    order_key,
)

TypeId = Hashable


def type_sort_key(t: TypeId):
    """Total order on mixed int/str type ids (ints first)."""
    if isinstance(t, bool) or not isinstance(t, int):
        return (1, str(t))
    return (0, t)


@dataclass(frozen=True)
class TransverseMeasure:
    weights: Mapping[int, float]

    def __post_init__(self):
        for leaf_id, w in self.weights.items():
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"leaf {leaf_id} has non-positive weight {w}")

    def __getitem__(self, leaf_id: int) -> float:
        return self.weights[leaf_id]

    def scaled(self, factor: float) -> "TransverseMeasure":
        return TransverseMeasure({k: factor * w for k, w in self.weights.items()})


@dataclass(frozen=True, eq=False)
class SimplexTypeTable:
    """Partition of the simplices into types (the fibers of the prisms)."""

    type_of: Mapping[Simplex, TypeId]

    @cached_property
    def instances(self) -> Dict[TypeId, Tuple[Simplex, ...]]:
        out: Dict[TypeId, list] = defaultdict(list)
        for s, t in self.type_of.items():
            out[t].append(s)
        return {t: tuple(sorted(v, key=order_key)) for t, v in out.items()}

    def __getitem__(self, s: Simplex) -> TypeId:
        return self.type_of[s]

    def validate(self, leaves: Sequence[LeafComplex]) -> None:
        expected = {s for leaf in leaves for s in leaf.simplices()}
        got = set(self.type_of)
        if got != expected:
            extra = sorted(got - expected, key=order_key)
            missing = sorted(expected - got, key=order_key)
            raise ValueError(f"type table mismatch: missing {missing[:3]}, unknown {extra[:3]}")
        for t, inst in self.instances.items():
            if len({len(s) for s in inst}) != 1:
                raise ValueError(f"type {t!r} mixes dimensions")

    @classmethod
    def singletons(cls, leaves: Sequence[LeafComplex]) -> "SimplexTypeTable":
        table = {}
        for leaf in leaves:
            for s in sorted(leaf.simplices(), key=order_key):
                table[s] = len(table)
        return cls(table)

    def completed(self, leaves: Sequence[LeafComplex]) -> "SimplexTypeTable":
        """Fill simplices missing from a partial table with fresh singleton types."""
        table = dict(self.type_of)
        used = {str(t) for t in table.values()}
        fresh = 0
        for leaf in leaves:
            for s in sorted(leaf.simplices(), key=order_key):
                if s not in table:
                    while f"auto{fresh}" in used:
                        fresh += 1
                    table[s] = f"auto{fresh}"
                    fresh += 1
        return SimplexTypeTable(table)


@dataclass(frozen=True, eq=False)
class MeasuredComplex:
    """Finite union of vertex-disjoint leaves with transverse weights and types."""

    leaves: Tuple[LeafComplex, ...]
    measure: TransverseMeasure
    types: SimplexTypeTable = None
    geometry: Mapping[int, SurfaceGeometry] = field(default_factory=dict)
    coordinates: Optional[Mapping[int, Tuple[float, ...]]] = None
    exhaustion: Optional[Tuple[Tuple[Simplex, ...], ...]] = None
    name: str = ""

    def __post_init__(self):
        leaves = tuple(self.leaves)
        object.__setattr__(self, "leaves", leaves)
        if not leaves:
            raise ValueError("a measured complex needs at least one leaf")
        ids = [leaf.leaf_id for leaf in leaves]
        if len(set(ids)) != len(ids):
            raise ValueError("leaf ids must be distinct")
        if len({leaf.dim for leaf in leaves}) != 1:
            raise ValueError("all leaves must have the same dimension")
        seen: Dict[int, int] = {}
        for leaf in leaves:
            for v in leaf.vertices:
                if v in seen:
                    raise ValueError(f"vertex {v} shared by leaves {seen[v]} and {leaf.leaf_id}")
                seen[v] = leaf.leaf_id
        if set(self.measure.weights) != set(ids):
            raise ValueError("the measure must weight exactly the listed leaves")
        if self.types is None:
            object.__setattr__(self, "types", SimplexTypeTable.singletons(leaves))
        self.types.validate(leaves)

    @property
    def dim(self) -> int:
        return self.leaves[0].dim

    @cached_property
    def leaf_of_vertex(self) -> Dict[int, int]:
        return {v: leaf.leaf_id for leaf in self.leaves for v in leaf.vertices}

    @cached_property
    def leaf_by_id(self) -> Dict[int, LeafComplex]:
        return {leaf.leaf_id: leaf for leaf in self.leaves}

    def leaf_of(self, s: Simplex) -> LeafComplex:
        s = tuple(s)
        try:
            leaf = self.leaf_by_id[self.leaf_of_vertex[s[0]]]
        except (KeyError, IndexError):
            raise UnknownSimplex(s) from None
        if s not in leaf:
            raise UnknownSimplex(s)
        return leaf

    def weight(self, s: Simplex) -> float:
        return self.measure[self.leaf_of(s).leaf_id]

    def simplices(self, p: int) -> Tuple[Simplex, ...]:
        return tuple(s for leaf in self.leaves for s in leaf.simplices(p))

    @property
    def facets(self) -> Tuple[Simplex, ...]:
        return self.simplices(self.dim)

    def orientation(self, facet: Simplex) -> int:
        return self.leaf_of(facet).orientation[facet]

    def geometry_of(self, leaf_id: int) -> SurfaceGeometry:
        """Stored geometry, or the unit-length metric when none was given."""
        geo = self.geometry.get(leaf_id)
        if geo is None:
            geo = SurfaceGeometry.unit(self.leaf_by_id[leaf_id])
        return geo

    @cached_property
    def ergodic_model(self) -> bool:
        """True when shared simplex types link all leaves into a single class."""
        g = nx.Graph()
        g.add_nodes_from(leaf.leaf_id for leaf in self.leaves)
        for inst in self.types.instances.values():
            ids = sorted({self.leaf_of_vertex[s[0]] for s in inst})
            g.add_edges_from(zip(ids, ids[1:]))
        return nx.is_connected(g)

    def with_weights(self, weights: Mapping[int, float]) -> "MeasuredComplex":
        return MeasuredComplex(self.leaves, TransverseMeasure(dict(weights)), self.types,
                               self.geometry, self.coordinates, self.exhaustion, self.name)

    def scaled(self, factor: float) -> "MeasuredComplex":
        return self.with_weights(self.measure.scaled(factor).weights)


def single_leaf(leaf: LeafComplex, weight: float = 1.0, **kwargs) -> MeasuredComplex:
    return MeasuredComplex((leaf,), TransverseMeasure({leaf.leaf_id: weight}), **kwargs)


def mu(M: MeasuredComplex, A: Iterable[Simplex]) -> float:
    """Transverse mass of a simplex set: sum over leaves of weight times count."""
    counts: Dict[int, int] = defaultdict(int)
    for s in set(tuple(s) for s in A):
        counts[M.leaf_of(s).leaf_id] += 1
    return math.fsum(M.measure[i] * n for i, n in counts.items())


def chi_mu(M: MeasuredComplex) -> float:
    return math.fsum((-1) ** p * mu(M, M.simplices(p)) for p in range(M.dim + 1))


def chi_by_leaves(M: MeasuredComplex) -> float:
    return math.fsum(M.measure[leaf.leaf_id] * euler_char(leaf) for leaf in M.leaves)


class MassTransport(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


def mass_transport_check(M: MeasuredComplex, T: Iterable[Simplex], S: Iterable[Simplex],
                         alpha: Union[Mapping[Simplex, Simplex], Callable[[Simplex], Simplex]],
                         f: Union[Mapping[Simplex, float], Callable[[Simplex], float]]) -> MassTransport:
    """Integrate ``f`` over ``T`` directly and through the fibers of ``alpha: T -> S``."""
    amap = alpha.__getitem__ if isinstance(alpha, Mapping) else alpha
    fval = f.__getitem__ if isinstance(f, Mapping) else f
    T = [tuple(x) for x in T]
    S = {tuple(y) for y in S}
    fiber_sums: Dict[Simplex, list] = defaultdict(list)
    for x in T:
        y = tuple(amap(x))
        if y not in S:
            raise LeafViolation(f"alpha{x} = {y} is not in the target set")
        if M.leaf_of(x).leaf_id != M.leaf_of(y).leaf_id:
            raise LeafViolation(f"alpha moves {x} to another leaf")
        fiber_sums[y].append(fval(x))
    lhs = math.fsum(M.weight(x) * fval(x) for x in T)
    rhs = math.fsum(M.weight(y) * math.fsum(vals) for y, vals in fiber_sums.items())
    scale = max(1.0, abs(lhs), abs(rhs))
    return MassTransport(lhs, rhs, abs(lhs - rhs) <= 1e-12 * scale)


def subdivide(M: MeasuredComplex) -> MeasuredComplex:
    """Barycentric subdivision of every leaf; weights, geometry and coordinates follow."""
    leaves, geometry, coords = [], {}, {}
    next_id = 0
    for leaf in M.leaves:
        sd = barycentric_subdivision(leaf, first_id=next_id)
        next_id += sum(leaf.count(p) for p in range(leaf.dim + 1))
        leaves.append(sd)
        if leaf.leaf_id in M.geometry:
            geometry[leaf.leaf_id] = M.geometry[leaf.leaf_id].subdivide(sd)
        if M.coordinates is not None:
            for v, src in sd.provenance.items():
                pts = [M.coordinates[u] for u in src]
                coords[v] = tuple(sum(c) / len(pts) for c in zip(*pts))
    return MeasuredComplex(tuple(leaves), M.measure, None, geometry,
                           coords if M.coordinates is not None else None, None,
                           f"sd({M.name})" if M.name else "")
