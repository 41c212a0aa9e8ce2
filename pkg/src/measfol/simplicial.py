"""Finite closed oriented pseudo-manifolds, their face lattice and subdivisions.

A simplex is stored as the strictly increasing tuple of its vertex ids.  An
orientation is a sign relative to that canonical order, so ``(s, -1)`` is the
oppositely oriented copy of ``(s, +1)``.  The global total order on simplices
is lexicographic in ``(dimension, vertex tuple)``.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import (
    DegenerateMetric,
    Disconnected,
    IndexOutOfRange,
    NonClosed,
    NonManifoldVertex,
    NonOrientable,
)

Simplex = Tuple[int, ...]


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq`` (entries must be distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def order_key(s: Simplex) -> Tuple[int, Simplex]:
    return (len(s) - 1, s)


def simplex_key(s: Iterable[int]) -> str:
    """Dash-joined sorted vertex ids, the key grammar of the JSON formats."""
    return "-".join(str(v) for v in sorted(s))


def parse_key(key: str) -> Simplex:
    try:
        verts = tuple(sorted(int(part) for part in key.split("-")))
    except ValueError as exc:
        raise ValueError(f"malformed simplex key {key!r}") from exc
    if len(set(verts)) != len(verts):
        raise ValueError(f"repeated vertex in simplex key {key!r}")
    return verts


@dataclass(frozen=True)
class OrientedSimplex:
    vertices: Simplex
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if any(a >= b for a, b in zip(self.vertices, self.vertices[1:])):
            raise ValueError("vertices must be strictly increasing")

    @classmethod
    def from_sequence(cls, seq: Sequence[int]) -> "OrientedSimplex":
        """Oriented simplex whose orientation is the order of ``seq``."""
        if len(set(seq)) != len(seq):
            raise ValueError("vertices must be pairwise distinct")
        return cls(tuple(sorted(seq)), perm_sign(seq))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def __neg__(self) -> "OrientedSimplex":
        return OrientedSimplex(self.vertices, -self.sign)


def faces(sigma: OrientedSimplex, i: int) -> OrientedSimplex:
    """The i-th face (drop the i-th vertex) with its induced orientation.

    The induced sign is ``sigma.sign * (-1)**i`` so that the boundary of
    ``+(a, b, c)`` is ``(b, c) - (a, c) + (a, b)``.
    """
    if not 0 <= i <= sigma.dim or sigma.dim == 0:
        raise IndexOutOfRange(f"face index {i} out of range for a {sigma.dim}-simplex")
    verts = sigma.vertices[:i] + sigma.vertices[i + 1:]
    return OrientedSimplex(verts, sigma.sign * (-1) ** i)


@dataclass(frozen=True, eq=False)
class LeafComplex:
    """A validated closed, connected, coherently oriented pure complex.

    ``orientation`` maps each canonical facet to the sign of the leaf
    orientation relative to the sorted vertex order.  Subdivisions carry
    ``provenance`` (new vertex -> simplex of ``parent`` it is the barycenter
    of).
    """

    leaf_id: int
    dim: int
    facets: Tuple[Simplex, ...]
    orientation: Mapping[Simplex, int]
    provenance: Optional[Mapping[int, Simplex]] = None
    parent: Optional["LeafComplex"] = field(default=None, repr=False)

    @cached_property
    def skeleton(self) -> Tuple[Tuple[Simplex, ...], ...]:
        """``skeleton[p]`` lists the p-simplices in global order."""
        by_dim = [set() for _ in range(self.dim + 1)]
        for f in self.facets:
            for k in range(1, self.dim + 2):
                by_dim[k - 1].update(itertools.combinations(f, k))
        return tuple(tuple(sorted(s)) for s in by_dim)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(v for (v,) in self.skeleton[0])

    def simplices(self, p: Optional[int] = None) -> Tuple[Simplex, ...]:
        if p is None:
            return tuple(itertools.chain.from_iterable(self.skeleton))
        if not 0 <= p <= self.dim:
            return ()
        return self.skeleton[p]

    def count(self, p: int) -> int:
        return len(self.simplices(p))

    @cached_property
    def index(self) -> Tuple[Dict[Simplex, int], ...]:
        """Position of each p-simplex inside ``skeleton[p]``."""
        return tuple({s: i for i, s in enumerate(sk)} for sk in self.skeleton)

    def __contains__(self, s) -> bool:
        s = tuple(s)
        return 0 < len(s) <= self.dim + 1 and s in self.index[len(s) - 1]

    @cached_property
    def cofaces(self) -> Dict[Simplex, List[Tuple[Simplex, int]]]:
        """For each simplex of dimension < n: ``(coface, i)`` with ``face_i(coface) = simplex``."""
        out: Dict[Simplex, List[Tuple[Simplex, int]]] = defaultdict(list)
        for p in range(1, self.dim + 1):
            for s in self.skeleton[p]:
                for i in range(len(s)):
                    out[s[:i] + s[i + 1:]].append((s, i))
        return dict(out)

    @cached_property
    def facet_neighbors(self) -> Dict[Simplex, Tuple[Tuple[Simplex, Simplex], ...]]:
        """facet -> ((neighbor facet, shared principal face), ...) in global order."""
        nbrs: Dict[Simplex, list] = {f: [] for f in self.facets}
        for face in self.skeleton[self.dim - 1]:
            a, b = (c for c, _ in self.cofaces[face])
            nbrs[a].append((b, face))
            nbrs[b].append((a, face))
        return {f: tuple(sorted(v)) for f, v in nbrs.items()}

    @cached_property
    def facets_at(self) -> Dict[int, Tuple[Simplex, ...]]:
        """vertex -> facets containing it, in global order."""
        out: Dict[int, list] = defaultdict(list)
        for f in self.facets:
            for v in f:
                out[v].append(f)
        return {v: tuple(fs) for v, fs in out.items()}

    def star(self, v: int) -> Tuple[Simplex, ...]:
        return tuple(s for s in self.simplices() if v in s)

    def link(self, v: int) -> Tuple[Simplex, ...]:
        return tuple(sorted((tuple(u for u in s if u != v) for s in self.star(v) if len(s) > 1),
                            key=order_key))

    def oriented_facet(self, f: Simplex) -> OrientedSimplex:
        return OrientedSimplex(f, self.orientation[f])

    def positive_order(self, f: Simplex) -> Simplex:
        """Vertices of facet ``f`` listed in an order realizing the leaf orientation."""
        if self.orientation[f] > 0:
            return f
        return (f[1], f[0]) + f[2:]

    def root(self) -> "LeafComplex":
        leaf = self
        while leaf.parent is not None:
            leaf = leaf.parent
        return leaf

    @cached_property
    def base_position(self) -> Dict[int, Dict[int, float]]:
        """Barycentric coordinates of every vertex in the root complex."""
        if self.parent is None:
            return {v: {v: 1.0} for v in self.vertices}
        up = self.parent.base_position
        out = {}
        for v in self.vertices:
            src = self.provenance[v]
            acc: Dict[int, float] = defaultdict(float)
            for u in src:
                for w, t in up[u].items():
                    acc[w] += t / len(src)
            out[v] = dict(acc)
        return out


def build_complex(facets: Sequence[Sequence[int]], signs: Optional[Sequence[int]] = None,
                  leaf_id: int = 0) -> LeafComplex:
    """Validate a facet list and return the oriented leaf it describes.

    Each facet's orientation is the order its vertices are listed in,
    multiplied by ``signs[i]`` when signs are supplied; supplied orientations
    must be coherent.  Without signs a coherent orientation is propagated from
    the first facet.
    """
    facets = [tuple(int(v) for v in f) for f in facets]
    if not facets:
        raise ValueError("a complex needs at least one facet")
    n = len(facets[0]) - 1
    if n < 1 or any(len(f) != n + 1 for f in facets):
        raise ValueError("all facets must have the same dimension >= 1")
    if signs is not None and len(signs) != len(facets):
        raise ValueError("one sign per facet is required")

    given: Dict[Simplex, int] = {}
    for i, f in enumerate(facets):
        if len(set(f)) != len(f):
            raise ValueError(f"facet {f} repeats a vertex")
        canon = tuple(sorted(f))
        if canon in given:
            raise ValueError(f"facet {canon} listed twice")
        s = perm_sign(f)
        if signs is not None:
            if signs[i] not in (1, -1):
                raise ValueError("signs must be +1 or -1")
            s *= signs[i]
        given[canon] = s

    incidence: Dict[Simplex, List[Tuple[Simplex, int]]] = defaultdict(list)
    for f in given:
        for i in range(n + 1):
            incidence[f[:i] + f[i + 1:]].append((f, i))
    bad = [face for face, cf in incidence.items() if len(cf) != 2]
    if bad:
        bad.sort()
        raise NonClosed(f"{len(bad)} principal faces do not lie in exactly two facets, e.g. {bad[0]}")

    adj: Dict[Simplex, List[Tuple[Simplex, int, int]]] = defaultdict(list)
    for face, ((a, i), (b, j)) in incidence.items():
        # coherent iff orient[a]*(-1)^i == -orient[b]*(-1)^j
        adj[a].append((b, i, j))
        adj[b].append((a, j, i))

    order = sorted(given)
    first = tuple(sorted(facets[0]))
    orient: Dict[Simplex, int] = {first: given[first]}
    queue = deque([first])
    while queue:
        a = queue.popleft()
        for b, i, j in adj[a]:
            want = -orient[a] * (-1) ** (i + j)
            if b not in orient:
                orient[b] = want
                queue.append(b)
            elif orient[b] != want:
                raise NonOrientable("no coherent orientation exists")
    if len(orient) != len(given):
        raise Disconnected(f"dual graph has {len(given) - len(orient)} unreachable facets")
    if signs is not None and any(orient[f] != given[f] for f in order):
        raise NonOrientable("supplied orientation signs are not coherent")
    return LeafComplex(leaf_id=leaf_id, dim=n, facets=tuple(order), orientation=orient)


def containing_facets(K: LeafComplex) -> Dict[Simplex, Simplex]:
    """Each simplex mapped to the first facet (global order) containing it."""
    out: Dict[Simplex, Simplex] = {}
    for f in K.facets:
        for k in range(1, len(f) + 1):
            for s in itertools.combinations(f, k):
                out.setdefault(s, f)
    return out


def euler_char(K: LeafComplex) -> int:
    return sum((-1) ** p * K.count(p) for p in range(K.dim + 1))


def barycentric_subdivision(K: LeafComplex, first_id: int = 0) -> LeafComplex:
    """sd(K), with new vertex ids ``first_id + position in the global order``.

    The flag ``s_0 < s_1 < ... < s_n`` of a facet ``F`` gives the facet
    ``(b(s_0), ..., b(s_n))`` of sd(K); listed in that order it has the sign
    of the permutation of ``F``'s sorted vertices that generates the flag, so
    the leaf orientation of ``F`` transfers by that sign.
    """
    all_simplices = sorted(K.simplices(), key=order_key)
    bary = {s: first_id + i for i, s in enumerate(all_simplices)}
    new_facets: List[Tuple[int, ...]] = []
    new_signs: List[int] = []
    for f in K.facets:
        for perm in itertools.permutations(range(len(f))):
            flag = [tuple(sorted(f[k] for k in perm[: j + 1])) for j in range(len(f))]
            new_facets.append(tuple(bary[s] for s in flag))
            new_signs.append(K.orientation[f] * perm_sign(perm))
    sd = build_complex(new_facets, new_signs, leaf_id=K.leaf_id)
    return LeafComplex(
        leaf_id=K.leaf_id,
        dim=K.dim,
        facets=sd.facets,
        orientation=sd.orientation,
        provenance={b: s for s, b in bary.items()},
        parent=K,
    )


def dual_graph(K) -> nx.Graph:
    """Facets as nodes, shared principal faces as edges (attribute ``face``).

    Accepts a single leaf or anything with a ``leaves`` sequence.
    """
    leaves = getattr(K, "leaves", None) or [K]
    g = nx.Graph()
    for leaf in leaves:
        g.add_nodes_from(leaf.facets, leaf=leaf.leaf_id)
        for face in leaf.skeleton[leaf.dim - 1]:
            (a, _), (b, _) = leaf.cofaces[face]
            g.add_edge(a, b, face=face)
    return g


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Cone metric on a surface leaf: one positive length per edge."""

    leaf: LeafComplex
    lengths: Mapping[Simplex, float]

    def __post_init__(self):
        if self.leaf.dim != 2:
            raise DegenerateMetric("geometry is only defined on surface leaves")
        missing = [e for e in self.leaf.skeleton[1] if e not in self.lengths]
        if missing:
            raise DegenerateMetric(f"missing length for edge {missing[0]}")
        for e in self.leaf.skeleton[1]:
            if not self.lengths[e] > 0:
                raise DegenerateMetric(f"edge {e} has non-positive length")
        for a, b, c in self.leaf.facets:
            x, y, z = self.lengths[(a, b)], self.lengths[(a, c)], self.lengths[(b, c)]
            if not (x < y + z and y < x + z and z < x + y):
                raise DegenerateMetric(f"face {(a, b, c)} violates the strict triangle inequality")

    @classmethod
    def unit(cls, leaf: LeafComplex) -> "SurfaceGeometry":
        return cls(leaf, {e: 1.0 for e in leaf.skeleton[1]})

    @classmethod
    def from_coordinates(cls, leaf: LeafComplex, coords: Mapping[int, Sequence[float]]) -> "SurfaceGeometry":
        pts = {v: np.asarray(coords[v], dtype=float) for v in leaf.vertices}
        return cls(leaf, {(u, v): float(np.linalg.norm(pts[u] - pts[v])) for u, v in leaf.skeleton[1]})

    def length(self, u: int, v: int) -> float:
        return self.lengths[(u, v) if u < v else (v, u)]

    def corner_angle(self, face: Simplex, v: int) -> float:
        """Interior angle of ``face`` at ``v`` by the law of cosines."""
        u, w = (x for x in face if x != v)
        a, b, c = self.length(v, u), self.length(v, w), self.length(u, w)
        cos = (a * a + b * b - c * c) / (2 * a * b)
        return math.acos(max(-1.0, min(1.0, cos)))

    @cached_property
    def corner_angles(self) -> Dict[Tuple[Simplex, int], float]:
        return {(f, v): self.corner_angle(f, v) for f in self.leaf.facets for v in f}

    @cached_property
    def cone_angles(self) -> Dict[int, float]:
        theta: Dict[int, float] = defaultdict(float)
        for (f, v), a in self.corner_angles.items():
            theta[v] += a
        return dict(theta)

    def angle_defects(self) -> Dict[int, float]:
        return {v: 2 * math.pi - t for v, t in self.cone_angles.items()}

    def face_chart(self, face: Simplex) -> Dict[int, np.ndarray]:
        """Planar placement of ``face`` with the leaf orientation counterclockwise."""
        x0, x1, x2 = self.leaf.positive_order(face)
        l01, l02 = self.length(x0, x1), self.length(x0, x2)
        a = self.corner_angle(face, x0)
        return {
            x0: np.zeros(2),
            x1: np.array([l01, 0.0]),
            x2: np.array([l02 * math.cos(a), l02 * math.sin(a)]),
        }

    @cached_property
    def vertex_cycles(self) -> Dict[int, Tuple[int, ...]]:
        """Neighbors of each vertex in counterclockwise order, starting at the least one."""
        nxt: Dict[int, Dict[int, int]] = defaultdict(dict)
        for f in self.leaf.facets:
            x = self.leaf.positive_order(f)
            for k in range(3):
                v, a, b = x[k], x[(k + 1) % 3], x[(k + 2) % 3]
                nxt[v][a] = b
        cycles = {}
        for v, succ in nxt.items():
            start = min(succ)
            cyc = [start]
            while True:
                w = succ[cyc[-1]]
                if w == start:
                    break
                cyc.append(w)
                if len(cyc) > len(succ):
                    break
            if len(cyc) != len(succ):
                raise NonManifoldVertex(f"link of vertex {v} is not a single cycle")
            cycles[v] = tuple(cyc)
        return cycles

    def subdivide(self, sd: LeafComplex) -> "SurfaceGeometry":
        """Induced flat lengths on a subdivision whose parent carries this metric."""
        if sd.parent is not self.leaf:
            raise ValueError("geometry can only be pushed to a direct subdivision")
        charts = {f: self.face_chart(f) for f in self.leaf.facets}
        host_of = containing_facets(self.leaf)
        pos = {v: sd.provenance[v] for v in sd.vertices}
        lengths = {}
        for u, v in sd.skeleton[1]:
            big = max(pos[u], pos[v], key=len)
            ch = charts[host_of[big]]
            pu = sum(ch[w] for w in pos[u]) / len(pos[u])
            pv = sum(ch[w] for w in pos[v]) / len(pos[v])
            lengths[(u, v)] = float(np.linalg.norm(pu - pv))
        return SurfaceGeometry(sd, lengths)
