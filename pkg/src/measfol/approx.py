"""Simplicial approximation of sampled maps and naturality of obstruction cocycles.

Points of a complex are barycentric dictionaries ``{vertex: weight}`` whose
support is a simplex.  The target carries the path metric in which every
simplex is a regular simplex of edge length 1/2.  Distances are computed
exactly inside a common closed simplex and through a common vertex
otherwise; the second value is an upper bound, so admissibility tests are
conservative.  A star image is only accepted when, in addition, all of its
samples lie in the open star of one target vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .cochain import Cochain
from .errors import BudgetExceeded, NonSimplicial, SamplingInconclusive
from .fields import TWO_PI, Connection, DirectionField, normalized_edge_angles, obstruction_cocycle, wrap
from .simplicial import LeafComplex, OrientedSimplex, Simplex, SurfaceGeometry, barycentric_subdivision, build_complex

Point = Dict[int, float]
DIAMETER_BOUND = 0.5
EDGE_LENGTH = 0.5


def lattice(dim: int, density: int) -> List[Tuple[float, ...]]:
    """Barycentric lattice with at least ``density`` points on a dim-simplex."""
    m = 1
    while math.comb(m + dim, dim) < density:
        m += 1
    return [tuple(k / m for k in c) for c in _compositions(m, dim + 1)]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class TargetMetric:
    """Edge-length-1/2 path metric on a target complex, evaluated on sample arrays."""

    def __init__(self, L: LeafComplex):
        self.L = L
        self.vertices = L.vertices
        self.scale = EDGE_LENGTH / math.sqrt(2)

    def _is_simplex(self, cols) -> bool:
        return tuple(sorted(self.vertices[i] for i in cols)) in self.L

    def _block(self, a, b, Ya: np.ndarray, Yb: np.ndarray) -> float:
        if self._is_simplex(set(a) | set(b)):
            return self.scale * float(cdist(Ya, Yb).max())
        best = None
        for w in range(len(self.vertices)):
            if not (self._is_simplex(set(a) | {w}) and self._is_simplex(set(b) | {w})):
                continue
            ea = Ya.copy()
            ea[:, w] -= 1.0
            eb = Yb.copy()
            eb[:, w] -= 1.0
            da = self.scale * np.linalg.norm(ea, axis=1)
            db = self.scale * np.linalg.norm(eb, axis=1)
            total = da[:, None] + db[None, :]
            best = total if best is None else np.minimum(best, total)
        return math.inf if best is None else float(best.max())

    def diameter(self, Y: np.ndarray) -> float:
        groups: Dict[Tuple[int, ...], list] = {}
        for row in Y:
            groups.setdefault(tuple(np.flatnonzero(row > 0)), []).append(row)
        keys = sorted(groups)
        arrays = {k: np.array(v) for k, v in groups.items()}
        worst = 0.0
        for i, a in enumerate(keys):
            for b in keys[i:]:
                worst = max(worst, self._block(a, b, arrays[a], arrays[b]))
                if worst == math.inf:
                    return worst
        return worst

    def distance(self, x: Point, y: Point) -> float:
        index = {v: i for i, v in enumerate(self.vertices)}
        vec = np.zeros((2, len(self.vertices)))
        for row, pt in enumerate((x, y)):
            for v, t in pt.items():
                vec[row, index[v]] = t
        a, b = tuple(np.flatnonzero(vec[0] > 0)), tuple(np.flatnonzero(vec[1] > 0))
        return self._block(a, b, vec[:1], vec[1:])


@dataclass(frozen=True, eq=False)
class SampledMap:
    """A continuous map |H| -> |L| known through its values at sample points."""

    source: LeafComplex
    target: LeafComplex
    evaluator: Callable[[Point], Point]
    density: int = 64

    def __call__(self, x: Point) -> Point:
        return self.evaluator(x)


@dataclass(frozen=True, eq=False)
class SimplicialMap:
    source: LeafComplex
    target: LeafComplex
    vertex_map: Mapping[int, int]
    level: int = 0

    def image(self, s: Simplex) -> Tuple[int, ...]:
        return tuple(self.vertex_map[v] for v in s)

    def check_simplicial(self) -> None:
        for s in self.source.simplices():
            img = tuple(sorted(set(self.image(s))))
            if img not in self.target:
                raise NonSimplicial(f"{s} maps to {img}, which is not a simplex of the target")

    def is_simplicial(self) -> bool:
        try:
            self.check_simplicial()
        except NonSimplicial:
            return False
        return True

    def oriented_image(self, s: Simplex) -> Optional[OrientedSimplex]:
        """Image of the canonical simplex s, or None when it collapses."""
        img = self.image(s)
        if len(set(img)) < len(img):
            return None
        return OrientedSimplex.from_sequence(img)

    def degree_on_facet(self, f: Simplex) -> int:
        """+1 / -1 when f maps onto a facet preserving / reversing leaf orientations, else 0."""
        img = self.oriented_image(f)
        if img is None:
            return 0
        return self.source.orientation[f] * img.sign * self.target.orientation[img.vertices]

    def pullback(self, c: Cochain) -> Cochain:
        """phi^# c(s) = c(phi(s)), degenerate images contributing 0."""
        vals = {}
        for s in self.source.simplices(c.degree):
            img = self.oriented_image(s)
            if img is not None:
                vals[s] = c(img)
        return Cochain(c.degree, c.ring, vals)

    def as_json(self) -> Dict[str, int]:
        return {str(v): int(w) for v, w in sorted(self.vertex_map.items())}


def iterated_subdivision(H: LeafComplex, n: int) -> LeafComplex:
    K = H
    for _ in range(n):
        K = barycentric_subdivision(K)
    return K


class _Samples:
    """Images of lattice points of every facet of a subdivision."""

    def __init__(self, g: SampledMap, K: LeafComplex):
        self.K = K
        pos = K.base_position
        tvert = g.target.vertices
        self.tindex = {v: i for i, v in enumerate(tvert)}
        self.points: Dict[Simplex, List[Tuple[Tuple[float, ...], np.ndarray]]] = {}
        cache: Dict[Tuple[Tuple[int, float], ...], np.ndarray] = {}
        bary = lattice(K.dim, g.density)
        for f in K.facets:
            out = []
            for lam in bary:
                x: Dict[int, float] = {}
                for v, t in zip(f, lam):
                    if t:
                        for u, s in pos[v].items():
                            x[u] = x.get(u, 0.0) + t * s
                key = tuple(sorted((u, round(s, 12)) for u, s in x.items()))
                if key not in cache:
                    y = g(x)
                    vec = np.zeros(len(tvert))
                    for w, s in y.items():
                        vec[self.tindex[w]] = s
                    cache[key] = vec
                out.append((lam, cache[key]))
            self.points[f] = out

    def star_images(self, v: int) -> np.ndarray:
        rows = []
        for f in self.K.facets_at[v]:
            k = f.index(v)
            rows += [y for lam, y in self.points[f] if lam[k] > 0]
        return np.array(rows)


def _admissible(images: np.ndarray, metric: TargetMetric) -> bool:
    return metric.diameter(images) <= DIAMETER_BOUND


def _least_star(images: np.ndarray, target_vertices) -> Optional[int]:
    ok = np.flatnonzero(images.min(axis=0) > 0)
    return target_vertices[int(ok[0])] if ok.size else None


class LevelReport(NamedTuple):
    level: int
    admissible: bool
    max_diameter: float


def level_report(g: SampledMap, n: int) -> LevelReport:
    K = iterated_subdivision(g.source, n)
    S = _Samples(g, K)
    metric = TargetMetric(g.target)
    worst, ok = 0.0, True
    for v in K.vertices:
        imgs = S.star_images(v)
        worst = max(worst, metric.diameter(imgs))
        ok = ok and worst <= DIAMETER_BOUND and _least_star(imgs, g.target.vertices) is not None
    return LevelReport(n, ok, worst)


def simplicial_approximation(g: SampledMap, max_level: int = 4) -> SimplicialMap:
    """Least admissible subdivision level and least-index star selection."""
    tvert = g.target.vertices
    metric = TargetMetric(g.target)
    K = g.source
    for n in range(max_level + 1):
        if n:
            K = barycentric_subdivision(K)
        S = _Samples(g, K)
        vmap = {}
        for v in K.vertices:
            imgs = S.star_images(v)
            w = _least_star(imgs, tvert) if _admissible(imgs, metric) else None
            if w is None:
                break
            vmap[v] = w
        else:
            h = SimplicialMap(K, g.target, vmap, n)
            check = star_condition_check(g, h)
            if not check.passed:
                raise SamplingInconclusive(f"star condition fails at vertex {check.vertex}")
            if not h.is_simplicial():
                raise SamplingInconclusive("selected vertex map is not simplicial at this sampling density")
            return h
    raise BudgetExceeded(f"no admissible level up to {max_level}")


class StarCheck(NamedTuple):
    passed: bool
    samples: int
    vertex: Optional[int] = None
    point: Optional[Tuple[float, ...]] = None
    image: Optional[Point] = None


def star_condition_check(g: SampledMap, h: SimplicialMap) -> StarCheck:
    """Every sampled point of each open star lands in the open star of h(v)."""
    S = _Samples(g, h.source)
    tvert = g.target.vertices
    count = 0
    for v in h.source.vertices:
        col = S.tindex[h.vertex_map[v]]
        for f in h.source.facets_at[v]:
            k = f.index(v)
            for lam, y in S.points[f]:
                if lam[k] <= 0:
                    continue
                count += 1
                if y[col] <= 0:
                    image = {tvert[i]: float(t) for i, t in enumerate(y) if t}
                    return StarCheck(False, count, v, lam, image)
    return StarCheck(True, count)


# -- circles -----------------------------------------------------------------------

def cycle_leaf(n: int, offset: int = 0, leaf_id: int = 0) -> LeafComplex:
    """n-gon oriented by increasing index."""
    return build_complex([(offset + i, offset + (i + 1) % n) for i in range(n)], leaf_id=leaf_id)


def circle_parameter(x: Point, n: int, offset: int = 0) -> float:
    """Position in [0, 1) of a point of the n-gon (vertex i sits at i/n)."""
    items = sorted((v - offset, t) for v, t in x.items() if t > 0)
    if len(items) == 1:
        return items[0][0] / n
    (a, ta), (b, tb) = items
    if b - a == 1:
        return (a + tb) / n
    return ((b + ta) / n) % 1.0


def circle_point(t: float, n: int, offset: int = 0) -> Point:
    s = (t % 1.0) * n
    i = int(math.floor(s)) % n
    frac = s - math.floor(s)
    if frac < 1e-12:
        return {offset + i: 1.0}
    return {offset + i: 1.0 - frac, offset + (i + 1) % n: frac}


def circle_power_map(n_source: int = 12, n_target: int = 12, k: int = 3, density: int = 64) -> SampledMap:
    """z -> z^k between polygonal circles."""
    H, L = cycle_leaf(n_source), cycle_leaf(n_target)
    return SampledMap(H, L, lambda x: circle_point(k * circle_parameter(x, n_source), n_target), density)


def circle_degree(h: SimplicialMap) -> int:
    """Net number of turns of a simplicial map between oriented cycles."""
    n = len(h.target.vertices)
    steps = 0
    for e in h.source.facets:
        img = h.oriented_image(e)
        if img is not None:
            steps += h.source.orientation[e] * img.sign * h.target.orientation[img.vertices]
    if steps % n:
        raise NonSimplicial("vertex map does not close up on the target cycle")
    return steps // n


def sampled_winding(g: SampledMap, samples: int = 4096) -> int:
    """Turns of g read from a dense sampling of the source circle."""
    n_s, n_t = len(g.source.vertices), len(g.target.vertices)
    off_s, off_t = min(g.source.vertices), min(g.target.vertices)
    prev = circle_parameter(g(circle_point(0.0, n_s, off_s)), n_t, off_t)
    total = 0.0
    for i in range(1, samples + 1):
        cur = circle_parameter(g(circle_point(i / samples, n_s, off_s)), n_t, off_t)
        step = (cur - prev + 0.5) % 1.0 - 0.5
        total += step
        prev = cur
    return round(total)


# -- naturality of the obstruction cocycle -----------------------------------------

def pullback_connection(phi: SimplicialMap, conn: Connection) -> Connection:
    """Transport and face holonomy of the target read through phi."""
    transport = {}
    for u, v in phi.source.skeleton[1]:
        a, b = phi.vertex_map[u], phi.vertex_map[v]
        r = 0.0 if a == b else conn.transport[(a, b)]
        transport[(u, v)] = r
        transport[(v, u)] = -r if r != math.pi else math.pi
    holonomy, order = {}, {}
    for f in phi.source.facets:
        order[f] = phi.source.positive_order(f)
        eps = phi.degree_on_facet(f)
        holonomy[f] = eps * conn.holonomy[tuple(sorted(phi.image(f)))] if eps else 0.0
    return Connection(transport, holonomy, order)


def pullback_field(phi: SimplicialMap, g: DirectionField) -> DirectionField:
    """g composed with phi, read in the target charts."""
    angles = {u: g.vertex_angles[phi.vertex_map[u]] for u in phi.source.vertices}
    periods = {}
    for u, v in phi.source.skeleton[1]:
        a, b = phi.vertex_map[u], phi.vertex_map[v]
        if a != b:
            periods[(u, v)] = g.period(a, b)
    return DirectionField(angles, periods)


def local_isometry_field(phi: SimplicialMap, g: DirectionField, target_conn: Connection,
                         source_geometry: SurfaceGeometry, source_conn: Connection) -> DirectionField:
    """g composed with an orientation-preserving local isometry, in the source's own charts."""
    src_ang = normalized_edge_angles(source_geometry)
    tgt_ang = target_conn.edge_angles
    angles = {}
    for u, cyc in source_geometry.vertex_cycles.items():
        a = phi.vertex_map[u]
        ref = tgt_ang[(a, phi.vertex_map[cyc[0]])]
        angles[u] = g.vertex_angles[a] - ref + src_ang[(u, cyc[0])]
    g_src = DirectionField(angles)
    periods = {}
    for u, v in phi.source.skeleton[1]:
        a, b = phi.vertex_map[u], phi.vertex_map[v]
        delta = wrap(g.vertex_angles[b] - g.vertex_angles[a] - target_conn.transport[(a, b)]) + TWO_PI * g.period(a, b)
        local = wrap(g_src.vertex_angles[v] - g_src.vertex_angles[u] - source_conn.transport[(u, v)])
        k = (delta - local) / TWO_PI
        if abs(k - round(k)) > 1e-6:
            raise NonSimplicial(f"phi is not a local isometry along {(u, v)}")
        periods[(u, v)] = round(k)
    return DirectionField(angles, periods)


class Naturality(NamedTuple):
    pulled_field_cocycle: Cochain
    pulled_back_cocycle: Cochain
    passed: bool


def pullback_naturality_check(phi: SimplicialMap, g: DirectionField, conn: Connection) -> Naturality:
    """Compare c(g o phi) with phi^# c(g)."""
    phi.check_simplicial()
    lhs = obstruction_cocycle(pullback_field(phi, g), pullback_connection(phi, conn))
    rhs = phi.pullback(obstruction_cocycle(g, conn))
    return Naturality(lhs, rhs, lhs == rhs)


def torus_cover(sheets: int = 2, a: int = 8, b: int = 8) -> SimplicialMap:
    """Cyclic cover torus_grid(sheets * a, b) -> torus_grid(a, b) along the first axis."""
    from .generators import torus_grid_leaf

    src, _ = torus_grid_leaf(sheets * a, b)
    tgt, _ = torus_grid_leaf(a, b)
    vmap = {v: ((v // b) % a) * b + v % b for v in src.vertices}
    return SimplicialMap(src, tgt, vmap)
