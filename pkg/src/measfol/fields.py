"""Direction fields on surface leaves and their obstruction cocycles.

Angles at a vertex are read in its normalized chart: the cone angle is
rescaled to 2*pi and measured counterclockwise from the edge to the
least-index neighbor.  Transport along an edge compares two such charts,
and the holonomy of a face is the normalized excess of its corners,
``sum(2*pi*corner/cone) - pi``.  With these conventions the winding of a
field around a face is an exact integer and the windings sum to the Euler
characteristic of the leaf.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .cochain import Cochain
from .errors import (
    DegenerateZero,
    IncompatibleCorners,
    LeafMismatch,
    MissingAngles,
    NonIntegralWinding,
    ZeroOnSkeleton,
)
from .measure import MeasuredComplex
from .simplicial import (
    LeafComplex,
    Simplex,
    SurfaceGeometry,
    barycentric_subdivision,
    containing_facets,
    euler_char,
)

TWO_PI = 2 * math.pi
INTEGRALITY_TOL = 1e-6


def wrap(x: float) -> float:
    """Representative of ``x`` modulo 2*pi in (-pi, pi]."""
    return math.pi - ((math.pi - x) % TWO_PI)


def signed_angle(a, b) -> float:
    """Rotation in (-pi, pi] taking direction ``a`` to direction ``b``."""
    return math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])


def _as_integer(x: float, what: str) -> int:
    k = round(x)
    if abs(x - k) > INTEGRALITY_TOL:
        raise NonIntegralWinding(f"{what} is {x:.9f}, not an integer")
    return int(k)


@dataclass(frozen=True, eq=False)
class Connection:
    """Chart-comparison data for the unit tangent bundle of one or more leaves.

    ``transport[(u, v)]`` carries normalized angles at u to normalized angles
    at v; ``holonomy[f]`` belongs to facet ``f`` traversed in its leaf
    orientation.
    """

    transport: Mapping[Tuple[int, int], float]
    holonomy: Mapping[Simplex, float]
    positive_order: Mapping[Simplex, Tuple[int, int, int]]
    edge_angles: Mapping[Tuple[int, int], float] = field(default_factory=dict)

    @property
    def faces(self):
        return self.positive_order.keys()

    @property
    def edges(self):
        return sorted((u, v) for u, v in self.transport if u < v)

    @property
    def vertices(self):
        return sorted({u for u, _ in self.transport})

    def merged(self, other: "Connection") -> "Connection":
        return Connection({**self.transport, **other.transport},
                          {**self.holonomy, **other.holonomy},
                          {**self.positive_order, **other.positive_order},
                          {**self.edge_angles, **other.edge_angles})


def normalized_edge_angles(geometry: SurfaceGeometry) -> Dict[Tuple[int, int], float]:
    """``(u, v) -> `` normalized angle of the edge uv in the chart at u."""
    out = {}
    for u, cycle in geometry.vertex_cycles.items():
        theta = geometry.cone_angles[u]
        acc = 0.0
        for k, w in enumerate(cycle):
            out[(u, w)] = TWO_PI * acc / theta
            nxt = cycle[(k + 1) % len(cycle)]
            acc += geometry.corner_angles[(tuple(sorted((u, w, nxt))), u)]
    return out


def levi_civita(geometry: Union[SurfaceGeometry, MeasuredComplex]) -> Connection:
    """Discrete Levi-Civita connection of a cone metric (per leaf, then merged)."""
    if isinstance(geometry, MeasuredComplex):
        conns = [levi_civita(geometry.geometry_of(leaf.leaf_id)) for leaf in geometry.leaves]
        out = conns[0]
        for c in conns[1:]:
            out = out.merged(c)
        return out
    leaf = geometry.leaf
    ang = normalized_edge_angles(geometry)
    transport = {}
    for (u, v), a_uv in ang.items():
        transport[(u, v)] = wrap(ang[(v, u)] + math.pi - a_uv)
    holonomy, order = {}, {}
    for f in leaf.facets:
        order[f] = leaf.positive_order(f)
        holonomy[f] = math.fsum(TWO_PI * geometry.corner_angles[(f, v)] / geometry.cone_angles[v]
                                for v in f) - math.pi
    return Connection(transport, holonomy, order, ang)


class GaussBonnet(NamedTuple):
    total_defect: float
    expected: float
    passed: bool


def gauss_bonnet(geometry: SurfaceGeometry, tol: float = 1e-9) -> GaussBonnet:
    total = math.fsum(geometry.angle_defects().values())
    expected = TWO_PI * euler_char(geometry.leaf)
    return GaussBonnet(total, expected, abs(total - expected) <= tol)


@dataclass(frozen=True, eq=False)
class DirectionField:
    """Unit tangent field on the 1-skeleton: vertex angles plus edge periods.

    ``edge_periods`` is keyed by canonical edges ``(u, v)`` with ``u < v``;
    the reversed edge carries the negated period.
    """

    vertex_angles: Mapping[int, float]
    edge_periods: Mapping[Tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        angles = {int(v): float(a) % TWO_PI for v, a in self.vertex_angles.items()}
        if not all(math.isfinite(a) for a in angles.values()):
            raise ValueError("vertex angles must be finite")
        periods = {}
        for (u, v), p in self.edge_periods.items():
            if int(p) != p:
                raise ValueError("edge periods must be integers")
            if u > v:
                u, v, p = v, u, -p
            if p:
                periods[(int(u), int(v))] = int(p)
        object.__setattr__(self, "vertex_angles", angles)
        object.__setattr__(self, "edge_periods", periods)

    def period(self, u: int, v: int) -> int:
        if u < v:
            return self.edge_periods.get((u, v), 0)
        return -self.edge_periods.get((v, u), 0)

    def periods_cochain(self) -> Cochain:
        return Cochain(1, "int", dict(self.edge_periods))


def _edge_term(g: DirectionField, conn: Connection, u: int, v: int) -> float:
    """Lifted rotation of g relative to transport along the directed edge u -> v."""
    if u > v:
        return -_edge_term(g, conn, v, u)
    try:
        phi_u, phi_v = g.vertex_angles[u], g.vertex_angles[v]
    except KeyError as exc:
        raise MissingAngles(f"no angle at vertex {exc.args[0]}") from None
    return wrap(phi_v - phi_u - conn.transport[(u, v)]) + TWO_PI * g.period(u, v)


def face_winding(g: DirectionField, conn: Connection, face: Simplex) -> float:
    """Real winding number of g around the leaf-oriented boundary of ``face``."""
    x = conn.positive_order[face]
    total = math.fsum(_edge_term(g, conn, x[k], x[(k + 1) % 3]) for k in range(3))
    return (total + conn.holonomy[face]) / TWO_PI


def obstruction_cocycle(g: DirectionField, conn: Connection) -> Cochain:
    """Integer 2-cochain: winding of g around each face."""
    vals = {}
    for f, x in conn.positive_order.items():
        w = _as_integer(face_winding(g, conn, f), f"winding around {f}")
        sign = 1 if x == f else -1
        vals[f] = sign * w
    return Cochain(2, "int", vals)


def leaf_values(c: Cochain, conn: Connection) -> Dict[Simplex, int]:
    """Values of a top cochain on facets carrying their leaf orientation."""
    return {f: (1 if x == f else -1) * c(f) for f, x in conn.positive_order.items()}


def difference_cochain(g0: DirectionField, g1: DirectionField, conn: Connection,
                       homotopy: Optional[Mapping[int, float]] = None) -> Cochain:
    """Integer 1-cochain w with d(w) = c(g0) - c(g1).

    ``homotopy[u]`` is the total (lifted) rotation of the angle at u while
    deforming g0 into g1; it defaults to the linear interpolation of the
    stored angles.
    """
    if set(g0.vertex_angles) != set(g1.vertex_angles):
        raise LeafMismatch("the two fields live on different vertex sets")
    turn = {}
    for u, a0 in g0.vertex_angles.items():
        a1 = g1.vertex_angles[u]
        t = a1 - a0 if homotopy is None else float(homotopy[u])
        if homotopy is not None and abs(wrap(t - (a1 - a0))) > INTEGRALITY_TOL:
            raise ValueError(f"homotopy at vertex {u} does not end at g1")
        turn[u] = t
    vals = {}
    for u, v in conn.edges:
        x = (_edge_term(g0, conn, u, v) - _edge_term(g1, conn, u, v) + turn[v] - turn[u]) / TWO_PI
        vals[(u, v)] = _as_integer(x, f"difference on edge {(u, v)}")
    return Cochain(1, "int", vals)


def apply_difference(g0: DirectionField, omega: Cochain) -> DirectionField:
    """The field with the same angles and periods ``p0 - omega``."""
    if omega.degree != 1 or omega.ring != "int":
        raise ValueError("a difference cochain is an integer 1-cochain")
    periods = dict(g0.edge_periods)
    for e, w in omega.values.items():
        periods[e] = periods.get(e, 0) - w
    return DirectionField(g0.vertex_angles, periods)


@dataclass(frozen=True)
class ExtensionCertificate:
    certified: bool
    offending_faces: Mapping[Simplex, int]
    total: int

    def __bool__(self) -> bool:
        return self.certified


def certify_nowhere_zero(g: DirectionField, conn: Connection) -> ExtensionCertificate:
    """Certificate iff every face winding vanishes (so each face extends zero-free)."""
    vals = leaf_values(obstruction_cocycle(g, conn), conn)
    bad = {f: v for f, v in sorted(vals.items()) if v}
    return ExtensionCertificate(not bad, bad, sum(bad.values()))


def random_direction_field(conn: Connection, rng: np.random.Generator, max_period: int = 0) -> DirectionField:
    angles = {v: float(rng.uniform(0, TWO_PI)) for v in conn.vertices}
    periods = {}
    if max_period:
        periods = {e: int(rng.integers(-max_period, max_period + 1)) for e in conn.edges}
    return DirectionField(angles, periods)


def parallel_field(conn: Connection, angle: float = 0.0) -> DirectionField:
    """Field transported from the least vertex of each component along a BFS tree.

    On a flat leaf with trivial holonomy this is the constant field; angle 0
    in every normalized chart is not, since the reference rays differ.
    """
    nbrs: Dict[int, List[int]] = defaultdict(list)
    for u, v in conn.transport:
        nbrs[u].append(v)
    angles: Dict[int, float] = {}
    for root in sorted(conn.vertices):
        if root in angles:
            continue
        angles[root] = angle
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(nbrs[u]):
                if v not in angles:
                    angles[v] = angles[u] + conn.transport[(u, v)]
                    queue.append(v)
    return DirectionField(angles)


# -- piecewise-linear tangent fields -----------------------------------------

@dataclass(frozen=True, eq=False)
class PLTangentField:
    """Corner vectors of a PL field, each face in its own planar chart.

    ``points[f]`` and ``vectors[f]`` are 3x2 arrays indexed like the positive
    order of ``f`` (counterclockwise in the chart).
    """

    leaf: LeafComplex
    points: Mapping[Simplex, np.ndarray]
    vectors: Mapping[Simplex, np.ndarray]

    def corner(self, f: Simplex, v: int) -> np.ndarray:
        return self.vectors[f][self.leaf.positive_order(f).index(v)]

    @cached_property
    def scale(self) -> float:
        m = max((float(np.abs(V).max()) for V in self.vectors.values()), default=0.0)
        return m or 1.0

    def edge_frame_coordinates(self, f: Simplex, w: int, other: int) -> np.ndarray:
        """Corner vector at w written in the frame (edge w->other, its left normal)."""
        order = self.leaf.positive_order(f)
        P = self.points[f]
        e = P[order.index(other)] - P[order.index(w)]
        e = e / np.linalg.norm(e)
        n = np.array([-e[1], e[0]])
        x = self.vectors[f][order.index(w)]
        return np.array([x @ e, x @ n])

    def check_compatibility(self, tol: float = 1e-9) -> None:
        """Corner vectors across every edge must be one intrinsic vector."""
        limit = tol * self.scale
        for edge in self.leaf.skeleton[1]:
            (f0, _), (f1, _) = self.leaf.cofaces[edge]
            for w in edge:
                other = edge[0] if w == edge[1] else edge[1]
                a = self.edge_frame_coordinates(f0, w, other)
                b = self.edge_frame_coordinates(f1, w, other)
                if np.abs(a - b).max() > limit:
                    raise IncompatibleCorners(f"corner vectors at {w} disagree across edge {edge}")


def _zero_in_hull(V: np.ndarray, eps: float) -> bool:
    for i in range(3):
        a, b = V[i], V[(i + 1) % 3]
        if abs(a[0] * b[1] - a[1] * b[0]) <= eps and a @ b <= 0:
            return True
    return False


def _link_turning(X: PLTangentField, v: int, zero_tol: float) -> float:
    """Turning of X relative to the inward radial field along the link of v."""
    total = []
    for f in X.leaf.facets_at[v]:
        order = X.leaf.positive_order(f)
        k = order.index(v)
        a, b = order[(k + 1) % 3], order[(k + 2) % 3]
        P, V = X.points[f], X.vectors[f]
        pv, pa, pb = P[k], P[(k + 1) % 3], P[(k + 2) % 3]
        xa, xb = V[(k + 1) % 3], V[(k + 2) % 3]
        cross = xa[0] * xb[1] - xa[1] * xb[0]
        if min(np.linalg.norm(xa), np.linalg.norm(xb)) <= zero_tol or (
                abs(cross) <= zero_tol * X.scale and xa @ xb < 0):
            raise ZeroOnSkeleton(f"field vanishes on the link edge {(a, b)} of vertex {v}")
        total.append(signed_angle(xa, xb) - signed_angle(pv - pa, pv - pb))
    return math.fsum(total)


def vertex_zero_index(X: PLTangentField, v: int, zero_tol: float = 0.0) -> int:
    """Index at a vertex zero: 1 + winding relative to the inward radial field."""
    return 1 + _as_integer(_link_turning(X, v, zero_tol) / TWO_PI, f"link winding at {v}")


def pl_field_indices(X: PLTangentField, vertex_zeros: Iterable[int] = (), tol: float = 1e-12
                     ) -> Dict[Tuple[str, object], int]:
    """Indices of all zeros: ``("vertex", v)`` and ``("face", f)`` keys.

    Zeros on the 1-skeleton are rejected unless they sit at a vertex listed
    in ``vertex_zeros``.
    """
    flagged = set(vertex_zeros)
    X.check_compatibility()
    scale = X.scale
    ztol = tol * scale
    out: Dict[Tuple[str, object], int] = {}
    found = set()
    for f in X.leaf.facets:
        V = X.vectors[f]
        order = X.leaf.positive_order(f)
        zero_corners = [order[k] for k in range(3) if np.linalg.norm(V[k]) <= ztol]
        det = (V[1] - V[0])[0] * (V[2] - V[0])[1] - (V[1] - V[0])[1] * (V[2] - V[0])[0]
        if len(zero_corners) >= 2:
            raise ZeroOnSkeleton(f"field vanishes along an edge of face {f}")
        if zero_corners:
            if zero_corners[0] not in flagged:
                raise ZeroOnSkeleton(f"field vanishes at vertex {zero_corners[0]}, which is not flagged")
            if abs(det) <= ztol * scale:
                raise DegenerateZero(f"degenerate zero at vertex {zero_corners[0]}")
            found.add(zero_corners[0])
            continue
        if abs(det) <= ztol * scale:
            if _zero_in_hull(V, ztol * scale):
                raise DegenerateZero(f"degenerate zero in face {f}")
            continue
        lam12 = np.linalg.solve(np.column_stack([V[1] - V[0], V[2] - V[0]]), -V[0])
        lam = np.array([1 - lam12.sum(), lam12[0], lam12[1]])
        if (lam > 1e-12).all():
            out[("face", f)] = 1 if det > 0 else -1
        elif (lam > -1e-12).all():
            raise ZeroOnSkeleton(f"zero on the boundary of face {f}")
    for v in sorted(found):
        out[("vertex", v)] = vertex_zero_index(X, v, ztol)
    return out


def pl_field_from_vertex_vectors(geometry: SurfaceGeometry,
                                 vectors: Mapping[int, Tuple[float, float]]) -> PLTangentField:
    """PL field from intrinsic vectors ``(cone angle from reference edge, length)``.

    Cone points (non-flat vertices) only admit the zero vector.
    """
    leaf = geometry.leaf
    ang = geometry.vertex_cycles
    cum: Dict[Tuple[int, int], float] = {}
    for u, cyc in ang.items():
        acc = 0.0
        for k, w in enumerate(cyc):
            cum[(u, w)] = acc
            acc += geometry.corner_angles[(tuple(sorted((u, w, cyc[(k + 1) % len(cyc)]))), u)]
    pts, vecs = {}, {}
    for f in leaf.facets:
        chart = geometry.face_chart(f)
        order = leaf.positive_order(f)
        P = np.array([chart[v] for v in order])
        V = np.zeros((3, 2))
        for k, v in enumerate(order):
            theta, r = vectors[v]
            if r == 0:
                continue
            if abs(geometry.cone_angles[v] - TWO_PI) > 1e-9:
                raise IncompatibleCorners(f"nonzero vector at cone point {v}")
            w = order[(k + 1) % 3]
            e = P[(k + 1) % 3] - P[k]
            psi = math.atan2(e[1], e[0]) + theta - cum[(v, w)]
            V[k] = r * np.array([math.cos(psi), math.sin(psi)])
        pts[f], vecs[f] = P, V
    return PLTangentField(leaf, pts, vecs)


def direction_field_from_pl(X: PLTangentField, geometry: SurfaceGeometry, conn: Connection) -> DirectionField:
    """Restriction of a zero-free-on-skeleton PL field to the 1-skeleton."""
    leaf = X.leaf
    cum = normalized_edge_angles(geometry)
    angles, periods = {}, {}
    for f in leaf.facets:
        order = leaf.positive_order(f)
        P, V = X.points[f], X.vectors[f]
        for k, v in enumerate(order):
            if v in angles:
                continue
            if np.linalg.norm(V[k]) == 0:
                raise ZeroOnSkeleton(f"field vanishes at vertex {v}")
            w = order[(k + 1) % 3]
            e = P[(k + 1) % 3] - P[k]
            rel = signed_angle(e, V[k]) * TWO_PI / geometry.cone_angles[v]
            angles[v] = (cum[(v, w)] + rel) % TWO_PI
    for u, v in leaf.skeleton[1]:
        f = leaf.cofaces[(u, v)][0][0]
        turn = signed_angle(X.corner(f, u), X.corner(f, v))
        periods[(u, v)] = _as_integer((turn - wrap(angles[v] - angles[u] - conn.transport[(u, v)])) / TWO_PI,
                                      f"period on {(u, v)}")
    return DirectionField(angles, periods)


# -- the characteristic field -------------------------------------------------

@dataclass(frozen=True, eq=False)
class CharacteristicField:
    base: LeafComplex
    field: PLTangentField
    indices: Mapping[Simplex, int]
    raw_indices: Mapping[Tuple[str, object], int]

    @property
    def total(self) -> int:
        return sum(self.indices.values())

    def counts(self) -> Dict[int, Dict[int, int]]:
        """dimension -> {index: number of zeros}."""
        out: Dict[int, Counter] = defaultdict(Counter)
        for s, k in self.indices.items():
            out[len(s) - 1][k] += 1
        return {d: dict(c) for d, c in sorted(out.items())}


def characteristic_field(K: LeafComplex, geometry: Optional[SurfaceGeometry] = None) -> CharacteristicField:
    """Field on sd^2(K) pointing at the barycenter of the open simplex of K containing each point."""
    geometry = geometry or SurfaceGeometry.unit(K)
    sd1 = barycentric_subdivision(K)
    sd2 = barycentric_subdivision(sd1)
    host_of = containing_facets(K)
    charts = {f: geometry.face_chart(f) for f in K.facets}
    position = sd2.base_position

    def carrier(v: int) -> Simplex:
        return max((sd1.provenance[u] for u in sd2.provenance[v]), key=len)

    def place(weights: Mapping[int, float], chart) -> np.ndarray:
        return sum(t * chart[u] for u, t in weights.items())

    pts, vecs = {}, {}
    for F in sd2.facets:
        order = sd2.positive_order(F)
        support = tuple(sorted(set().union(*(position[v] for v in order))))
        chart = charts[host_of[support]]
        P = np.array([place(position[v], chart) for v in order])
        V = np.array([place({u: 1.0 / len(carrier(v)) for u in carrier(v)}, chart) - P[k]
                      for k, v in enumerate(order)])
        V[np.abs(V) < 1e-14] = 0.0
        d = (P[1] - P[0])[0] * (P[2] - P[0])[1] - (P[1] - P[0])[1] * (P[2] - P[0])[0]
        if d <= 0:
            raise AssertionError(f"subdivided face {F} is not counterclockwise in its chart")
        pts[F], vecs[F] = P, V
    X = PLTangentField(sd2, pts, vecs)
    raw = pl_field_indices(X, vertex_zeros=[v for v in sd2.vertices if len(sd2.provenance[v]) == 1])
    indices = {}
    for (kind, where), k in raw.items():
        if kind != "vertex":
            raise AssertionError(f"characteristic field has an unexpected zero in face {where}")
        (u,) = sd2.provenance[where]
        indices[sd1.provenance[u]] = k
    return CharacteristicField(K, X, indices, raw)


# -- Poincare-Hopf -------------------------------------------------------------

class PoincareHopf(NamedTuple):
    lhs: float
    rhs: float
    passed: bool
    per_leaf: Dict[int, Tuple[int, int]]


def poincare_hopf_check(M: MeasuredComplex, X) -> PoincareHopf:
    """Compare chi_mu with the weighted index sum of a field.

    ``X`` is a DirectionField (one zero of index c(g)(f) per face), or a
    mapping leaf id -> PLTangentField / CharacteristicField / precomputed
    index mapping (as returned by ``pl_field_indices``).
    """
    per_leaf: Dict[int, Tuple[int, int]] = {}
    if isinstance(X, DirectionField):
        conn = levi_civita(M)
        vals = leaf_values(obstruction_cocycle(X, conn), conn)
        for leaf in M.leaves:
            per_leaf[leaf.leaf_id] = (euler_char(leaf), sum(vals[f] for f in leaf.facets))
    else:
        for leaf in M.leaves:
            item = X[leaf.leaf_id]
            if isinstance(item, CharacteristicField):
                total = item.total
            elif isinstance(item, PLTangentField):
                total = sum(pl_field_indices(item).values())
            else:
                total = sum(item.values())
            per_leaf[leaf.leaf_id] = (euler_char(leaf), total)
    lhs = sum(Fraction(M.measure[i]) * chi for i, (chi, _) in per_leaf.items())
    rhs = sum(Fraction(M.measure[i]) * ind for i, (_, ind) in per_leaf.items())
    return PoincareHopf(float(lhs), float(rhs), lhs == rhs, per_leaf)
