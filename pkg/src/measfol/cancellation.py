"""Cancelling +-1 top cocycles along typed dual paths.

A dual path is a sequence of facets in one leaf, consecutive ones sharing a
principal face.  Its type is the sequence of facet types.  Each step of the
reduction picks the least type (by length, then type ids) having an instance
that runs from a -1 facet to a +1 facet, and subtracts the coboundary of all
such instances at once.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np

from .cochain import Cochain, coboundary, l1_norm
from .errors import ExhaustionGap, PreconditionViolated, TypeOverlap
from .fields import (
    Connection,
    DirectionField,
    ExtensionCertificate,
    apply_difference,
    certify_nowhere_zero,
    levi_civita,
    obstruction_cocycle,
)
from .measure import MeasuredComplex, type_sort_key
from .simplicial import Simplex, euler_char, order_key

PathType = Tuple[object, ...]


@dataclass(frozen=True)
class DualPath:
    facets: Tuple[Simplex, ...]

    def __post_init__(self):
        if not self.facets:
            raise ValueError("a dual path has at least one facet")

    def __len__(self) -> int:
        return len(self.facets)

    @property
    def start(self) -> Simplex:
        return self.facets[0]

    @property
    def end(self) -> Simplex:
        return self.facets[-1]

    def crossed_faces(self) -> List[Simplex]:
        return [tuple(sorted(set(a) & set(b))) for a, b in zip(self.facets, self.facets[1:])]

    def validate(self, M: MeasuredComplex) -> None:
        leaf = M.leaf_of(self.facets[0])
        for a, b in zip(self.facets, self.facets[1:]):
            if b not in leaf or len(set(a) & set(b)) != len(a) - 1:
                raise ValueError(f"facets {a} and {b} are not adjacent in one leaf")

    def type_of(self, M: MeasuredComplex) -> PathType:
        return tuple(M.types[f] for f in self.facets)

    def __add__(self, other: "DualPath") -> "DualPath":
        if self.end != other.start:
            raise ValueError("paths do not chain")
        return DualPath(self.facets + other.facets[1:])


def type_order_key(alpha: PathType):
    return (len(alpha), tuple(type_sort_key(t) for t in alpha))


def _induced_sign(M: MeasuredComplex, facet: Simplex, face: Simplex) -> int:
    """Sign of the canonical ``face`` in the boundary of the leaf-oriented facet."""
    i = next(k for k, v in enumerate(facet) if v not in face)
    return (-1) ** i * M.orientation(facet)


def path_coboundary(M: MeasuredComplex, path: DualPath) -> Cochain:
    """1-cochain on the crossed faces with d(omega) = 1_end - 1_start (leaf orientation)."""
    vals: Dict[Simplex, int] = {}
    for face, nxt in zip(path.crossed_faces(), path.facets[1:]):
        vals[face] = vals.get(face, 0) + _induced_sign(M, nxt, face)
    return Cochain(M.dim - 1, "int", vals)


def _instances(M: MeasuredComplex, alpha: PathType, starts: Optional[Iterable[Simplex]] = None,
               allowed: Optional[Set[Simplex]] = None,
               blocked_faces: FrozenSet[Simplex] = frozenset()) -> List[DualPath]:
    first = alpha[0]
    if starts is None:
        starts = [f for f in M.types.instances.get(first, ()) if len(f) == M.dim + 1]
    found = []
    for s in sorted(starts, key=order_key):
        if M.types[s] != first or (allowed is not None and s not in allowed):
            continue
        leaf = M.leaf_of(s)
        frontier = [(s,)]
        for t in alpha[1:]:
            nxt = []
            for p in frontier:
                for nb, face in leaf.facet_neighbors[p[-1]]:
                    if M.types[nb] != t or face in blocked_faces:
                        continue
                    if allowed is not None and nb not in allowed:
                        continue
                    nxt.append(p + (nb,))
            frontier = nxt
        found += [DualPath(p) for p in frontier]
    return found


def paths_of_type(M: MeasuredComplex, alpha: PathType) -> List[DualPath]:
    """All instances of a path type; distinct instances must be disjoint."""
    alpha = tuple(alpha)
    if not alpha:
        raise ValueError("a path type is nonempty")
    found = sorted(set(_instances(M, alpha)), key=lambda p: [order_key(f) for f in p.facets])
    owner: Dict[Simplex, DualPath] = {}
    for p in found:
        for f in p.facets:
            q = owner.setdefault(f, p)
            if q != p:
                raise TypeOverlap(f"instances {q.facets} and {p.facets} share {f} without coinciding")
    return found


@dataclass(frozen=True)
class CancellationStep:
    cocycle: Cochain
    eta: Cochain
    norm: float
    alpha: Optional[PathType] = None
    instances: Tuple[DualPath, ...] = ()
    stage: int = 0
    kind: str = "cancel"


@dataclass
class CancellationTrace:
    steps: List[CancellationStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def final(self) -> CancellationStep:
        return self.steps[-1]

    @property
    def norms(self) -> List[float]:
        return [s.norm for s in self.steps]

    @property
    def types(self) -> List[PathType]:
        return [s.alpha for s in self.steps if s.alpha is not None and s.kind == "cancel"]


def leaf_oriented(M: MeasuredComplex, c: Cochain) -> Dict[Simplex, int]:
    return {f: M.orientation(f) * v for f, v in c.values.items()}


def pairing_with_fundamental(M: MeasuredComplex, c: Cochain) -> Fraction:
    """Exact weighted pairing of a top cochain with the fundamental cycle."""
    return sum((Fraction(M.weight(f)) * v for f, v in leaf_oriented(M, c).items()), Fraction(0))


def leaf_lower_bound(M: MeasuredComplex, c: Cochain) -> float:
    """sum_i w_i |sum over leaf i of c| : no dual path leaves its leaf."""
    sums: Dict[int, int] = {}
    for f, v in leaf_oriented(M, c).items():
        i = M.leaf_of(f).leaf_id
        sums[i] = sums.get(i, 0) + v
    return math.fsum(M.measure[i] * abs(s) for i, s in sums.items())


def _check_top(M: MeasuredComplex, c: Cochain, strict: bool) -> None:
    if c.degree != M.dim or c.ring != "int":
        raise PreconditionViolated("cancellation needs an integer top-degree cochain")
    bad = {s: v for s, v in c.values.items() if abs(v) != 1}
    if bad:
        s = min(bad, key=order_key)
        raise PreconditionViolated(f"value {bad[s]} on {s}; values must lie in {{-1, 0, 1}}")
    for s in c.values:
        M.leaf_of(s)
    if strict and pairing_with_fundamental(M, c) != 0:
        raise PreconditionViolated(f"<c, 1>_mu = {float(pairing_with_fundamental(M, c))} is not zero")


def _distance_to(M: MeasuredComplex, targets: Iterable[Simplex], allowed: Optional[Set[Simplex]],
                 blocked: FrozenSet[Simplex]) -> Dict[Simplex, int]:
    dist = {t: 0 for t in targets}
    queue = deque(sorted(dist, key=order_key))
    while queue:
        f = queue.popleft()
        for nb, face in M.leaf_of(f).facet_neighbors[f]:
            if nb in dist or face in blocked or (allowed is not None and nb not in allowed):
                continue
            dist[nb] = dist[f] + 1
            queue.append(nb)
    return dist


def _first_type(M: MeasuredComplex, plus: Set[Simplex], minus: Set[Simplex],
                allowed: Optional[Set[Simplex]], blocked: FrozenSet[Simplex]) -> Optional[PathType]:
    """Least path type with an instance from a -1 facet to a +1 facet."""
    dist = _distance_to(M, plus, allowed, blocked)
    reach = [f for f in minus if f in dist]
    if not reach:
        return None
    d = min(dist[f] for f in reach)
    layer = {f for f in reach if dist[f] == d}
    alpha = []
    while True:
        best = min((M.types[f] for f in layer), key=type_sort_key)
        alpha.append(best)
        layer = {f for f in layer if M.types[f] == best}
        if d == 0:
            return tuple(alpha)
        d -= 1
        layer = {nb for f in layer for nb, face in M.leaf_of(f).facet_neighbors[f]
                 if dist.get(nb) == d and face not in blocked}


def _reduce(M: MeasuredComplex, c0: Cochain, c: Cochain, eta: Cochain, trace: CancellationTrace,
            allowed: Optional[Set[Simplex]] = None, blocked: FrozenSet[Simplex] = frozenset(),
            stage: int = 0) -> Tuple[Cochain, Cochain]:
    while True:
        lv = leaf_oriented(M, c)
        plus = {f for f, v in lv.items() if v > 0 and (allowed is None or f in allowed)}
        minus = {f for f, v in lv.items() if v < 0 and (allowed is None or f in allowed)}
        alpha = _first_type(M, plus, minus, allowed, blocked) if plus and minus else None
        if alpha is None:
            return c, eta
        used: Set[Simplex] = set()
        chosen = []
        for p in _instances(M, alpha, sorted(minus, key=order_key), allowed, blocked):
            if p.end in plus and p.start not in used and p.end not in used:
                chosen.append(p)
                used.update((p.start, p.end))
        step = Cochain.zero(M.dim - 1)
        for p in chosen:
            step = step + path_coboundary(M, p)
        eta = eta + step
        c_next = c0 - coboundary(eta, M)
        if not set(leaf_oriented(M, c_next).items()) <= set(lv.items()):
            raise AssertionError("supports failed to shrink")
        trace.steps[-1] = _with_alpha(trace.steps[-1], alpha, chosen)
        c = c_next
        trace.steps.append(CancellationStep(c, eta, l1_norm(c, M), stage=stage))


def _with_alpha(step: CancellationStep, alpha, chosen) -> CancellationStep:
    return CancellationStep(step.cocycle, step.eta, step.norm, alpha, tuple(chosen), step.stage, step.kind)


def cancel(M: MeasuredComplex, c: Cochain, tol: float = 0.0, strict: bool = True
           ) -> Tuple[Cochain, CancellationTrace]:
    """Reduce a +-1 top cocycle; returns eta with c - d(eta) minimal and the trace.

    ``strict`` enforces <c, 1>_mu = 0; without it the reduction still runs
    and stops at the per-leaf lower bound.
    """
    _check_top(M, c, strict)
    eta = Cochain.zero(M.dim - 1)
    trace = CancellationTrace([CancellationStep(c, eta, l1_norm(c, M))])
    residual, eta = _reduce(M, c, c, eta, trace)
    norm = l1_norm(residual, M)
    if norm > max(tol, leaf_lower_bound(M, c)) * (1 + 1e-12):
        raise AssertionError(f"residual {norm} above the lower bound")
    return eta, trace


# -- exhaustions -----------------------------------------------------------------

@dataclass(frozen=True)
class Exhaustion:
    """Nested facet sets B_1 <= ... <= B_m (each with all its faces)."""

    stages: Tuple[FrozenSet[Simplex], ...]

    def __post_init__(self):
        stages = tuple(frozenset(tuple(f) for f in s) for s in self.stages)
        if not stages:
            raise ValueError("an exhaustion has at least one stage")
        for a, b in zip(stages, stages[1:]):
            if not a <= b:
                raise ValueError("exhaustion stages must be nested")
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)

    def edges(self, r: int) -> FrozenSet[Simplex]:
        """Codimension-one faces of the facets of stage r (0-based); empty for r < 0."""
        if r < 0:
            return frozenset()
        return frozenset(f[:i] + f[i + 1:] for f in self.stages[r] for i in range(len(f)))

    def check_covers(self, M: MeasuredComplex, facets: Iterable[Simplex]) -> None:
        missing = sorted(set(facets) - self.stages[-1], key=order_key)
        if missing:
            raise ExhaustionGap(f"{len(missing)} facets outside the last stage, e.g. {missing[0]}")

    @classmethod
    def single(cls, M: MeasuredComplex) -> "Exhaustion":
        return cls((frozenset(M.facets),))

    @classmethod
    def concentric(cls, M: MeasuredComplex, width: int = 1, centers: Optional[Mapping[int, int]] = None
                   ) -> "Exhaustion":
        """Vertex balls around a center vertex of each leaf, grown ``width`` edges at a time.

        Stage r holds the facets whose vertices all lie within edge distance
        r * width of the center.  Trailing bands are merged until the outermost
        band of every leaf is connected in the dual graph.
        """
        radius: Dict[Simplex, int] = {}
        for leaf in M.leaves:
            center = (centers or {}).get(leaf.leaf_id, leaf.vertices[0])
            g = nx.Graph(leaf.skeleton[1])
            d = nx.single_source_shortest_path_length(g, center)
            for f in leaf.facets:
                radius[f] = max(d[v] for v in f)
        top = max(radius.values())
        bounds = list(range(width, top, width)) + [top]
        stages = [frozenset(f for f, d in radius.items() if d <= b) for b in bounds]
        while len(stages) > 1 and not _bands_connected(M, stages[-1] - stages[-2]):
            stages.pop(-2)
        return cls(tuple(stages))


def _bands_connected(M: MeasuredComplex, band: FrozenSet[Simplex]) -> bool:
    for leaf in M.leaves:
        mine = {f for f in band if f in leaf}
        if not mine:
            continue
        start = min(mine, key=order_key)
        if len(_distance_to(M, [start], mine, frozenset())) != len(mine):
            return False
    return True


@dataclass(frozen=True)
class StageResult:
    eta: Cochain
    cocycle: Cochain
    norm: float


def _push_outward(M: MeasuredComplex, c0: Cochain, c: Cochain, eta: Cochain, inside: FrozenSet[Simplex],
                  annulus: Set[Simplex], blocked: FrozenSet[Simplex], trace: CancellationTrace,
                  stage: int) -> Tuple[Cochain, Cochain]:
    """Move every charge left in the annulus to a facet outside the stage."""
    for f in sorted((f for f in leaf_oriented(M, c) if f in annulus), key=order_key):
        lv = leaf_oriented(M, c)
        s = lv.get(f, 0)
        if not s:
            continue
        prev = {f: None}
        queue = deque([f])
        target = None
        while queue and target is None:
            g = queue.popleft()
            for nb, face in M.leaf_of(g).facet_neighbors[g]:
                if nb in prev or face in blocked:
                    continue
                if nb not in inside:
                    if lv.get(nb, 0) in (0, -s):
                        prev[nb] = g
                        target = nb
                        break
                    continue
                if nb in annulus:
                    prev[nb] = g
                    queue.append(nb)
        if target is None:
            continue
        chain = [target]
        while prev[chain[-1]] is not None:
            chain.append(prev[chain[-1]])
        path = DualPath(tuple(reversed(chain)))
        eta = eta - s * path_coboundary(M, path)
        c = c0 - coboundary(eta, M)
        trace.steps.append(CancellationStep(c, eta, l1_norm(c, M), None, (path,), stage, "push"))
    return c, eta


def cancel_with_exhaustion(M: MeasuredComplex, c: Cochain, B: Exhaustion, tol: float = 0.0,
                           strict: bool = True) -> Tuple[List[StageResult], CancellationTrace]:
    """Stage-wise cancellation; stage r never touches the faces of stage r-1.

    Stage r first cancels inside its band B_r minus B_{r-1}, then pushes any
    leftover charge out across the boundary of B_r, so the increments of
    successive stages have disjoint supports and eta_{r+1} agrees with eta_r
    on B_r.
    """
    _check_top(M, c, strict)
    B.check_covers(M, c.values)
    eta = Cochain.zero(M.dim - 1)
    cur = c
    trace = CancellationTrace([CancellationStep(c, eta, l1_norm(c, M))])
    results = []
    for r, inside in enumerate(B.stages):
        blocked = B.edges(r - 1)
        annulus = set(inside - (B.stages[r - 1] if r else frozenset()))
        trace.steps[-1] = CancellationStep(cur, eta, l1_norm(cur, M), stage=r)
        cur, eta = _reduce(M, c, cur, eta, trace, annulus, blocked, r)
        if r + 1 < len(B):
            cur, eta = _push_outward(M, c, cur, eta, inside, annulus, blocked, trace, r)
        results.append(StageResult(eta, cur, l1_norm(cur, M)))
    return results, trace


# -- synthesis of fields ----------------------------------------------------------

@dataclass(frozen=True)
class FieldStage:
    field: DirectionField
    cocycle: Cochain
    zero_mass: float
    certificate: Optional[ExtensionCertificate] = None


def small_zero_fields(M: MeasuredComplex, g: DirectionField, conn: Optional[Connection] = None,
                      tol: float = 0.0) -> List[FieldStage]:
    """Fields along the cancellation trace; each has one +-1 zero per face where c_r != 0."""
    conn = conn or levi_civita(M)
    c = obstruction_cocycle(g, conn)
    _, trace = cancel(M, c, tol)
    out = []
    for k, step in enumerate(trace.steps):
        X = apply_difference(g, step.eta)
        cert = certify_nowhere_zero(X, conn) if k == len(trace.steps) - 1 else None
        out.append(FieldStage(X, step.cocycle, step.norm, cert))
    return out


# -- inputs ------------------------------------------------------------------------

def euler_representative(M: MeasuredComplex) -> Cochain:
    """sign(chi) on the first |chi| facets of each leaf (leaf orientation)."""
    vals = {}
    for leaf in M.leaves:
        chi = euler_char(leaf)
        for f in leaf.facets[:abs(chi)]:
            vals[f] = (1 if chi > 0 else -1) * leaf.orientation[f]
    return Cochain(M.dim, "int", vals)


def balanced_pairs(M: MeasuredComplex, k: int, rng: np.random.Generator,
                   base: Optional[Cochain] = None) -> Cochain:
    """Add k (+1, -1) facet pairs, each inside one leaf, on facets where base vanishes."""
    vals = dict(base.values) if base is not None else {}
    leaves = list(M.leaves)
    for _ in range(k):
        leaf = leaves[int(rng.integers(len(leaves)))]
        free = [f for f in leaf.facets if f not in vals]
        if len(free) < 2:
            raise ValueError("not enough free facets for another pair")
        a, b = (free[i] for i in rng.choice(len(free), size=2, replace=False))
        vals[a] = leaf.orientation[a]
        vals[b] = -leaf.orientation[b]
    return Cochain(M.dim, "int", vals)
