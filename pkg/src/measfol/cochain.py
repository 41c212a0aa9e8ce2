"""Integer and real cochains/chains, (co)boundaries, pairing and L1 norms.

Values live on canonical (sorted) simplices; evaluating on an oriented simplex
multiplies by its sign, so antisymmetry is structural.  Chains and cochains
share this storage.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from numbers import Integral
from typing import Iterable, Mapping, Union

import numpy as np
import scipy.sparse as sp

from .errors import DegreeMismatch, DegreeOverflow, DegreeUnderflow, UnknownSimplex
from .measure import MeasuredComplex
from .simplicial import LeafComplex, OrientedSimplex, Simplex, order_key

RINGS = ("int", "real")


@dataclass(frozen=True, eq=False)
class Cochain:
    degree: int
    ring: str = "int"
    values: Mapping[Simplex, Union[int, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.ring not in RINGS:
            raise ValueError(f"ring must be one of {RINGS}")
        clean = {}
        for s, v in self.values.items():
            s = tuple(s)
            if len(s) != self.degree + 1 or any(a >= b for a, b in zip(s, s[1:])):
                raise ValueError(f"{s} is not a canonical {self.degree}-simplex")
            if self.ring == "int":
                if not isinstance(v, Integral):
                    if float(v) != int(v):
                        raise ValueError(f"non-integer value {v} in an integer cochain")
                v = int(v)
            else:
                v = float(v)
            if v != 0:
                clean[s] = v
        object.__setattr__(self, "values", clean)

    def __call__(self, s) -> Union[int, float]:
        if isinstance(s, OrientedSimplex):
            return s.sign * self.values.get(s.vertices, 0)
        return self.values.get(tuple(s), 0)

    @property
    def support(self):
        return sorted(self.values, key=order_key)

    def _like(self, values, ring=None):
        return type(self)(self.degree, ring or self.ring, values)

    def _combine(self, other: "Cochain", sign: int) -> "Cochain":
        if other.degree != self.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree}")
        ring = "int" if self.ring == other.ring == "int" else "real"
        out = defaultdict(int, self.values)
        for s, v in other.values.items():
            out[s] += sign * v
        return self._like(out, ring)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self._like({s: -v for s, v in self.values.items()})

    def __mul__(self, k):
        ring = self.ring if isinstance(k, Integral) else "real"
        return self._like({s: k * v for s, v in self.values.items()}, ring)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.degree == other.degree and self.values == other.values

    def __repr__(self) -> str:
        return f"{type(self).__name__}(degree={self.degree}, ring={self.ring!r}, nnz={len(self.values)})"

    def restricted(self, simplices: Iterable[Simplex]) -> "Cochain":
        keep = set(simplices)
        return self._like({s: v for s, v in self.values.items() if s in keep})

    def as_real(self) -> "Cochain":
        return self._like(self.values, "real")

    def is_zero(self) -> bool:
        return not self.values

    @classmethod
    def zero(cls, degree: int, ring: str = "int") -> "Cochain":
        return cls(degree, ring, {})

    @classmethod
    def indicator(cls, simplices: Iterable, degree: int) -> "Cochain":
        """Sum of ``1`` on each (oriented) simplex given."""
        out = defaultdict(int)
        for s in simplices:
            if isinstance(s, OrientedSimplex):
                out[s.vertices] += s.sign
            else:
                out[tuple(s)] += 1
        return cls(degree, "int", out)


class Chain(Cochain):
    """Chains use cochain storage; only the operators applied to them differ."""


def _cofaces(K, s: Simplex):
    if isinstance(K, MeasuredComplex):
        leaf = K.leaf_of(s)
    else:
        leaf = K
        if s not in leaf:
            raise UnknownSimplex(s)
    return leaf.cofaces.get(s, ())


def coboundary(c: Cochain, K: Union[LeafComplex, MeasuredComplex]) -> Cochain:
    """dc(sigma) = sum_i (-1)^i c(face_i sigma)."""
    if c.degree >= K.dim:
        raise DegreeOverflow(f"no coboundary out of degree {c.degree} on a {K.dim}-complex")
    out = defaultdict(int)
    for tau, v in c.values.items():
        for sigma, i in _cofaces(K, tau):
            out[sigma] += (-1) ** i * v
    return Cochain(c.degree + 1, c.ring, out)


def boundary(z: Cochain) -> Chain:
    """(dz)(tau) = sum over cofaces sigma with tau = face_i sigma of (-1)^i z(sigma)."""
    if z.degree <= 0:
        raise DegreeUnderflow("no boundary out of degree 0")
    out = defaultdict(int)
    for sigma, v in z.values.items():
        for i in range(len(sigma)):
            out[sigma[:i] + sigma[i + 1:]] += (-1) ** i * v
    return Chain(z.degree - 1, z.ring, out)


def fundamental_cycle(K: Union[LeafComplex, MeasuredComplex]) -> Chain:
    """Value 1 on every facet carrying its leaf orientation."""
    leaves = K.leaves if isinstance(K, MeasuredComplex) else (K,)
    vals = {f: leaf.orientation[f] for leaf in leaves for f in leaf.facets}
    return Chain(K.dim, "int", vals)


def kronecker(c: Cochain, z: Cochain, M: MeasuredComplex) -> float:
    """Weighted pairing, summed once per canonical simplex."""
    if c.degree != z.degree:
        raise DegreeMismatch(f"cannot pair degree {c.degree} with degree {z.degree}")
    small, big = (c, z) if len(c.values) <= len(z.values) else (z, c)
    return math.fsum(M.weight(s) * v * big.values[s] for s, v in small.values.items() if s in big.values)


def kronecker_oriented(c: Cochain, z: Cochain, M: MeasuredComplex) -> float:
    """Half the weighted integral of c*z over both orientations of every simplex."""
    if c.degree != z.degree:
        raise DegreeMismatch(f"cannot pair degree {c.degree} with degree {z.degree}")
    terms = []
    for s in set(c.values) | set(z.values):
        w = M.weight(s)
        for sign in (1, -1):
            o = OrientedSimplex(s, sign)
            terms.append(w * c(o) * z(o))
    return 0.5 * math.fsum(terms)


def l1_norm(c: Cochain, M: MeasuredComplex) -> float:
    return math.fsum(M.weight(s) * abs(v) for s, v in c.values.items())


def coboundary_matrix(leaf: LeafComplex, p: int) -> sp.csr_matrix:
    """Matrix of d: C^p -> C^{p+1} in the global simplex order of ``leaf``."""
    rows, cols, vals = [], [], []
    idx_lo, idx_hi = leaf.index[p], leaf.index[p + 1]
    for sigma, r in idx_hi.items():
        for i in range(len(sigma)):
            rows.append(r)
            cols.append(idx_lo[sigma[:i] + sigma[i + 1:]])
            vals.append((-1) ** i)
    return sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)),
                         shape=(len(idx_hi), len(idx_lo)))


def to_vector(c: Cochain, leaf: LeafComplex) -> np.ndarray:
    vec = np.zeros(leaf.count(c.degree))
    idx = leaf.index[c.degree]
    for s, v in c.values.items():
        if s in idx:
            vec[idx[s]] = v
    return vec


def from_vector(vec: np.ndarray, leaf: LeafComplex, degree: int, ring: str = "real") -> Cochain:
    sims = leaf.skeleton[degree]
    return Cochain(degree, ring, {s: vec[i] for i, s in enumerate(sims) if vec[i] != 0})
