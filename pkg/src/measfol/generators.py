"""Model generators for the batch front end and the test suite."""

from __future__ import annotations

import itertools
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .errors import BadParameters
from .measure import MeasuredComplex, SimplexTypeTable, TransverseMeasure
from .simplicial import build_complex


def _outward(faces: Sequence[Tuple[int, int, int]], coords) -> List[Tuple[int, int, int]]:
    out = []
    for a, b, c in faces:
        pa, pb, pc = (np.asarray(coords[v]) for v in (a, b, c))
        normal = np.cross(pb - pa, pc - pa)
        out.append((a, b, c) if np.dot(normal, pa + pb + pc) > 0 else (a, c, b))
    return out


def octahedron_leaf(offset: int = 0, leaf_id: int = 0):
    coords = {}
    for axis in range(3):
        for k, sgn in enumerate((1.0, -1.0)):
            p = [0.0, 0.0, 0.0]
            p[axis] = sgn
            coords[offset + 2 * axis + k] = tuple(p)
    faces = [(offset + x, offset + 2 + y, offset + 4 + z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    return build_complex(_outward(faces, coords), leaf_id=leaf_id), coords


def icosahedron_leaf(offset: int = 0, leaf_id: int = 0):
    phi = (1 + math.sqrt(5)) / 2
    pts = []
    for a, b in itertools.product((-1.0, 1.0), repeat=2):
        pts += [(0.0, a, b * phi), (a, b * phi, 0.0), (b * phi, 0.0, a)]
    coords = {offset + i: p for i, p in enumerate(pts)}
    ids = sorted(coords)

    def adjacent(u, v):
        return abs(np.linalg.norm(np.subtract(coords[u], coords[v])) - 2.0) < 1e-9

    faces = [f for f in itertools.combinations(ids, 3)
             if adjacent(f[0], f[1]) and adjacent(f[0], f[2]) and adjacent(f[1], f[2])]
    return build_complex(_outward(faces, coords), leaf_id=leaf_id), coords


def torus_grid_leaf(a: int, b: int, offset: int = 0, leaf_id: int = 0, twist: int = 0):
    """a x b grid on the torus, each square split along its diagonal.

    With ``twist`` the top row is glued to the bottom row shifted by ``twist``
    columns.  All triangles are equilateral under unit lengths (degree 6).
    """
    if a < 3 or b < 3:
        raise BadParameters("torus_grid needs both sides >= 3")

    def vid(i, j):
        if j >= b:
            i, j = i + twist * (j // b), j % b
        return offset + (i % a) * b + j

    faces = []
    for i in range(a):
        for j in range(b):
            p00, p10, p11, p01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            faces += [(p00, p10, p11), (p00, p11, p01)]
    big_r, small_r = 2.0, 1.0
    coords = {}
    for i in range(a):
        for j in range(b):
            u, v = 2 * math.pi * i / a, 2 * math.pi * j / b
            coords[vid(i, j)] = ((big_r + small_r * math.cos(v)) * math.cos(u),
                                 (big_r + small_r * math.cos(v)) * math.sin(u),
                                 small_r * math.sin(v))
    return build_complex(faces, leaf_id=leaf_id), coords


def genus_leaf(g: int, offset: int = 0, leaf_id: int = 0):
    """Closed orientable surface of genus g from the word a1 b1 a1^-1 b1^-1 ...

    The 4g-gon has every side cut in three; an inner ring of one vertex per
    boundary point separates the identified boundary from the central fan so
    that the result is a simplicial complex.
    """
    if g < 1:
        raise BadParameters("genus needs g >= 1")
    sides = 4 * g
    corner = offset
    next_id = offset + 1
    side_points: Dict[Tuple[int, int], Tuple[int, int]] = {}
    boundary: List[int] = []
    for s in range(sides):
        k, pos = divmod(s, 4)
        letter, inverse = (k, pos % 2), pos >= 2
        if letter not in side_points:
            side_points[letter] = (next_id, next_id + 1)
            next_id += 2
        p1, p2 = side_points[letter]
        boundary += [corner] + ([p2, p1] if inverse else [p1, p2])
    nb = len(boundary)
    ring = list(range(next_id, next_id + nb))
    center = next_id + nb
    faces = []
    for i in range(nb):
        j = (i + 1) % nb
        faces += [(boundary[i], boundary[j], ring[j]), (boundary[i], ring[j], ring[i]),
                  (center, ring[i], ring[j])]
    coords = {center: (0.0, 0.0, 0.0)}
    for i in range(nb):
        t = 2 * math.pi * i / nb
        coords[ring[i]] = (0.6 * math.cos(t), 0.6 * math.sin(t), 0.0)
        coords.setdefault(boundary[i], (math.cos(t), math.sin(t), 0.0))
    return build_complex(faces, leaf_id=leaf_id), coords


def _measured(leaves_coords, weights, name, types=None) -> MeasuredComplex:
    leaves = tuple(lc[0] for lc in leaves_coords)
    coords = {}
    for _, c in leaves_coords:
        coords.update(c)
    measure = TransverseMeasure({leaf.leaf_id: w for leaf, w in zip(leaves, weights)})
    return MeasuredComplex(leaves, measure, types, coordinates=coords, name=name)


def octahedron(weight: float = 1.0) -> MeasuredComplex:
    return _measured([octahedron_leaf()], [weight], "octahedron")


def icosahedron(weight: float = 1.0) -> MeasuredComplex:
    return _measured([icosahedron_leaf()], [weight], "icosahedron")


def torus_grid(a: int = 8, b: int = 8, weight: float = 1.0) -> MeasuredComplex:
    return _measured([torus_grid_leaf(a, b)], [weight], f"torus_grid({a},{b})")


def genus(g: int = 2, weight: float = 1.0) -> MeasuredComplex:
    return _measured([genus_leaf(g)], [weight], f"genus({g})")


def two_leaf(weights: Tuple[float, float] = (1.0, 1.0)) -> MeasuredComplex:
    """Sphere (octahedron) and genus-2 surface as two separate leaves."""
    sphere = octahedron_leaf(offset=0, leaf_id=0)
    surface = genus_leaf(2, offset=100, leaf_id=1)
    return _measured([sphere, surface], list(weights), "two_leaf")


def suspension(p: int = 1, q: int = 5, base: int = 4) -> MeasuredComplex:
    """Periodic model of a suspended Z^2 action with rotation number p/q.

    One torus leaf covering a ``base x base`` torus q times (a ``q*base x
    base`` grid glued with a shift of ``p*base`` columns).  Simplices lying
    over the same base simplex share a type, so every type has q disjoint
    instances, and the leaf carries weight 1/q.
    """
    if q < 1 or base < 3:
        raise BadParameters("suspension needs q >= 1 and base >= 3")
    width = q * base
    leaf, coords = torus_grid_leaf(width, base, twist=p * base)

    def base_vertex(v):
        i, j = divmod(v, base)
        return (i % base) * base + j

    keys = {s: (len(s) - 1, tuple(sorted(base_vertex(v) for v in s))) for s in leaf.simplices()}
    numbering = {k: n for n, k in enumerate(sorted(set(keys.values())))}
    types = SimplexTypeTable({s: numbering[k] for s, k in keys.items()})
    return _measured([(leaf, coords)], [1.0 / q], f"suspension({p},{q})", types)


GENERATORS: Dict[str, Tuple[Callable[..., MeasuredComplex], Tuple[type, ...]]] = {
    "octahedron": (octahedron, ()),
    "icosahedron": (icosahedron, ()),
    "torus_grid": (torus_grid, (int, int)),
    "genus": (genus, (int,)),
    "two_leaf": (two_leaf, ()),
    "suspension": (suspension, (int, int)),
}


def generate(name: str, args: Sequence[str] = (), weight: float = None) -> MeasuredComplex:
    """Build a named model; ``weight`` overrides every leaf weight."""
    if name not in GENERATORS:
        raise BadParameters(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    fn, sig = GENERATORS[name]
    if len(args) > len(sig):
        raise BadParameters(f"{name} takes at most {len(sig)} arguments")
    try:
        parsed = [t(a) for t, a in zip(sig, args)]
    except ValueError as exc:
        raise BadParameters(str(exc)) from None
    M = fn(*parsed)
    if weight is not None:
        if not weight > 0:
            raise BadParameters("weight must be positive")
        M = M.with_weights({leaf.leaf_id: weight for leaf in M.leaves})
    return M


def all_generators() -> Dict[str, MeasuredComplex]:
    """The standard model set used by ``verify``."""
    return {
        "octahedron": octahedron(),
        "icosahedron": icosahedron(),
        "torus_grid(8,8)": torus_grid(8, 8),
        "genus(2)": genus(2),
        "two_leaf": two_leaf(),
        "suspension(1,5)": suspension(1, 5),
    }
