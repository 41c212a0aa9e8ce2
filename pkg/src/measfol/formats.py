"""JSON, OFF and PLY readers/writers for measured complexes, cochains and fields."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from .cochain import Cochain
from .errors import BadParameters
from .fields import DirectionField
from .measure import MeasuredComplex, SimplexTypeTable, TransverseMeasure
from .simplicial import SurfaceGeometry, build_complex, order_key, parse_key, simplex_key


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "), allow_nan=False)


def complex_to_json(M: MeasuredComplex) -> Dict[str, Any]:
    leaves = []
    for leaf in M.leaves:
        item = {
            "id": leaf.leaf_id,
            "facets": [list(leaf.positive_order(f)) for f in leaf.facets],
            "weight": M.measure[leaf.leaf_id],
        }
        if leaf.leaf_id in M.geometry:
            geo = M.geometry[leaf.leaf_id]
            item["edge_lengths"] = {simplex_key(e): geo.lengths[e] for e in leaf.skeleton[1]}
        leaves.append(item)
    out: Dict[str, Any] = {"leaves": leaves}
    out["types"] = {simplex_key(s): t for s, t in sorted(M.types.type_of.items(), key=lambda x: order_key(x[0]))}
    if M.exhaustion is not None:
        out["exhaustion"] = [[simplex_key(f) for f in sorted(stage, key=order_key)] for stage in M.exhaustion]
    return out


def complex_from_json(data: Mapping[str, Any]) -> MeasuredComplex:
    try:
        leaves, weights, geometry = [], {}, {}
        for item in data["leaves"]:
            leaf_id = int(item["id"])
            leaf = build_complex([tuple(int(v) for v in f) for f in item["facets"]], leaf_id=leaf_id)
            leaves.append(leaf)
            weights[leaf_id] = float(item.get("weight", 1.0))
            if "edge_lengths" in item:
                lengths = {parse_key(k): float(v) for k, v in item["edge_lengths"].items()}
                geometry[leaf_id] = SurfaceGeometry(leaf, lengths)
        types = None
        if "types" in data:
            table = SimplexTypeTable({parse_key(k): v for k, v in data["types"].items()})
            types = table.completed(leaves)
        exhaustion = None
        if "exhaustion" in data:
            exhaustion = tuple(tuple(parse_key(k) for k in stage) for stage in data["exhaustion"])
        return MeasuredComplex(tuple(leaves), TransverseMeasure(weights), types, geometry,
                               exhaustion=exhaustion, name=str(data.get("name", "")))
    except (KeyError, TypeError) as exc:
        raise BadParameters(f"malformed measured-complex JSON: {exc}") from None


def cochain_to_json(c: Cochain) -> Dict[str, Any]:
    return {"degree": c.degree, "ring": c.ring,
            "values": {simplex_key(s): v for s, v in sorted(c.values.items(), key=lambda x: order_key(x[0]))}}


def cochain_from_json(data: Mapping[str, Any]) -> Cochain:
    try:
        return Cochain(int(data["degree"]), data.get("ring", "int"),
                       {parse_key(k): v for k, v in data["values"].items()})
    except (KeyError, TypeError) as exc:
        raise BadParameters(f"malformed cochain JSON: {exc}") from None


def field_to_json(g: DirectionField) -> Dict[str, Any]:
    return {"vertex_angles": {str(v): a for v, a in sorted(g.vertex_angles.items())},
            "edge_periods": {simplex_key(e): p for e, p in sorted(g.edge_periods.items())}}


def field_from_json(data: Mapping[str, Any]) -> DirectionField:
    try:
        return DirectionField({int(v): float(a) for v, a in data["vertex_angles"].items()},
                              {parse_key(k): int(p) for k, p in data.get("edge_periods", {}).items()})
    except (KeyError, TypeError) as exc:
        raise BadParameters(f"malformed field JSON: {exc}") from None


def read_off(text: str, name: str = "") -> MeasuredComplex:
    """Single-leaf OFF surface; Euclidean edge lengths from the vertex coordinates."""
    tokens = [ln.split("#")[0].split() for ln in text.splitlines()]
    tokens = [t for t in tokens if t]
    if not tokens or tokens[0][0].upper() != "OFF":
        raise BadParameters("OFF file must start with 'OFF'")
    head = tokens[0][1:] or tokens[1]
    rest = tokens[1:] if tokens[0][1:] else tokens[2:]
    try:
        nv, nf = int(head[0]), int(head[1])
        coords = {i: tuple(float(x) for x in rest[i][:3]) for i in range(nv)}
        faces = []
        for row in rest[nv:nv + nf]:
            k = int(row[0])
            if k != 3:
                raise BadParameters("only triangular OFF faces are supported")
            faces.append(tuple(int(v) for v in row[1:4]))
    except (IndexError, ValueError) as exc:
        raise BadParameters(f"malformed OFF: {exc}") from None
    leaf = build_complex(faces)
    geometry = {0: SurfaceGeometry.from_coordinates(leaf, coords)}
    return MeasuredComplex((leaf,), TransverseMeasure({0: 1.0}), None, geometry, coords, name=name)


def load_model(path: Union[str, Path]) -> MeasuredComplex:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise BadParameters(f"cannot read {path}: {exc.strerror}") from None
    if path.suffix.lower() == ".off":
        return read_off(text, path.stem)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParameters(f"{path} is not valid JSON: {exc}") from None
    M = complex_from_json(data)
    return M if M.name else MeasuredComplex(M.leaves, M.measure, M.types, M.geometry, M.coordinates,
                                            M.exhaustion, path.stem)


def digest(obj: Any) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()[:16]


def write_ply(path: Union[str, Path], M: MeasuredComplex, face_index: Mapping, vertex_angle: Optional[Mapping] = None) -> None:
    """ASCII PLY with a face attribute ``index`` and a vertex attribute ``angle``."""
    coords = M.coordinates or {}
    verts = [v for leaf in M.leaves for v in leaf.vertices]
    row = {v: i for i, v in enumerate(verts)}
    faces = [(leaf.positive_order(f), int(face_index.get(f, 0))) for leaf in M.leaves for f in leaf.facets]
    lines = ["ply", "format ascii 1.0", f"element vertex {len(verts)}",
             "property float x", "property float y", "property float z", "property float angle",
             f"element face {len(faces)}", "property list uchar int vertex_indices", "property int index",
             "end_header"]
    for v in verts:
        x, y, z = (tuple(coords[v]) + (0.0, 0.0, 0.0))[:3] if v in coords else (0.0, 0.0, 0.0)
        a = float((vertex_angle or {}).get(v, 0.0))
        lines.append(f"{x!r} {y!r} {z!r} {a!r}")
    for f, k in faces:
        lines.append(f"{len(f)} " + " ".join(str(row[v]) for v in f) + f" {k}")
    Path(path).write_text("\n".join(lines) + "\n")
