from __future__ import annotations

import json

import numpy as np
import pytest

from measfol import generators as G
from measfol.cochain import Cochain
from measfol.errors import BadParameters, NonClosed
from measfol.fields import levi_civita, random_direction_field
from measfol.formats import (cochain_from_json, cochain_to_json, complex_from_json, complex_to_json, digest, dumps,
                             field_from_json, field_to_json, load_model, read_off, write_ply)
from measfol.measure import chi_mu

OCTAHEDRON_OFF = """OFF
6 8 0
1 0 0
-1 0 0
0 1 0
0 -1 0
0 0 1
0 0 -1
3 0 2 4
3 2 1 4
3 1 3 4
3 3 0 4
3 2 0 5
3 1 2 5
3 3 1 5
3 0 3 5
"""


def test_complex_round_trip_keeps_types_and_weights():
    M = G.suspension(1, 5)
    data = json.loads(dumps(complex_to_json(M)))
    back = complex_from_json(data)
    assert back.facets == M.facets
    assert back.measure.weights == M.measure.weights
    partition = lambda T: {frozenset(inst) for inst in T.types.instances.values()}
    assert partition(back) == partition(M)
    assert dumps(complex_to_json(back)) == dumps(complex_to_json(M))


def test_cochain_and_field_round_trip():
    M = G.octahedron()
    c = Cochain(2, "int", {f: (-1) ** i for i, f in enumerate(M.facets)})
    assert cochain_from_json(json.loads(dumps(cochain_to_json(c)))) == c
    conn = levi_civita(M)
    g = random_direction_field(conn, np.random.default_rng(0), 2)
    back = field_from_json(json.loads(dumps(field_to_json(g))))
    assert back.vertex_angles == g.vertex_angles and back.edge_periods == g.edge_periods


def test_malformed_json_is_bad_parameters():
    with pytest.raises(BadParameters):
        complex_from_json({"leaves": [{"facets": [[0, 1, 2]]}]})
    with pytest.raises(BadParameters):
        cochain_from_json({"values": {}})
    with pytest.raises(NonClosed):
        complex_from_json({"leaves": [{"id": 0, "facets": [[0, 1, 2], [0, 2, 3]]}]})


def test_read_off_octahedron():
    M = read_off(OCTAHEDRON_OFF, "oct")
    assert M.name == "oct" and chi_mu(M) == 2
    geo = M.geometry_of(0)
    assert np.isclose(geo.length(0, 2), np.sqrt(2))


def test_read_off_rejects_quads_and_garbage():
    with pytest.raises(BadParameters):
        read_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(BadParameters):
        read_off("PLY\n")


def test_load_model(tmp_path):
    off = tmp_path / "shape.off"
    off.write_text(OCTAHEDRON_OFF)
    assert load_model(off).name == "shape"
    js = tmp_path / "torus.json"
    js.write_text(dumps(complex_to_json(G.torus_grid(4, 4))))
    assert chi_mu(load_model(js)) == 0
    with pytest.raises(BadParameters):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(BadParameters):
        load_model(bad)


def test_digest_is_stable():
    assert digest(complex_to_json(G.octahedron())) == digest(complex_to_json(G.octahedron()))
    assert digest({"a": 1, "b": 2}) == digest({"b": 2, "a": 1})
    assert len(digest([])) == 16


def test_write_ply(tmp_path):
    M = G.octahedron()
    path = tmp_path / "out.ply"
    write_ply(path, M, {M.facets[0]: 1}, {0: 0.5})
    lines = path.read_text().splitlines()
    assert lines[0] == "ply" and "element vertex 6" in lines and "element face 8" in lines
    assert "property int index" in lines and "property float angle" in lines
    body = lines[lines.index("end_header") + 1:]
    assert len(body) == 14
    assert body[6].startswith("3 ") and body[6].endswith(" 1")
