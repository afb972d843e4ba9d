"""Text formats: fields, traces, measurements, meshes."""

import numpy as np
import pytest

from patfp.errors import FormatError
from patfp.fileio import (
    load_field,
    load_measurement,
    load_trace,
    save_field,
    save_measurement,
    save_trace,
)
from patfp.mesh import generate_disk_mesh, load_mesh, save_mesh
from patfp.sensor import Measurement
from patfp.wavesolver import BoundaryTrace


def test_field_round_trip_is_bitwise(tmp_path, rng):
    field = rng.standard_normal(37)
    field[0] = 1.0 / 3.0  # value needing all 17 digits
    path = tmp_path / "f.patfield"
    save_field(field, path)
    back = load_field(path)
    assert np.array_equal(back, field)
    # Second save reproduces the file byte for byte.
    path2 = tmp_path / "f2.patfield"
    save_field(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_field_header_and_errors(tmp_path):
    path = tmp_path / "f.patfield"
    save_field(np.array([1.0, 2.0]), path)
    text = path.read_text()
    assert text.startswith("patfield 1\nnodes 2\n")
    with pytest.raises(ValueError, match="one-dimensional"):
        save_field(np.zeros((2, 2)), tmp_path / "bad.patfield")

    bad = tmp_path / "bad1.patfield"
    bad.write_text("patfield 2\nnodes 1\n0\n")
    with pytest.raises(FormatError, match=r"bad1\.patfield:1"):
        load_field(bad)

    bad2 = tmp_path / "bad2.patfield"
    bad2.write_text("patfield 1\nnodes 2\n0.5\nnot_a_number\n")
    with pytest.raises(FormatError, match=r"bad2\.patfield:4: bad value 'not_a_number'"):
        load_field(bad2)

    short = tmp_path / "short.patfield"
    short.write_text("patfield 1\nnodes 3\n0.5\n")
    with pytest.raises(FormatError, match="unexpected end of file"):
        load_field(short)


def test_trace_round_trip_and_model_tag(tmp_path, rng):
    tr = BoundaryTrace(values=rng.standard_normal((5, 4)), dt=0.125)
    path = tmp_path / "t.pattrace"
    save_trace(tr, path, model="fabry_perot")
    text = path.read_text().splitlines()
    assert text[0] == "pattrace 1"
    assert text[1] == "# model fabry_perot"
    assert text[2] == "dt 0.125 steps 5 nodes 4"
    back, model = load_trace(path)
    assert model == "fabry_perot"
    assert back.dt == tr.dt
    assert np.array_equal(back.values, tr.values)

    plain = tmp_path / "plain.pattrace"
    save_trace(tr, plain)
    _, model2 = load_trace(plain)
    assert model2 is None


def test_trace_format_errors(tmp_path):
    cases = {
        "h.pattrace": ("pattrace 2\n", "bad header"),
        "grid.pattrace": ("pattrace 1\ndt 0.1 rows 2 nodes 2\n", "expected 'dt"),
        "dtneg.pattrace": ("pattrace 1\ndt -0.1 steps 2 nodes 2\n0 0\n0 0\n", "positive"),
        "width.pattrace": ("pattrace 1\ndt 0.1 steps 2 nodes 3\n0 0 0\n0 0\n", "expected 3 values"),
        "value.pattrace": ("pattrace 1\ndt 0.1 steps 1 nodes 2\n0 oops\n", "bad value"),
    }
    for name, (content, message) in cases.items():
        p = tmp_path / name
        p.write_text(content)
        with pytest.raises(FormatError, match=message):
            load_trace(p)


def test_format_errors_carry_path_and_line(tmp_path):
    p = tmp_path / "broken.pattrace"
    p.write_text("pattrace 1\ndt 0.1 steps 2 nodes 2\n0 0\n0 nope\n")
    with pytest.raises(FormatError, match=r"broken\.pattrace:4"):
        load_trace(p)


def test_measurement_round_trip(tmp_path, rng):
    m = Measurement(
        trace=BoundaryTrace(values=rng.standard_normal((4, 3)), dt=0.2),
        model="idealized",
    )
    path = tmp_path / "m.pattrace"
    save_measurement(m, path)
    back = load_measurement(path)
    assert back.model == "idealized"
    assert np.array_equal(back.trace.values, m.trace.values)

    untagged = tmp_path / "u.pattrace"
    save_trace(m.trace, untagged)
    with pytest.raises(FormatError, match="no '# model"):
        load_measurement(untagged)

    wrong = tmp_path / "w.pattrace"
    save_trace(m.trace, wrong, model="sideways")
    with pytest.raises(FormatError, match="unknown measurement model"):
        load_measurement(wrong)


def test_mesh_round_trip_is_bitwise(tmp_path):
    mesh = generate_disk_mesh(2)
    path = tmp_path / "m.patmesh"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.boundary_loop, mesh.boundary_loop)
    path2 = tmp_path / "m2.patmesh"
    save_mesh(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_mesh_file_errors(tmp_path):
    p = tmp_path / "bad.patmesh"
    p.write_text("patmesh 1\nvertices two\n")
    with pytest.raises(FormatError, match=r"bad\.patmesh:2"):
        load_mesh(p)
    q = tmp_path / "fake.patmesh"
    q.write_text("hello\n")
    with pytest.raises(FormatError, match="bad header"):
        load_mesh(q)


def test_loader_ignores_comments_and_blanks(tmp_path):
    p = tmp_path / "c.patfield"
    p.write_text("# preamble\npatfield 1\n\nnodes 2   # two nodes\n1.5\n\n-2.5\n")
    values = load_field(p)
    assert np.array_equal(values, [1.5, -2.5])
