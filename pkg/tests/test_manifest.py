"""Round-trip and validation tests for nerve files and JSON manifests."""

import json

import numpy as np
import pytest

from gerbedex import cech
from gerbedex.gerbe import lift_transitions, spin_module, verify_module
from gerbedex.geometry import ModuleConnection
from gerbedex.manifest import (
    build_manifest,
    decode_matrices,
    encode_matrices,
    module_from_block,
    module_to_block,
    nerve_from_text,
    nerve_to_text,
    parse_manifest,
    read_manifest,
    read_nerve,
    resolve_connection,
    sphere_frame_manifest,
    transitions_from_block,
    transitions_to_block,
    write_manifest,
    write_nerve,
)
from gerbedex.registry import SphereBenchmark, TorusBenchmark


@pytest.fixture(scope="module")
def frame_bench():
    return SphereBenchmark(order=8, panels=2)


def test_matrix_encoding_round_trip():
    rng = np.random.default_rng(0)
    arr = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    assert np.array_equal(decode_matrices(encode_matrices(arr)), arr)
    # exact through an actual JSON round trip as well
    revived = decode_matrices(json.loads(json.dumps(encode_matrices(arr))))
    assert np.array_equal(revived, arr)


def test_decode_matrices_validation():
    with pytest.raises(ValueError):
        decode_matrices([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        decode_matrices(encode_matrices(1j * np.eye(2)), real_only=True)
    real = decode_matrices(encode_matrices(np.eye(2)), real_only=True)
    assert real.dtype.kind == "f"


def test_nerve_text_round_trip():
    nerve = cech.tetrahedron_sphere()
    text = nerve_to_text(nerve)
    assert nerve_from_text(text) == nerve
    # canonical form is stable under re-serialization
    assert nerve_to_text(nerve_from_text(text)) == text


def test_nerve_text_preserves_isolated_vertices():
    nerve = cech.Nerve.from_simplices([(0, 1)], vertex_count=4)
    assert nerve_from_text(nerve_to_text(nerve)) == nerve


def test_nerve_text_rejects_garbage():
    with pytest.raises(ValueError):
        nerve_from_text("simplex 0 1\nwhat 3\n")
    with pytest.raises(ValueError):
        nerve_from_text("# comment only\n")


def test_nerve_file_io(tmp_path):
    nerve = cech.lens_complex(3)
    path = tmp_path / "lens.nerve"
    write_nerve(path, nerve)
    assert read_nerve(path) == nerve


def test_transition_block_round_trip(frame_bench):
    data = frame_bench.frame_transitions()
    block = json.loads(json.dumps(transitions_to_block(data)))
    back = transitions_from_block(block, data.nerve)
    back.validate()
    assert back.dimension == data.dimension
    for edge, graph in data.edges.items():
        mate = back.edges[edge]
        assert np.array_equal(graph.matrices, mate.matrices)
        assert graph.adjacency == mate.adjacency
        assert graph.basepoint == mate.basepoint
    assert back.triples == data.triples


def test_module_block_round_trip(frame_bench):
    lifted, cocycle = frame_bench.frame_gerbe()
    module = spin_module(lifted)
    block = json.loads(json.dumps(module_to_block(module)))
    back = module_from_block(block, module.nerve)
    assert back.weight == 1 and back.rank == module.rank
    for edge, arr in module.transitions.items():
        assert np.array_equal(arr, back.transitions[edge])
    assert verify_module(back, cocycle).ok


def test_sphere_frame_manifest_runs_its_tasks(tmp_path):
    doc = sphere_frame_manifest()
    path = tmp_path / "sphere.json"
    write_manifest(path, doc)
    parsed = parse_manifest(read_manifest(path))
    assert parsed.name == "sphere-frame-bundle"
    assert "lift" in parsed.tasks
    lifted, cocycle = lift_transitions(parsed.transitions.validate())
    assert cech.is_cocycle(cocycle.cochain, cocycle.nerve)
    assert cocycle.trivial
    check = verify_module(spin_module(lifted), cocycle)
    assert check.ok and check.max_residual < 1e-9


def test_manifest_write_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    write_manifest(first, sphere_frame_manifest())
    write_manifest(second, sphere_frame_manifest())
    assert first.read_bytes() == second.read_bytes()


def test_connection_block_resolution():
    torus = TorusBenchmark(order=8, panels=2)
    block = {"benchmark": "T2", "builder": "flux_connection", "args": [2]}
    conn = resolve_connection(block, benchmark=torus)
    assert isinstance(conn, ModuleConnection)
    assert conn.module.rank == 1


def test_manifest_validation_rejections():
    doc = sphere_frame_manifest()
    wrong_format = dict(doc)
    wrong_format["format"] = 2
    with pytest.raises(ValueError):
        parse_manifest(wrong_format)
    with pytest.raises(ValueError):
        parse_manifest({k: v for k, v in doc.items() if k != "nerve"})
    bad_benchmark = json.loads(json.dumps(doc))
    bad_benchmark["connections"]["x"] = {"benchmark": "X9", "builder": "f"}
    with pytest.raises(ValueError):
        parse_manifest(bad_benchmark)
    bad_builder = json.loads(json.dumps(doc))
    bad_builder["connections"]["x"] = {"benchmark": "T2",
                                       "builder": "not_there"}
    with pytest.raises(ValueError):
        parse_manifest(bad_builder)


def test_build_manifest_rejects_mismatched_nerve(frame_bench):
    nerve = cech.tetrahedron_sphere()
    with pytest.raises(ValueError):
        build_manifest("clash", nerve=nerve,
                       transitions=frame_bench.frame_transitions())
