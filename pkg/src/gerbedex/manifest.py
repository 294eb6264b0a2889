"""Disk formats: line-text nerve files and JSON manifests of sampled data.

Manifests bundle a nerve, sampled bundle transitions, module blocks, and
named connection references into one JSON document (UTF-8, sorted keys on
write) so check suites run from diff-able artifacts.  Matrix data
serializes as row-major nested lists whose innermost entries are
[real, imaginary] pairs; nerve files are plain text with one simplex per
line.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cech
from .gerbe import EdgeSampleGraph, GerbeModuleData, TransitionData
from .registry import (
    ProjectivePlaneBenchmark,
    SphereBenchmark,
    TorusBenchmark,
    benchmark_registry,
)

MANIFEST_FORMAT = 1

_BENCHMARKS = {
    "S2": SphereBenchmark,
    "T2": TorusBenchmark,
    "CP2": ProjectivePlaneBenchmark,
}


# ----------------------------------------------------------- matrix encoding


def encode_matrices(matrices):
    """Nested lists with [real, imaginary] innermost pairs."""
    arr = np.asarray(matrices, dtype=complex)
    paired = np.stack([arr.real, arr.imag], axis=-1)
    return paired.tolist()


def decode_matrices(data, real_only=False):
    """Inverse of encode_matrices; optionally insist on real entries."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ValueError("matrix entries must be [real, imaginary] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if real_only:
        if np.abs(out.imag).max(initial=0.0) > 1e-12:
            raise ValueError("expected real matrix entries")
        return out.real
    return out


def _encode_simplex(simplex):
    return "-".join(str(int(v)) for v in simplex)


def _decode_simplex(key):
    try:
        return tuple(int(tok) for tok in key.split("-"))
    except ValueError:
        raise ValueError(f"malformed simplex key {key!r}") from None


# ----------------------------------------------------------- nerve text files


def nerve_to_text(nerve):
    """One simplex per line, lowest degree first; vertex count up front."""
    lines = ["# nerve", f"vertices {nerve.vertex_count}"]
    for level in nerve.simplices:
        for simplex in level:
            lines.append("simplex " + " ".join(str(v) for v in simplex))
    return "\n".join(lines) + "\n"


def nerve_from_text(text):
    vertex_count = None
    simplices = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "vertices" and len(tokens) == 2:
            vertex_count = int(tokens[1])
        elif tokens[0] == "simplex" and len(tokens) > 1:
            simplices.append(tuple(int(tok) for tok in tokens[1:]))
        else:
            raise ValueError(f"unrecognized nerve line {raw!r}")
    if vertex_count is None and not simplices:
        raise ValueError("nerve file declares no simplices")
    return cech.Nerve.from_simplices(simplices, vertex_count=vertex_count)


def write_nerve(path, nerve):
    Path(path).write_text(nerve_to_text(nerve), encoding="utf-8")


def read_nerve(path):
    return nerve_from_text(Path(path).read_text(encoding="utf-8"))


# ------------------------------------------------------------- manifest blocks


def nerve_to_block(nerve):
    return {
        "vertex_count": nerve.vertex_count,
        "simplices": [list(s) for level in nerve.simplices for s in level],
    }


def nerve_from_block(block):
    return cech.Nerve.from_simplices(block["simplices"],
                                     vertex_count=block["vertex_count"])


def transitions_to_block(data):
    edges = {}
    for edge, graph in sorted(data.edges.items()):
        edges[_encode_simplex(edge)] = {
            "basepoint": int(graph.basepoint),
            "adjacency": [list(pair) for pair in graph.adjacency],
            "matrices": encode_matrices(graph.matrices),
        }
    triples = {_encode_simplex(s): [list(t) for t in entries]
               for s, entries in sorted(data.triples.items())}
    return {"dimension": data.dimension, "edges": edges, "triples": triples}


def transitions_from_block(block, nerve):
    edges = {}
    for key, entry in block["edges"].items():
        edges[_decode_simplex(key)] = EdgeSampleGraph(
            matrices=decode_matrices(entry["matrices"], real_only=True),
            adjacency=tuple(tuple(p) for p in entry["adjacency"]),
            basepoint=entry["basepoint"],
        )
    triples = {_decode_simplex(key): tuple(tuple(t) for t in entries)
               for key, entries in block["triples"].items()}
    return TransitionData(nerve=nerve, dimension=int(block["dimension"]),
                          edges=edges, triples=triples)


def module_to_block(module):
    return {
        "band_order": int(module.band_order),
        "weight": None if module.weight is None else int(module.weight),
        "rank": int(module.rank),
        "unitary": bool(module.unitary),
        "transitions": {_encode_simplex(edge): encode_matrices(arr)
                        for edge, arr in sorted(module.transitions.items())},
        "triples": {_encode_simplex(s): [list(t) for t in entries]
                    for s, entries in sorted(module.triples.items())},
    }


def module_from_block(block, nerve):
    return GerbeModuleData(
        nerve=nerve,
        band_order=int(block["band_order"]),
        weight=block["weight"],
        rank=int(block["rank"]),
        transitions={_decode_simplex(key): decode_matrices(data)
                     for key, data in block["transitions"].items()},
        triples={_decode_simplex(key): tuple(tuple(t) for t in entries)
                 for key, entries in block["triples"].items()},
        unitary=block.get("unitary", True),
    )


def resolve_connection(block, benchmark=None):
    """Construct the ModuleConnection a connection block refers to."""
    name = block["benchmark"]
    if name not in _BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r} in connection block")
    builder = block["builder"]
    if not callable(getattr(_BENCHMARKS[name], builder, None)):
        raise ValueError(f"benchmark {name} has no builder {builder!r}")
    bench = benchmark if benchmark is not None else benchmark_registry(name)
    return getattr(bench, builder)(*block.get("args", []))


# ---------------------------------------------------------- whole manifests


@dataclass(frozen=True)
class ParsedManifest:
    """Decoded manifest: live nerve and data objects plus raw task list."""

    name: str
    nerve: cech.Nerve
    transitions: TransitionData
    modules: dict
    connections: dict
    tasks: tuple


def build_manifest(name, nerve=None, transitions=None, modules=None,
                   connections=None, tasks=()):
    """Assemble a JSON-ready manifest document from live objects."""
    if transitions is not None:
        if nerve is not None and nerve != transitions.nerve:
            raise ValueError("explicit nerve disagrees with transition data")
        nerve = transitions.nerve
    if nerve is None:
        raise ValueError("a manifest needs a nerve or transition data")
    doc = {
        "format": MANIFEST_FORMAT,
        "name": str(name),
        "nerve": nerve_to_block(nerve),
        "transitions": None if transitions is None
        else transitions_to_block(transitions),
        "modules": {},
        "connections": {},
        "tasks": [str(t) for t in tasks],
    }
    for mod_name, module in (modules or {}).items():
        if module.nerve != nerve:
            raise ValueError(f"module {mod_name!r} lives on a different nerve")
        doc["modules"][str(mod_name)] = module_to_block(module)
    for conn_name, block in (connections or {}).items():
        doc["connections"][str(conn_name)] = dict(block)
    parse_manifest(doc)
    return doc


def parse_manifest(doc):
    """Validate a manifest document and decode it into live objects."""
    if not isinstance(doc, dict):
        raise ValueError("manifest must be a JSON object")
    if doc.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"unsupported manifest format {doc.get('format')!r}")
    missing = {"name", "nerve", "transitions", "modules", "connections",
               "tasks"} - set(doc)
    if missing:
        raise ValueError(f"manifest lacks blocks {sorted(missing)}")
    nerve = nerve_from_block(doc["nerve"])
    transitions = None
    if doc["transitions"] is not None:
        transitions = transitions_from_block(doc["transitions"], nerve)
    modules = {mod_name: module_from_block(block, nerve)
               for mod_name, block in doc["modules"].items()}
    for conn_name, block in doc["connections"].items():
        bench_name = block.get("benchmark")
        if bench_name not in _BENCHMARKS:
            raise ValueError(
                f"connection {conn_name!r} references unknown benchmark "
                f"{bench_name!r}")
        if not callable(getattr(_BENCHMARKS[bench_name],
                                block.get("builder", ""), None)):
            raise ValueError(
                f"connection {conn_name!r} references unknown builder "
                f"{block.get('builder')!r}")
    tasks = tuple(str(t) for t in doc["tasks"])
    return ParsedManifest(name=doc["name"], nerve=nerve,
                          transitions=transitions, modules=modules,
                          connections=dict(doc["connections"]), tasks=tasks)


def write_manifest(path, doc):
    parse_manifest(doc)
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_manifest(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    parse_manifest(doc)
    return doc


def sphere_frame_manifest(frame_samples=64):
    """The shipped frame-bundle manifest of the sphere benchmark.

    Carries the three-chart frame cover with its sampled rotation
    transitions; the lifting tasks compute the obstruction cocycle, check
    that it closes and its class vanishes, and verify the induced spinor
    module against the computed cocycle.
    """
    bench = SphereBenchmark(order=8, panels=2, frame_samples=frame_samples)
    return build_manifest(
        "sphere-frame-bundle",
        transitions=bench.frame_transitions(),
        tasks=("lift", "cocycle-closed", "class-trivial", "spin-module"),
    )
