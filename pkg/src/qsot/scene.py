"""JSON scene files: named algebras, states, operators, channels, chains, and
isomorphisms for the command-line interface.

Schema (all sections optional except ``algebras``)::

    {
      "algebras":      {"A": [2], "X": [1, 1]},
      "states":        {"rho": {"algebra": "A", "blocks": [M, ...],
                                "virtual": false}},
      "operators":     {"H": {"algebra": "A", "blocks": [M, ...]}},
      "channels":      {"E": {"kind": "kraus" | "superoperator" | "stochastic",
                              "source": "A", "target": "B", ...}},
      "chains":        {"c": ["E1", "E2"]},
      "isomorphisms":  {"phi": {"source": "A", "target": "A2",
                                "block_perm": [...], "unitaries": [M, ...]}}
    }

Matrix entries are numbers or ``[re, im]`` pairs; emission always writes the
pair form.  Kraus channels carry ``"operators"`` (a trace-preserving family,
single-block algebras only), superoperator channels carry ``"matrix"`` in the
coordinate bases documented in :mod:`qsot.algebra`, and stochastic channels
carry a real column-stochastic ``"matrix"`` between classical algebras.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import AlgebraElement, AlgebraShape
from .chanmap import Chain, LinearOperatorMap, classical_channel, map_from_action
from .covariance import StarIsomorphism

__all__ = ["SceneError", "Scene", "parse_scene", "emit_scene"]

KRAUS_TP_TOL = 1e-9


class SceneError(Exception):
    """Malformed scene document or invariant violation, with its location."""

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")


@dataclass
class Scene:
    algebras: dict[str, AlgebraShape] = field(default_factory=dict)
    states: dict[str, AlgebraElement] = field(default_factory=dict)
    operators: dict[str, AlgebraElement] = field(default_factory=dict)
    channels: dict[str, LinearOperatorMap] = field(default_factory=dict)
    chains: dict[str, Chain] = field(default_factory=dict)
    isomorphisms: dict[str, StarIsomorphism] = field(default_factory=dict)
    virtual_states: set[str] = field(default_factory=set)

    def lookup(self, section: str, name: str):
        table = getattr(self, section)
        if name not in table:
            raise SceneError(f"{section}.{name}", f"no such entry; have {sorted(table)}")
        return table[name]


def _complex_entry(v, loc: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v, 0.0)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) for p in v):
        return complex(v[0], v[1])
    raise SceneError(loc, f"expected a number or [re, im] pair, got {v!r}")


def _matrix(doc, loc: str) -> np.ndarray:
    if not isinstance(doc, list) or not doc or not all(isinstance(r, list) for r in doc):
        raise SceneError(loc, "expected a matrix as a list of rows")
    width = len(doc[0])
    rows = []
    for i, row in enumerate(doc):
        if len(row) != width:
            raise SceneError(f"{loc}[{i}]", "ragged matrix rows")
        rows.append([_complex_entry(v, f"{loc}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def _real_matrix(doc, loc: str) -> np.ndarray:
    m = _matrix(doc, loc)
    if np.abs(m.imag).max() > 0:
        raise SceneError(loc, "expected real entries")
    return m.real


def _shape_of(scene: Scene, name, loc: str) -> AlgebraShape:
    if not isinstance(name, str):
        raise SceneError(loc, f"expected an algebra name, got {name!r}")
    if name not in scene.algebras:
        raise SceneError(loc, f"unknown algebra {name!r}")
    return scene.algebras[name]


def _element(scene: Scene, doc, loc: str) -> AlgebraElement:
    if not isinstance(doc, dict):
        raise SceneError(loc, "expected an object with 'algebra' and 'blocks'")
    shape = _shape_of(scene, doc.get("algebra"), f"{loc}.algebra")
    blocks_doc = doc.get("blocks")
    if not isinstance(blocks_doc, list) or len(blocks_doc) != shape.num_blocks:
        raise SceneError(f"{loc}.blocks", f"expected {shape.num_blocks} blocks")
    blocks = [_matrix(b, f"{loc}.blocks[{i}]") for i, b in enumerate(blocks_doc)]
    try:
        return AlgebraElement(shape, blocks)
    except ValueError as err:
        raise SceneError(f"{loc}.blocks", str(err)) from err


def _kraus_channel(
    source: AlgebraShape, target: AlgebraShape, ops_doc, loc: str
) -> LinearOperatorMap:
    if not (source.is_matrix_algebra and target.is_matrix_algebra):
        raise SceneError(loc, "kraus channels require single-block algebras")
    if not isinstance(ops_doc, list) or not ops_doc:
        raise SceneError(loc, "expected a non-empty list of operators")
    ns, nt = source.blocks[0], target.blocks[0]
    kraus = []
    for i, k in enumerate(ops_doc):
        mat = _matrix(k, f"{loc}[{i}]")
        if mat.shape != (nt, ns):
            raise SceneError(f"{loc}[{i}]", f"expected a {nt}x{ns} operator, got {mat.shape}")
        kraus.append(mat)
    tp = sum(k.conj().T @ k for k in kraus)
    dev = float(np.abs(tp - np.eye(ns)).max())
    if dev > KRAUS_TP_TOL:
        raise SceneError(loc, f"operators are not trace-preserving (deviation {dev:.3g})")

    def act(a: AlgebraElement) -> AlgebraElement:
        out = sum(k @ a.blocks[0] @ k.conj().T for k in kraus)
        return AlgebraElement(target, [out])

    return map_from_action(source, target, act)


def _channel(scene: Scene, doc, loc: str) -> LinearOperatorMap:
    if not isinstance(doc, dict):
        raise SceneError(loc, "expected a channel object")
    kind = doc.get("kind")
    source = _shape_of(scene, doc.get("source"), f"{loc}.source")
    target = _shape_of(scene, doc.get("target"), f"{loc}.target")
    if kind == "kraus":
        return _kraus_channel(source, target, doc.get("operators"), f"{loc}.operators")
    if kind == "superoperator":
        m = _matrix(doc.get("matrix"), f"{loc}.matrix")
        if m.shape != (target.total_dim, source.total_dim):
            raise SceneError(
                f"{loc}.matrix",
                f"expected {target.total_dim}x{source.total_dim}, got {m.shape}",
            )
        return LinearOperatorMap(source, target, m)
    if kind == "stochastic":
        if not (source.is_classical and target.is_classical):
            raise SceneError(loc, "stochastic channels require classical algebras")
        m = _real_matrix(doc.get("matrix"), f"{loc}.matrix")
        if m.shape != (target.num_blocks, source.num_blocks):
            raise SceneError(
                f"{loc}.matrix",
                f"expected {target.num_blocks}x{source.num_blocks}, got {m.shape}",
            )
        try:
            return classical_channel(m)
        except ValueError as err:
            raise SceneError(f"{loc}.matrix", str(err)) from err
    raise SceneError(f"{loc}.kind", f"unknown channel kind {kind!r}")


def _isomorphism(scene: Scene, doc, loc: str) -> StarIsomorphism:
    if not isinstance(doc, dict):
        raise SceneError(loc, "expected an isomorphism object")
    source = _shape_of(scene, doc.get("source"), f"{loc}.source")
    target = _shape_of(scene, doc.get("target"), f"{loc}.target")
    perm = doc.get("block_perm")
    if not isinstance(perm, list):
        raise SceneError(f"{loc}.block_perm", "expected a list of target block indices")
    units_doc = doc.get("unitaries")
    if not isinstance(units_doc, list):
        raise SceneError(f"{loc}.unitaries", "expected a list of matrices")
    units = [_matrix(u, f"{loc}.unitaries[{i}]") for i, u in enumerate(units_doc)]
    try:
        return StarIsomorphism(source, target, tuple(perm), tuple(units))
    except ValueError as err:
        raise SceneError(loc, str(err)) from err


def parse_scene(source) -> Scene:
    """Build validated objects from a scene document (path, JSON text, or dict)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.exists():
            text = path.read_text()
        elif isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            raise SceneError(str(source), "no such scene file")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise SceneError(str(source), f"invalid JSON: {err}") from err
    else:
        doc = source
    if not isinstance(doc, dict):
        raise SceneError("<root>", "scene document must be a JSON object")

    scene = Scene()
    algebras = doc.get("algebras", {})
    if not isinstance(algebras, dict) or not algebras:
        raise SceneError("algebras", "a scene needs at least one algebra")
    for name, blocks in algebras.items():
        if not isinstance(blocks, list):
            raise SceneError(f"algebras.{name}", "expected a list of block dimensions")
        try:
            scene.algebras[name] = AlgebraShape(blocks)
        except (ValueError, TypeError) as err:
            raise SceneError(f"algebras.{name}", str(err)) from err

    for name, sdoc in doc.get("states", {}).items():
        loc = f"states.{name}"
        elem = _element(scene, sdoc, loc)
        virtual = bool(sdoc.get("virtual", False))
        if virtual:
            if not elem.is_virtual_state():
                raise SceneError(loc, "not self-adjoint with unit trace")
            scene.virtual_states.add(name)
        elif not elem.is_state():
            raise SceneError(loc, "not a state (self-adjoint, unit trace, positive)")
        scene.states[name] = elem

    for name, odoc in doc.get("operators", {}).items():
        scene.operators[name] = _element(scene, odoc, f"operators.{name}")

    for name, cdoc in doc.get("channels", {}).items():
        scene.channels[name] = _channel(scene, cdoc, f"channels.{name}")

    for name, names in doc.get("chains", {}).items():
        loc = f"chains.{name}"
        if not isinstance(names, list) or not names:
            raise SceneError(loc, "expected a non-empty list of channel names")
        maps = []
        for i, cname in enumerate(names):
            if cname not in scene.channels:
                raise SceneError(f"{loc}[{i}]", f"unknown channel {cname!r}")
            maps.append(scene.channels[cname])
        try:
            scene.chains[name] = Chain(maps)
        except ValueError as err:
            raise SceneError(loc, str(err)) from err

    for name, idoc in doc.get("isomorphisms", {}).items():
        scene.isomorphisms[name] = _isomorphism(scene, idoc, f"isomorphisms.{name}")

    return scene


def _json_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _json_matrix(m: np.ndarray) -> list:
    return [[_json_complex(v) for v in row] for row in np.asarray(m, dtype=complex)]


def emit_scene(scene: Scene) -> dict:
    """Serialize back to the document form; parse(emit(s)) reproduces s exactly.

    Channels are always emitted in the canonical superoperator encoding.
    """
    shape_names = {shape: name for name, shape in scene.algebras.items()}

    def name_of(shape: AlgebraShape, loc: str) -> str:
        if shape not in shape_names:
            raise SceneError(loc, f"shape {shape} has no named algebra")
        return shape_names[shape]

    doc: dict = {"algebras": {n: list(s.blocks) for n, s in scene.algebras.items()}}
    if scene.states:
        doc["states"] = {
            n: {
                "algebra": name_of(e.shape, f"states.{n}"),
                "blocks": [_json_matrix(b) for b in e.blocks],
                "virtual": n in scene.virtual_states,
            }
            for n, e in scene.states.items()
        }
    if scene.operators:
        doc["operators"] = {
            n: {
                "algebra": name_of(e.shape, f"operators.{n}"),
                "blocks": [_json_matrix(b) for b in e.blocks],
            }
            for n, e in scene.operators.items()
        }
    if scene.channels:
        doc["channels"] = {
            n: {
                "kind": "superoperator",
                "source": name_of(c.source, f"channels.{n}"),
                "target": name_of(c.target, f"channels.{n}"),
                "matrix": _json_matrix(c.matrix),
            }
            for n, c in scene.channels.items()
        }
    if scene.chains:
        chain_names = {}
        channel_ids = {id(c): n for n, c in scene.channels.items()}
        for n, ch in scene.chains.items():
            chain_names[n] = [channel_ids[id(m)] for m in ch.maps]
        doc["chains"] = chain_names
    if scene.isomorphisms:
        doc["isomorphisms"] = {
            n: {
                "source": name_of(i.source, f"isomorphisms.{n}"),
                "target": name_of(i.target, f"isomorphisms.{n}"),
                "block_perm": list(i.block_perm),
                "unitaries": [_json_matrix(u) for u in i.unitaries],
            }
            for n, i in scene.isomorphisms.items()
        }
    return doc
