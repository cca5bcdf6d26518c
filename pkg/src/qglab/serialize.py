"""JSON round trips for algebras, elements, weights, triples and quantum groupoid data.

Complex numbers are ``[re, im]`` pairs; element coordinates are written as
nested per-block matrices in the matrix-unit basis.  Output is deterministic:
negative zeros and entries below 1e-15 in magnitude are written as 0.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

import numpy as np

from .algebra import BlockAlgebra, Element, LinearMap, tensor_algebra
from .qgroupoid import Comultiplication, QuantumGroupoidData
from .sepid import SeparabilityTriple
from .weights import Weight

DATA_SCHEMA_ID = "qgl-data-1"
_ZERO = 1e-15


class DataFormatError(ValueError):
    """A data file is unreadable, violates the schema, or has inconsistent shapes."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _num(x: float) -> float:
    x = float(x)
    return 0.0 if abs(x) < _ZERO else x + 0.0


def encode_complex(z: complex) -> list[float]:
    return [_num(z.real), _num(z.imag)]


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(data, path: str = "") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"not a rectangular complex matrix ({exc})", path) from None
    if arr.ndim == 2 and arr.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DataFormatError(f"expected rows of [re, im] pairs, got array of shape {arr.shape}", path)
    return arr[..., 0] + 1j * arr[..., 1]


def encode_algebra(alg: BlockAlgebra) -> dict:
    d: dict[str, Any] = {"block_dims": list(alg.block_dims)}
    if alg.factors:
        d["factors"] = [encode_algebra(f) for f in alg.factors]
    return d


def decode_algebra(data: dict, path: str = "algebra") -> BlockAlgebra:
    if "factors" in data and data["factors"]:
        factors = [decode_algebra(f, f"{path}.factors[{i}]") for i, f in enumerate(data["factors"])]
        alg = tensor_algebra(*factors) if len(factors) >= 2 else factors[0]
        if list(alg.block_dims) != list(data["block_dims"]):
            raise DataFormatError("block_dims disagree with the tensor factors", path)
        return alg
    try:
        return BlockAlgebra(tuple(data["block_dims"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataFormatError(str(exc), path) from None


def encode_blocks(x: Element) -> list:
    return [encode_matrix(b) for b in x.blocks]


def decode_blocks(alg: BlockAlgebra, data, path: str) -> Element:
    if not isinstance(data, list) or len(data) != len(alg.block_dims):
        raise DataFormatError(f"expected {len(alg.block_dims)} blocks", path)
    blocks = []
    for k, (d, b) in enumerate(zip(alg.block_dims, data)):
        m = decode_matrix(b, f"{path}[{k}]")
        if m.shape != (d, d):
            raise DataFormatError(f"block {k} has shape {m.shape}, expected ({d}, {d})", path)
        blocks.append(m)
    return alg.from_blocks(blocks)


def encode_element(x: Element) -> dict:
    return {"algebra": encode_algebra(x.algebra), "blocks": encode_blocks(x)}


def decode_element(data: dict, path: str = "element") -> Element:
    alg = decode_algebra(data["algebra"], f"{path}.algebra")
    return decode_blocks(alg, data["blocks"], f"{path}.blocks")


def encode_weight(w: Weight) -> dict:
    return {"algebra": encode_algebra(w.algebra), "density": encode_blocks(w.density)}


def decode_weight(data: dict, path: str = "weight") -> Weight:
    alg = decode_algebra(data["algebra"], f"{path}.algebra")
    return _weight(alg, data["density"], f"{path}.density")


def _weight(alg: BlockAlgebra, data, path: str) -> Weight:
    try:
        return Weight(alg, decode_blocks(alg, data, path))
    except DataFormatError:
        raise
    except ValueError as exc:
        raise DataFormatError(str(exc), path) from None


def _map(dom: BlockAlgebra, cod: BlockAlgebra, data, path: str) -> LinearMap:
    m = decode_matrix(data, path)
    if m.shape != (cod.dim, dom.dim):
        raise DataFormatError(f"matrix has shape {m.shape}, expected ({cod.dim}, {dom.dim})", path)
    return LinearMap(dom, cod, m)


# --------------------------------------------------------------------------
# documents


def data_schema() -> dict:
    return json.loads(resources.files("qglab").joinpath("data_schema.json").read_text())


def _triple_dict(B, C, R, nu, E) -> dict:
    return {
        "B": encode_algebra(B),
        "C": encode_algebra(C),
        "R_matrix": encode_matrix(R.matrix),
        "nu_density": encode_blocks(nu.density),
        "E": None if E is None else encode_blocks(E),
    }


def triple_to_dict(B: BlockAlgebra, C: BlockAlgebra, R: LinearMap, nu: Weight, E: Element | None = None) -> dict:
    return {"schema": DATA_SCHEMA_ID, "kind": "separability-triple", **_triple_dict(B, C, R, nu, E)}


def separability_triple_to_dict(T: SeparabilityTriple) -> dict:
    return triple_to_dict(T.B, T.C, T.R, T.nu, T.E)


def _json_safe(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        try:
            json.dumps(v)
        except TypeError:
            continue
        out[k] = v
    return out


def qgroupoid_to_dict(QG: QuantumGroupoidData) -> dict:
    base = QG.base
    return {
        "schema": DATA_SCHEMA_ID,
        "kind": "quantum-groupoid",
        "name": QG.name,
        "A": encode_algebra(QG.A),
        "Delta_matrix": encode_matrix(QG.Delta.map.matrix),
        "E": encode_blocks(QG.E),
        "base_triple": _triple_dict(QG.B, QG.C, QG.R, QG.nu, None if base is None else base.E),
        "iota_B": encode_matrix(QG.iota_B.matrix),
        "iota_C": encode_matrix(QG.iota_C.matrix),
        "phi_density": encode_blocks(QG.phi.density),
        "psi_density": encode_blocks(QG.psi.density),
        "meta": _json_safe(QG.meta),
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"), sort_keys=False) + "\n"


def validate_data(doc: Any) -> None:
    import jsonschema

    try:
        jsonschema.validate(instance=doc, schema=data_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DataFormatError(exc.message, where) from None


def _decode_triple(d: dict, path: str):
    B = decode_algebra(d["B"], f"{path}.B")
    C = decode_algebra(d["C"], f"{path}.C")
    R = _map(B, C, d["R_matrix"], f"{path}.R_matrix")
    nu = _weight(B, d["nu_density"], f"{path}.nu_density")
    E = None
    if d.get("E") is not None:
        E = decode_blocks(tensor_algebra(B, C), d["E"], f"{path}.E")
    return B, C, R, nu, E


def load_document(doc: Any):
    """Decode a validated document into QuantumGroupoidData or a (B, C, R, nu, E) tuple."""
    validate_data(doc)
    if doc["kind"] == "separability-triple":
        return _decode_triple(doc, "triple")
    A = decode_algebra(doc["A"], "A")
    AA = tensor_algebra(A, A)
    B, C, R, nu, _ = _decode_triple(doc["base_triple"], "base_triple")
    Delta = Comultiplication(A, _map(A, AA, doc["Delta_matrix"], "Delta_matrix"), strict=False)
    try:
        return QuantumGroupoidData(
            A, Delta, decode_blocks(AA, doc["E"], "E"), B, C, R, nu,
            _map(B, A, doc["iota_B"], "iota_B"), _map(C, A, doc["iota_C"], "iota_C"),
            _weight(A, doc["phi_density"], "phi_density"), _weight(A, doc["psi_density"], "psi_density"),
            name=doc.get("name", ""), meta=doc.get("meta", {}))
    except DataFormatError:
        raise
    except ValueError as exc:
        raise DataFormatError(str(exc)) from None


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    return load_document(doc)


def load(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
