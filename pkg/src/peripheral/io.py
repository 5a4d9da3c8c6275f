"""JSON encoding of channels, unfold specs and decompositions.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of pairs.  Permutations and cycles are written 1-based.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import jsonschema
import numpy as np

from .channel import Channel, GKLSGenerator, is_cptp, markovian_channel, zoo
from .linalg import DEFAULT_TOL, Subspace, Tolerances
from .structure import AttractorDecomposition, Block, cycles_of
from .unfold import BlockSpec, UnfoldSpec, UnfoldSpecError

REPRESENTATIONS = ("kraus", "choi", "superop", "gkls", "zoo")


class InputError(ValueError):
    """A malformed or invalid input document; ``invariant`` names what failed."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


def load_schema(name: str) -> dict:
    text = resources.files("peripheral.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError("schema", f"{name} document invalid at {path}: {exc.message}") from None


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex).ravel()]


def decode_complex(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise InputError("complex_encoding", f"expected an [re, im] pair, got {p!r}")
    return complex(float(p[0]), float(p[1]))


def decode_matrix(rows, shape=None) -> np.ndarray:
    try:
        m = np.array([[decode_complex(z) for z in row] for row in rows], dtype=complex)
    except TypeError as exc:
        raise InputError("matrix_encoding", str(exc)) from None
    if m.ndim != 2:
        raise InputError("matrix_encoding", "matrices must be nested lists of rows")
    if shape is not None and m.shape != tuple(shape):
        raise InputError("matrix_shape", f"expected shape {tuple(shape)}, got {m.shape}")
    return m


def finite_or_none(x):
    """JSON has no infinities; unbounded defects are written as ``null``."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj) if obj.ndim == 2 else encode_vector(obj)
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return finite_or_none(float(obj))
    if isinstance(obj, complex):
        return encode_complex(obj)
    return obj


# ----------------------------------------------------------------------
# channels
# ----------------------------------------------------------------------

def channel_to_json(ch: Channel, representation: str = "superop") -> dict:
    if representation == "kraus":
        return {"dim": ch.dim, "kraus": [encode_matrix(k) for k in ch.kraus]}
    if representation == "choi":
        return {"dim": ch.dim, "choi": encode_matrix(ch.choi)}
    return {"dim": ch.dim, "superop": encode_matrix(ch.superop)}


def channel_from_json(doc: dict, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Parse and validate a channel document; the result is checked to be CPTP."""
    if isinstance(doc, dict) and "channel" in doc and "dim" not in doc:
        doc = doc["channel"]
    validate(doc, "channel")
    d = int(doc["dim"])
    given = [k for k in REPRESENTATIONS if k in doc]
    if len(given) != 1:
        raise InputError("single_representation",
                         f"exactly one of {REPRESENTATIONS} is required, got {given}")
    rep = given[0]
    try:
        if rep == "kraus":
            ch = Channel(d, kraus=[decode_matrix(k, (d, d)) for k in doc["kraus"]])
        elif rep == "choi":
            ch = Channel(d, choi=decode_matrix(doc["choi"], (d * d, d * d)))
        elif rep == "superop":
            ch = Channel(d, superop=decode_matrix(doc["superop"], (d * d, d * d)))
        elif rep == "gkls":
            g = doc["gkls"]
            gen = GKLSGenerator(decode_matrix(g["hamiltonian"], (d, d)),
                                tuple(decode_matrix(a, (d, d)) for a in g.get("noise_ops", [])))
            ch = markovian_channel(gen, float(g.get("time", 1.0)))
        else:
            z = doc["zoo"]
            params = dict(z.get("params", {}))
            for key in ("rho", "u"):
                if key in params:
                    params[key] = decode_matrix(params[key])
            if "projectors" in params:
                params["projectors"] = [decode_matrix(p) for p in params["projectors"]]
            params.setdefault("dim", d)
            ch = zoo(z["name"], params, z.get("seed"))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(rep, str(exc)) from None
    if ch.dim != d:
        raise InputError("dim", f"declared dim {d} but the channel acts on dimension {ch.dim}")
    rep_ = is_cptp(ch, tol)
    if not rep_.cp:
        raise InputError("complete_positivity",
                         f"Choi matrix has eigenvalue {rep_.min_choi_eig:.3e} "
                         f"(hermiticity defect {rep_.hermiticity_defect:.3e})")
    if not rep_.tp:
        raise InputError("trace_preservation", f"partial trace defect {rep_.tp_defect:.3e}")
    return ch


# ----------------------------------------------------------------------
# unfold specs
# ----------------------------------------------------------------------

def spec_to_json(spec: UnfoldSpec) -> dict:
    return {
        "dim_h0_perp": spec.dim_h0_perp,
        "blocks": [{"d": b.d, "m": b.m, "rho": encode_matrix(b.rho), "u": encode_matrix(b.u)}
                   for b in spec.blocks],
        "permutation": [p + 1 for p in spec.permutation],
        "sink_state": encode_matrix(spec.sink_state),
    }


def spec_from_json(doc: dict) -> UnfoldSpec:
    validate(doc, "unfold_spec")
    try:
        blocks = tuple(BlockSpec(int(b["d"]), int(b["m"]),
                                 decode_matrix(b["rho"], (b["m"], b["m"])),
                                 decode_matrix(b["u"], (b["d"], b["d"])))
                       for b in doc["blocks"])
        perm = tuple(int(p) - 1 for p in doc["permutation"])
        sink = decode_matrix(doc["sink_state"]) if doc.get("sink_state") is not None else None
        return UnfoldSpec(int(doc.get("dim_h0_perp", 0)), blocks, perm, sink)
    except UnfoldSpecError as exc:
        raise InputError("unfold_spec", str(exc)) from None


# ----------------------------------------------------------------------
# decompositions
# ----------------------------------------------------------------------

def decomposition_to_json(dec: AttractorDecomposition) -> dict:
    return {
        "ambient_dim": dec.ambient_dim,
        "h0_dim": dec.h0.dim,
        "h0_isometry": encode_matrix(dec.h0.isometry),
        "blocks": [{"d": b.d, "m": b.m, "rho": encode_matrix(b.rho),
                    "u": encode_matrix(b.unitary), "isometry": encode_matrix(b.isometry)}
                   for b in dec.blocks],
        "permutation": [p + 1 for p in dec.permutation],
        "cycles": [[k + 1 for k in c] for c in cycles_of(dec.permutation)],
    }


def decomposition_from_json(doc: dict) -> AttractorDecomposition:
    if "decomposition" in doc:
        doc = doc["decomposition"]
    try:
        n = int(doc["ambient_dim"])
        h0 = Subspace(n, decode_matrix(doc["h0_isometry"]))
        blocks = tuple(Block(int(b["d"]), int(b["m"]),
                             decode_matrix(b["isometry"], (n, b["d"] * b["m"])),
                             decode_matrix(b["rho"], (b["m"], b["m"])),
                             decode_matrix(b["u"], (b["d"], b["d"])))
                       for b in doc["blocks"])
        perm = tuple(int(p) - 1 for p in doc["permutation"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError("decomposition", f"malformed decomposition: {exc}") from None
    if sorted(perm) != list(range(len(blocks))):
        raise InputError("permutation", f"not a permutation of the blocks: {doc['permutation']}")
    return AttractorDecomposition(h0, blocks, perm)
