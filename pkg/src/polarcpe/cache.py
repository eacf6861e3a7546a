"""Binary cache for dictionaries, arc frames and measurement operators.

Container layout (little endian), documented here and in the README:

    offset        size  field
    0             4     magic b"PCPE"
    4             2     format version, currently 1 (u16)
    6             2     kind length L (u16)
    8             L     kind, utf-8: "tde", "fe", "arcs:tde", "arcs:fe", "op"
    8+L           8     N, rows (u64)
    16+L          8     P, columns (u64)
    24+L          8     delta, parameter grid step in native units (f64)
    32+L          4     crc32 of the payload bytes (u32)
    36+L          4     extras length E (u32)
    40+L          E     extras, utf-8 JSON (model constants, r/theta, kappa/seed)
    40+L+E        -     payload, row-major complex64 (empty for operators)

Dictionaries store their atoms as complex64, so a loaded dictionary
carries float32 precision; rebuild from the model when exactness
matters.  Operators store no payload at all: the seed and dimensions in
the header regenerate the matrix, and the checksum guards against a
stale or tampered header.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .dictionary import ArcBasisSet, ParametricDictionary, build_arc_bases
from .sensing import MeasurementOperator, build_operator
from .signals import PulseSpec, SamplingGrid

__all__ = [
    "CacheFormatError",
    "save_dictionary",
    "load_dictionary",
    "save_arcs",
    "load_arcs",
    "rebuild_arcs",
    "save_operator",
    "load_operator",
]

_MAGIC = b"PCPE"
_VERSION = 1


class CacheFormatError(ValueError):
    """Raised when a cache file is malformed, corrupted or incompatible."""


def _write_container(
    path: str,
    kind: str,
    N: int,
    P: int,
    delta: float,
    extras: dict,
    payload: bytes,
) -> None:
    kind_bytes = kind.encode("utf-8")
    extras_bytes = json.dumps(extras, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HH", _VERSION, len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(struct.pack("<QQd", N, P, delta))
        fh.write(struct.pack("<II", zlib.crc32(payload) & 0xFFFFFFFF, len(extras_bytes)))
        fh.write(extras_bytes)
        fh.write(payload)


def _read_container(path: str) -> tuple[str, int, int, float, dict, bytes, int]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:4] != _MAGIC:
        raise CacheFormatError(f"{path}: not a cache file (bad magic)")
    version, kind_len = struct.unpack_from("<HH", data, 4)
    if version != _VERSION:
        raise CacheFormatError(f"{path}: unsupported format version {version}")
    pos = 8
    kind = data[pos : pos + kind_len].decode("utf-8")
    pos += kind_len
    N, P, delta = struct.unpack_from("<QQd", data, pos)
    pos += 24
    checksum, extras_len = struct.unpack_from("<II", data, pos)
    pos += 8
    extras = json.loads(data[pos : pos + extras_len].decode("utf-8"))
    pos += extras_len
    payload = data[pos:]
    # Operator files checksum the regenerated matrix, not the (empty)
    # payload; load_operator verifies that separately.
    if kind != "op" and zlib.crc32(payload) & 0xFFFFFFFF != checksum:
        raise CacheFormatError(f"{path}: payload checksum mismatch, file corrupted")
    return kind, int(N), int(P), float(delta), extras, payload, checksum


def _grid_extras(grid: SamplingGrid) -> dict:
    return {"Ts": grid.Ts}


def _spec_extras(spec: PulseSpec | None) -> dict:
    if spec is None:
        return {}
    return {"f0": spec.f0, "delta_f": spec.delta_f, "T": spec.T}


def save_dictionary(dictionary: ParametricDictionary, path: str) -> None:
    """Serialize a dictionary's atoms plus the model constants to rebuild it."""
    extras = {
        "redundancy": dictionary.redundancy,
        **_grid_extras(dictionary.grid),
        **_spec_extras(dictionary.spec),
    }
    payload = np.ascontiguousarray(dictionary.atoms, dtype=np.complex64).tobytes()
    _write_container(
        path,
        dictionary.kind,
        dictionary.N,
        dictionary.P,
        dictionary.spacing,
        extras,
        payload,
    )


def load_dictionary(path: str) -> ParametricDictionary:
    """Load a dictionary; atoms carry complex64 precision."""
    kind, N, P, delta, extras, payload, _ = _read_container(path)
    if kind not in ("tde", "fe"):
        raise CacheFormatError(f"{path}: kind {kind!r} is not a dictionary")
    expected = N * P * 8
    if len(payload) != expected:
        raise CacheFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    atoms = (
        np.frombuffer(payload, dtype=np.complex64)
        .reshape(N, P)
        .astype(np.complex128)
    )
    grid = SamplingGrid(N=N, Ts=float(extras["Ts"]))
    spec = None
    if kind == "tde":
        spec = PulseSpec(
            f0=float(extras["f0"]),
            delta_f=float(extras["delta_f"]),
            T=float(extras["T"]),
        )
    return ParametricDictionary(
        atoms=atoms,
        params=np.arange(P) * delta,
        spacing=delta,
        redundancy=int(extras["redundancy"]),
        kind=kind,
        spec=spec,
        grid=grid,
    )


def save_arcs(arcs: ArcBasisSet, path: str) -> None:
    """Serialize arc frames as a stacked (3N x P) complex64 payload."""
    d = arcs.dictionary
    stacked = np.concatenate([arcs.c_vecs, arcs.u_vecs, arcs.v_vecs], axis=0)
    payload = np.ascontiguousarray(stacked, dtype=np.complex64).tobytes()
    extras = {"r": arcs.r, "theta": arcs.theta}
    _write_container(
        path, f"arcs:{d.kind}", d.N, d.P, arcs.spacing, extras, payload
    )


def load_arcs(path: str, dictionary: ParametricDictionary) -> ArcBasisSet:
    """Load arc frames and attach them to the matching dictionary."""
    kind, N, P, delta, extras, payload, _ = _read_container(path)
    if not kind.startswith("arcs:"):
        raise CacheFormatError(f"{path}: kind {kind!r} is not an arc frame set")
    if kind.partition(":")[2] != dictionary.kind:
        raise CacheFormatError(
            f"{path}: arcs were built for a {kind.partition(':')[2]!r} dictionary"
        )
    if (N, P) != (dictionary.N, dictionary.P):
        raise CacheFormatError(
            f"{path}: arc dimensions ({N}, {P}) do not match the dictionary"
        )
    if abs(delta - dictionary.spacing) > 1e-15 * max(1.0, abs(delta)):
        raise CacheFormatError(f"{path}: arc spacing differs from the dictionary grid")
    expected = 3 * N * P * 8
    if len(payload) != expected:
        raise CacheFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    stacked = (
        np.frombuffer(payload, dtype=np.complex64)
        .reshape(3 * N, P)
        .astype(np.complex128)
    )
    return ArcBasisSet(
        c_vecs=stacked[:N],
        u_vecs=stacked[N : 2 * N],
        v_vecs=stacked[2 * N :],
        r=float(extras["r"]),
        theta=float(extras["theta"]),
        spacing=delta,
        params=dictionary.params,
        dictionary=dictionary,
    )


def rebuild_arcs(path: str, dictionary: ParametricDictionary) -> ArcBasisSet:
    """Load arcs if the file matches the dictionary, else rebuild from scratch."""
    try:
        return load_arcs(path, dictionary)
    except (OSError, CacheFormatError):
        arcs = build_arc_bases(dictionary)
        save_arcs(arcs, path)
        return arcs


def save_operator(op: MeasurementOperator, path: str) -> None:
    """Serialize a measurement operator as seed + dimensions only.

    The payload is empty; the checksum is taken over the regenerated
    matrix bytes so a loader can verify the reconstruction.
    """
    matrix_bytes = np.ascontiguousarray(op.matrix, dtype=np.int8).tobytes()
    extras = {"kappa": op.kappa, "seed": op.seed}
    kind_bytes = b"op"
    extras_bytes = json.dumps(extras, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HH", _VERSION, len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(struct.pack("<QQd", op.M, op.N, 0.0))
        fh.write(
            struct.pack("<II", zlib.crc32(matrix_bytes) & 0xFFFFFFFF, len(extras_bytes))
        )
        fh.write(extras_bytes)


def load_operator(path: str) -> MeasurementOperator:
    """Regenerate an operator from its stored seed and verify the checksum."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:4] != _MAGIC:
        raise CacheFormatError(f"{path}: not a cache file (bad magic)")
    version, kind_len = struct.unpack_from("<HH", data, 4)
    if version != _VERSION:
        raise CacheFormatError(f"{path}: unsupported format version {version}")
    pos = 8
    kind = data[pos : pos + kind_len].decode("utf-8")
    pos += kind_len
    if kind != "op":
        raise CacheFormatError(f"{path}: kind {kind!r} is not an operator")
    M, N, _ = struct.unpack_from("<QQd", data, pos)
    pos += 24
    checksum, extras_len = struct.unpack_from("<II", data, pos)
    pos += 8
    extras = json.loads(data[pos : pos + extras_len].decode("utf-8"))
    op = build_operator(int(N), float(extras["kappa"]), seed=int(extras["seed"]))
    if op.M != int(M):
        raise CacheFormatError(
            f"{path}: regenerated operator has {op.M} rows, header says {M}"
        )
    matrix_bytes = np.ascontiguousarray(op.matrix, dtype=np.int8).tobytes()
    if zlib.crc32(matrix_bytes) & 0xFFFFFFFF != checksum:
        raise CacheFormatError(
            f"{path}: regenerated operator fails the checksum; header is stale"
        )
    return op
