"""Binary cache round trips and corruption detection."""

from __future__ import annotations

import numpy as np
import pytest

import polarcpe as pc
from polarcpe.cache import CacheFormatError


def test_pulse_dictionary_round_trip(tde100_c2, tmp_path):
    path = str(tmp_path / "tde.bin")
    pc.save_dictionary(tde100_c2, path)
    loaded = pc.load_dictionary(path)
    assert loaded.kind == "tde"
    assert loaded.N == tde100_c2.N and loaded.P == tde100_c2.P
    assert loaded.spacing == tde100_c2.spacing
    assert loaded.redundancy == tde100_c2.redundancy
    assert np.array_equal(loaded.params, tde100_c2.params)
    # atoms travel as complex64
    assert np.allclose(loaded.atoms, tde100_c2.atoms, atol=1e-6)
    assert loaded.spec == tde100_c2.spec
    assert loaded.grid == tde100_c2.grid


def test_exponential_dictionary_round_trip(fe100_c5, tmp_path):
    path = str(tmp_path / "fe.bin")
    pc.save_dictionary(fe100_c5, path)
    loaded = pc.load_dictionary(path)
    assert loaded.kind == "fe"
    assert loaded.spec is None
    assert np.allclose(loaded.atoms, fe100_c5.atoms, atol=1e-6)


def test_arc_frames_round_trip(arcs100_c1, tde100_c1, tmp_path):
    path = str(tmp_path / "arcs.bin")
    pc.save_arcs(arcs100_c1, path)
    loaded = pc.load_arcs(path, tde100_c1)
    assert loaded.r == arcs100_c1.r
    assert loaded.theta == pytest.approx(arcs100_c1.theta, abs=1e-9)
    assert np.allclose(loaded.c_vecs, arcs100_c1.c_vecs, atol=1e-6)
    assert np.allclose(loaded.u_vecs, arcs100_c1.u_vecs, atol=1e-6)
    assert np.allclose(loaded.v_vecs, arcs100_c1.v_vecs, atol=1e-6)
    assert loaded.dictionary is tde100_c1


def test_rebuild_arcs_creates_then_reuses(tde100_c1, tmp_path):
    path = tmp_path / "arcs.bin"
    first = pc.rebuild_arcs(str(path), tde100_c1)
    assert path.exists()
    stamp = path.stat().st_mtime_ns
    second = pc.rebuild_arcs(str(path), tde100_c1)
    assert path.stat().st_mtime_ns == stamp
    assert np.allclose(first.u_vecs, second.u_vecs, atol=1e-6)


def test_rebuild_arcs_replaces_a_corrupt_file(tde100_c1, tmp_path):
    path = tmp_path / "arcs.bin"
    pc.rebuild_arcs(str(path), tde100_c1)
    raw = bytearray(path.read_bytes())
    raw[-5] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheFormatError):
        pc.load_arcs(str(path), tde100_c1)
    arcs = pc.rebuild_arcs(str(path), tde100_c1)
    # the rewrite must leave a loadable file behind
    again = pc.load_arcs(str(path), tde100_c1)
    assert np.allclose(arcs.c_vecs, again.c_vecs, atol=1e-6)


def test_arcs_refuse_a_mismatched_dictionary(arcs100_c1, tde100_c2, fe100_c1, tmp_path):
    path = str(tmp_path / "arcs.bin")
    pc.save_arcs(arcs100_c1, path)
    with pytest.raises(CacheFormatError, match="do not match"):
        pc.load_arcs(path, tde100_c2)
    with pytest.raises(CacheFormatError, match="built for"):
        pc.load_arcs(path, fe100_c1)


def test_corrupted_payload_is_detected(tde100_c1, tmp_path):
    path = tmp_path / "dict.bin"
    pc.save_dictionary(tde100_c1, str(path))
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheFormatError, match="checksum"):
        pc.load_dictionary(str(path))


def test_truncated_file_is_detected(tde100_c1, tmp_path):
    path = tmp_path / "dict.bin"
    pc.save_dictionary(tde100_c1, str(path))
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 3])
    with pytest.raises(CacheFormatError):
        pc.load_dictionary(str(path))


def test_foreign_file_is_rejected(tmp_path):
    path = tmp_path / "noise.bin"
    path.write_bytes(b"GIF89a" + b"\x00" * 64)
    with pytest.raises(CacheFormatError, match="magic"):
        pc.load_dictionary(str(path))
    with pytest.raises(CacheFormatError, match="magic"):
        pc.load_operator(str(path))


def test_operator_round_trip_regenerates_exactly(tmp_path):
    op = pc.build_operator(100, 0.4, seed=11)
    path = str(tmp_path / "op.bin")
    pc.save_operator(op, path)
    loaded = pc.load_operator(path)
    assert np.array_equal(loaded.matrix, op.matrix)
    assert loaded.kappa == op.kappa
    assert loaded.seed == op.seed


def test_operator_file_with_tampered_seed_fails(tmp_path):
    op = pc.build_operator(100, 0.4, seed=11)
    path = tmp_path / "op.bin"
    pc.save_operator(op, str(path))
    raw = path.read_bytes()
    # the extras block is JSON; flipping the stored seed must trip the
    # checksum over the regenerated matrix
    assert b'"seed": 11' in raw
    path.write_bytes(raw.replace(b'"seed": 11', b'"seed": 13'))
    with pytest.raises(CacheFormatError, match="checksum"):
        pc.load_operator(str(path))


def test_kind_confusion_is_rejected(tde100_c1, tmp_path):
    dict_path = str(tmp_path / "dict.bin")
    op_path = str(tmp_path / "op.bin")
    pc.save_dictionary(tde100_c1, dict_path)
    pc.save_operator(pc.build_operator(100, 0.5, seed=2), op_path)
    with pytest.raises(CacheFormatError, match="not an operator"):
        pc.load_operator(dict_path)
    with pytest.raises(CacheFormatError, match="not a dictionary"):
        pc.load_dictionary(op_path)
