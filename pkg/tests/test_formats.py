"""On-disk formats: bit-exact round-trips and the malformed-file taxonomy."""

import struct

import numpy as np
import pytest

from motiontok.codec.tokens import TokenSequence, read_tokens, write_tokens
from motiontok.errors import FormatError
from motiontok.motion.fileio import read_motion, write_motion
from motiontok.motion.types import MotionSequence


def f32_frames(rng, n, j):
    """Frames whose float64 values are exactly float32-representable."""
    d = 4 + 3 * (j - 1)
    return rng.normal(size=(n, d)).astype(np.float32).astype(np.float64)


# -- motion round-trip --------------------------------------------------------

def test_motion_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    for i in range(50):
        n = int(rng.integers(1, 90))
        j = int(rng.integers(2, 30))
        m = MotionSequence(f32_frames(rng, n, j), fps=float(np.float32(rng.uniform(10, 60))))
        p = tmp_path / f"m{i}.msqm"
        write_motion(p, m)
        back = read_motion(p)
        assert np.array_equal(back.frames, m.frames)
        assert back.fps == m.fps
        assert back.joint_count == m.joint_count


def test_motion_write_read_idempotent(tmp_path):
    # writing what was read produces identical bytes
    rng = np.random.default_rng(1)
    m = MotionSequence(f32_frames(rng, 16, 22))
    p1, p2 = tmp_path / "a.msqm", tmp_path / "b.msqm"
    write_motion(p1, m)
    write_motion(p2, read_motion(p1))
    assert p1.read_bytes() == p2.read_bytes()


# -- token round-trip ----------------------------------------------------------

def rand_tokens(rng):
    s = int(rng.integers(1, 8))
    sizes = [int(rng.integers(2, 5000)) for _ in range(s)]
    idx = [rng.integers(0, c, size=int(rng.integers(1, 40))) for c in sizes]
    return TokenSequence(idx, sizes)


def test_tokens_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(2)
    for i in range(50):
        y = rand_tokens(rng)
        p = tmp_path / f"t{i}.msqt"
        write_tokens(p, y)
        assert read_tokens(p) == y


def test_tokens_rewrite_idempotent(tmp_path):
    y = rand_tokens(np.random.default_rng(3))
    p1, p2 = tmp_path / "a.msqt", tmp_path / "b.msqt"
    write_tokens(p1, y)
    write_tokens(p2, read_tokens(p1))
    assert p1.read_bytes() == p2.read_bytes()


# -- TokenSequence validation -----------------------------------------------------

def test_token_sequence_rejects_bad_input():
    with pytest.raises(ValueError):
        TokenSequence([], [])
    with pytest.raises(ValueError):
        TokenSequence([np.zeros((2, 2), int)], [4])  # 2-D
    with pytest.raises(ValueError):
        TokenSequence([np.array([], int)], [4])  # empty scale
    with pytest.raises(ValueError):
        TokenSequence([np.array([-1])], [4])  # negative
    with pytest.raises(ValueError):
        TokenSequence([np.array([4])], [4])  # == size
    with pytest.raises(ValueError):
        TokenSequence([np.array([0])], [0])  # empty codebook
    with pytest.raises(ValueError):
        TokenSequence([np.array([0])], [4, 4])  # length mismatch


def test_token_sequence_accessors():
    y = TokenSequence([np.array([1, 2]), np.array([0, 3, 1])], [5, 7])
    assert y.n_scales == 2
    assert y.lengths == (2, 3)
    assert y.total == 5
    assert y.flat().tolist() == [1, 2, 0, 3, 1]


def test_token_sequence_replace_is_functional():
    y = TokenSequence([np.array([1, 2]), np.array([0, 3])], [5, 7])
    y2 = y.replace(1, [6, 6])
    assert y2.indices[1].tolist() == [6, 6]
    assert y.indices[1].tolist() == [0, 3]  # original untouched
    with pytest.raises(ValueError):
        y.replace(0, [9, 9])  # out of range for sizes[0]=5


# -- malformed corpus ---------------------------------------------------------------

def _valid_motion_bytes():
    m = MotionSequence(np.zeros((2, 7)), fps=20.0)  # J=2, D=7
    import io, tempfile, os
    path = tempfile.mktemp()
    write_motion(path, m)
    with open(path, "rb") as f:
        blob = f.read()
    os.unlink(path)
    return bytearray(blob)


MOTION_CORPUS = {
    "bad_magic": lambda b: b"XSQM" + bytes(b[4:]),
    "truncated_head": lambda b: bytes(b[:8]),
    "bad_version": lambda b: bytes(b[:4]) + struct.pack("<H", 9) + bytes(b[6:]),
    "bad_header_joints": lambda b: bytes(b[:10]) + struct.pack("<H", 0) + bytes(b[12:]),
    "bad_header_dim": lambda b: bytes(b[:12]) + struct.pack("<H", 6) + bytes(b[14:]),
    "truncated_payload": lambda b: bytes(b[:-4]),
    "length_mismatch": lambda b: bytes(b) + b"\x00\x00\x00\x00",
    "bad_values": lambda b: bytes(b[:-56]) + struct.pack("<f", np.nan) + bytes(b[-52:]),
}

MOTION_EXPECT = {
    "bad_magic": "bad_magic",
    "truncated_head": "truncated",
    "bad_version": "bad_version",
    "bad_header_joints": "bad_header",
    "bad_header_dim": "bad_header",
    "truncated_payload": "truncated",
    "length_mismatch": "length_mismatch",
    "bad_values": "bad_values",
}


@pytest.mark.parametrize("case", sorted(MOTION_CORPUS))
def test_malformed_motion_files(tmp_path, case):
    blob = MOTION_CORPUS[case](_valid_motion_bytes())
    p = tmp_path / "bad.msqm"
    p.write_bytes(blob)
    with pytest.raises(FormatError) as exc:
        read_motion(p)
    assert exc.value.code == MOTION_EXPECT[case]


def _valid_token_bytes(tmp_path):
    y = TokenSequence([np.array([1, 2, 3]), np.array([0, 1])], [9, 4])
    p = tmp_path / "ok.msqt"
    write_tokens(p, y)
    return bytearray(p.read_bytes())


TOKEN_CASES = [
    ("bad_magic", lambda b: b"QQQQ" + bytes(b[4:]), "bad_magic"),
    ("short", lambda b: bytes(b[:6]), "truncated"),
    ("version", lambda b: bytes(b[:4]) + struct.pack("<H", 2) + bytes(b[6:]), "bad_version"),
    ("no_scales", lambda b: bytes(b[:6]) + struct.pack("<H", 0) + bytes(b[8:]), "bad_header"),
    ("scale_table_cut", lambda b: bytes(b[:10]), "truncated"),
    ("zero_length_scale", lambda b: bytes(b[:8]) + struct.pack("<H", 0) + bytes(b[10:]), "bad_header"),
    ("payload_cut", lambda b: bytes(b[:-4]), "truncated"),
    ("payload_extra", lambda b: bytes(b) + b"\x00" * 4, "length_mismatch"),
    ("index_overflow", lambda b: bytes(b[:-4]) + struct.pack("<I", 4), "bad_values"),
]


@pytest.mark.parametrize("name,mutate,code", TOKEN_CASES, ids=[c[0] for c in TOKEN_CASES])
def test_malformed_token_files(tmp_path, name, mutate, code):
    blob = mutate(_valid_token_bytes(tmp_path))
    p = tmp_path / "bad.msqt"
    p.write_bytes(blob)
    with pytest.raises(FormatError) as exc:
        read_tokens(p)
    assert exc.value.code == code


def test_format_error_carries_code():
    err = FormatError("bad_magic", "nope")
    assert err.code == "bad_magic"
    assert "nope" in str(err)
