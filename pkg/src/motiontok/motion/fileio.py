"""Motion file format.

Little-endian: magic "MSQM", u16 version, u32 N, u16 J, u16 D, f32 fps,
then N*D float32 values row-major. Values round-trip at single precision.
"""

import struct

import numpy as np

from ..errors import FormatError
from .types import MotionSequence

MAGIC = b"MSQM"
VERSION = 1
_HEADER = struct.Struct("<4sHIHHf")


def write_motion(path, x: MotionSequence) -> None:
    header = _HEADER.pack(MAGIC, VERSION, x.n_frames, x.joint_count,
                          x.feature_dim, np.float32(x.fps))
    payload = x.frames.astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def read_motion(path) -> MotionSequence:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise FormatError("bad_magic", f"not a motion file: {path}")
    if len(blob) < _HEADER.size:
        raise FormatError("truncated", "incomplete header")
    _, version, n, j, d, fps = _HEADER.unpack_from(blob)
    if version != VERSION:
        raise FormatError("bad_version", f"unsupported version {version}")
    if n < 1 or j < 2 or d != 4 + 3 * (j - 1) or not np.isfinite(fps):
        raise FormatError("bad_header", f"inconsistent header N={n} J={j} D={d} fps={fps}")
    payload = blob[_HEADER.size:]
    expect = n * d * 4
    if len(payload) < expect:
        raise FormatError("truncated", f"payload {len(payload)} bytes, expected {expect}")
    if len(payload) > expect:
        raise FormatError("length_mismatch", f"payload {len(payload)} bytes, expected {expect}")
    frames = np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float64)
    if not np.all(np.isfinite(frames)):
        raise FormatError("bad_values", "non-finite values in payload")
    return MotionSequence(frames, fps=float(fps), joint_count=j)
