"""Deterministic synthetic motion generator.

Four action classes with closed-form trajectories. Every part group draws its
parameters from its own seeded RNG stream, so an edit that re-synthesizes one
group leaves every other group bit-identical.
"""

import numpy as np

from .skeleton import PART_ORDER, Skeleton, default_skeleton
from .types import EditPair, LabeledMotion, MotionSequence

CLASS_NAMES = ("walk", "turn", "wave", "squat")
WALK, TURN, WAVE, SQUAT = range(4)

EDIT_NAMES = ("raise_arms", "bend_knees", "lean_forward")
EDIT_GROUP = {0: "arms", 1: "legs", 2: "torso"}

BASE_HEIGHT = 0.95
_TAG = 7142  # domain separator for RNG streams

_MIN_FRAMES = 16


def class_id(name_or_id) -> int:
    if isinstance(name_or_id, str):
        if name_or_id not in CLASS_NAMES:
            raise ValueError(f"unknown action class: {name_or_id!r}")
        return CLASS_NAMES.index(name_or_id)
    cid = int(name_or_id)
    if not 0 <= cid < len(CLASS_NAMES):
        raise ValueError(f"unknown action class: {name_or_id!r}")
    return cid


def edit_id(name_or_id) -> int:
    if isinstance(name_or_id, str):
        if name_or_id not in EDIT_NAMES:
            raise ValueError(f"unknown edit label: {name_or_id!r}")
        return EDIT_NAMES.index(name_or_id)
    eid = int(name_or_id)
    if not 0 <= eid < len(EDIT_NAMES):
        raise ValueError(f"unknown edit label: {name_or_id!r}")
    return eid


def _rng(seed: int, cid: int, group: str):
    return np.random.default_rng([_TAG, int(seed), cid, PART_ORDER.index(group)])


def _draw_params(cid: int, seed: int) -> dict:
    params = {}
    rng = _rng(seed, cid, "pelvis")
    p = {"heading0": rng.uniform(-np.pi, np.pi)}
    if cid == WALK:
        p.update(speed=rng.uniform(1.0, 1.4), step_freq=rng.uniform(1.6, 2.0),
                 bob=rng.uniform(0.010, 0.020))
    elif cid == TURN:
        p.update(omega=(1.0 if rng.random() < 0.5 else -1.0) * rng.uniform(0.4, 0.8),
                 radius=rng.uniform(0.6, 1.2))
    elif cid == WAVE:
        p.update(sway=rng.uniform(0.002, 0.006), sway_freq=rng.uniform(0.2, 0.4))
    else:
        p.update(depth=rng.uniform(0.25, 0.40), freq=rng.uniform(0.5, 0.8))
    params["pelvis"] = p

    for group in ("torso", "legs", "arms", "head"):
        rng = _rng(seed, cid, group)
        g = {"amp": rng.uniform(0.8, 1.2), "freq": rng.uniform(1.5, 2.2),
             "phase": rng.uniform(0.0, 2 * np.pi)}
        if group == "arms":
            g["side"] = int(rng.integers(0, 2))
            g["raise"] = 0.0
        elif group == "legs":
            g["crouch"] = 0.0
        elif group == "torso":
            g["lean"] = 0.0
        params[group] = g
    return params


def _pelvis_track(cid: int, p: dict, t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    out = np.zeros((n, 4))
    h0 = p["heading0"]
    out[:, 1] = BASE_HEIGHT
    out[:, 3] = h0
    if cid == WALK:
        out[:, 0] = p["speed"] * t * np.cos(h0)
        out[:, 2] = p["speed"] * t * np.sin(h0)
        out[:, 1] += p["bob"] * np.sin(2 * np.pi * 2 * p["step_freq"] * t)
    elif cid == TURN:
        ang = h0 + p["omega"] * t
        r = p["radius"]
        out[:, 0] = r * (np.sin(ang) - np.sin(h0)) * np.sign(p["omega"])
        out[:, 2] = r * (np.cos(h0) - np.cos(ang)) * np.sign(p["omega"])
        out[:, 3] = ang
    elif cid == WAVE:
        out[:, 0] = p["sway"] * np.sin(2 * np.pi * p["sway_freq"] * t)
    else:
        out[:, 1] -= p["depth"] * 0.5 * (1 - np.cos(2 * np.pi * p["freq"] * t))
    return out


def _osc(p: dict, t: np.ndarray, phase_shift: float = 0.0) -> np.ndarray:
    return np.sin(2 * np.pi * p["freq"] * t + p["phase"] + phase_shift)


def _squat_cycle(p: dict, t: np.ndarray) -> np.ndarray:
    return 0.5 * (1 - np.cos(2 * np.pi * p["freq"] * t + p.get("phase", 0.0) * 0))


def _legs_delta(cid: int, p: dict, t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    d = np.zeros((n, 8, 3))
    prof_z = np.array([0.05, 0.45, 0.95, 1.05])
    prof_y = np.array([0.00, 0.10, 0.22, 0.25])
    if cid in (WALK, TURN):
        a = (0.13 if cid == WALK else 0.09) * p["amp"]
        for side in range(2):
            s = _osc(p, t, np.pi * side)
            sl = slice(4 * side, 4 * side + 4)
            d[:, sl, 2] = a * prof_z * s[:, None]
            d[:, sl, 1] = 0.5 * a * prof_y * (1 + s)[:, None]
    elif cid == SQUAT:
        q = _squat_cycle(p, t)
        knee_fwd = np.array([0.02, 0.16, 0.04, 0.04])
        rel_up = np.array([0.00, 0.06, 0.20, 0.22])
        for side in range(2):
            sl = slice(4 * side, 4 * side + 4)
            d[:, sl, 2] = p["amp"] * knee_fwd * q[:, None]
            d[:, sl, 1] = p["amp"] * rel_up * q[:, None]
    crouch = p.get("crouch", 0.0)
    if crouch:
        for side in range(2):
            knee = 4 * side + 1
            d[:, knee, 2] += crouch
            d[:, knee, 1] -= 0.6 * crouch
    return d


def _arms_delta(cid: int, p: dict, t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    d = np.zeros((n, 8, 3))
    prof_raise = np.array([0.05, 0.45, 0.95, 1.10])
    prof_osc = np.array([0.02, 0.25, 0.80, 1.00])
    if cid in (WALK, TURN):
        a = 0.05 * p["amp"]
        for side in range(2):
            s = _osc(p, t, np.pi * side)
            sl = slice(4 * side, 4 * side + 4)
            d[:, sl, 2] = a * prof_osc * s[:, None]
    elif cid == WAVE:
        side = p["side"]
        sl = slice(4 * side, 4 * side + 4)
        d[:, sl, 1] = 0.35 * prof_raise
        d[:, sl, 0] = 0.18 * p["amp"] * prof_osc * _osc(p, t)[:, None]
        other = slice(4 * (1 - side), 4 * (1 - side) + 4)
        d[:, other, 2] = 0.02 * prof_osc * _osc(p, t, np.pi / 3)[:, None]
    else:
        q = _squat_cycle(p, t)
        for side in range(2):
            sl = slice(4 * side, 4 * side + 4)
            d[:, sl, 2] = 0.30 * p["amp"] * prof_raise * q[:, None]
    lift = p.get("raise", 0.0)
    if lift:
        for side in range(2):
            sl = slice(4 * side, 4 * side + 4)
            d[:, sl, 1] += lift * prof_raise
    return d


def _torso_delta(cid: int, p: dict, t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    d = np.zeros((n, 4, 3))
    prof = np.array([0.25, 0.50, 0.75, 1.00])
    if cid in (WALK, TURN):
        d[:, :, 1] = 0.010 * p["amp"] * prof * _osc(p, t)[:, None]
    elif cid == WAVE:
        d[:, :, 0] = 0.010 * p["amp"] * prof * _osc(p, t)[:, None]
    else:
        d[:, :, 2] = 0.12 * p["amp"] * prof * _squat_cycle(p, t)[:, None]
    lean = p.get("lean", 0.0)
    if lean:
        d[:, :, 2] += lean * prof
    return d


def _head_delta(cid: int, p: dict, t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    d = np.zeros((n, 1, 3))
    d[:, 0, 1] = 0.008 * p["amp"] * _osc(p, t)
    return d


def _build(cid: int, params: dict, n_frames: int, fps: float,
           skeleton: Skeleton) -> MotionSequence:
    t = np.arange(n_frames) / fps
    frames = np.zeros((n_frames, skeleton.feature_dim))
    frames[:, :4] = _pelvis_track(cid, params["pelvis"], t)
    rel = np.tile(skeleton.rest_relative, (n_frames, 1, 1))
    rel[:, np.array(skeleton.groups["torso"]) - 1] += _torso_delta(cid, params["torso"], t)
    rel[:, np.array(skeleton.groups["legs"]) - 1] += _legs_delta(cid, params["legs"], t)
    rel[:, np.array(skeleton.groups["arms"]) - 1] += _arms_delta(cid, params["arms"], t)
    rel[:, np.array(skeleton.groups["head"]) - 1] += _head_delta(cid, params["head"], t)
    frames[:, 4:] = rel.reshape(n_frames, -1)
    return MotionSequence(frames, fps=fps, joint_count=skeleton.joint_count)


def synth_generate(cls, n_frames: int, seed: int, fps: float = 20.0,
                   skeleton: Skeleton = None) -> LabeledMotion:
    """One labeled sequence; bit-identical for identical (class, N, seed)."""
    cid = class_id(cls)
    if n_frames < _MIN_FRAMES:
        raise ValueError(f"n_frames must be >= {_MIN_FRAMES}")
    skeleton = skeleton or default_skeleton()
    params = _draw_params(cid, seed)
    return LabeledMotion(_build(cid, params, n_frames, fps, skeleton), cid)


_EDIT_TRANSFORMS = {
    0: ("arms", lambda g: {**g, "amp": g["amp"] * 1.8, "raise": 0.30}),
    1: ("legs", lambda g: {**g, "amp": g["amp"] * 1.6, "crouch": 0.12}),
    2: ("torso", lambda g: {**g, "lean": 0.15}),
}


def synth_edit_pair(cls, edit, n_frames: int, seed: int, fps: float = 20.0,
                    skeleton: Skeleton = None) -> LabeledMotion:
    """Source/target pair differing only in the edited part group."""
    cid = class_id(cls)
    eid = edit_id(edit)
    if n_frames < _MIN_FRAMES:
        raise ValueError(f"n_frames must be >= {_MIN_FRAMES}")
    skeleton = skeleton or default_skeleton()
    params = _draw_params(cid, seed)
    group, transform = _EDIT_TRANSFORMS[eid]
    edited = dict(params)
    edited[group] = transform(params[group])
    source = _build(cid, params, n_frames, fps, skeleton)
    target = _build(cid, edited, n_frames, fps, skeleton)
    return LabeledMotion(source, cid, edit=EditPair(source, target, eid))
