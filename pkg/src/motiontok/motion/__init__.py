"""Skeleton, motion containers, synthetic data, and the motion file format."""

from .fileio import read_motion, write_motion
from .skeleton import PART_ORDER, Skeleton, default_skeleton
from .synth import (CLASS_NAMES, EDIT_GROUP, EDIT_NAMES, class_id, edit_id,
                    synth_edit_pair, synth_generate)
from .types import (EditPair, LabeledMotion, MotionSequence, PartFeature,
                    check_nested, decompose, reassemble)

__all__ = [
    "Skeleton",
    "default_skeleton",
    "PART_ORDER",
    "MotionSequence",
    "PartFeature",
    "LabeledMotion",
    "EditPair",
    "decompose",
    "reassemble",
    "check_nested",
    "CLASS_NAMES",
    "EDIT_NAMES",
    "EDIT_GROUP",
    "class_id",
    "edit_id",
    "synth_generate",
    "synth_edit_pair",
    "read_motion",
    "write_motion",
]
