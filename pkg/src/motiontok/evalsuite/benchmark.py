"""Deterministic dataset bundles: training corpora, eval pairs, manifests.

Every item's generator seed is a pure function of the master seed, so a
manifest can be computed without building any motion, and rebuilding with
the same seed reproduces the bundles bit-identically.  Bundles draw from
disjoint seed blocks, which keeps codec-test items out of codec-train by
construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import ConfigError
from ..motion.skeleton import Skeleton, default_skeleton
from ..motion.synth import CLASS_NAMES, EDIT_NAMES, synth_edit_pair, synth_generate
from ..motion.types import EditPair, LabeledMotion

__all__ = ["BenchmarkSizes", "Benchmark", "IDENTITY_EDIT",
           "build_benchmark", "build_manifest"]

IDENTITY_EDIT = len(EDIT_NAMES)  # edit label meaning "reproduce the source"

_SPAN = 1_000_000  # seed block reserved per bundle
_BLOCKS = ("codec_train", "codec_test", "generator_train",
           "edit_train", "edit_pairs", "control")


@dataclass(frozen=True)
class BenchmarkSizes:
    """Bundle sizes; defaults are the full benchmark."""

    codec_train: int = 2000
    codec_test: int = 200
    generator_per_class: int = 500
    edit_train: int = 600
    edit_pairs: int = 500
    control: int = 100
    n_frames: int = 64
    fps: float = 20.0

    def __post_init__(self):
        for name in ("codec_train", "codec_test", "generator_per_class",
                     "edit_train", "edit_pairs", "control", "n_frames"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.generator_per_class * len(CLASS_NAMES) >= _SPAN:
            raise ConfigError("generator bundle exceeds its seed block")

    def to_dict(self) -> dict:
        return {"codec_train": self.codec_train, "codec_test": self.codec_test,
                "generator_per_class": self.generator_per_class,
                "edit_train": self.edit_train, "edit_pairs": self.edit_pairs,
                "control": self.control, "n_frames": self.n_frames,
                "fps": self.fps}

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkSizes":
        return cls(**d)


@dataclass(frozen=True)
class Benchmark:
    manifest: dict
    codec_train: List[LabeledMotion]
    codec_test: List[LabeledMotion]
    generator_train: List[LabeledMotion]
    edit_train: List[LabeledMotion]   # .edit set; includes identity pairs
    edit_pairs: List[LabeledMotion]   # held-out transform pairs only
    control: List[np.ndarray]         # pelvis trajectories, (N, 4) each


def _block_base(seed: int, block: str) -> int:
    return seed * len(_BLOCKS) * _SPAN + _BLOCKS.index(block) * _SPAN


def build_manifest(seed: int, sizes: BenchmarkSizes = None) -> dict:
    """Per-item (class, edit, seed) listing for every bundle."""
    sizes = sizes or BenchmarkSizes()
    n_cls = len(CLASS_NAMES)
    n_lab = len(EDIT_NAMES) + 1  # transforms plus identity
    bundles: dict = {}

    for block, count in (("codec_train", sizes.codec_train),
                         ("codec_test", sizes.codec_test)):
        base = _block_base(seed, block)
        bundles[block] = [{"class": i % n_cls, "seed": base + i}
                          for i in range(count)]

    base = _block_base(seed, "generator_train")
    bundles["generator_train"] = [
        {"class": c, "seed": base + c * sizes.generator_per_class + i}
        for c in range(n_cls) for i in range(sizes.generator_per_class)]

    # class cycles per item, label per n_cls items: full cross product
    base = _block_base(seed, "edit_train")
    bundles["edit_train"] = [
        {"class": i % n_cls, "edit": (i // n_cls) % n_lab, "seed": base + i}
        for i in range(sizes.edit_train)]

    base = _block_base(seed, "edit_pairs")
    bundles["edit_pairs"] = [
        {"class": i % n_cls, "edit": (i // n_cls) % len(EDIT_NAMES),
         "seed": base + i}
        for i in range(sizes.edit_pairs)]

    # locomoting classes only: walk, turn
    base = _block_base(seed, "control")
    bundles["control"] = [{"class": i % 2, "seed": base + i}
                          for i in range(sizes.control)]

    return {"version": 1, "seed": int(seed), "sizes": sizes.to_dict(),
            "classes": list(CLASS_NAMES), "edits": list(EDIT_NAMES),
            "identity_edit": IDENTITY_EDIT, "bundles": bundles}


def _edit_item(entry: dict, n_frames: int, fps: float,
               skeleton: Skeleton) -> LabeledMotion:
    if entry["edit"] == IDENTITY_EDIT:
        item = synth_generate(entry["class"], n_frames, entry["seed"],
                              fps=fps, skeleton=skeleton)
        pair = EditPair(item.motion, item.motion, IDENTITY_EDIT)
        return LabeledMotion(item.motion, item.label, edit=pair)
    return synth_edit_pair(entry["class"], entry["edit"], n_frames,
                           entry["seed"], fps=fps, skeleton=skeleton)


def build_benchmark(seed: int, sizes: BenchmarkSizes = None,
                    skeleton: Skeleton = None) -> Benchmark:
    """Materialize every bundle listed by the manifest."""
    sizes = sizes or BenchmarkSizes()
    skeleton = skeleton or default_skeleton()
    man = build_manifest(seed, sizes)
    nf, fps = sizes.n_frames, sizes.fps

    def gen_bundle(name):
        return [synth_generate(e["class"], nf, e["seed"], fps=fps,
                               skeleton=skeleton)
                for e in man["bundles"][name]]

    edit_train = [_edit_item(e, nf, fps, skeleton)
                  for e in man["bundles"]["edit_train"]]
    edit_pairs = [synth_edit_pair(e["class"], e["edit"], nf, e["seed"],
                                  fps=fps, skeleton=skeleton)
                  for e in man["bundles"]["edit_pairs"]]
    control = [synth_generate(e["class"], nf, e["seed"], fps=fps,
                              skeleton=skeleton).motion.frames[:, :4].copy()
               for e in man["bundles"]["control"]]

    return Benchmark(manifest=man,
                     codec_train=gen_bundle("codec_train"),
                     codec_test=gen_bundle("codec_test"),
                     generator_train=gen_bundle("generator_train"),
                     edit_train=edit_train,
                     edit_pairs=edit_pairs,
                     control=control)
