"""Shared trained-checkpoint fixtures with a disk cache.

Training the full pipeline takes minutes, so checkpoints are cached in
tests/.cache keyed by a fingerprint of everything that affects the
result (benchmark seed and sizes, trainer hyperparameters).  Delete the
directory to retrain from scratch.
"""
from __future__ import annotations

import os

from motiontok.codec.model import CodecCheckpoint, encode_batch
from motiontok.codec.train import train_codec
from motiontok.evalsuite.benchmark import BenchmarkSizes, build_benchmark
from motiontok.evalsuite.report import config_fingerprint
from motiontok.generator.model import GeneratorCheckpoint
from motiontok.generator.train import train_edit_generator, train_generator

CACHE_DIR = os.path.join(os.path.dirname(__file__), ".cache")

BENCH_SEED = 0
SIZES = BenchmarkSizes()  # full benchmark: 2000/200/500-per-class/600/500/100

CODEC_KW = dict(seed=0, epochs=30, batch_size=32, lr_max=1e-3, lr_min=1e-4,
                alpha=0.1)
GEN_KW = dict(seed=0, epochs=20, batch_size=32, lr_max=3e-4, lr_min=3e-5,
              label_dropout=0.1)
EDIT_KW = dict(seed=0, epochs=30, batch_size=32, lr_max=3e-4, lr_min=3e-5)

_bench_cache: dict = {}


def benchmark():
    """Full benchmark bundles, built once per process."""
    key = (BENCH_SEED, SIZES)
    if key not in _bench_cache:
        _bench_cache[key] = build_benchmark(BENCH_SEED, SIZES)
    return _bench_cache[key]


def _cache_path(name: str, extra: dict) -> str:
    fp = config_fingerprint({"bench_seed": BENCH_SEED, "sizes": SIZES.to_dict(),
                             "kw": extra})
    os.makedirs(CACHE_DIR, exist_ok=True)
    return os.path.join(CACHE_DIR, f"{name}-{fp[:16]}.npz")


def trained_codec(log=None) -> CodecCheckpoint:
    path = _cache_path("codec", CODEC_KW)
    if os.path.exists(path):
        return CodecCheckpoint.load(path)
    ckpt = train_codec(benchmark().codec_train, **CODEC_KW, log=log)
    ckpt.save(path)
    return ckpt


def trained_generator(codec: CodecCheckpoint, log=None) -> GeneratorCheckpoint:
    path = _cache_path("gen", {**GEN_KW, "codec": CODEC_KW})
    if os.path.exists(path):
        return GeneratorCheckpoint.load(path)
    bench = benchmark()
    toks = encode_batch(bench.generator_train, codec)
    labels = [m.label for m in bench.generator_train]
    gen = train_generator(list(zip(toks, labels)), n_classes=4, **GEN_KW, log=log)
    gen.save(path)
    return gen


def trained_editor(codec: CodecCheckpoint, log=None) -> GeneratorCheckpoint:
    path = _cache_path("edit", {**EDIT_KW, "codec": CODEC_KW})
    if os.path.exists(path):
        return GeneratorCheckpoint.load(path)
    bench = benchmark()
    src = encode_batch([p.edit.source for p in bench.edit_train], codec)
    tgt = encode_batch([p.edit.target for p in bench.edit_train], codec)
    labels = [p.edit.edit_label for p in bench.edit_train]
    gen = train_edit_generator(list(zip(src, tgt, labels)), n_labels=4,
                               **EDIT_KW, log=log)
    gen.save(path)
    return gen
