"""Command-line interface.

One subcommand per pipeline stage.  Options resolve as: explicit flag >
config-file key (YAML mapping, keys = flag names with underscores) >
built-in default.  Exit codes: 0 success, 2 usage or bad/missing input,
3 runtime invariant violation.  Errors print one JSON line to stderr.
Input files are never written to.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import yaml

from .codec.model import (CodecCheckpoint, decode, encode, encode_batch,
                          partial_decode, reconstruct)
from .codec.tokens import read_tokens, write_tokens
from .codec.train import train_codec
from .errors import ConfigError, FormatError, InvariantError
from .evalsuite.benchmark import (IDENTITY_EDIT, BenchmarkSizes,
                                  build_benchmark)
from .evalsuite.metrics import mpjpe
from .evalsuite.report import EvalReport
from .generator.model import GeneratorCheckpoint
from .generator.sampling import sample
from .generator.train import train_edit_generator, train_generator
from .motion.fileio import read_motion, write_motion
from .motion.synth import CLASS_NAMES, EDIT_NAMES, class_id
from .tasks import (CompositionRequest, ControlRequest, EditRequest,
                    InpaintSpec, control_generate, edit, inpaint)

PROG = "motiontok"


def _err_line(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def _need(path) -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input not found: {path}")
    return path


def _check_out(out, *inputs) -> None:
    ap = os.path.abspath
    for p in inputs:
        if p is not None and ap(out) == ap(str(p)):
            raise ConfigError(f"output would overwrite input {p}")


def _opt(args, cfg: dict, key: str, default=None, required: bool = False):
    v = getattr(args, key, None)
    if v is None:
        v = cfg.get(key, default)
    if required and v is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return v


def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if path is None:
        return {}
    _need(path)
    with open(path) as f:
        cfg = yaml.safe_load(f) or {}
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a mapping")
    return {str(k).replace("-", "_"): v for k, v in cfg.items()}


def _class_label(v):
    if v is None:
        return None
    return class_id(int(v) if str(v).lstrip("-").isdigit() else v)


def _edit_label(v) -> int:
    s = str(v)
    if s.lstrip("-").isdigit():
        return int(s)
    if s == "identity":
        return IDENTITY_EDIT
    if s in EDIT_NAMES:
        return EDIT_NAMES.index(s)
    raise ConfigError(f"unknown edit label {v!r}")


# -- data directory layout ---------------------------------------------------

def _item_path(data_dir, bundle, i, suffix=""):
    return os.path.join(data_dir, bundle, f"{i:06d}{suffix}")


def _load_manifest(data_dir) -> dict:
    with open(_need(os.path.join(data_dir, "manifest.json"))) as f:
        return json.load(f)


def _bundle_motions(data_dir, man, bundle):
    n = len(man["bundles"][bundle])
    return [read_motion(_need(_item_path(data_dir, bundle, i, ".msqm")))
            for i in range(n)]


def _bundle_pairs(data_dir, man, bundle):
    out = []
    for i, e in enumerate(man["bundles"][bundle]):
        src = read_motion(_need(_item_path(data_dir, bundle, i, "_src.msqm")))
        tgt = read_motion(_need(_item_path(data_dir, bundle, i, "_tgt.msqm")))
        out.append((src, tgt, e["edit"]))
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_gen_data(args, cfg) -> int:
    out_dir = _opt(args, cfg, "out", required=True)
    seed = int(_opt(args, cfg, "seed", 0))
    sizes = BenchmarkSizes(
        codec_train=int(_opt(args, cfg, "codec_train", 2000)),
        codec_test=int(_opt(args, cfg, "codec_test", 200)),
        generator_per_class=int(_opt(args, cfg, "gen_per_class", 500)),
        edit_train=int(_opt(args, cfg, "edit_train", 600)),
        edit_pairs=int(_opt(args, cfg, "edit_pairs", 500)),
        control=int(_opt(args, cfg, "control", 100)),
        n_frames=int(_opt(args, cfg, "n_frames", 64)),
        fps=float(_opt(args, cfg, "fps", 20.0)))
    bench = build_benchmark(seed, sizes)

    for bundle in ("codec_train", "codec_test", "generator_train"):
        os.makedirs(os.path.join(out_dir, bundle), exist_ok=True)
        for i, item in enumerate(getattr(bench, bundle)):
            write_motion(_item_path(out_dir, bundle, i, ".msqm"), item.motion)
    for bundle in ("edit_train", "edit_pairs"):
        os.makedirs(os.path.join(out_dir, bundle), exist_ok=True)
        for i, item in enumerate(getattr(bench, bundle)):
            write_motion(_item_path(out_dir, bundle, i, "_src.msqm"), item.edit.source)
            write_motion(_item_path(out_dir, bundle, i, "_tgt.msqm"), item.edit.target)
    os.makedirs(os.path.join(out_dir, "control"), exist_ok=True)
    for i, traj in enumerate(bench.control):
        np.save(_item_path(out_dir, "control", i, ".npy"), traj)
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(bench.manifest, f, indent=1, sort_keys=True)
    print(f"wrote benchmark seed={seed} to {out_dir}")
    return 0


def cmd_train_codec(args, cfg) -> int:
    data_dir = _opt(args, cfg, "data", required=True)
    out = _opt(args, cfg, "out", required=True)
    man = _load_manifest(data_dir)
    dataset = _bundle_motions(data_dir, man, "codec_train")
    ckpt = train_codec(dataset,
                       seed=int(_opt(args, cfg, "seed", 0)),
                       epochs=int(_opt(args, cfg, "epochs", 30)),
                       batch_size=int(_opt(args, cfg, "batch_size", 32)),
                       lr_max=float(_opt(args, cfg, "lr_max", 1e-4)),
                       lr_min=float(_opt(args, cfg, "lr_min", 1e-5)),
                       alpha=float(_opt(args, cfg, "alpha", 0.1)),
                       log=print if args.verbose else None)
    ckpt.save(out)
    print(f"codec checkpoint -> {out} (final loss "
          f"{ckpt.meta['loss_curve'][-1]:.6f})")
    return 0


def _encode_bundle(data_dir, man, bundle, codec_path):
    codec = CodecCheckpoint.load(_need(codec_path))
    motions = _bundle_motions(data_dir, man, bundle)
    toks = encode_batch(motions, codec)
    labels = [e["class"] for e in man["bundles"][bundle]]
    return codec, list(zip(toks, labels))


def cmd_train_gen(args, cfg) -> int:
    data_dir = _opt(args, cfg, "data", required=True)
    out = _opt(args, cfg, "out", required=True)
    man = _load_manifest(data_dir)
    _, dataset = _encode_bundle(data_dir, man, "generator_train",
                                _opt(args, cfg, "codec", required=True))
    gen = train_generator(dataset, n_classes=len(man["classes"]),
                          seed=int(_opt(args, cfg, "seed", 0)),
                          epochs=int(_opt(args, cfg, "epochs", 20)),
                          batch_size=int(_opt(args, cfg, "batch_size", 32)),
                          lr_max=float(_opt(args, cfg, "lr_max", 3e-4)),
                          lr_min=float(_opt(args, cfg, "lr_min", 3e-5)),
                          label_dropout=float(_opt(args, cfg, "label_dropout", 0.1)),
                          log=print if args.verbose else None)
    gen.save(out)
    print(f"generator checkpoint -> {out} (final loss "
          f"{gen.meta['loss_curve'][-1]:.6f})")
    return 0


def cmd_train_edit(args, cfg) -> int:
    data_dir = _opt(args, cfg, "data", required=True)
    out = _opt(args, cfg, "out", required=True)
    man = _load_manifest(data_dir)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "codec", required=True)))
    pairs = _bundle_pairs(data_dir, man, "edit_train")
    src_toks = encode_batch([p[0] for p in pairs], codec)
    tgt_toks = encode_batch([p[1] for p in pairs], codec)
    dataset = [(s, t, p[2]) for s, t, p in zip(src_toks, tgt_toks, pairs)]
    gen = train_edit_generator(dataset, n_labels=len(man["edits"]) + 1,
                               seed=int(_opt(args, cfg, "seed", 0)),
                               epochs=int(_opt(args, cfg, "epochs", 20)),
                               batch_size=int(_opt(args, cfg, "batch_size", 32)),
                               lr_max=float(_opt(args, cfg, "lr_max", 3e-4)),
                               lr_min=float(_opt(args, cfg, "lr_min", 3e-5)),
                               log=print if args.verbose else None)
    gen.save(out)
    print(f"edit checkpoint -> {out} (final loss "
          f"{gen.meta['loss_curve'][-1]:.6f})")
    return 0


def cmd_encode(args, cfg) -> int:
    src = _need(_opt(args, cfg, "infile", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, src)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "ckpt", required=True)))
    write_tokens(out, encode(read_motion(src), codec))
    return 0


def cmd_decode(args, cfg) -> int:
    src = _need(_opt(args, cfg, "infile", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, src)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "ckpt", required=True)))
    write_motion(out, decode(read_tokens(src), codec))
    return 0


def cmd_partial_decode(args, cfg) -> int:
    src = _need(_opt(args, cfg, "infile", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, src)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "ckpt", required=True)))
    s_max = int(_opt(args, cfg, "s_max", required=True))
    try:
        m = partial_decode(read_tokens(src), codec, s_max)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    write_motion(out, m)
    return 0


def cmd_compose(args, cfg) -> int:
    p1 = _need(_opt(args, cfg, "in1", required=True))
    p2 = _need(_opt(args, cfg, "in2", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, p1, p2)
    frac = _opt(args, cfg, "fraction")
    split = _opt(args, cfg, "s_split")
    req = CompositionRequest(first=read_tokens(p1), second=read_tokens(p2),
                             mode=_opt(args, cfg, "mode", required=True),
                             fraction=None if frac is None else float(frac),
                             s_split=None if split is None else int(split))
    write_tokens(out, req.run())
    return 0


def _load_ckpt_pair(args, cfg):
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "codec", required=True)))
    gen = GeneratorCheckpoint.load(_need(_opt(args, cfg, "gen", required=True)))
    return codec, gen


def cmd_control(args, cfg) -> int:
    traj_path = _need(_opt(args, cfg, "traj", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, traj_path)
    try:
        traj = np.load(traj_path, allow_pickle=False)
    except ValueError as e:
        raise FormatError("bad_header", f"trajectory is not a plain array: {e}") from None
    codec, gen = _load_ckpt_pair(args, cfg)
    req = ControlRequest(trajectory=traj,
                         label=_class_label(_opt(args, cfg, "label")))
    rng = np.random.default_rng(int(_opt(args, cfg, "seed", 0)))
    m = control_generate(req, codec, gen, rng,
                         iterations=int(_opt(args, cfg, "iterations", 5)))
    write_motion(out, m)
    return 0


def cmd_edit(args, cfg) -> int:
    src = _need(_opt(args, cfg, "infile", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, src)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "codec", required=True)))
    gen = GeneratorCheckpoint.load(_need(_opt(args, cfg, "gen", required=True)))
    y = encode(read_motion(src), codec)
    req = EditRequest(source=y,
                      label=_edit_label(_opt(args, cfg, "label", required=True)))
    write_motion(out, decode(edit(req, gen), codec))
    return 0


def cmd_inpaint(args, cfg) -> int:
    src = _need(_opt(args, cfg, "infile", required=True))
    out = _opt(args, cfg, "out", required=True)
    _check_out(out, src)
    codec, gen = _load_ckpt_pair(args, cfg)
    spec = InpaintSpec(kind=_opt(args, cfg, "kind", required=True),
                       mode=_opt(args, cfg, "mode", required=True),
                       fraction=float(_opt(args, cfg, "fraction", 0.7)))
    rng = np.random.default_rng(int(_opt(args, cfg, "seed", 0)))
    m = inpaint(read_motion(src), spec, codec, gen, rng,
                iterations=int(_opt(args, cfg, "iterations", 5)))
    write_motion(out, m)
    return 0


def cmd_sample(args, cfg) -> int:
    out = _opt(args, cfg, "out", required=True)
    codec, gen = _load_ckpt_pair(args, cfg)
    rng = np.random.default_rng(int(_opt(args, cfg, "seed", 0)))
    y = sample(gen, label=_class_label(_opt(args, cfg, "label")), rng=rng,
               iterations=int(_opt(args, cfg, "iterations", 5)))
    write_motion(out, decode(y, codec))
    return 0


def _eval_reconstruction(codec, test_set):
    per = []
    for i, x in enumerate(test_set):
        per.append({"index": i, "mpjpe": mpjpe(x, reconstruct(x, codec))})
    vals = np.array([p["mpjpe"] for p in per])
    return {"mpjpe_mean": float(vals.mean()),
            "mpjpe_median": float(np.median(vals))}, per


def _eval_scale_ablation(codec, test_set):
    n_scales = codec.config.n_scales
    toks = [encode(x, codec) for x in test_set]
    metrics, per = {}, []
    print(f"{'s_max':>5}  {'mpjpe':>10}")
    for s_max in range(1, n_scales + 1):
        errs = [mpjpe(x, partial_decode(y, codec, s_max))
                for x, y in zip(test_set, toks)]
        mean = float(np.mean(errs))
        metrics[f"mpjpe@s_max={s_max}"] = mean
        per.append({"s_max": s_max, "mpjpe": mean})
        print(f"{s_max:>5}  {mean:>10.3f}")
    return metrics, per


def cmd_eval(args, cfg) -> int:
    task = _opt(args, cfg, "task", required=True)
    data_dir = _opt(args, cfg, "data", required=True)
    seed = int(_opt(args, cfg, "seed", 0))
    man = _load_manifest(data_dir)
    codec = CodecCheckpoint.load(_need(_opt(args, cfg, "codec", required=True)))
    test_set = _bundle_motions(data_dir, man, "codec_test")

    if task == "reconstruction":
        metrics, per = _eval_reconstruction(codec, test_set)
    elif task == "scale-ablation":
        metrics, per = _eval_scale_ablation(codec, test_set)
    else:
        raise ConfigError(f"unknown eval task {task!r}")

    fp_config = {"task": task, "seed": seed, "codec": codec.config.to_dict(),
                 "data_seed": man["seed"], "sizes": man["sizes"]}
    rep = EvalReport.build(metrics, fp_config, seed, per_sequence=per)
    out = _opt(args, cfg, "out")
    if out is not None:
        rep.save(out)
    for k in sorted(metrics):
        print(f"{k}: {metrics[k]:.6f}")
    return 0


def cmd_report(args, cfg) -> int:
    rep = EvalReport.load(_need(_opt(args, cfg, "infile", required=True)))
    print(f"seed: {rep.seed}")
    print(f"fingerprint: {rep.fingerprint}")
    for k in sorted(rep.metrics):
        print(f"{k}: {rep.metrics[k]}")
    return 0


# -- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit 2 with a machine-readable line."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _err_line("usage", message)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=PROG, description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, *specs):
        sp = sub.add_parser(name)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", default=None)
        sp.add_argument("--verbose", action="store_true")
        for flag, kw in specs:
            sp.add_argument(flag, **kw)
        return sp

    num = {"default": None}
    add("gen-data", cmd_gen_data, ("--out", num), ("--seed", num),
        ("--codec-train", num), ("--codec-test", num), ("--gen-per-class", num),
        ("--edit-train", num), ("--edit-pairs", num), ("--control", num),
        ("--n-frames", num), ("--fps", num))
    train = (("--data", num), ("--out", num), ("--seed", num), ("--epochs", num),
             ("--batch-size", num), ("--lr-max", num), ("--lr-min", num))
    add("train-codec", cmd_train_codec, *train, ("--alpha", num))
    add("train-gen", cmd_train_gen, *train, ("--codec", num), ("--label-dropout", num))
    add("train-edit", cmd_train_edit, *train, ("--codec", num))
    add("encode", cmd_encode, ("--in", dict(dest="infile")), ("--ckpt", num), ("--out", num))
    add("decode", cmd_decode, ("--in", dict(dest="infile")), ("--ckpt", num), ("--out", num))
    add("partial-decode", cmd_partial_decode, ("--in", dict(dest="infile")),
        ("--ckpt", num), ("--out", num), ("--s-max", num))
    add("compose", cmd_compose, ("--in1", num), ("--in2", num), ("--mode", num),
        ("--fraction", num), ("--s-split", num), ("--out", num))
    add("control", cmd_control, ("--traj", num), ("--codec", num), ("--gen", num),
        ("--label", num), ("--seed", num), ("--iterations", num), ("--out", num))
    add("edit", cmd_edit, ("--in", dict(dest="infile")), ("--label", num),
        ("--codec", num), ("--gen", num), ("--out", num))
    add("inpaint", cmd_inpaint, ("--in", dict(dest="infile")), ("--kind", num),
        ("--mode", num), ("--fraction", num), ("--codec", num), ("--gen", num),
        ("--seed", num), ("--iterations", num), ("--out", num))
    add("sample", cmd_sample, ("--codec", num), ("--gen", num), ("--label", num),
        ("--seed", num), ("--iterations", num), ("--out", num))
    add("eval", cmd_eval, ("--task", num), ("--data", num), ("--codec", num),
        ("--gen", num), ("--seed", num), ("--out", num))
    add("report", cmd_report, ("--in", dict(dest="infile")))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except FileNotFoundError as e:
        _err_line("input_not_found", str(e))
        return 2
    except FormatError as e:
        _err_line(e.code, str(e))
        return 2
    except ConfigError as e:
        _err_line("config", str(e))
        return 2
    except InvariantError as e:
        _err_line("invariant", str(e))
        return 3


if __name__ == "__main__":
    sys.exit(main())
