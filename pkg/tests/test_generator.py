"""Masked-token generator: schedule math, layout bijections, sampler contracts."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from motiontok.codec.tokens import TokenSequence
from motiontok.errors import ConfigError, InvariantError
from motiontok.generator.layout import NEG, TokenLayout
from motiontok.generator.model import (
    GeneratorCheckpoint,
    GeneratorConfig,
    forward_ids,
    init_generator,
    nll_loss,
)
from motiontok.generator.sampling import predict_tokens, sample
from motiontok.generator.schedule import MaskSchedule, gamma, mask_tokens, remask_count
from motiontok.generator.train import masked_accuracy, train_edit_generator, train_generator
from motiontok.nn import Tensor


# -- schedule -------------------------------------------------------------------

def test_gamma_endpoints():
    assert gamma(0.0) == 1.0
    assert abs(gamma(0.5) - math.cos(math.pi / 4)) < 1e-12


def test_gamma_monotone_decreasing():
    taus = np.linspace(0.0, 0.999, 200)
    vals = [gamma(t) for t in taus]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_gamma_domain():
    for bad in (1.0, -0.1, 2.0, float("nan")):
        with pytest.raises(ConfigError):
            gamma(bad)


def test_remask_count_final_pass_is_zero():
    for k_total in (1, 5, 10):
        for n in range(0, 1001):
            assert remask_count(k_total, k_total, n) == 0


def test_remask_count_known_value():
    # cos(pi/10) * 100 = 95.105... -> ceil 96
    assert remask_count(1, 5, 100) == 96


def test_remask_count_non_increasing_in_k():
    for n in (1, 17, 210):
        counts = [remask_count(k, 5, n) for k in range(1, 6)]
        assert all(b <= a for a, b in zip(counts, counts[1:]))
        assert counts[-1] == 0


def test_remask_count_validation():
    with pytest.raises(ConfigError):
        remask_count(0, 5, 10)
    with pytest.raises(ConfigError):
        remask_count(6, 5, 10)
    with pytest.raises(ConfigError):
        remask_count(1, 5, -1)


def test_mask_tokens_counts_and_positions():
    rng = np.random.default_rng(0)
    ids = np.arange(50)
    out, pos = mask_tokens(ids, tau=0.5, rng=rng, mask_id=999)
    want = math.ceil(gamma(0.5) * 50)
    assert pos.size == want
    assert np.all(out[pos] == 999)
    untouched = np.setdiff1d(np.arange(50), pos)
    assert np.array_equal(out[untouched], ids[untouched])
    assert np.array_equal(pos, np.sort(pos))
    assert ids[0] == 0  # input not mutated


def test_mask_tokens_tau_zero_masks_everything():
    out, pos = mask_tokens(np.arange(8), 0.0, np.random.default_rng(1), mask_id=-1)
    assert pos.size == 8
    assert np.all(out == -1)


def test_mask_tokens_mean_fraction_matches_integral():
    # over uniform tau, the expected masked fraction is E[gamma] = 2/pi
    rng = np.random.default_rng(2)
    n = 210
    fracs = []
    for _ in range(10_000):
        tau = rng.uniform(0.0, 1.0)
        _, pos = mask_tokens(np.zeros(n, int), tau, rng, mask_id=1)
        fracs.append(pos.size / n)
    assert abs(np.mean(fracs) - 2.0 / math.pi) < 0.015


def test_mask_schedule_wrapper():
    s = MaskSchedule(iterations=5)
    assert s.gamma(0.0) == 1.0
    assert s.remask_count(5, 100) == 0
    with pytest.raises(ConfigError):
        MaskSchedule(kind="linear")
    with pytest.raises(ConfigError):
        MaskSchedule(iterations=0)


# -- layout ------------------------------------------------------------------------

def small_layout(n_labels=3):
    return TokenLayout(lengths=(2, 3), sizes=(4, 8), n_labels=n_labels)


def test_layout_id_space():
    lay = small_layout()
    assert lay.total == 5
    assert lay.n_content == 12
    assert lay.mask_id == 12
    assert lay.label_base == 13
    assert lay.vocab == 16
    assert lay.head_width == 8
    assert lay.label_id(0) == 13
    assert lay.label_id(2) == 15
    with pytest.raises(ConfigError):
        lay.label_id(3)


def test_layout_position_bijection():
    lay = small_layout()
    seen = set()
    for p in range(lay.total):
        s, o = lay.scale_offset_of(p)
        assert lay.position_of(s, o) == p
        seen.add((s, o))
    assert len(seen) == lay.total
    with pytest.raises(ConfigError):
        lay.position_of(0, 2)
    with pytest.raises(ConfigError):
        lay.scale_offset_of(5)


def test_layout_flat_ids_roundtrip():
    lay = small_layout()
    y = TokenSequence([np.array([3, 0]), np.array([7, 1, 5])], (4, 8))
    flat = lay.flat_ids(y)
    assert flat.tolist() == [3, 0, 4 + 7, 4 + 1, 4 + 5]
    assert lay.to_tokens(flat) == y


def test_layout_rejects_mismatched_tokens():
    lay = small_layout()
    with pytest.raises(ConfigError):
        lay.flat_ids(TokenSequence([np.array([0, 0])], (4,)))


def test_layout_logit_bias_masks_foreign_columns():
    lay = small_layout()
    bias = lay.logit_bias()
    assert bias.shape == (5, 8)
    # scale 0 owns columns 0..3; 4..7 must be pinned
    assert np.all(bias[:2, :4] == 0)
    assert np.all(bias[:2, 4:] == NEG)
    assert np.all(bias[2:] == 0)


def test_layout_validation():
    with pytest.raises(ConfigError):
        TokenLayout(lengths=(), sizes=(), n_labels=1)
    with pytest.raises(ConfigError):
        TokenLayout(lengths=(2,), sizes=(1,), n_labels=1)  # size < 2
    with pytest.raises(ConfigError):
        TokenLayout(lengths=(2,), sizes=(4,), n_labels=0)


def test_layout_dict_roundtrip():
    lay = small_layout()
    assert TokenLayout.from_dict(lay.to_dict()) == lay


# -- model ----------------------------------------------------------------------------

def small_gen(n_labels=3, null_label=None, seed=0):
    lay = small_layout(n_labels)
    cfg = GeneratorConfig(n_blocks=1, n_heads=2, width=16, mlp_ratio=1,
                          null_label=null_label)
    return GeneratorCheckpoint(config=cfg, layout=lay,
                               params=init_generator(lay, cfg, seed))


def test_config_validation():
    with pytest.raises(ConfigError):
        GeneratorConfig(width=15, n_heads=2)  # not divisible
    with pytest.raises(ConfigError):
        GeneratorConfig(n_blocks=0)
    with pytest.raises(ConfigError):
        GeneratorConfig(mlp_ratio=0)


def test_init_deterministic():
    a = small_gen(seed=5).params
    b = small_gen(seed=5).params
    for k in a.names():
        assert np.array_equal(a[k].data, b[k].data)
    c = small_gen(seed=6).params
    assert not np.array_equal(a["tok_emb"].data, c["tok_emb"].data)


def test_forward_shape_and_bias():
    gen = small_gen()
    lay = gen.layout
    ids = np.array([[lay.label_id(0)] + [lay.mask_id] * lay.total])
    logits = forward_ids(gen, ids)
    assert logits.shape == (1, 1 + lay.total, lay.head_width)
    # scale-0 motion rows: foreign columns pinned far below owned ones
    motion = logits.data[0, 1:]
    assert np.all(motion[:2, 4:] < NEG / 2)
    assert np.all(np.isfinite(motion[:, :4]))


def test_forward_rejects_bad_ids():
    gen = small_gen()
    with pytest.raises(ConfigError):
        forward_ids(gen, np.zeros((1, 3), dtype=np.int64))  # wrong length
    bad = np.full((1, 1 + gen.layout.total), gen.layout.vocab, dtype=np.int64)
    with pytest.raises(ConfigError):
        forward_ids(gen, bad)


def test_forward_call_counter():
    gen = small_gen()
    ids = np.array([[gen.layout.label_id(0)] + [gen.layout.mask_id] * gen.layout.total])
    before = gen.forward_calls
    forward_ids(gen, ids)
    forward_ids(gen, ids)
    assert gen.forward_calls == before + 2


def test_nll_uniform_logits():
    logits = Tensor(np.zeros((1, 4, 8)))
    out = nll_loss(logits, np.zeros((1, 4), int), np.ones((1, 4), int))
    assert_allclose(out.item(), math.log(8.0), rtol=1e-12)


def test_nll_perfect_prediction():
    targets = np.array([[2, 5, 0]])
    logits = np.zeros((1, 3, 8))
    logits[0, np.arange(3), targets[0]] = 60.0
    out = nll_loss(Tensor(logits), targets, np.ones((1, 3), int))
    assert out.item() < 1e-12


def test_nll_rejects_empty_mask():
    with pytest.raises(ConfigError):
        nll_loss(Tensor(np.zeros((1, 2, 4))), np.zeros((1, 2), int), np.zeros((1, 2), int))


def test_checkpoint_save_load(tmp_path):
    gen = small_gen(null_label=2)
    gen.meta = {"task": "generate", "loss_curve": [1.0]}
    p = tmp_path / "gen.msqg"
    gen.save(p)
    back = GeneratorCheckpoint.load(p)
    assert back.config == gen.config
    assert back.layout == gen.layout
    assert back.meta["task"] == "generate"
    for k in gen.params.names():
        assert np.array_equal(gen.params[k].data, back.params[k].data)


def test_checkpoint_load_rejects_wrong_kind(tmp_path):
    from motiontok.checkpoint import save_checkpoint
    from motiontok.errors import FormatError
    p = tmp_path / "x.msqg"
    save_checkpoint(p, {}, {}, {"kind": "codec"})
    with pytest.raises(FormatError):
        GeneratorCheckpoint.load(p)


# -- sampler ------------------------------------------------------------------------------

def rand_tokens(lay, rng):
    return TokenSequence(
        [rng.integers(0, c, size=n) for n, c in zip(lay.lengths, lay.sizes)],
        lay.sizes,
    )


def test_sample_terminates_and_fills():
    gen = small_gen()
    y = sample(gen, label=0, rng=np.random.default_rng(0), iterations=5)
    assert isinstance(y, TokenSequence)
    assert y.lengths == gen.layout.lengths
    for idx, c in zip(y.indices, y.sizes):
        assert np.all((idx >= 0) & (idx < c))


def test_sample_greedy_deterministic():
    gen = small_gen()
    a = sample(gen, label=1, greedy=True)
    b = sample(gen, label=1, greedy=True)
    assert a == b


def test_sample_seeded_rng_deterministic():
    gen = small_gen()
    a = sample(gen, label=0, rng=np.random.default_rng(42))
    b = sample(gen, label=0, rng=np.random.default_rng(42))
    assert a == b


def test_sample_preserves_fixed_positions():
    gen = small_gen()
    lay = gen.layout
    init = rand_tokens(lay, np.random.default_rng(3))
    fixed = np.zeros(lay.total, dtype=bool)
    fixed[:3] = True
    out = sample(gen, label=0, rng=np.random.default_rng(4), initial=init, fixed=fixed)
    assert np.array_equal(lay.flat_ids(out)[:3], lay.flat_ids(init)[:3])


def test_sample_all_fixed_is_identity():
    gen = small_gen()
    init = rand_tokens(gen.layout, np.random.default_rng(5))
    out = sample(gen, label=0, rng=np.random.default_rng(6), initial=init)
    assert out == init


def test_sample_argument_errors():
    gen = small_gen()
    with pytest.raises(ConfigError):
        sample(gen, label=0, rng=np.random.default_rng(0), iterations=0)
    with pytest.raises(ConfigError):
        sample(gen, label=0)  # stochastic but no rng
    with pytest.raises(ConfigError):
        sample(gen, label=None, rng=np.random.default_rng(0))  # no null label
    fixed = np.ones(gen.layout.total, dtype=bool)
    with pytest.raises(ConfigError):
        sample(gen, label=0, rng=np.random.default_rng(0), fixed=fixed)  # no initial


def test_sample_null_label_mode():
    gen = small_gen(null_label=2)
    y = sample(gen, label=None, rng=np.random.default_rng(7))
    assert y.lengths == gen.layout.lengths


def test_predict_tokens_single_forward():
    gen = small_gen()
    src = rand_tokens(gen.layout, np.random.default_rng(8))
    before = gen.forward_calls
    out = predict_tokens(gen, 0, src)
    assert gen.forward_calls == before + 1
    assert out.lengths == gen.layout.lengths


def test_predict_tokens_source_mask_shape():
    gen = small_gen()
    src = rand_tokens(gen.layout, np.random.default_rng(9))
    with pytest.raises(ConfigError):
        predict_tokens(gen, 0, src, source_mask=np.ones(3, dtype=bool))


# -- training --------------------------------------------------------------------------------

def toy_dataset(n=24, n_classes=3, seed=0):
    lay = small_layout()
    rng = np.random.default_rng(seed)
    return [(rand_tokens(lay, rng), i % n_classes) for i in range(n)]


SMALL_CFG = dict(config=GeneratorConfig(n_blocks=1, n_heads=2, width=16,
                                        mlp_ratio=1, null_label=3))


def test_train_generator_smoke():
    gen = train_generator(toy_dataset(), n_classes=3, seed=0, epochs=3,
                          batch_size=8, **SMALL_CFG)
    curve = gen.meta["loss_curve"]
    assert len(curve) == 3
    assert curve[-1] < curve[0]
    assert gen.meta["task"] == "generate"
    assert gen.config.null_label == 3
    assert gen.layout.n_labels == 4  # classes + null


def test_train_generator_deterministic():
    a = train_generator(toy_dataset(), n_classes=3, seed=2, epochs=1, batch_size=8,
                        **SMALL_CFG)
    b = train_generator(toy_dataset(), n_classes=3, seed=2, epochs=1, batch_size=8,
                        **SMALL_CFG)
    assert a.meta["loss_curve"] == b.meta["loss_curve"]
    assert np.array_equal(a.params["head_w"].data, b.params["head_w"].data)


def test_train_generator_validation():
    with pytest.raises(ConfigError):
        train_generator([], n_classes=2)
    bad = [(toy_dataset(2)[0][0], 5)]  # label 5 >= n_classes
    with pytest.raises(ConfigError):
        train_generator(bad, n_classes=3)
    with pytest.raises(ConfigError):
        train_generator(toy_dataset(4), n_classes=3,
                        config=GeneratorConfig(null_label=7))


def test_train_edit_generator_smoke():
    lay = small_layout()
    rng = np.random.default_rng(1)
    data = [(rand_tokens(lay, rng), rand_tokens(lay, rng), i % 2) for i in range(16)]
    gen = train_edit_generator(data, n_labels=2, seed=0, epochs=2, batch_size=8,
                               config=GeneratorConfig(n_blocks=1, n_heads=2,
                                                      width=16, mlp_ratio=1))
    assert gen.meta["task"] == "edit"
    assert gen.config.null_label is None
    assert len(gen.meta["loss_curve"]) == 2


def test_edit_generator_learns_identity_copy():
    # translation training on identity pairs: predictions should copy sources
    lay = small_layout(n_labels=1)
    rng = np.random.default_rng(2)
    data = [(y, y, 0) for y in (rand_tokens(lay, rng) for _ in range(32))]
    gen = train_edit_generator(data, n_labels=1, seed=0, epochs=60, batch_size=16,
                               lr_max=3e-3, lr_min=3e-4,
                               config=GeneratorConfig(n_blocks=1, n_heads=2,
                                                      width=32, mlp_ratio=2))
    src = data[0][0]
    out = predict_tokens(gen, 0, src)
    match = np.mean(gen.layout.flat_ids(out) == gen.layout.flat_ids(src))
    assert match >= 0.9


def test_masked_accuracy_range():
    gen = small_gen()
    acc = masked_accuracy(gen, toy_dataset(8), tau=0.5, seed=0)
    assert 0.0 <= acc <= 1.0
