"""Neural net layers: values against brute-force oracles, grads against FD."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import log_softmax as sp_log_softmax, softmax as sp_softmax

from motiontok.nn import Tensor, backward, functional as F

from test_tensor import check_grads

RNG = np.random.default_rng(11)


# -- oracles -----------------------------------------------------------------

def conv1d_loops(x, w, b, stride, padding):
    """Reference conv: explicit loops, (B,N,Ci) x (k,Ci,Co) -> (B,No,Co)."""
    bsz, n, ci = x.shape
    k, _, co = w.shape
    xp = np.pad(x, ((0, 0), (padding, padding), (0, 0)))
    n_out = (n + 2 * padding - k) // stride + 1
    out = np.zeros((bsz, n_out, co))
    for bi in range(bsz):
        for o in range(n_out):
            for j in range(k):
                out[bi, o] += xp[bi, o * stride + j] @ w[j]
    return out + b


def conv1d_transpose_loops(x, w, b, stride, padding):
    """Reference transposed conv: scatter each input step through the kernel."""
    bsz, n, ci = x.shape
    k, _, co = w.shape
    n_out = (n - 1) * stride - 2 * padding + k
    full = np.zeros((bsz, (n - 1) * stride + k, co))
    for bi in range(bsz):
        for i in range(n):
            for j in range(k):
                full[bi, i * stride + j] += x[bi, i] @ w[j]
    out = full[:, padding:padding + n_out]
    return out + b


# -- linear -------------------------------------------------------------------

def test_linear_value():
    x, w, b = RNG.normal(size=(2, 5, 3)), RNG.normal(size=(3, 4)), RNG.normal(size=4)
    out = F.linear(Tensor(x), Tensor(w), Tensor(b))
    assert_allclose(out.data, x @ w + b)


def test_linear_grads():
    x, w, b = RNG.normal(size=(2, 3)), RNG.normal(size=(3, 4)), RNG.normal(size=4)
    check_grads(lambda a, c, d: (F.linear(a, c, d) ** 2).sum(), [x, w, b])


def test_linear_no_bias():
    x, w = RNG.normal(size=(2, 3)), RNG.normal(size=(3, 4))
    assert_allclose(F.linear(Tensor(x), Tensor(w)).data, x @ w)


# -- conv1d --------------------------------------------------------------------

@pytest.mark.parametrize("stride,padding,k", [(1, 0, 3), (1, 1, 3), (2, 1, 4), (2, 0, 4)])
def test_conv1d_value_matches_loops(stride, padding, k):
    x = RNG.normal(size=(2, 8, 3))
    w = RNG.normal(size=(k, 3, 5))
    b = RNG.normal(size=5)
    out = F.conv1d(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=padding)
    assert_allclose(out.data, conv1d_loops(x, w, b, stride, padding), atol=1e-12)


@pytest.mark.parametrize("stride,padding", [(1, 1), (2, 1)])
def test_conv1d_grads(stride, padding):
    x = RNG.normal(size=(2, 6, 2))
    w = RNG.normal(size=(3, 2, 4))
    b = RNG.normal(size=4)
    check_grads(
        lambda a, c, d: (F.conv1d(a, c, d, stride=stride, padding=padding) ** 2).sum(),
        [x, w, b], rtol=1e-5,
    )


def test_conv1d_output_length():
    x = Tensor(np.zeros((1, 64, 3)))
    w = Tensor(np.zeros((4, 3, 2)))
    out = F.conv1d(x, w, stride=2, padding=1)
    assert out.shape == (1, 32, 2)  # halves the length at k=4 s=2 p=1


# -- conv1d_transpose ------------------------------------------------------------

@pytest.mark.parametrize("stride,padding,k", [(2, 1, 4), (1, 0, 3), (2, 0, 3)])
def test_conv1d_transpose_value_matches_loops(stride, padding, k):
    x = RNG.normal(size=(2, 5, 3))
    w = RNG.normal(size=(k, 3, 4))
    b = RNG.normal(size=4)
    out = F.conv1d_transpose(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=padding)
    assert_allclose(out.data, conv1d_transpose_loops(x, w, b, stride, padding), atol=1e-12)


def test_conv1d_transpose_grads():
    x = RNG.normal(size=(1, 4, 2))
    w = RNG.normal(size=(4, 2, 3))
    b = RNG.normal(size=3)
    check_grads(
        lambda a, c, d: (F.conv1d_transpose(a, c, d, stride=2, padding=1) ** 2).sum(),
        [x, w, b], rtol=1e-5,
    )


def test_conv1d_transpose_doubles_length():
    x = Tensor(np.zeros((1, 16, 3)))
    w = Tensor(np.zeros((4, 3, 2)))
    assert F.conv1d_transpose(x, w, stride=2, padding=1).shape == (1, 32, 2)


# -- interpolation ----------------------------------------------------------------

def test_interp_same_length_is_identity():
    x = RNG.normal(size=(2, 7, 3))
    out = F.interp_linear(Tensor(x), 7)
    assert_allclose(out.data, x)


def test_interp_endpoints_pinned():
    # align-corners: first/last samples survive any resampling exactly
    x = RNG.normal(size=(2, 9, 3))
    for out_len in (2, 4, 16, 31):
        y = F.interp_linear(Tensor(x), out_len).data
        assert_allclose(y[:, 0], x[:, 0], atol=1e-12)
        assert_allclose(y[:, -1], x[:, -1], atol=1e-12)


def test_interp_exact_on_linear_ramp():
    # linear functions are reproduced exactly at every resampled position
    t = np.linspace(0.0, 1.0, 13)
    x = (2.0 * t - 0.5)[None, :, None] * np.ones((2, 1, 3))
    for out_len in (5, 13, 40):
        got = F.interp_linear(Tensor(x), out_len).data
        tt = np.linspace(0.0, 1.0, out_len)
        want = (2.0 * tt - 0.5)[None, :, None] * np.ones((2, 1, 3))
        assert_allclose(got, want, atol=1e-12)


def test_interp_down_then_up_midpoints():
    # 3 -> 2 keeps endpoints; 2 -> 3 puts the average in the middle
    x = np.array([[[0.0], [1.0], [4.0]]])
    down = F.interp_linear(Tensor(x), 2).data
    assert_allclose(down, [[[0.0], [4.0]]])
    up = F.interp_linear(Tensor(down), 3).data
    assert_allclose(up, [[[0.0], [2.0], [4.0]]])


def test_interp_output_length_one():
    x = RNG.normal(size=(1, 5, 2))
    out = F.interp_linear(Tensor(x), 1)
    assert out.shape == (1, 1, 2)
    assert_allclose(out.data[:, 0], x[:, 0])


def test_interp_from_length_one_broadcasts():
    x = RNG.normal(size=(1, 1, 2))
    out = F.interp_linear(Tensor(x), 4)
    assert_allclose(out.data, np.repeat(x, 4, axis=1))


def test_interp_grad_fd():
    x = RNG.normal(size=(2, 6, 2))
    check_grads(lambda a: (F.interp_linear(a, 10) ** 2).sum(), [x])
    check_grads(lambda a: (F.interp_linear(a, 3) ** 2).sum(), [x])


def test_interp_np_matches_tensor_path():
    x = RNG.normal(size=(3, 8, 4))
    for out_len in (3, 8, 17):
        assert_allclose(
            F.interp_linear_np(x, out_len),
            F.interp_linear(Tensor(x), out_len).data,
            atol=1e-15,
        )


def test_interp_rejects_bad_rank():
    with pytest.raises(ValueError):
        F.interp_linear(Tensor(np.zeros((4, 3))), 2)


def test_interp_coords_reject_zero_length():
    with pytest.raises(ValueError):
        F.interp_coords(0, 4)


# -- softmax family -----------------------------------------------------------------

def test_softmax_matches_scipy():
    x = RNG.normal(size=(3, 5)) * 3
    assert_allclose(F.softmax(Tensor(x)).data, sp_softmax(x, axis=-1), atol=1e-12)


def test_softmax_rows_sum_to_one():
    x = RNG.normal(size=(4, 7))
    assert_allclose(F.softmax(Tensor(x)).data.sum(axis=-1), np.ones(4), atol=1e-12)


def test_softmax_stable_at_large_logits():
    x = np.array([[1e4, 1e4 - 1.0, 0.0]])
    p = F.softmax(Tensor(x)).data
    assert np.all(np.isfinite(p))
    assert_allclose(p[0, 0] / p[0, 1], np.e, rtol=1e-9)


def test_softmax_grad_fd():
    x = RNG.normal(size=(2, 4))
    c = RNG.normal(size=(2, 4))
    check_grads(lambda a: (F.softmax(a) * c).sum(), [x])


def test_log_softmax_matches_scipy_and_grad():
    x = RNG.normal(size=(2, 6)) * 2
    assert_allclose(F.log_softmax(Tensor(x)).data, sp_log_softmax(x, axis=-1), atol=1e-12)
    c = RNG.normal(size=(2, 6))
    check_grads(lambda a: (F.log_softmax(a) * c).sum(), [x])


# -- layer_norm ----------------------------------------------------------------------

def test_layer_norm_value():
    x = RNG.normal(size=(2, 3, 8)) * 4 + 1
    g, b = RNG.normal(size=8), RNG.normal(size=8)
    out = F.layer_norm(Tensor(x), Tensor(g), Tensor(b)).data
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    want = (x - mu) / np.sqrt(var + 1e-5) * g + b
    assert_allclose(out, want, atol=1e-12)


def test_layer_norm_normalizes():
    x = RNG.normal(size=(4, 16)) * 10
    out = F.layer_norm(Tensor(x), Tensor(np.ones(16)), Tensor(np.zeros(16))).data
    assert_allclose(out.mean(axis=-1), np.zeros(4), atol=1e-12)
    assert_allclose(out.std(axis=-1), np.ones(4), atol=1e-3)  # eps shifts var slightly


def test_layer_norm_grads():
    x = RNG.normal(size=(2, 5))
    g, b = RNG.normal(size=5), RNG.normal(size=5)
    check_grads(lambda a, c, d: (F.layer_norm(a, c, d) ** 2).sum(), [x, g, b], rtol=1e-5)


# -- gelu -----------------------------------------------------------------------------

def test_gelu_value_tanh_form():
    x = RNG.normal(size=(3, 4)) * 2
    c = np.sqrt(2.0 / np.pi)
    want = 0.5 * x * (1.0 + np.tanh(c * (x + 0.044715 * x ** 3)))
    assert_allclose(F.gelu(Tensor(x)).data, want, atol=1e-12)


def test_gelu_known_points():
    # gelu(0) = 0; large positive ~ identity; large negative ~ 0
    x = np.array([0.0, 6.0, -6.0])
    out = F.gelu(Tensor(x)).data
    assert out[0] == 0.0
    assert_allclose(out[1], 6.0, atol=1e-6)
    assert_allclose(out[2], 0.0, atol=1e-6)


def test_gelu_grad_fd():
    x = RNG.normal(size=(3, 3))
    check_grads(lambda a: (F.gelu(a) ** 2).sum(), [x])


# -- embedding -----------------------------------------------------------------------

def test_embedding_gathers_rows():
    table = RNG.normal(size=(6, 3))
    idx = np.array([[0, 5], [2, 2]])
    out = F.embedding(Tensor(table), idx)
    assert_allclose(out.data, table[idx])


def test_embedding_grad_accumulates_repeats():
    table = Tensor(RNG.normal(size=(4, 2)), requires_grad=True)
    idx = np.array([1, 1, 3])
    backward(F.embedding(table, idx).sum())
    want = np.zeros((4, 2))
    want[1] = 2.0
    want[3] = 1.0
    assert_allclose(table.grad, want)


def test_embedding_rejects_float_indices():
    with pytest.raises(TypeError):
        F.embedding(Tensor(np.zeros((3, 2))), np.array([0.0, 1.0]))


# -- masked_nll ----------------------------------------------------------------------

def test_masked_nll_hand_case():
    # uniform logits over V classes -> NLL = log(V) wherever masked
    logits = np.zeros((1, 3, 4))
    targets = np.array([[0, 1, 2]])
    mask = np.array([[1, 0, 1]])
    out = F.masked_nll(Tensor(logits), targets, mask)
    assert_allclose(out.item(), np.log(4.0), rtol=1e-12)


def test_masked_nll_mean_over_masked_only():
    logits = RNG.normal(size=(2, 4, 5))
    targets = RNG.integers(0, 5, size=(2, 4))
    mask = np.array([[1, 1, 0, 0], [0, 1, 0, 1]])
    out = F.masked_nll(Tensor(logits), targets, mask).item()
    logp = sp_log_softmax(logits, axis=-1)
    picked = np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]
    want = -(picked * mask).sum() / mask.sum()
    assert_allclose(out, want, rtol=1e-12)


def test_masked_nll_all_masked_out_is_zero():
    logits = RNG.normal(size=(1, 3, 4))
    out = F.masked_nll(Tensor(logits), np.zeros((1, 3), int), np.zeros((1, 3), int))
    assert out.item() == 0.0


def test_masked_nll_grad_fd():
    logits = RNG.normal(size=(2, 3, 4))
    targets = np.array([[0, 3, 1], [2, 2, 0]])
    mask = np.array([[1, 0, 1], [1, 1, 0]])
    check_grads(lambda a: F.masked_nll(a, targets, mask) * 2.0, [logits], rtol=1e-5)


def test_masked_nll_unmasked_positions_get_zero_grad():
    logits = Tensor(RNG.normal(size=(1, 2, 3)), requires_grad=True)
    backward(F.masked_nll(logits, np.array([[0, 1]]), np.array([[1, 0]])))
    assert_allclose(logits.grad[0, 1], np.zeros(3))
    assert np.any(logits.grad[0, 0] != 0)


def test_masked_nll_shape_mismatch():
    with pytest.raises(ValueError):
        F.masked_nll(Tensor(np.zeros((1, 3, 4))), np.zeros((1, 2), int), np.zeros((1, 2), int))


# -- mse / stop_gradient ----------------------------------------------------------------

def test_mse_value():
    a = np.array([1.0, 3.0])
    b = np.array([0.0, 0.0])
    assert_allclose(F.mse(Tensor(a), Tensor(b)).item(), (1.0 + 9.0) / 2.0)


def test_mse_grad():
    a, b = RNG.normal(size=(3, 4)), RNG.normal(size=(3, 4))
    check_grads(lambda x, y: F.mse(x, y), [a, b])


def test_stop_gradient_blocks():
    t = Tensor(RNG.normal(size=(3,)), requires_grad=True)
    backward((F.stop_gradient(t) * t).sum())
    assert_allclose(t.grad, t.data)  # only the live factor's grad
