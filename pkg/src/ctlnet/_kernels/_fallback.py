"""Pure-numpy kernel implementations.

Same signatures and semantics as the compiled core in ``_core.pyx``; every
function takes and returns C-contiguous float64 arrays. Gate blocks in the
fused LSTM kernel are ordered forget, input, candidate, output.
"""

import numpy as np


def sliding_windows_fwd(x, kernel, stride):
    """Gather sliding windows: [B,N,D] -> [B,M,kernel*D], tap-major layout."""
    b, n, d = x.shape
    m = (n - kernel) // stride + 1
    cols = np.empty((b, m, kernel * d), dtype=np.float64)
    for j in range(kernel):
        cols[:, :, j * d : (j + 1) * d] = x[:, j : j + (m - 1) * stride + 1 : stride, :]
    return cols


def sliding_windows_bwd(dcols, n, kernel, stride):
    """Scatter-add window gradients back onto the [B,N,D] input."""
    b, m, kd = dcols.shape
    d = kd // kernel
    dx = np.zeros((b, n, d), dtype=np.float64)
    for j in range(kernel):
        dx[:, j : j + (m - 1) * stride + 1 : stride, :] += dcols[:, :, j * d : (j + 1) * d]
    return dx


def lstm_gates_fwd(z, c_prev):
    """Fused gate math: preactivations [B,4H] -> packed [h | c] of shape [B,2H].

    Also returns the activated gates [B,4H] needed by the backward pass.
    """
    b, four_h = z.shape
    h = four_h // 4
    gates = np.empty_like(z)
    f = gates[:, 0:h] = 1.0 / (1.0 + np.exp(-z[:, 0:h]))
    i = gates[:, h : 2 * h] = 1.0 / (1.0 + np.exp(-z[:, h : 2 * h]))
    g = gates[:, 2 * h : 3 * h] = np.tanh(z[:, 2 * h : 3 * h])
    o = gates[:, 3 * h : 4 * h] = 1.0 / (1.0 + np.exp(-z[:, 3 * h : 4 * h]))
    c = f * c_prev + i * g
    hc = np.empty((b, 2 * h), dtype=np.float64)
    hc[:, 0:h] = o * np.tanh(c)
    hc[:, h : 2 * h] = c
    return hc, gates


def lstm_gates_bwd(dhc, gates, c_prev, c):
    """Backward of the fused gate math: returns (dz, dc_prev)."""
    b, two_h = dhc.shape
    h = two_h // 2
    dh = dhc[:, 0:h]
    dc_out = dhc[:, h : 2 * h]
    f = gates[:, 0:h]
    i = gates[:, h : 2 * h]
    g = gates[:, 2 * h : 3 * h]
    o = gates[:, 3 * h : 4 * h]
    tc = np.tanh(c)
    do = dh * tc
    dc = dc_out + dh * o * (1.0 - tc * tc)
    dz = np.empty((b, 4 * h), dtype=np.float64)
    dz[:, 0:h] = dc * c_prev * f * (1.0 - f)
    dz[:, h : 2 * h] = dc * g * i * (1.0 - i)
    dz[:, 2 * h : 3 * h] = dc * i * (1.0 - g * g)
    dz[:, 3 * h : 4 * h] = do * o * (1.0 - o)
    dc_prev = dc * f
    return dz, dc_prev


def layernorm_fwd(x, gain, bias, eps):
    """Row-wise normalization over the last axis of a 2-D view, then affine."""
    mean = x.mean(axis=1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * rstd
    y = xhat * gain + bias
    return y, xhat, rstd[:, 0].copy()


def layernorm_bwd(dy, xhat, rstd, gain):
    """Exact layernorm backward: returns (dx, dgain, dbias)."""
    dgain = (dy * xhat).sum(axis=0)
    dbias = dy.sum(axis=0)
    dxhat = dy * gain
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = rstd[:, None] * (dxhat - m1 - xhat * m2)
    return dx, dgain, dbias


def softmax_fwd(x):
    """Row softmax of a 2-D view with max-subtraction for stability."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_bwd(dy, y):
    """Softmax Jacobian-vector product per row."""
    inner = (dy * y).sum(axis=1, keepdims=True)
    return y * (dy - inner)
