"""Forward/backward primitives: strided 1-D convolution, batch norm, dense, dropout, softmax.

All arrays are float64. Convolution is valid (no padding) cross-correlation;
batch normalization carries no learnable scale/shift, only running statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def conv_output_length(signal_length: int, receptive_field: int, stride: int) -> int:
    """Output positions of a valid strided sweep: (L - Rf) // stride + 1."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if signal_length < receptive_field:
        raise ValueError(
            f"input length {signal_length} is shorter than the receptive field "
            f"{receptive_field}"
        )
    return (signal_length - receptive_field) // stride + 1


def _unfold(x: np.ndarray, receptive_field: int, stride: int) -> np.ndarray:
    """Gather sliding patches: (B, C, L) -> (B, m, C, Rf)."""
    batch, channels, length = x.shape
    m = conv_output_length(length, receptive_field, stride)
    cols = np.empty((batch, m, channels, receptive_field), dtype=x.dtype)
    stop = stride * (m - 1) + 1
    for e in range(receptive_field):
        cols[:, :, :, e] = x[:, :, e : e + stop : stride].transpose(0, 2, 1)
    return cols


def conv1d_forward(
    x: np.ndarray, weights: np.ndarray, bias: np.ndarray, stride: int
) -> np.ndarray:
    """Valid strided cross-correlation.

    x: (B, C, L), weights: (K, C, Rf), bias: (K,) -> (B, K, m) where
    out[b, k, j] = bias[k] + sum_{c,e} weights[k, c, e] * x[b, c, j*stride + e].
    """
    k, c, rf = weights.shape
    if x.ndim != 3 or x.shape[1] != c:
        raise ValueError(
            f"input shape {x.shape} does not match kernel channels {c}"
        )
    if bias.shape != (k,):
        raise ValueError(f"bias shape {bias.shape} does not match {k} kernels")
    cols = _unfold(x, rf, stride)
    batch, m = cols.shape[0], cols.shape[1]
    out = cols.reshape(batch * m, c * rf) @ weights.reshape(k, c * rf).T
    return out.reshape(batch, m, k).transpose(0, 2, 1) + bias[None, :, None]


def conv1d_backward(
    x: np.ndarray, weights: np.ndarray, stride: int, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of a scalar loss through conv1d_forward.

    grad_out: (B, K, m) -> (grad_x, grad_weights, grad_bias).
    """
    k, c, rf = weights.shape
    batch = x.shape[0]
    m = conv_output_length(x.shape[2], rf, stride)
    if grad_out.shape != (batch, k, m):
        raise ValueError(
            f"grad_out shape {grad_out.shape} does not match forward output "
            f"({batch}, {k}, {m})"
        )
    cols = _unfold(x, rf, stride)
    g = grad_out.transpose(0, 2, 1).reshape(batch * m, k)
    grad_bias = grad_out.sum(axis=(0, 2))
    grad_weights = (g.T @ cols.reshape(batch * m, c * rf)).reshape(k, c, rf)
    grad_cols = (g @ weights.reshape(k, c * rf)).reshape(batch, m, c, rf)
    grad_x = np.zeros_like(x)
    stop = stride * (m - 1) + 1
    for e in range(rf):
        grad_x[:, :, e : e + stop : stride] += grad_cols[:, :, :, e].transpose(0, 2, 1)
    return grad_x, grad_weights, grad_bias


@dataclass
class BatchNormCache:
    """Training-mode intermediates needed to backprop through batch statistics."""

    x_hat: np.ndarray
    inv_std: np.ndarray  # per channel, 1 / sqrt(var + eps)
    count: int  # batch * positions pooled into each channel statistic


def batchnorm_train(
    x: np.ndarray, eps: float = BN_EPS
) -> tuple[np.ndarray, BatchNormCache, np.ndarray, np.ndarray]:
    """Normalize (B, C, L) by the batch's per-channel mean/variance.

    Statistics pool over batch and positions; variance is population (/N).
    Returns (y, cache, batch_mean, batch_var).
    """
    if x.ndim != 3:
        raise ValueError(f"expected a (batch, channels, length) array, got {x.shape}")
    if x.shape[0] < 1:
        raise ValueError("batch must be nonempty")
    mean = x.mean(axis=(0, 2))
    var = x.var(axis=(0, 2))
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean[None, :, None]) * inv_std[None, :, None]
    cache = BatchNormCache(x_hat=x_hat, inv_std=inv_std, count=x.shape[0] * x.shape[2])
    return x_hat, cache, mean, var


def batchnorm_infer(
    x: np.ndarray,
    running_mean: np.ndarray | None,
    running_var: np.ndarray | None,
    eps: float = BN_EPS,
) -> np.ndarray:
    """Normalize by running statistics (inference path)."""
    if running_mean is None or running_var is None:
        raise ValueError("batch-norm running statistics are uninitialized")
    rv = np.asarray(running_var, dtype=np.float64)
    if not np.all(np.isfinite(rv)) or np.any(rv <= 0.0):
        raise ValueError("batch-norm running variances must be finite and positive")
    return (x - np.asarray(running_mean)[None, :, None]) / np.sqrt(rv + eps)[None, :, None]


def batchnorm_backward(cache: BatchNormCache, grad_out: np.ndarray) -> np.ndarray:
    """Backprop through the standardization, including the stats' dependence on x."""
    n = cache.count
    sum_g = grad_out.sum(axis=(0, 2))
    sum_gx = (grad_out * cache.x_hat).sum(axis=(0, 2))
    return (cache.inv_std[None, :, None] / n) * (
        n * grad_out - sum_g[None, :, None] - cache.x_hat * sum_gx[None, :, None]
    )


def update_running_stat(
    running: np.ndarray, batch_value: np.ndarray, momentum: float = BN_MOMENTUM
) -> np.ndarray:
    """EMA update: momentum * running + (1 - momentum) * batch_value."""
    return momentum * running + (1.0 - momentum) * batch_value


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map: (B, F_in) @ (F_in, F_out) + (F_out,)."""
    return x @ weights + bias


def dense_backward(
    x: np.ndarray, weights: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return grad_out @ weights.T, x.T @ grad_out, grad_out.sum(axis=0)


def dropout_forward(
    x: np.ndarray,
    rate: float,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: zero units w.p. ``rate``, scale survivors by 1/(1-rate).

    Identity at inference or when rate == 0. Returns (y, mask); the mask is
    None when dropout was not applied.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("training-mode dropout needs a seeded generator")
    mask = (rng.random(x.shape) >= rate).astype(x.dtype)
    return x * mask / (1.0 - rate), mask


def dropout_backward(
    mask: np.ndarray | None, rate: float, grad_out: np.ndarray
) -> np.ndarray:
    if mask is None:
        return grad_out
    return grad_out * mask / (1.0 - rate)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction stabilization."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross-entropy over raw logits and integer labels.

    Returns (per-sample losses, probabilities, grad w.r.t. logits), where the
    gradient is probs - onehot per sample (unscaled by batch size).
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise ValueError(f"expected (batch, classes) logits, got {logits.shape}")
    if labels.shape != (logits.shape[0],):
        raise ValueError(
            f"labels shape {labels.shape} does not match batch {logits.shape[0]}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("labels must be integers")
    num_classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    norm = e.sum(axis=1)
    probs = e / norm[:, None]
    rows = np.arange(logits.shape[0])
    losses = np.log(norm) - z[rows, labels]
    grad = probs.copy()
    grad[rows, labels] -= 1.0
    return losses, probs, grad
