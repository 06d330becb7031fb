"""Siamese training math as standalone numeric kernels.

Implements the Laplace-smoothed Dice segmentation loss, the
augmentation-invariance MSE regularizer, the 1x1-conv + batchnorm + ReLU
feature transform, and the train/inference fusion rules. Loss gradients
are analytic and verified against central finite differences.

Shapes follow the convention: segmentation outputs `o` and pseudo-labels
`y` are same-shaped 2-D maps; feature maps are (W, H, C) tensors.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PsiParams:
    """Parameters of the per-pixel linear map + batchnorm + ReLU transform.

    `linear` is the C x C map applied to each pixel's channel vector,
    `bias` its offset; `gamma`/`beta` are the per-channel affine of the
    normalization and `eps` the variance floor.
    """

    linear: np.ndarray
    bias: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    eps: float = 1e-5

    @classmethod
    def identity(cls, channels, eps=1e-5):
        return cls(
            linear=np.eye(channels),
            bias=np.zeros(channels),
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            eps=eps,
        )


def _check_seg(o, y):
    o = np.asarray(o, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if o.shape != y.shape:
        raise ValueError("segmentation output and label shape mismatch")
    if o.size == 0:
        raise ValueError("empty segmentation map")
    if np.any(o < 0.0) or np.any(o > 1.0):
        raise ValueError("segmentation outputs must lie in [0, 1]")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be binary")
    return o, y


def dice_loss(o, y):
    """Laplace-smoothed Dice loss averaged over the map area.

    (1/N) * [1 - (1 + 2*sum(o*y)) / (1 + sum(o) + sum(y))] with N the
    pixel count. Lies in [0, 1/N]; zero when o equals y exactly.
    """
    o, y = _check_seg(o, y)
    n = o.size
    num = 1.0 + 2.0 * float(np.sum(o * y))
    den = 1.0 + float(np.sum(o)) + float(np.sum(y))
    return (1.0 - num / den) / n


def dice_grad(o, y):
    """Analytic gradient of `dice_loss` with respect to each output pixel.

    dL/do_k = -(1/N) * [2*y_k*D - (1 + 2*sum(o*y))] / D^2 with
    D = 1 + sum(o) + sum(y).
    """
    o, y = _check_seg(o, y)
    n = o.size
    num = 1.0 + 2.0 * float(np.sum(o * y))
    den = 1.0 + float(np.sum(o)) + float(np.sum(y))
    return -(2.0 * y * den - num) / (den * den) / n


def _check_pair(f, f_hat):
    f = np.asarray(f, dtype=np.float64)
    f_hat = np.asarray(f_hat, dtype=np.float64)
    if f.shape != f_hat.shape:
        raise ValueError("feature map shape mismatch")
    if f.size == 0:
        raise ValueError("empty feature map")
    return f, f_hat


def air_loss(f, f_hat):
    """Mean squared error between the two branch features (scalar >= 0)."""
    f, f_hat = _check_pair(f, f_hat)
    d = f - f_hat
    return float(np.sum(d * d)) / f.size


def air_grad(f, f_hat):
    """Gradient of `air_loss` with respect to the first argument: 2*(F - F_hat)/N."""
    f, f_hat = _check_pair(f, f_hat)
    return 2.0 * (f - f_hat) / f.size


def psi_forward(f, params):
    """Per-pixel linear map, per-channel standardization, then ReLU.

    For a (W, H, C) input: u = linear @ f + bias at every pixel, each
    channel standardized over all W*H positions (biased variance, floored
    by eps), scaled by gamma, shifted by beta, clamped at zero.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 3:
        raise ValueError("feature map must be 3-D (W, H, C)")
    c = f.shape[2]
    if params.linear.shape != (c, c) or params.bias.shape != (c,):
        raise ValueError("psi parameter channel mismatch")
    u = f @ params.linear.T + params.bias
    mean = u.mean(axis=(0, 1))
    var = u.var(axis=(0, 1))
    normed = (u - mean) / np.sqrt(var + params.eps)
    return np.maximum(normed * params.gamma + params.beta, 0.0)


def fuse_train(psi_f, psi_f_hat):
    """Elementwise mean of the two transformed branch features."""
    psi_f, psi_f_hat = _check_pair(psi_f, psi_f_hat)
    return 0.5 * (psi_f + psi_f_hat)


def fuse_infer(psi_f):
    """Inference-time fusion: the single-branch feature, unchanged."""
    return np.asarray(psi_f, dtype=np.float64)


def total_loss(o, y, f, f_hat):
    """Sum of the augmentation-invariance and segmentation losses."""
    return air_loss(f, f_hat) + dice_loss(o, y)


# --- gradient verification -------------------------------------------------


def _central_diff(fn, x, h):
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    out = g.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        hi = fn(x)
        flat[k] = orig - h
        lo = fn(x)
        flat[k] = orig
        out[k] = (hi - lo) / (2.0 * h)
    return g


def _max_rel_err(analytic, numeric, floor=1e-6):
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def gradient_check_report(trials=100, seed=0, h=1e-4):
    """Compare analytic dice/air gradients with central finite differences.

    Draws random instances up to 8x8 maps and 8x8x4 feature tensors and
    reports the worst relative error for each loss, plus a pass flag at
    the 1e-5 level.
    """
    rng = np.random.default_rng(seed)
    dice_err = 0.0
    air_err = 0.0
    for _ in range(trials):
        hgt = int(rng.integers(1, 9))
        wid = int(rng.integers(1, 9))
        o = rng.uniform(0.02, 0.98, size=(hgt, wid))
        y = (rng.random((hgt, wid)) < 0.5).astype(np.float64)
        analytic = dice_grad(o, y)
        numeric = _central_diff(lambda x: dice_loss(x, y), o.copy(), h)
        dice_err = max(dice_err, _max_rel_err(analytic, numeric))

        c = int(rng.integers(1, 5))
        shape = (int(rng.integers(1, 9)), int(rng.integers(1, 9)), c)
        f = rng.normal(size=shape)
        f_hat = rng.normal(size=shape)
        analytic = air_grad(f, f_hat)
        numeric = _central_diff(lambda x: air_loss(x, f_hat), f.copy(), h)
        air_err = max(air_err, _max_rel_err(analytic, numeric))
    return {
        "dice_max_rel_err": dice_err,
        "air_max_rel_err": air_err,
        "pass": bool(dice_err < 1e-5 and air_err < 1e-5),
    }
