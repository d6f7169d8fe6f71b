"""Multi-scale waveform discriminator.

Three copies of a small strided conv stack look at the input at 1x, 2x, and
4x downsampling (average pooling between scales). The score is the mean of
the final layer maps averaged across scales; every intermediate activation is
returned for the feature-matching loss: (layers - 1) * scales feature maps.
"""

import numpy as np

from ..engine import Tensor, ops


def discriminate(store, cfg, x):
    """x: waveform Tensor/array (B, T) or (B, 1, T) -> (score (B,), features)."""
    if not isinstance(x, Tensor):
        x = Tensor(np.asarray(x, dtype=np.float64))
    if x.data.ndim == 2:
        x = ops.reshape(x, (x.data.shape[0], 1, x.data.shape[1]))
    if x.data.ndim != 3 or x.data.shape[1] != 1:
        raise ValueError(f"discriminator expects (B, 1, T), got {x.data.shape}")
    min_len = cfg.discriminator_min_length()
    if x.data.shape[2] < min_len:
        raise ValueError(
            f"input length {x.data.shape[2]} below discriminator receptive "
            f"field ({min_len} samples)")

    features = []
    scale_scores = []
    current = x
    for s in range(cfg.disc_scales):
        h = current
        for l in range(cfg.disc_layers - 1):
            h = ops.conv1d(h, store[f"disc.s{s}.l{l}.w"], store[f"disc.s{s}.l{l}.b"],
                           stride=2, padding=cfg.disc_kernel // 2)
            h = ops.leaky_relu(h, 0.2)
            features.append(h)
        final = cfg.disc_layers - 1
        h = ops.conv1d(h, store[f"disc.s{s}.l{final}.w"], store[f"disc.s{s}.l{final}.b"],
                       stride=1, padding=1)
        scale_scores.append(ops.mean_axes(h, (1, 2)))
        if s + 1 < cfg.disc_scales:
            current = ops.avg_pool2(current)

    score = scale_scores[0]
    for other in scale_scores[1:]:
        score = ops.add(score, other)
    return ops.mul(score, 1.0 / cfg.disc_scales), features
