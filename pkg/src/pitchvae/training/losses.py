"""Training objectives.

Stage 1 minimizes multiscale spectral distance plus a beta-weighted KL term;
stage 2 alternates a hinge discriminator loss with a decoder loss of
adversarial score + multiscale distance + feature matching, all unit-weighted.
Scalar (float) inputs get float outputs; Tensor inputs stay on the tape.
"""

import numpy as np

from ..engine import Tensor, ops
from ..engine.spectral import kl_diag_gaussian_batch, multiscale_distance_batch
from ..metrics import TOY_MULTISCALE, multiscale_spectral_distance


def _val(x):
    return x.item() if isinstance(x, Tensor) else float(x)


def loss_vae(x_ref, x_hat, q, beta, ms_cfg=TOY_MULTISCALE):
    """Multiscale distance plus beta * KL; returns (loss, component floats)."""
    d_ms = multiscale_distance_batch(x_ref, x_hat, ms_cfg)
    kl = kl_diag_gaussian_batch(q.mean, q.log_var)
    total = ops.add(d_ms, ops.mul(kl, beta)) if beta != 0.0 else d_ms
    return total, {"d_ms": d_ms.item(), "kl": kl.item()}


def _hinge_mean(value):
    if isinstance(value, Tensor):
        return ops.mean_all(ops.relu(value))
    return float(np.mean(np.maximum(0.0, np.asarray(value, dtype=np.float64))))


def loss_dis(score_real, score_fake):
    """[1 - D(x)]_+ + [1 + D(x_hat)]_+ (means over the batch for vector scores)."""
    if isinstance(score_real, Tensor) or isinstance(score_fake, Tensor):
        return ops.add(_hinge_mean(ops.sub(1.0, score_real)),
                       _hinge_mean(ops.add(1.0, score_fake)))
    return _hinge_mean(1.0 - np.asarray(score_real, dtype=np.float64)) + \
        _hinge_mean(1.0 + np.asarray(score_fake, dtype=np.float64))


def feature_matching(feats_real, feats_fake):
    """Mean over layers of the mean absolute feature difference.

    Real-side features are always treated as constants (no gradient flows to
    the real branch).
    """
    if len(feats_real) != len(feats_fake):
        raise ValueError(
            f"feature list length mismatch: {len(feats_real)} vs {len(feats_fake)}")
    if not feats_real:
        raise ValueError("empty feature lists")
    terms = []
    for fr, ff in zip(feats_real, feats_fake):
        fr_data = np.asarray(fr.data if isinstance(fr, Tensor) else fr)
        ff_shape = ff.data.shape if isinstance(ff, Tensor) else np.asarray(ff).shape
        if fr_data.shape != ff_shape:
            raise ValueError(f"feature shape mismatch: {fr_data.shape} vs {ff_shape}")
        if isinstance(ff, Tensor):
            terms.append(ops.mean_all(ops.absolute(ops.sub(ff, Tensor(fr_data)))))
        else:
            terms.append(float(np.mean(np.abs(fr_data - np.asarray(ff)))))
    if any(isinstance(t, Tensor) for t in terms):
        total = None
        for t in terms:
            total = t if total is None else ops.add(total, t)
        return ops.mul(total, 1.0 / len(terms))
    return sum(terms) / len(terms)


def combine_decoder_terms(adv, d_ms, fm):
    """-score + distance + feature matching, unit weights."""
    if any(isinstance(t, Tensor) for t in (adv, d_ms, fm)):
        return ops.add(ops.add(adv, d_ms), fm)
    return adv + d_ms + fm


def loss_dec(score_fake, x_ref, x_hat, feats_real, feats_fake, ms_cfg=TOY_MULTISCALE):
    """-D(x_hat) + multiscale distance + feature matching; (loss, components)."""
    if isinstance(score_fake, Tensor):
        adv = ops.neg(ops.mean_all(score_fake))
    else:
        adv = -float(np.mean(score_fake))
    if isinstance(x_hat, Tensor):
        d_ms = multiscale_distance_batch(x_ref, x_hat, ms_cfg)
    else:
        d_ms = multiscale_spectral_distance(x_ref, x_hat, ms_cfg)
    fm = feature_matching(feats_real, feats_fake)
    total = combine_decoder_terms(adv, d_ms, fm)
    return total, {"adv": _val(adv), "d_ms": _val(d_ms), "fm": _val(fm)}
