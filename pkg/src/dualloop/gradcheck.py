"""Finite-difference verification of the hand-written gradients.

Central differences at step 1e-5 in double precision. Comparison is
per-element relative error with a 1e-5 denominator floor, so elements whose
true gradient is essentially zero are compared absolutely instead of
dividing by noise.
"""

from __future__ import annotations

import numpy as np

from . import codec, mdrnn, synthetic
from .core import AudioWindow, Rng

FD_STEP = 1e-5
REL_TOLERANCE = 1e-4
_DENOM_FLOOR = 1e-5


def finite_difference_grads(loss_fn, weights: dict[str, np.ndarray],
                            step: float = FD_STEP) -> dict[str, np.ndarray]:
    """Probe every weight element twice; loss_fn() reads ``weights`` in place."""
    grads = {}
    for name, arr in weights.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = loss_fn()
            flat[i] = original - step
            minus = loss_fn()
            flat[i] = original
            gflat[i] = (plus - minus) / (2.0 * step)
        grads[name] = g
    return grads


def max_relative_error(analytic: dict[str, np.ndarray],
                       numeric: dict[str, np.ndarray]) -> float:
    worst = 0.0
    for name in analytic:
        a, n = analytic[name], numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), _DENOM_FLOOR)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def codec_gradcheck(seed: int = 7) -> float:
    """ELBO gradients on a 3-latent toy config; returns the worst element."""
    cfg = codec.CodecConfig(window_size=16, hop=16, latent_dims=3,
                            hidden_units=4, beta=0.01)
    rng = Rng(seed)
    model = codec.init_codec(cfg, rng)
    window = AudioWindow(rng.uniform(-0.9, 0.9, cfg.window_size), cfg.sample_rate)
    eps = rng.normals(cfg.latent_dims)
    _, analytic = codec.elbo_loss_with_eps(model, window, eps)
    numeric = finite_difference_grads(
        lambda: codec.elbo_loss_with_eps(model, window, eps)[0], model.weights)
    return max_relative_error(analytic, numeric)


def mdrnn_gradcheck(seed: int = 11, layers: int = 1) -> float:
    """BPTT gradients on a K=2, H=4, length-3 toy sequence."""
    cfg = mdrnn.MdrnnConfig(hidden_units=4, layers=layers, mixtures=2)
    rng = Rng(seed)
    model = mdrnn.init_mdrnn(cfg, rng)
    seq = synthetic.make_gesture_corpus(1, 3, rng)[0]
    _, analytic = mdrnn.sequence_loss(model, seq)
    numeric = finite_difference_grads(
        lambda: mdrnn.sequence_loss(model, seq)[0], model.weights)
    return max_relative_error(analytic, numeric)


def run_all(seed: int = 7) -> dict[str, float]:
    """Every check the `gradcheck` command runs, name -> worst relative error."""
    return {
        "codec_elbo": codec_gradcheck(seed),
        "mdrnn_bptt": mdrnn_gradcheck(seed + 1),
        "mdrnn_bptt_2layer": mdrnn_gradcheck(seed + 2, layers=2),
    }
