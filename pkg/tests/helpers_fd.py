"""Central finite-difference gradient checking shared by test modules."""

import numpy as np


def central_diff(f, arr: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """d f / d arr by central differences, perturbing one entry at a time.

    ``f`` must be a zero-argument callable returning a scalar float that
    reads ``arr`` in place.
    """
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = f()
        flat[i] = orig - h
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def assert_grads_close(analytic: np.ndarray, numeric: np.ndarray,
                       rtol: float = 1e-4, atol: float = 1e-8) -> None:
    """Elementwise |a - n| <= atol + rtol * max(|a|, |n|)."""
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    bad = np.abs(analytic - numeric) > atol + rtol * scale
    if np.any(bad):
        idx = tuple(np.argwhere(bad)[0])
        raise AssertionError(
            f"gradient mismatch at {idx}: analytic={analytic[idx]!r} "
            f"numeric={numeric[idx]!r} ({int(bad.sum())} of {bad.size} entries)"
        )
