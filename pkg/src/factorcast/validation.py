"""Input validation helpers for the estimator layer."""

import numpy as np


def as_float_matrix(x, name="X", allow_nan=True):
    """Coerce to a 2-d float array, rejecting infinities (NaN marks missing)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {x.shape}")
    if min(x.shape) < 1:
        raise ValueError(f"{name} must be non-empty")
    if np.any(np.isinf(x)):
        raise ValueError(f"{name} contains infinite values")
    if not allow_nan and np.any(np.isnan(x)):
        raise ValueError(f"{name} contains NaN values")
    return x


def observed_grid(x, mask=None, name="X"):
    """Combine NaN-coded missingness with an optional explicit boolean mask.

    Returns (values, observed) where unobserved cells of ``values`` are zeroed
    so they can never leak into a computation.
    """
    observed = ~np.isnan(x)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape:
            raise ValueError(f"mask shape {mask.shape} must match {name} shape {x.shape}")
        observed &= mask
    values = np.where(observed, x, 0.0)
    return values, observed
