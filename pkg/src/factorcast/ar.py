"""Recursive LMMSE estimation of scalar AR coefficients on the latent series.

Each time step contributes one d-row block to a stacked linear system whose
unknown is the shared coefficient vector. The estimator keeps two running
accumulators (the Gram matrix and the cross term) so the optimum under a
zero-mean isotropic prior is available at any time by a single small solve.
With a non-informative prior the estimate coincides with ordinary least
squares on the stacked system.
"""

from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np

from .linalg import SingularMatrixError, solve_spd


class LatentHistory:
    """Ring buffer of the most recent latent vectors keyed by time index."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._items = OrderedDict()

    def append(self, t, v):
        if self._items and t <= next(reversed(self._items)):
            raise ValueError("time indices must be strictly increasing")
        self._items[int(t)] = np.asarray(v, dtype=float).copy()
        while len(self._items) > self.capacity:
            self._items.popitem(last=False)

    def get(self, t):
        try:
            return self._items[int(t)]
        except KeyError:
            raise KeyError(f"latent vector for t={t} is not in the buffer") from None

    def latest(self):
        if not self._items:
            raise KeyError("history is empty")
        t = next(reversed(self._items))
        return t, self._items[t]

    def __len__(self):
        return len(self._items)


@dataclass(frozen=True)
class ARState:
    """Accumulators and current coefficient estimate of the recursive estimator."""

    r_l: np.ndarray   # (P, P), symmetric, >= (1/r0) I
    r_r: np.ndarray   # (P,)
    theta: np.ndarray  # (P,)
    r0: float


def lmmse_init(order, r0):
    """Fresh estimator state: prior precision on the diagonal, zero elsewhere."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    return ARState(
        r_l=np.eye(order) / r0,
        r_r=np.zeros(order),
        theta=np.zeros(order),
        r0=float(r0),
    )


def lag_matrix(history, t, order):
    """Stack the previous ``order`` latent vectors as columns: column l-1 is v_{t-l}."""
    cols = [history.get(t - lag) for lag in range(1, order + 1)]
    return np.column_stack(cols)


def lmmse_update(state, lags, target):
    """Fold one time step into the accumulators; the estimate itself is unchanged."""
    lags = np.asarray(lags, dtype=float)
    target = np.asarray(target, dtype=float)
    if lags.ndim != 2 or lags.shape[1] != state.r_l.shape[0]:
        raise ValueError("lag matrix must be (d, order)")
    if target.shape != (lags.shape[0],):
        raise ValueError("target must be a length-d vector")
    gram = lags.T @ lags
    return replace(
        state,
        r_l=state.r_l + 0.5 * (gram + gram.T),
        r_r=state.r_r + lags.T @ target,
    )


def lmmse_solve(state):
    """Current optimum coefficient vector; zero before any data arrives.

    The prior term keeps the normal equations positive definite, so a solve
    failure can only mean the accumulated latents grew until the matrix is
    ill-conditioned past the pivot floor; surface that explicitly.
    """
    try:
        return solve_spd(state.r_l, state.r_r)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            "AR normal equations are numerically singular despite the prior term; "
            "latent magnitudes have likely diverged (revisit tolerance/penalty settings): "
            f"{exc}"
        ) from exc


def lmmse_batch(lag_matrices, targets, r0):
    """Batch-form estimate on the stacked system (test oracle for the recursion).

    Implemented as a ridge-augmented least-squares problem, deliberately not
    sharing the recursive code path.
    """
    if not lag_matrices or len(lag_matrices) != len(targets):
        raise ValueError("need equally many nonempty lag matrices and targets")
    order = np.asarray(lag_matrices[0]).shape[1]
    stacked = np.vstack([np.asarray(p, dtype=float) for p in lag_matrices])
    rhs = np.concatenate([np.asarray(v, dtype=float) for v in targets])
    if rhs.shape[0] != stacked.shape[0]:
        raise ValueError("targets do not match the stacked lag matrices")
    augmented = np.vstack([stacked, np.eye(order) / np.sqrt(r0)])
    padded = np.concatenate([rhs, np.zeros(order)])
    theta, *_ = np.linalg.lstsq(augmented, padded, rcond=None)
    return theta


def predict_latent(theta, history, t, order):
    """AR combination of the buffered lags: sum of theta_l * v_{t-l}."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (order,):
        raise ValueError("theta must have one entry per lag")
    out = np.zeros_like(history.get(t - 1), dtype=float)
    for lag in range(1, order + 1):
        out += theta[lag - 1] * history.get(t - lag)
    return out
