"""Comparison predictors: last-observation carry-forward and a fill-in AR model.

Both follow the same streaming protocol as the factor-model forecaster: one
``step`` per slice, returning a record whose forecast was formed before the
slice's values were consumed. The online-PMF and naive variants live in the
stream driver (``ForecastStream`` with ``method="pmf"`` / ``"naive"``) since
they share its machinery wholesale.
"""

from dataclasses import replace

import numpy as np

from .ar import LatentHistory, lag_matrix, lmmse_init, lmmse_solve, lmmse_update, predict_latent
from .forecaster import ForecastRecord, SequencingError


def _make_record(t, x_hat, slc):
    if slc.n_observed:
        abs_error = float(np.sum(np.abs(x_hat[slc.indices] - slc.values)))
    else:
        abs_error = 0.0
    return ForecastRecord(
        t=t,
        x_hat=x_hat,
        observed_indices=slc.indices.copy(),
        abs_error_sum=abs_error,
        n_observed=slc.n_observed,
    )


class BasePredictor:
    """Predict each dimension's previous observation; fall back to the mean of
    the most recently observed slice when the previous value was missing."""

    def __init__(self, n_series):
        self.n_series = int(n_series)
        self.last_value = np.zeros(self.n_series)
        self.last_seen_t = np.full(self.n_series, -1, dtype=int)
        self.last_vector_mean = 0.0
        self.any_seen = False
        self.t_last = 0

    def forecast(self, t):
        if not self.any_seen:
            return np.zeros(self.n_series)
        x_hat = np.full(self.n_series, self.last_vector_mean)
        fresh = self.last_seen_t == t - 1
        x_hat[fresh] = self.last_value[fresh]
        return x_hat

    def step(self, slc):
        if slc.t != self.t_last + 1:
            raise SequencingError(f"expected slice t={self.t_last + 1}, got t={slc.t}")
        record = _make_record(slc.t, self.forecast(slc.t), slc)
        if slc.n_observed:
            self.last_value[slc.indices] = slc.values
            self.last_seen_t[slc.indices] = slc.t
            self.last_vector_mean = float(np.mean(slc.values))
            self.any_seen = True
        self.t_last = slc.t
        return record

    def run(self, slices):
        return [self.step(s) for s in slices]


class ARFillPredictor:
    """AR model on the raw vector series, fitted by the same recursive LMMSE
    machinery as the factor model (with the series dimension playing the role
    of the latent rank).

    Missing entries of an incoming slice are imputed with the predictor's own
    forecast before entering the lag buffer (``fill="predict"``); ``fill="zero"``
    switches to zero filling.
    """

    def __init__(self, n_series, ar_order, prior_scale=1.0, fill="predict"):
        if fill not in ("predict", "zero"):
            raise ValueError("fill must be 'predict' or 'zero'")
        self.n_series = int(n_series)
        self.ar_order = int(ar_order)
        self.fill = fill
        self.ar_state = lmmse_init(self.ar_order, prior_scale)
        self.history = LatentHistory(max(self.ar_order, 1))
        self.t_last = 0

    def forecast(self, t):
        if t == 1:
            return np.zeros(self.n_series)
        if t <= self.ar_order:
            _, prev = self.history.latest()
            return prev.copy()
        return predict_latent(self.ar_state.theta, self.history, t, self.ar_order)

    def step(self, slc):
        if slc.t != self.t_last + 1:
            raise SequencingError(f"expected slice t={self.t_last + 1}, got t={slc.t}")
        x_hat = self.forecast(slc.t)
        record = _make_record(slc.t, x_hat, slc)

        filled = x_hat.copy() if self.fill == "predict" else np.zeros(self.n_series)
        if slc.n_observed:
            filled[slc.indices] = slc.values

        if slc.t > self.ar_order:
            lags = lag_matrix(self.history, slc.t, self.ar_order)
            updated = lmmse_update(self.ar_state, lags, filled)
            self.ar_state = replace(updated, theta=lmmse_solve(updated))

        self.history.append(slc.t, filled)
        self.t_last = slc.t
        return record

    def run(self, slices):
        return [self.step(s) for s in slices]
