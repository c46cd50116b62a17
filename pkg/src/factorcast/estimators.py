"""Scikit-learn style estimators wrapping the streaming forecasters.

``fit`` expects the conventional (n_samples, n_features) layout, i.e. one row
per time step and one column per series, with missing entries encoded as NaN
(or an explicit boolean ``mask`` fit parameter, True = observed). Fitting
replays the rows as a stream, recording the one-step-ahead forecast each row
received before being consumed; ``predict()`` returns the forecast for the
step following the last one seen.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .baselines import ARFillPredictor, BasePredictor
from .experiments import iter_slices, mae
from .forecaster import ForecastStream
from .validation import as_float_matrix, observed_grid


class _StreamingForecasterMixin:
    """Shared fit/predict plumbing for the streaming predictors."""

    def _make_stream(self, n_series):
        raise NotImplementedError

    def fit(self, X, y=None, mask=None):
        X = as_float_matrix(X, name="X")
        values, observed = observed_grid(X, mask)
        data = values.T  # internal orientation is (series, time)
        top = float(np.max(np.abs(data[observed.T]))) if observed.any() else 0.0
        if getattr(self, "normalize", True) and top > 1.0:
            self.scale_ = top
        else:
            self.scale_ = 1.0
        stream = self._make_stream(data.shape[0])
        slices = iter_slices(data / self.scale_, observed.T)
        self.records_ = stream.run(slices)
        self.forecasts_ = np.stack([r.x_hat for r in self.records_]).astype(float) * self.scale_
        self.mae_ = mae(self.records_, self.scale_)
        self._stream = stream
        self.n_series_in_ = data.shape[0]
        self.n_steps_in_ = data.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "_stream"):
            raise NotFittedError("call fit before predict")

    def predict(self):
        """One-step-ahead forecast for the step after the last one fitted."""
        self._check_fitted()
        stream = self._stream
        t_next = stream.t_last + 1
        if isinstance(stream, (BasePredictor, ARFillPredictor)):
            return stream.forecast(t_next) * self.scale_
        return ForecastStream.forecast(stream.priors_for(t_next)) * self.scale_


class MatrixFactorizationForecaster(_StreamingForecasterMixin, BaseEstimator):
    """One-step-ahead forecaster factorizing the series matrix online.

    Parameters
    ----------
    method : str
        "fp" (fixed penalty), "ft" (fixed tolerance), "zt" (zero tolerance,
        also known as the least-norm variant), "naive" (no temporal
        anchoring), or "pmf" (fixed penalty with a random-walk latent prior
        and no AR model).
    n_factors : int
        Latent rank of the factorization.
    ar_order : int
        Number of lags of the AR model fitted on the latent series.
    prior_scale : float
        Variance scale of the AR coefficient prior; large values approach
        plain least squares.
    penalty_u, penalty_v : float
        Ridge penalties pulling the factors toward their priors
        (``penalty_u`` applies to fp/naive only).
    tolerance : float
        Reconstruction-error budget of the "ft" method.
    max_inner_iter : int
        Fixed number of inner alternations per time step.
    normalize : bool
        Divide by the global max-abs when the input exceeds one in magnitude;
        forecasts and the ``mae_`` attribute are reported in original units.
    random_state : int
        Seed for the factor initialization.
    zt_use_v_prior : bool
        Include the latent prior pull in the "zt" v-update (off by default,
        matching the algorithm's boxed form).
    """

    def __init__(self, method="ft", n_factors=5, ar_order=24, prior_scale=1.0,
                 penalty_u=1.0, penalty_v=1e-4, tolerance=5e-2, max_inner_iter=15,
                 normalize=True, random_state=0, zt_use_v_prior=False):
        self.method = method
        self.n_factors = n_factors
        self.ar_order = ar_order
        self.prior_scale = prior_scale
        self.penalty_u = penalty_u
        self.penalty_v = penalty_v
        self.tolerance = tolerance
        self.max_inner_iter = max_inner_iter
        self.normalize = normalize
        self.random_state = random_state
        self.zt_use_v_prior = zt_use_v_prior

    def _make_stream(self, n_series):
        return ForecastStream(
            method=self.method,
            n_series=n_series,
            n_factors=self.n_factors,
            ar_order=self.ar_order,
            prior_scale=self.prior_scale,
            rho_u=self.penalty_u,
            rho_v=self.penalty_v,
            eps=self.tolerance,
            max_ite=self.max_inner_iter,
            seed=self.random_state,
            zt_use_v_prior=self.zt_use_v_prior,
        )

    def fit(self, X, y=None, mask=None):
        super().fit(X, y=y, mask=mask)
        self.components_ = self._stream.u.copy()
        if self._stream.ar_state is not None:
            self.ar_coef_ = self._stream.ar_state.theta.copy()
        return self


class LastValueForecaster(_StreamingForecasterMixin, BaseEstimator):
    """Carry forward each series' previous observation; when it was missing,
    predict the mean of the most recently observed row."""

    def __init__(self, normalize=True):
        self.normalize = normalize

    def _make_stream(self, n_series):
        return BasePredictor(n_series)


class ARFillForecaster(_StreamingForecasterMixin, BaseEstimator):
    """AR model on the raw series with self-imputation of missing entries."""

    def __init__(self, ar_order=24, prior_scale=1.0, fill="predict", normalize=True):
        self.ar_order = ar_order
        self.prior_scale = prior_scale
        self.fill = fill
        self.normalize = normalize

    def _make_stream(self, n_series):
        return ARFillPredictor(n_series, ar_order=self.ar_order,
                               prior_scale=self.prior_scale, fill=self.fill)
