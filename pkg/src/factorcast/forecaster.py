"""Streaming driver: per time step, form priors, emit the one-step-ahead
forecast, update the factors on the observed entries, and refresh the AR
coefficient estimate.

The forecast for step t is a deterministic function of the slices seen up to
t-1 and the seed: it is computed before the step's observations are consumed.
All-missing columns skip both updates but still append the predicted latent
vector so lag bookkeeping stays aligned.
"""

from dataclasses import dataclass, replace

import numpy as np

from .ar import LatentHistory, lag_matrix, lmmse_init, lmmse_solve, lmmse_update, predict_latent
from .factorization import Priors, fp_step, ft_step, naive_step, zt_step

FACTOR_METHODS = ("fp", "ft", "zt", "naive", "pmf")


class SequencingError(RuntimeError):
    """Slices must arrive with consecutive time indices."""


@dataclass(frozen=True)
class ForecastRecord:
    """One step's forecast and its error contribution on the observed entries."""

    t: int
    x_hat: np.ndarray
    observed_indices: np.ndarray
    abs_error_sum: float
    n_observed: int


class ForecastStream:
    """One factor-model forecaster instance per stream; steps are sequential.

    Parameters mirror the experiment protocol: ``n_factors`` is the latent
    rank, ``ar_order`` the number of lags, ``prior_scale`` the coefficient
    prior variance of the AR estimator, ``rho_u``/``rho_v`` the ridge
    penalties (``rho_u`` only for fp/naive), ``eps`` the tolerance (ft only),
    and ``max_ite`` the fixed number of inner alternations.

    ``method="pmf"`` runs the fixed-penalty update with no AR machinery at
    all; its latent prior is the previous latent vector (random walk) or, with
    ``pmf_zero_v_prior``, the zero vector.
    """

    def __init__(self, method, n_series, n_factors, ar_order, prior_scale=1.0,
                 rho_u=1.0, rho_v=1e-4, eps=5e-2, max_ite=15, seed=0,
                 zt_use_v_prior=False, pmf_zero_v_prior=False):
        method = str(method).lower()
        if method not in FACTOR_METHODS:
            raise ValueError(f"method must be one of {FACTOR_METHODS}, got {method!r}")
        if n_series < 1 or n_factors < 1 or ar_order < 1 or max_ite < 1:
            raise ValueError("n_series, n_factors, ar_order, max_ite must be >= 1")
        self.method = method
        self.n_series = int(n_series)
        self.n_factors = int(n_factors)
        self.ar_order = int(ar_order)
        self.prior_scale = float(prior_scale)
        self.rho_u = float(rho_u)
        self.rho_v = float(rho_v)
        self.eps = float(eps)
        self.max_ite = int(max_ite)
        self.seed = seed
        self.zt_use_v_prior = bool(zt_use_v_prior)
        self.pmf_zero_v_prior = bool(pmf_zero_v_prior)

        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(self.n_factors)
        self.u = rng.random((self.n_factors, self.n_series)) * scale
        v0 = rng.random(self.n_factors) * scale
        self.history = LatentHistory(max(self.ar_order, 1))
        self.history.append(0, v0)
        self.ar_state = None if method == "pmf" else lmmse_init(self.ar_order, self.prior_scale)
        self.t_last = 0
        self.n_m_steps = 0

    def priors_for(self, t):
        """Priors used for both the forecast and the factor update at step t."""
        if t < 1:
            raise ValueError("t must be >= 1")
        if t == 1:
            return Priors(np.zeros_like(self.u), np.zeros(self.n_factors))
        if self.method == "pmf" or t <= self.ar_order:
            _, v_prev = self.history.latest()
            return Priors(self.u, v_prev)
        v_bar = predict_latent(self.ar_state.theta, self.history, t, self.ar_order)
        return Priors(self.u, v_bar)

    @staticmethod
    def forecast(priors):
        """Full-width one-step-ahead forecast from the priors."""
        return priors.u_bar.T @ priors.v_bar

    def _e_step(self, slc, priors):
        if self.method in ("fp", "pmf"):
            return fp_step(slc, priors, self.rho_u, self.rho_v, self.max_ite, u_init=self.u)
        if self.method == "ft":
            return ft_step(slc, priors, self.eps, self.rho_v, self.max_ite, u_init=self.u)
        if self.method == "zt":
            return zt_step(slc, priors, self.rho_v, self.max_ite, u_init=self.u,
                           use_v_prior=self.zt_use_v_prior)
        return naive_step(slc, self.u, self.rho_u, self.rho_v, self.max_ite)

    def step(self, slc):
        """Consume one slice, returning the record of the forecast made before it."""
        if slc.t != self.t_last + 1:
            raise SequencingError(
                f"expected slice t={self.t_last + 1}, got t={slc.t}; "
                "encode missing timestamps as empty slices"
            )
        priors = self.priors_for(slc.t)
        x_hat = self.forecast(priors)
        if slc.n_observed:
            abs_error = float(np.sum(np.abs(x_hat[slc.indices] - slc.values)))
        else:
            abs_error = 0.0
        record = ForecastRecord(
            t=slc.t,
            x_hat=x_hat,
            observed_indices=slc.indices.copy(),
            abs_error_sum=abs_error,
            n_observed=slc.n_observed,
        )

        if slc.n_observed:
            fit_priors = priors
            if self.method == "pmf" and self.pmf_zero_v_prior and slc.t > 1:
                # zero-centered latent penalty; the forecast above still used
                # the previous latent vector
                fit_priors = Priors(priors.u_bar, np.zeros(self.n_factors))
            self.u, v_t = self._e_step(slc, fit_priors)
            e_step_ran = True
        else:
            v_t = priors.v_bar
            e_step_ran = False

        if self.ar_state is not None and e_step_ran and slc.t > self.ar_order:
            lags = lag_matrix(self.history, slc.t, self.ar_order)
            updated = lmmse_update(self.ar_state, lags, v_t)
            self.ar_state = replace(updated, theta=lmmse_solve(updated))
            self.n_m_steps += 1

        self.history.append(slc.t, v_t)
        self.t_last = slc.t
        return record

    def run(self, slices):
        """Step through an iterable of slices, collecting the records."""
        return [self.step(s) for s in slices]
