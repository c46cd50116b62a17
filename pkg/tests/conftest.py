import numpy as np
import pytest

from factorcast import ObservationSlice, Priors


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)


def random_slice(rng, d, m, t=1, n_obs=None):
    """Random observed column with values in [-1, 1]."""
    if n_obs is None:
        n_obs = int(rng.integers(1, m + 1))
    idx = np.sort(rng.choice(m, size=n_obs, replace=False))
    return ObservationSlice(t=t, indices=idx, values=rng.uniform(-1, 1, n_obs))


def random_priors(rng, d, m, scale=1.0):
    return Priors(rng.normal(scale=scale, size=(d, m)), rng.normal(scale=scale, size=d))
