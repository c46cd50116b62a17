"""Self-contained invariant checks behind the ``verify`` CLI verb.

Each check prints one PASS/FAIL line; the runner returns a nonzero status if
any check fails. These are smaller, faster variants of the full test suite,
meant as an installed-environment smoke screen.
"""

import numpy as np

from .ar import lmmse_batch, lmmse_init, lmmse_solve, lmmse_update
from .data import gen_structured_mask, gen_synthetic, gen_unstructured_mask
from .experiments import ExperimentConfig, iter_slices, run_replicate
from .factorization import (ObservationSlice, Priors, ft_constants, ft_lambda_u,
                            ft_step, zt_step)
from .linalg import rank1_reg_solve, solve_spd, sym_eig


def _random_slice(rng, d, m):
    idx = np.sort(rng.choice(m, size=rng.integers(1, m + 1), replace=False))
    return ObservationSlice(t=1, indices=idx, values=rng.uniform(-1, 1, idx.size))


def check_ft_residual_law(rng, n=1000):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 9))
        m = int(rng.integers(d, 33))
        slc = _random_slice(rng, d, m)
        priors = Priors(rng.normal(size=(d, m)), rng.normal(size=d))
        eps = float(rng.uniform(1e-3, 1e-1))
        u, v = ft_step(slc, priors, eps, 1e-4, max_ite=2)
        resid = slc.values - u[:, slc.indices].T @ v
        prior_resid = slc.values - priors.u_bar[:, slc.indices].T @ v
        if float(prior_resid @ prior_resid) > eps:
            worst = max(worst, abs(float(resid @ resid) - eps) / eps)
    return worst <= 1e-6, f"max relative residual error {worst:.2e}"


def check_zt_interpolation(rng, n=1000):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 9))
        m = int(rng.integers(d, 33))
        slc = _random_slice(rng, d, m)
        priors = Priors(rng.normal(size=(d, m)), rng.normal(size=d))
        u, v = zt_step(slc, priors, 1e-4, max_ite=2)
        if float(v @ v) > 1e-12:
            resid = slc.values - u[:, slc.indices].T @ v
            worst = max(worst, float(np.max(np.abs(resid))))
    return worst <= 1e-10, f"max interpolation error {worst:.2e}"


def check_rank1_identity(rng, n=200):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 9))
        v = rng.normal(size=d)
        b = rng.normal(size=(d, int(rng.integers(1, 5))))
        rho = float(rng.uniform(0.01, 10.0))
        direct = solve_spd(rho * np.eye(d) + np.outer(v, v), b)
        worst = max(worst, float(np.max(np.abs(direct - rank1_reg_solve(rho, v, b)))))
    return worst <= 1e-10, f"max discrepancy {worst:.2e}"


def check_lmmse_recursion(rng, n=20):
    worst = 0.0
    for _ in range(n):
        d, p = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        t_len = int(rng.integers(3, 60))
        lags = [rng.normal(size=(d, p)) for _ in range(t_len)]
        targets = [rng.normal(size=d) for _ in range(t_len)]
        r0 = float(rng.uniform(0.1, 10.0))
        state = lmmse_init(p, r0)
        for lag, tgt in zip(lags, targets):
            state = lmmse_update(state, lag, tgt)
        worst = max(worst, float(np.max(np.abs(
            lmmse_solve(state) - lmmse_batch(lags, targets, r0)))))
    return worst <= 1e-10, f"max coefficient discrepancy {worst:.2e}"


def check_eig_reconstruction(rng, n=50):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 9))
        u = rng.normal(size=(d, d + 3))
        s = u @ u.T
        s = 0.5 * (s + s.T)
        eig = sym_eig(s)
        recon = eig.q @ np.diag(eig.psi) @ eig.q.T
        denom = max(float(np.max(np.abs(s))), 1e-12)
        worst = max(worst, float(np.max(np.abs(recon - s))) / denom)
    return worst <= 1e-9, f"max relative reconstruction error {worst:.2e}"


def check_mask_statistics(rng, fast):
    t_len = 20_000 if fast else 100_000
    unstructured = gen_unstructured_mask(100, 2_000, 0.5, seed=int(rng.integers(2**31)))
    frac_u = float(np.mean(unstructured.observed))
    structured = gen_structured_mask(50, t_len, 5e-2, 5e-3, seed=int(rng.integers(2**31)))
    missing = 1.0 - float(np.mean(structured.observed))
    ok = abs(frac_u - 0.5) < 0.01 and 0.88 <= missing <= 0.94
    return ok, f"unstructured observed {frac_u:.4f}, structured missing {missing:.4f}"


def check_determinism(rng, fast):
    del rng, fast
    series = gen_synthetic(10, 2, 2, np.array([0.6, 0.2]), (0.0, 0.05, 0.01), 200, seed=7)
    config = ExperimentConfig(method="ft", params={"n_factors": 2, "ar_order": 4},
                              mask_kind="unstructured", mask_params={"nnz_fraction": 0.7},
                              n_replicates=1, base_seed=3)
    first = run_replicate(series, config, 0)
    second = run_replicate(series, config, 0)
    same = all(
        a.abs_error_sum == b.abs_error_sum and np.array_equal(a.x_hat, b.x_hat)
        for a, b in zip(first, second)
    ) and len(first) == len(second)
    return same, "identical records across reruns" if same else "records differ"


def check_ft_multiplier_sign(rng, n=500):
    ok = True
    for _ in range(n):
        d = int(rng.integers(1, 6))
        m = int(rng.integers(d, 20))
        v = rng.normal(size=d)
        u_bar = rng.normal(size=(d, m))
        x = rng.uniform(-1, 1, m)
        consts = ft_constants(x, u_bar, v)
        eps = float(rng.uniform(1e-3, 1e-2))
        if consts.prior_residual_sq <= eps or consts.c2 <= 0:
            continue
        lam = ft_lambda_u(consts, eps)
        ok &= lam > 0
    return ok, "active multiplier positive whenever the prior violates the tolerance"


def run_checks(fast=False):
    rng = np.random.default_rng(20240801)
    scale = 0.2 if fast else 1.0

    def sized(n):
        return max(10, int(n * scale))

    checks = [
        ("ft residual law", lambda: check_ft_residual_law(rng, sized(1000))),
        ("ft multiplier sign", lambda: check_ft_multiplier_sign(rng, sized(500))),
        ("zt exact interpolation", lambda: check_zt_interpolation(rng, sized(1000))),
        ("rank-1 solve identity", lambda: check_rank1_identity(rng, sized(200))),
        ("lmmse recursion vs batch", lambda: check_lmmse_recursion(rng, sized(20))),
        ("eigendecomposition reconstruction", lambda: check_eig_reconstruction(rng, sized(50))),
        ("mask statistics", lambda: check_mask_statistics(rng, fast)),
        ("run determinism", lambda: check_determinism(rng, fast)),
    ]
    failures = 0
    for name, fn in checks:
        ok, detail = fn()
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} of {len(checks)} checks failed")
        return 1
    print(f"all {len(checks)} checks passed")
    return 0
