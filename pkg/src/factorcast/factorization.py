"""Per-column factor updates for a partially observed streaming matrix.

Each solver consumes one observation column (values at the observed row
indices), the temporal priors for the coefficient matrix and the latent
vector, and returns updated factors. Three constrained variants are provided:

* ``fp_step``  -- fixed penalty: ridge pulls toward both priors.
* ``ft_step``  -- fixed tolerance: stay as close to the priors as possible
  subject to the reconstruction error not exceeding a tolerance; the active
  Lagrange multiplier has a closed form.
* ``zt_step``  -- zero tolerance: exact interpolation of the observed entries.

``naive_step`` is the ablation with zero-centered penalties (no temporal
anchoring). All solvers are pure functions: columns outside the observed index
set are carried over unchanged, and a fixed number of inner alternations is
run with no early exit, so results are exactly reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import rank1_reg_solve, real_roots, solve_spd, sym_eig

# Latent directions with squared norm below this are treated as degenerate and
# the corresponding coefficient update is skipped for the iteration.
DEGENERATE_V_SQ = 1e-12


class InfeasibleToleranceError(RuntimeError):
    """The tolerance constraint cannot be met by any latent vector."""


@dataclass(frozen=True)
class ObservationSlice:
    """One timestamp's observed column: values plus their (0-based) row indices."""

    t: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        val = np.asarray(self.values, dtype=float)
        if idx.ndim != 1 or val.ndim != 1 or idx.shape != val.shape:
            raise ValueError("indices and values must be 1-d and equally long")
        if idx.size and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if idx.size and idx[0] < 0:
            raise ValueError("indices must be nonnegative")
        if not np.all(np.isfinite(val)):
            raise ValueError("values must be finite")
        if val.size and float(np.max(np.abs(val))) > 1.0 + 1e-9:
            raise ValueError("values must lie in [-1, 1]; normalize the series first")
        if self.t < 1:
            raise ValueError("time index must be >= 1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def n_observed(self):
        return int(self.indices.size)


@dataclass(frozen=True)
class Priors:
    """Temporal priors: previous coefficient matrix and AR-combined latent vector."""

    u_bar: np.ndarray  # (d, M)
    v_bar: np.ndarray  # (d,)

    def __post_init__(self):
        u = np.asarray(self.u_bar, dtype=float)
        v = np.asarray(self.v_bar, dtype=float)
        if u.ndim != 2 or v.ndim != 1 or u.shape[0] != v.shape[0]:
            raise ValueError("u_bar must be (d, M) and v_bar length d")
        object.__setattr__(self, "u_bar", u)
        object.__setattr__(self, "v_bar", v)


@dataclass(frozen=True)
class FtConstants:
    """Scalars of the fixed-tolerance multiplier: c1 = v'Ux, c2 = |v|^2, c3 = |x|^2, c4 = |U'v|^2."""

    c1: float
    c2: float
    c3: float
    c4: float

    def __post_init__(self):
        if min(self.c2, self.c3, self.c4) < 0:
            raise ValueError("c2, c3, c4 must be nonnegative")
        if self.prior_residual_sq < -1e-12:
            raise ValueError("c3 + c4 - 2*c1 must be nonnegative (it is a squared norm)")

    @property
    def prior_residual_sq(self):
        # equals |x - u_bar' v|^2 restricted to the observed indices
        return self.c3 + self.c4 - 2.0 * self.c1


def _check_step_args(slc, priors, max_ite):
    if max_ite < 1:
        raise ValueError("max_ite must be >= 1")
    if slc.n_observed and int(slc.indices[-1]) >= priors.u_bar.shape[1]:
        raise ValueError("slice indices exceed the coefficient matrix width")


def _start_matrix(priors, u_init):
    if u_init is None:
        return priors.u_bar
    u_init = np.asarray(u_init, dtype=float)
    if u_init.shape != priors.u_bar.shape:
        raise ValueError("u_init must match the prior coefficient matrix shape")
    return u_init


def _ridge_v(u, x, v_bar, rho_v):
    # (rho_v I + U U') v = rho_v v_bar + U x
    gram = u @ u.T
    gram = 0.5 * (gram + gram.T)
    gram[np.diag_indices_from(gram)] += rho_v
    return solve_spd(gram, rho_v * v_bar + u @ x)


def _assemble(base, idx, u_restricted):
    full = base.copy()
    full[:, idx] = u_restricted
    return full


def fp_step(slc, priors, rho_u, rho_v, max_ite, u_init=None):
    """Fixed-penalty alternation: ridge updates for v then U, ``max_ite`` times.

    ``u_init`` is the warm start for the first v update (defaults to the prior
    matrix; the stream driver passes the current factor state so the very
    first step, whose prior is zero, still excites a nonzero latent vector).
    """
    if rho_u <= 0 or rho_v <= 0:
        raise ValueError("rho_u and rho_v must be positive")
    _check_step_args(slc, priors, max_ite)
    base = _start_matrix(priors, u_init)
    if slc.n_observed == 0:
        return base.copy(), priors.v_bar.copy()
    idx, x = slc.indices, slc.values
    u_bar = priors.u_bar[:, idx]
    u = base[:, idx]
    v = priors.v_bar.copy()
    for _ in range(max_ite):
        v = _ridge_v(u, x, priors.v_bar, rho_v)
        u = rank1_reg_solve(rho_u, v, rho_u * u_bar + np.outer(v, x))
    return _assemble(base, idx, u), v


def naive_step(slc, u_prev, rho_u, rho_v, max_ite):
    """Same alternation as ``fp_step`` but with zero-centered penalties."""
    if rho_u <= 0 or rho_v <= 0:
        raise ValueError("rho_u and rho_v must be positive")
    u_prev = np.asarray(u_prev, dtype=float)
    if max_ite < 1:
        raise ValueError("max_ite must be >= 1")
    d = u_prev.shape[0]
    if slc.n_observed == 0:
        return u_prev.copy(), np.zeros(d)
    if int(slc.indices[-1]) >= u_prev.shape[1]:
        raise ValueError("slice indices exceed the coefficient matrix width")
    idx, x = slc.indices, slc.values
    u = u_prev[:, idx]
    v = np.zeros(d)
    zero_prior = np.zeros(d)
    for _ in range(max_ite):
        v = _ridge_v(u, x, zero_prior, rho_v)
        u = rank1_reg_solve(rho_u, v, np.outer(v, x))
    return _assemble(u_prev, idx, u), v


def ft_constants(x, u_bar_restricted, v):
    """The four scalars feeding the fixed-tolerance multiplier."""
    x = np.asarray(x, dtype=float)
    u_bar = np.asarray(u_bar_restricted, dtype=float)
    v = np.asarray(v, dtype=float)
    if u_bar.shape != (v.shape[0], x.shape[0]):
        raise ValueError("u_bar_restricted must be (d, n_observed)")
    proj = u_bar.T @ v
    return FtConstants(
        c1=float(v @ (u_bar @ x)),
        c2=float(v @ v),
        c3=float(x @ x),
        c4=float(proj @ proj),
    )


def ft_lambda_u(consts, eps):
    """Closed-form Lagrange multiplier for the tolerance-constrained U update.

    When the prior residual already satisfies the tolerance the unconstrained
    multiplier is negative and complementary slackness clamps it to zero.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if consts.c2 <= 0:
        raise ValueError("degenerate latent vector: c2 must be positive")
    gap = max(consts.prior_residual_sq, 0.0)
    lam = -1.0 / consts.c2 + np.sqrt(gap) / (np.sqrt(eps) * consts.c2)
    return max(lam, 0.0)


def ft_multiplier_quadratic(consts, eps):
    """Ascending coefficients of the quadratic whose positive root is the multiplier."""
    return np.array([
        consts.prior_residual_sq - eps,
        -2.0 * eps * consts.c2,
        -eps * consts.c2 ** 2,
    ])


def _shrink_u(lam, v, u_bar, x):
    # (I + lam v v')^{-1} (u_bar + lam v x'), stable for any lam >= 0
    if lam == 0.0:
        return u_bar.copy()
    c2 = float(v @ v)
    b = u_bar + lam * np.outer(v, x)
    return b - (lam / (1.0 + lam * c2)) * np.outer(v, v @ b)


def ft_step(slc, priors, eps, rho_v, max_ite, u_init=None):
    """Fixed-tolerance alternation: ridge v update, then the closed-form U update.

    Whenever the multiplier is active the updated factors reproduce the
    observed entries with squared error exactly ``eps``; otherwise the prior
    matrix is kept. A degenerate latent direction skips the U update for that
    iteration only.
    """
    if eps <= 0 or rho_v <= 0:
        raise ValueError("eps and rho_v must be positive")
    _check_step_args(slc, priors, max_ite)
    base = _start_matrix(priors, u_init)
    if slc.n_observed == 0:
        return base.copy(), priors.v_bar.copy()
    idx, x = slc.indices, slc.values
    u_bar = priors.u_bar[:, idx]
    u = base[:, idx]
    for _ in range(max_ite):
        v = _ridge_v(u, x, priors.v_bar, rho_v)
        if float(v @ v) < DEGENERATE_V_SQ:
            continue
        lam = ft_lambda_u(ft_constants(x, u_bar, v), eps)
        u = _shrink_u(lam, v, u_bar, x)
    return _assemble(base, idx, u), v


def zt_step(slc, priors, rho_v, max_ite, u_init=None, use_v_prior=False):
    """Zero-tolerance alternation: after each U update the observed entries
    are interpolated exactly.

    ``use_v_prior`` adds the ``rho_v * v_bar`` pull to the v update (the prose
    form of the update); the default matches the algorithm box, which omits it.
    """
    if rho_v <= 0:
        raise ValueError("rho_v must be positive")
    _check_step_args(slc, priors, max_ite)
    base = _start_matrix(priors, u_init)
    if slc.n_observed == 0:
        return base.copy(), priors.v_bar.copy()
    idx, x = slc.indices, slc.values
    u_bar = priors.u_bar[:, idx]
    u = base[:, idx]
    v_prior = priors.v_bar if use_v_prior else np.zeros_like(priors.v_bar)
    v = priors.v_bar.copy()
    for _ in range(max_ite):
        v = _ridge_v(u, x, v_prior, rho_v)
        vsq = float(v @ v)
        if vsq < DEGENERATE_V_SQ:
            continue
        multipliers = (u_bar.T @ v - x) / vsq
        u = u_bar - np.outer(v, multipliers)
    return _assemble(base, idx, u), v


def _tolerance_polynomial(psi, c1, c2, eps, x_sq):
    """Ascending coefficients of the degree-2d polynomial whose positive roots
    parameterize latent vectors meeting the tolerance with equality."""
    d = psi.shape[0]
    quad_factors = [np.array([p * p, 2.0 * p, 1.0]) for p in psi]  # (rho + psi_i)^2
    prod_all = np.array([1.0])
    for f in quad_factors:
        prod_all = np.convolve(prod_all, f)
    acc = np.zeros(2 * d + 1)
    acc[: prod_all.size] += -(eps - x_sq) * prod_all
    for i in range(d):
        rest = np.array([1.0])
        for j, f in enumerate(quad_factors):
            if j != i:
                rest = np.convolve(rest, f)
        per_i = np.array([
            -psi[i] * c1[i] ** 2,
            -2.0 * c1[i] ** 2,
            psi[i] * c2[i] ** 2 - 2.0 * c1[i] * c2[i],
        ])
        term = np.convolve(rest, per_i)
        acc[: term.size] += term
    return acc


def ft_v_exact(u_restricted, x, v_bar, eps):
    """Exact tolerance-constrained latent update (diagnostic oracle).

    Solves min ||v - v_bar||^2 subject to ||x - U'v||^2 <= eps by
    eigendecomposing U U' and scanning the real roots of the resulting
    polynomial. Not used by the streaming loop, where the ridge form is
    preferred; kept as an independently checkable reference.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    u = np.asarray(u_restricted, dtype=float)
    x = np.asarray(x, dtype=float)
    v_bar = np.asarray(v_bar, dtype=float)
    if u.shape != (v_bar.shape[0], x.shape[0]):
        raise ValueError("u_restricted must be (d, n_observed)")
    res0 = x - u.T @ v_bar
    if float(res0 @ res0) <= eps:
        return v_bar.copy()

    v_ls, *_ = np.linalg.lstsq(u.T, x, rcond=None)
    res_ls = x - u.T @ v_ls
    if float(res_ls @ res_ls) > eps * (1.0 + 1e-9) + 1e-15:
        raise InfeasibleToleranceError(
            "least-squares residual exceeds the tolerance; no feasible latent vector"
        )

    eig = sym_eig(0.5 * (u @ u.T + (u @ u.T).T))
    c1 = eig.q.T @ (u @ x)
    c2 = eig.q.T @ v_bar
    coeffs = _tolerance_polynomial(eig.psi, c1, c2, eps, float(x @ x))
    candidates = [r for r in real_roots(coeffs) if r > 1e-12]
    best = None
    best_obj = np.inf
    for rho in candidates:
        v = eig.q @ ((c1 + rho * c2) / (rho + eig.psi))
        res = x - u.T @ v
        res_sq = float(res @ res)
        if res_sq > eps * (1.0 + 1e-6) + 1e-15:
            continue
        obj = float((v - v_bar) @ (v - v_bar))
        if obj < best_obj:
            best, best_obj = v, obj
    if best is None:
        raise InfeasibleToleranceError(
            "no positive root produced a latent vector meeting the tolerance"
        )
    return best
