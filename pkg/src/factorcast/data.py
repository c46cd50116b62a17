"""Dataset ingestion, normalization, sparsity-mask generation, synthetic
streams from the generative state-space model, and result persistence.

Series matrices are oriented (n_series, n_steps): one column per time step.
Generators are pure functions of their parameters and seed.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd


class IngestionError(ValueError):
    """A delimited table could not be parsed into a dense numeric matrix."""


@dataclass
class SeriesMatrix:
    """A (n_series, n_steps) real matrix plus the normalization constant.

    ``scale`` holds original units per normalized unit: a scalar for global
    normalization or a per-row vector when each series was scaled on its own.
    """

    values: np.ndarray
    scale: np.ndarray | float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 1:
            raise ValueError("values must be a non-empty 2-d matrix")

    @property
    def n_series(self):
        return self.values.shape[0]

    @property
    def n_steps(self):
        return self.values.shape[1]

    def fingerprint(self):
        return hashlib.sha256(np.ascontiguousarray(self.values).tobytes()).hexdigest()


@dataclass(frozen=True)
class TableFormat:
    """How to parse a delimited numeric table into a series matrix.

    ``aggregate`` pools fixed blocks of ``aggregate_block`` consecutive raw
    columns ("hourly_mean" / "hourly_sum"); ``transpose`` flips tables stored
    with one row per time step into the (series, time) orientation.
    """

    delimiter: str = ","
    decimal_separator: str = "."
    header_rows: int = 0
    index_cols: int = 0
    aggregate: str = "none"
    aggregate_block: int = 4
    transpose: bool = False


@dataclass
class SparsityMask:
    """Boolean observation pattern plus the descriptor it was generated from."""

    observed: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.observed = np.asarray(self.observed, dtype=bool)
        if self.observed.ndim != 2:
            raise ValueError("observed must be a 2-d boolean grid")

    def descriptor(self):
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}


def load_matrix(path, fmt=TableFormat()):
    """Parse a delimited numeric table into a SeriesMatrix (no normalization)."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=fmt.delimiter, header=None, dtype=str,
                            skiprows=fmt.header_rows, engine="python")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    except pd.errors.ParserError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    if fmt.index_cols:
        frame = frame.iloc[:, fmt.index_cols:]
    if frame.shape[1] == 0 or frame.shape[0] == 0:
        raise IngestionError(f"{path}: table is empty after skipping headers/index columns")
    cells = frame.to_numpy()
    parsed = np.empty(cells.shape, dtype=float)

    def fail(i, j, raw):
        raise IngestionError(
            f"{path}: cell at row {i + fmt.header_rows}, column {j + fmt.index_cols} "
            f"is missing or unparseable ({raw!r})"
        )

    for j in range(cells.shape[1]):
        raw_column = cells[:, j]
        missing = pd.isna(raw_column)
        if missing.any():
            i = int(np.argmax(missing))
            fail(i, j, raw_column[i])
        strings = raw_column.astype(str)
        if fmt.decimal_separator != ".":
            strings = np.char.replace(strings, fmt.decimal_separator, ".")
        try:
            # numpy's parser is correctly rounded, unlike pandas' fast path
            column = strings.astype(np.float64)
        except ValueError:
            for i, cell in enumerate(strings):
                try:
                    float(cell)
                except ValueError:
                    fail(i, j, raw_column[i])
            raise
        finite = np.isfinite(column)
        if not finite.all():
            i = int(np.argmax(~finite))
            fail(i, j, raw_column[i])
        parsed[:, j] = column

    values = parsed.T if fmt.transpose else parsed
    if fmt.aggregate != "none":
        if fmt.aggregate not in ("hourly_mean", "hourly_sum"):
            raise ValueError(f"unknown aggregate mode {fmt.aggregate!r}")
        block = int(fmt.aggregate_block)
        if block < 1 or values.shape[1] % block != 0:
            raise IngestionError(
                f"{path}: {values.shape[1]} columns not divisible by block {block}"
            )
        grouped = values.reshape(values.shape[0], -1, block)
        values = grouped.mean(axis=2) if fmt.aggregate == "hourly_mean" else grouped.sum(axis=2)
    return SeriesMatrix(values=values, scale=1.0)


def normalize(matrix, per_row=False):
    """Scale so the maximum absolute value is one; the divisor is kept so
    downstream errors can be reported in original units."""
    values = matrix.values
    if per_row:
        row_max = np.max(np.abs(values), axis=1)
        if np.all(row_max == 0):
            raise ValueError("cannot normalize an all-zero matrix")
        scale = np.where(row_max > 0, row_max, 1.0)
        return SeriesMatrix(values=values / scale[:, None], scale=scale)
    top = float(np.max(np.abs(values)))
    if top == 0:
        raise ValueError("cannot normalize an all-zero matrix")
    return SeriesMatrix(values=values / top, scale=top)


def denormalize(matrix):
    scale = np.asarray(matrix.scale)
    if scale.ndim == 1:
        return matrix.values * scale[:, None]
    return matrix.values * float(scale)


def gen_unstructured_mask(n_series, n_steps, nnz_fraction, seed, exact_per_column=False):
    """Independent per-entry observation with probability ``nnz_fraction``.

    ``exact_per_column`` draws exactly round(nnz * n_series) observed entries
    per column instead of independent coin flips.
    """
    if not 0 < nnz_fraction <= 1:
        raise ValueError("nnz_fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    if exact_per_column:
        count = int(round(nnz_fraction * n_series))
        observed = np.zeros((n_series, n_steps), dtype=bool)
        for t in range(n_steps):
            observed[rng.choice(n_series, size=count, replace=False), t] = True
    else:
        observed = rng.random((n_series, n_steps)) < nnz_fraction
    return SparsityMask(
        observed=observed,
        kind="unstructured",
        params={"nnz_fraction": nnz_fraction, "exact_per_column": exact_per_column},
        seed=seed,
    )


def gen_structured_mask(n_series, n_steps, arrival_rate, departure_rate, seed):
    """Per-row on/off chain with geometric holding times.

    Rows start observed; each step an observed row goes missing with
    probability ``arrival_rate`` and a missing row recovers with probability
    ``departure_rate`` (rates are the success chances of the geometric
    holding-time distributions). A rate of exactly one is allowed: a unit
    departure rate makes every outage last a single step.
    """
    for name, rate in (("arrival_rate", arrival_rate), ("departure_rate", departure_rate)):
        if not 0 < rate <= 1:
            raise ValueError(f"{name} must be in (0, 1]")
    rng = np.random.default_rng(seed)
    coins = rng.random((n_series, n_steps))
    observed = np.empty((n_series, n_steps), dtype=bool)
    state = np.ones(n_series, dtype=bool)
    observed[:, 0] = state
    for t in range(1, n_steps):
        fail = state & (coins[:, t] < arrival_rate)
        recover = ~state & (coins[:, t] < departure_rate)
        state = (state & ~fail) | recover
        observed[:, t] = state
    return SparsityMask(
        observed=observed,
        kind="structured",
        params={"arrival_rate": arrival_rate, "departure_rate": departure_rate},
        seed=seed,
    )


def mask_from_descriptor(descriptor, n_series, n_steps):
    """Regenerate a mask from its stored descriptor."""
    kind = descriptor["kind"]
    params = descriptor["params"]
    seed = descriptor["seed"]
    if kind == "unstructured":
        return gen_unstructured_mask(n_series, n_steps, params["nnz_fraction"], seed,
                                     exact_per_column=params.get("exact_per_column", False))
    if kind == "structured":
        return gen_structured_mask(n_series, n_steps, params["arrival_rate"],
                                   params["departure_rate"], seed)
    if kind == "full":
        return full_mask(n_series, n_steps)
    raise ValueError(f"unknown mask kind {kind!r}")


def full_mask(n_series, n_steps):
    return SparsityMask(observed=np.ones((n_series, n_steps), dtype=bool),
                        kind="full", params={}, seed=0)


def gen_synthetic(n_series, n_factors, ar_order, theta_star, noise_scales, n_steps,
                  seed, burn_in=200, return_latents=False):
    """Simulate the generative model: a slowly drifting coefficient matrix, an
    AR latent process, and a noisy low-rank observation, rescaled to max 1.

    ``noise_scales`` is (coefficient-drift, latent-innovation, observation)
    and each noise term is uniform on [-s, s], keeping the data bounded.
    ``burn_in`` latent steps are discarded before recording so the stream
    starts in the stationary regime rather than in the init transient.
    Trajectories exceeding 1e6 in magnitude abort with an error since that
    indicates non-stationary AR coefficients.
    """
    theta = np.asarray(theta_star, dtype=float)
    if theta.shape != (ar_order,):
        raise ValueError("theta_star must have one entry per lag")
    s_u, s_v, s_x = (float(s) for s in noise_scales)
    if min(s_u, s_v, s_x) < 0:
        raise ValueError("noise scales must be nonnegative")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(n_factors)
    u = rng.uniform(-1.0, 1.0, (n_factors, n_series)) * scale
    lags = [rng.uniform(-0.5, 0.5, n_factors) for _ in range(ar_order)]  # v_0, v_{-1}, ...
    x = np.empty((n_series, n_steps))
    v_path = np.empty((n_factors, n_steps))
    for step in range(burn_in + n_steps):
        v = sum(theta[k] * lags[k] for k in range(ar_order))
        if s_v:
            v = v + rng.uniform(-s_v, s_v, n_factors)
        if float(np.max(np.abs(v))) > 1e6:
            raise ValueError("latent trajectory overflow: theta_star is not stationary")
        lags = [v] + lags[:-1]
        if step < burn_in:
            continue
        t = step - burn_in
        if s_u:
            u = u + rng.uniform(-s_u, s_u, (n_factors, n_series))
        col = u.T @ v
        if s_x:
            col = col + rng.uniform(-s_x, s_x, n_series)
        x[:, t] = col
        v_path[:, t] = v
    top = float(np.max(np.abs(x)))
    if top > 0:
        x = x / top
    matrix = SeriesMatrix(values=x, scale=top if top > 0 else 1.0)
    if return_latents:
        return matrix, v_path
    return matrix


@dataclass(frozen=True)
class StoredRecord:
    """Row of the persisted per-step record table."""

    t: int
    n_observed: int
    abs_error_sum: float
    forecast_checksum: float


def _format_float(x):
    return format(float(x), ".17g")


def _sidecar_path(path):
    return Path(str(path) + ".meta.json")


def write_results(records, metadata, path):
    """Persist per-step records as a delimited table plus a JSON metadata sidecar.

    The table keeps 17 significant digits so a write/read/write cycle is
    byte-identical. ``records`` may be live forecast records (the checksum is
    the forecast-vector sum) or previously read rows.
    """
    path = Path(path)
    lines = ["t,n_observed,abs_error_sum,forecast_checksum"]
    for rec in records:
        checksum = (rec.forecast_checksum if isinstance(rec, StoredRecord)
                    else float(np.sum(rec.x_hat)))
        lines.append(",".join([
            str(int(rec.t)),
            str(int(rec.n_observed)),
            _format_float(rec.abs_error_sum),
            _format_float(checksum),
        ]))
    try:
        path.write_text("\n".join(lines) + "\n")
        _sidecar_path(path).write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc


def read_results(path):
    """Read back a persisted record table and its metadata sidecar."""
    path = Path(path)
    try:
        text = path.read_text()
        metadata = json.loads(_sidecar_path(path).read_text())
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != "t,n_observed,abs_error_sum,forecast_checksum":
        raise IngestionError(f"{path}: missing or unexpected header row")
    records = []
    for ln in lines[1:]:
        t, n_obs, err, checksum = ln.split(",")
        records.append(StoredRecord(
            t=int(t), n_observed=int(n_obs),
            abs_error_sum=float(err), forecast_checksum=float(checksum),
        ))
    return records, metadata


def write_matrix(matrix, path, metadata=None):
    """Write a series matrix as a plain delimited table (one row per series)."""
    path = Path(path)
    rows = (",".join(_format_float(v) for v in row) for row in matrix.values)
    path.write_text("\n".join(rows) + "\n")
    if metadata is not None:
        _sidecar_path(path).write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n")


def write_mask(mask, path):
    path = Path(path)
    rows = (",".join("1" if v else "0" for v in row) for row in mask.observed)
    path.write_text("\n".join(rows) + "\n")
    _sidecar_path(path).write_text(json.dumps(mask.descriptor(), sort_keys=True, indent=2) + "\n")


def read_mask(path):
    values = load_matrix(path).values
    descriptor_path = _sidecar_path(path)
    kind, params, seed = "file", {}, 0
    if descriptor_path.exists():
        descriptor = json.loads(descriptor_path.read_text())
        kind = descriptor.get("kind", "file")
        params = descriptor.get("params", {})
        seed = descriptor.get("seed", 0)
    return SparsityMask(observed=values != 0, kind=kind, params=params, seed=seed)
