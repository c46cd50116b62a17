"""Streaming low-rank matrix factorization forecasting for partially observed
high-dimensional time series."""

from .ar import ARState, LatentHistory, lag_matrix, lmmse_batch, lmmse_init, lmmse_solve, lmmse_update, predict_latent
from .baselines import ARFillPredictor, BasePredictor
from .data import (SeriesMatrix, SparsityMask, TableFormat, denormalize, full_mask,
                   gen_structured_mask, gen_synthetic, gen_unstructured_mask, load_matrix,
                   normalize, read_results, write_results)
from .estimators import ARFillForecaster, LastValueForecaster, MatrixFactorizationForecaster
from .experiments import (ELECTRICITY_CONFIG, TRAFFIC_CONFIG, ExperimentConfig, iter_slices,
                          mae, make_predictor, run_experiment, run_sweep)
from .factorization import (FtConstants, ObservationSlice, Priors, fp_step, ft_constants,
                            ft_lambda_u, ft_step, ft_v_exact, naive_step, zt_step)
from .forecaster import ForecastRecord, ForecastStream, SequencingError
from .linalg import SingularMatrixError, SymEig, rank1_reg_solve, real_roots, solve_spd, sym_eig

__version__ = "0.1.0"

__all__ = [
    "ARFillForecaster", "ARFillPredictor", "ARState", "BasePredictor",
    "ELECTRICITY_CONFIG", "ExperimentConfig", "ForecastRecord", "ForecastStream",
    "FtConstants", "LastValueForecaster", "LatentHistory",
    "MatrixFactorizationForecaster", "ObservationSlice", "Priors", "SequencingError",
    "SeriesMatrix", "SingularMatrixError", "SparsityMask", "SymEig", "TableFormat",
    "TRAFFIC_CONFIG", "denormalize", "fp_step", "ft_constants", "ft_lambda_u",
    "ft_step", "ft_v_exact", "full_mask", "gen_structured_mask", "gen_synthetic",
    "gen_unstructured_mask", "iter_slices", "lag_matrix", "lmmse_batch", "lmmse_init",
    "lmmse_solve", "lmmse_update", "load_matrix", "mae", "make_predictor", "naive_step",
    "normalize", "predict_latent", "rank1_reg_solve", "read_results", "real_roots",
    "run_experiment", "run_sweep", "solve_spd", "sym_eig", "write_results", "zt_step",
]
