from .offe import OffEConfig, calibrate_offe, cumulative_fit
from .offei import CalibrationReport, OffEiConfig, RowSet, build_rows, calibrate_offei, interval_sums
from .ols import GridSolution, RegressionRow, solve_grid, solve_pixel_ols
from .onei import OnEiConfig, OnlineCalibrator, run_online

__all__ = [
    "OffEConfig", "calibrate_offe", "cumulative_fit",
    "CalibrationReport", "OffEiConfig", "RowSet", "build_rows", "calibrate_offei", "interval_sums",
    "GridSolution", "RegressionRow", "solve_grid", "solve_pixel_ols",
    "OnEiConfig", "OnlineCalibrator", "run_online",
]
