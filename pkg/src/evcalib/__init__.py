"""Per-pixel contrast threshold and bias calibration for event cameras."""
from .core import (CalibrationMap, Event, EventStream, IntensityFrame, LogFrame, PixelClass,
                   classify_map, classify_pixel, exp_intensity, log_intensity)
from .ingest import Dataset, load_dataset, read_calibration_map, write_calibration_map
from .metrics import psnr, rmse, ssim
from .reconstruct import integrate, integrate_uncalibrated
from .simulate import SimConfig, SpecialPixelSpec, inject_special_pixels, simulate_events

__version__ = "0.1.0"
