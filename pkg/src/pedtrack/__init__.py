"""Pedestrian tracking from image sequences and traffic-flow measurement."""

from .calibration import Calibration, TrapConfig, apply_calibration, fit_calibration
from .detection import DetectionParams, FeatureRow, build_descriptor_database
from .imaging import ImageStack, load_image_sequence, median_background
from .metrics import build_tracks, flow_report
from .tracking import NtxyRecord, VoteParams, trace_stack

__version__ = "0.1.0"
