"""Intrusion detection for CAN bus logs from message-sequence graphs.

Each window of consecutive frames becomes a graph whose weighted edges count
how often one PID directly follows another. Comparing the graphs of
neighbouring windows yields a similarity series, and three detectors read
that series: a fixed threshold, a Bayesian change point, and an LSTM.
"""

__version__ = "0.1.0"

from .can_log import CanFrame, FrameWindow, load_log, parse_line, read_log, windowize, write_log
from .detect import (
    ChangePointEstimate,
    CpdConfig,
    calibrate_threshold,
    change_point_detect,
    strength_of_change,
    threshold_detect,
)
from .evaluation import DetectionReport, score, welch_t_test
from .inject import InjectionSpec, SyntheticTrafficSpec, generate_benign, inject_bursts, inject_frames, schedule_matrix
from .msg_graph import MessageSequenceGraph, compute_msg, edge_vectors, to_dot
from .seq_model import LstmModel, ModelConfig, build_constructed_dataset, predict, train
from .similarity import Metric, SimilaritySeries, cosine_similarity, pearson_correlation, series_from_pids, similarity_series

__all__ = [
    "CanFrame",
    "ChangePointEstimate",
    "CpdConfig",
    "DetectionReport",
    "FrameWindow",
    "InjectionSpec",
    "LstmModel",
    "MessageSequenceGraph",
    "Metric",
    "ModelConfig",
    "SimilaritySeries",
    "SyntheticTrafficSpec",
    "build_constructed_dataset",
    "calibrate_threshold",
    "change_point_detect",
    "compute_msg",
    "cosine_similarity",
    "edge_vectors",
    "generate_benign",
    "inject_bursts",
    "inject_frames",
    "load_log",
    "parse_line",
    "pearson_correlation",
    "predict",
    "read_log",
    "schedule_matrix",
    "score",
    "series_from_pids",
    "similarity_series",
    "strength_of_change",
    "threshold_detect",
    "to_dot",
    "train",
    "welch_t_test",
    "windowize",
    "write_log",
]
