"""Forecasting toolkit for 5-minute index bars.

Implements a hybrid conv/transformer/LSTM forecaster (ctlnet) with its
ablation baselines (lstm, cnn_lstm, tclnet) on top of a minimal tape-based
autodiff engine, plus the OHLCV data pipeline, SGD training loop, and a CLI.
"""

from ctlnet.autograd import Tape, Tensor, backward

__version__ = "0.1.0"

__all__ = ["Tape", "Tensor", "backward", "__version__"]
