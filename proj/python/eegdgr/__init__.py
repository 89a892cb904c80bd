"""EEG motor-imagery classifier: CSP filters and a learnable channel graph feeding a small CNN."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import evaluate_json as _evaluate_json
from ._core import latency_json as _latency_json

__version__ = "0.1.0"


def evaluate(model, epochs):
    """Confusion matrix, per-class and macro P/R/F1, and one-vs-rest AUC as a dict."""
    return _json.loads(_evaluate_json(model, epochs))


def latency(model, sampling_rate, runs=20):
    """Per-stage timing of one window: acquisition, csp+dgr, cnn and total."""
    return _json.loads(_latency_json(model, sampling_rate, runs))
