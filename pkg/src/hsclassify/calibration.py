"""Temperature scaling of classifier logits for calibrated report scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadTemperature, EmptyInput

TEMPERATURE_BOUNDS = (0.05, 20.0)
_LOG_FLOOR = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TemperatureScaler:
    temperature: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise BadTemperature(f"temperature must be finite and positive, got {self.temperature}")

    def probabilities(self, logits) -> np.ndarray:
        return scale(logits, self.temperature)


def scale(logits, temperature: float) -> np.ndarray:
    """softmax(logits / T); preserves the argsort of the logits for any T > 0."""
    if not (math.isfinite(temperature) and temperature > 0):
        raise BadTemperature(f"temperature must be finite and positive, got {temperature}")
    logits = np.asarray(logits, dtype=float) / temperature
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _mean_nll(logits: np.ndarray, labels: np.ndarray, temperature: float) -> float:
    probs = scale(logits, temperature)
    picked = probs[np.arange(logits.shape[0]), labels]
    return float(-np.log(np.maximum(picked, _LOG_FLOOR)).mean())


def fit_temperature(
    validation_logits: Sequence[np.ndarray], labels: Sequence[int], tolerance: float = 1e-4
) -> TemperatureScaler:
    """Pick T minimizing validation NLL by golden-section search on ln T.

    The search runs over ln T in [ln 0.05, ln 20] down to ``tolerance`` on the
    log scale, so the bracket always contains T = 1.
    """
    if len(validation_logits) == 0:
        raise EmptyInput("no validation logits to fit a temperature")
    logits = np.asarray(validation_logits, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if logits.shape[0] != labels.shape[0]:
        raise EmptyInput("logits and labels lengths differ")

    def objective(log_t: float) -> float:
        return _mean_nll(logits, labels, math.exp(log_t))

    low = math.log(TEMPERATURE_BOUNDS[0])
    high = math.log(TEMPERATURE_BOUNDS[1])
    inner_low = high - _INV_PHI * (high - low)
    inner_high = low + _INV_PHI * (high - low)
    f_low = objective(inner_low)
    f_high = objective(inner_high)
    # <= prefers the lower segment on plateaus, e.g. NLL underflowing to 0.
    while high - low > tolerance:
        if f_low <= f_high:
            high, inner_high, f_high = inner_high, inner_low, f_low
            inner_low = high - _INV_PHI * (high - low)
            f_low = objective(inner_low)
        else:
            low, inner_low, f_low = inner_low, inner_high, f_high
            inner_high = low + _INV_PHI * (high - low)
            f_high = objective(inner_high)
    return TemperatureScaler(temperature=math.exp((low + high) / 2.0))
