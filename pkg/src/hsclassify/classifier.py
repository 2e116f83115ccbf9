"""Trainable multinomial softmax head over encoder outputs.

Plain mini-batch gradient descent on mean cross-entropy plus an L2 weight
penalty. Weights start at zero (the objective is convex for a linear head),
shuffling is driven by the config seed, and the returned parameters are the
snapshot from the best validation epoch.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadK, DimensionMismatch, EmptyInput, IndexOutOfRange

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 0
    l2_penalty: float = 1e-4

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")


@dataclass
class TrainReport:
    """Per-epoch training curve and the selected epoch.

    ``best_epoch`` is the argmax of validation top-1 accuracy with ties going
    to the earliest epoch; when no validation data was supplied the final
    epoch is kept and all accuracies read 0.0.
    """

    losses: list[float] = field(default_factory=list)
    val_accuracies: list[float] = field(default_factory=list)
    best_epoch: int = 0


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy(true_label_index: int, probabilities) -> float:
    """-ln of the true class probability, floored at 1e-12 inside the log."""
    probabilities = np.asarray(probabilities, dtype=float)
    if not 0 <= true_label_index < probabilities.shape[0]:
        raise IndexOutOfRange(
            f"label index {true_label_index} outside 0..{probabilities.shape[0] - 1}"
        )
    return float(-np.log(max(probabilities[true_label_index], _LOG_FLOOR)))


def mean_loss_and_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    inputs: np.ndarray,
    label_indices: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)*||W||^2 and its gradients w.r.t. W and bias."""
    n = inputs.shape[0]
    probs = _softmax(inputs @ weights + bias)
    picked = probs[np.arange(n), label_indices]
    loss = float(-np.log(np.maximum(picked, _LOG_FLOOR)).mean())
    loss += 0.5 * l2_penalty * float((weights**2).sum())

    delta = probs
    delta[np.arange(n), label_indices] -= 1.0
    grad_w = inputs.T @ delta / n + l2_penalty * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


class SoftmaxClassifier:
    """Linear head: softmax(x @ W + b) over a bound label list."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray, labels: Sequence[str]):
        weights = np.asarray(weights, dtype=float)
        bias = np.asarray(bias, dtype=float)
        if weights.ndim != 2 or bias.ndim != 1:
            raise DimensionMismatch("weights must be d x C, bias length C")
        if weights.shape[1] != bias.shape[0] or weights.shape[1] != len(labels):
            raise DimensionMismatch("class counts of weights, bias and labels differ")
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise ValueError("parameters must be finite")
        self.weights = weights
        self.bias = bias
        self.labels = list(labels)

    @property
    def input_dimension(self) -> int:
        return self.weights.shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights.shape[1]

    def logits(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_dimension,):
            raise DimensionMismatch(
                f"input length {x.shape} does not match d={self.input_dimension}"
            )
        return x @ self.weights + self.bias

    def predict_proba(self, x) -> np.ndarray:
        return _softmax(self.logits(x))

    def to_dict(self) -> dict:
        return {
            "dimension": self.input_dimension,
            "num_classes": self.num_classes,
            "labels": self.labels,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SoftmaxClassifier":
        return cls(np.array(data["weights"]), np.array(data["bias"]), data["labels"])

    def save(self, path: str | Path, config: TrainConfig | None = None) -> None:
        payload = self.to_dict()
        if config is not None:
            payload["train_config"] = asdict(config)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, separators=(",", ":"))
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "SoftmaxClassifier":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def top_k(probabilities, k: int) -> list[tuple[int, float]]:
    """k classes by descending probability; exact ties go to the lower index."""
    probabilities = np.asarray(probabilities, dtype=float)
    if not 1 <= k <= probabilities.shape[0]:
        raise BadK(f"k={k} outside 1..{probabilities.shape[0]}")
    order = sorted(range(probabilities.shape[0]), key=lambda i: (-probabilities[i], i))
    return [(i, float(probabilities[i])) for i in order[:k]]


def _top1_accuracy(weights, bias, inputs, label_indices) -> float:
    if inputs.shape[0] == 0:
        return 0.0
    predictions = np.argmax(inputs @ weights + bias, axis=1)
    return float((predictions == label_indices).mean())


def train(
    inputs: Sequence[np.ndarray],
    labels: Sequence[int],
    val_inputs: Sequence[np.ndarray],
    val_labels: Sequence[int],
    config: TrainConfig,
    class_labels: Sequence[str],
) -> tuple[SoftmaxClassifier, TrainReport]:
    """Fit a softmax head; returns the parameters from the best epoch.

    ``labels`` are indices into ``class_labels``. Validation labels may use
    the sentinel -1 for cases whose gold label is outside the class list;
    those always count as misclassified.
    """
    if len(inputs) == 0:
        raise EmptyInput("no training inputs")
    if len(inputs) != len(labels):
        raise DimensionMismatch(f"{len(inputs)} inputs vs {len(labels)} labels")
    if len(val_inputs) != len(val_labels):
        raise DimensionMismatch(f"{len(val_inputs)} val inputs vs {len(val_labels)} val labels")

    x = np.asarray(inputs, dtype=float)
    y = np.asarray(labels, dtype=int)
    num_classes = len(class_labels)
    if num_classes < 1:
        raise EmptyInput("class label list is empty")
    if y.min(initial=0) < 0 or y.max(initial=0) >= num_classes:
        raise IndexOutOfRange("training label index outside the class list")
    if x.ndim != 2:
        raise DimensionMismatch("inputs must share one vector length")
    dim = x.shape[1]

    has_val = len(val_inputs) > 0
    if has_val:
        xv = np.asarray(val_inputs, dtype=float)
        yv = np.asarray(val_labels, dtype=int)
        if xv.shape[1] != dim:
            raise DimensionMismatch("validation vectors have a different length")
    else:
        xv = np.zeros((0, dim))
        yv = np.zeros(0, dtype=int)

    rng = np.random.default_rng(config.seed)
    weights = np.zeros((dim, num_classes))
    bias = np.zeros(num_classes)

    report = TrainReport()
    best_acc = -1.0
    best = (weights.copy(), bias.copy())

    for epoch in range(config.epochs):
        order = rng.permutation(len(x))
        for start in range(0, len(x), config.batch_size):
            batch = order[start : start + config.batch_size]
            _, grad_w, grad_b = mean_loss_and_gradient(
                weights, bias, x[batch], y[batch], config.l2_penalty
            )
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b

        loss, _, _ = mean_loss_and_gradient(weights, bias, x, y, config.l2_penalty)
        report.losses.append(loss)
        accuracy = _top1_accuracy(weights, bias, xv, yv) if has_val else 0.0
        report.val_accuracies.append(accuracy)
        if has_val and accuracy > best_acc:
            best_acc = accuracy
            best = (weights.copy(), bias.copy())
            report.best_epoch = epoch

    if not has_val:
        best = (weights.copy(), bias.copy())
        report.best_epoch = config.epochs - 1

    classifier = SoftmaxClassifier(best[0], best[1], class_labels)
    return classifier, report
