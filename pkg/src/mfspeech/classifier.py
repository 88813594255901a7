"""One-vs-one linear SVM on standardized features.

Each pairwise problem is solved in the dual by SMO with second-order working
set selection (maximal gain pair), fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .audio_io import EmotionLabel
from .errors import (
    ClassMismatch,
    InputError,
    InsufficientSamples,
    NonFiniteFeature,
    SingleClass,
    ZeroVarianceFeature,
)

MODEL_VERSION = 1
LABELS = tuple(EmotionLabel)


def _matrix(data):
    """Feature matrix and labels from FeatureVectors or ``(X, y)``."""
    if isinstance(data, tuple) and len(data) == 2:
        X, y = data
        X = np.asarray(X, dtype=np.float64)
        y = list(y)
    else:
        X = np.array([fv.as_array() for fv in data], dtype=np.float64).reshape(-1, 3)
        y = [fv.label for fv in data]
    if X.ndim != 2:
        raise InputError("feature matrix must be 2-D")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("features contain NaN or infinity")
    return X, y


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.means) / self.stds


def standardize(train):
    """Fit per-feature z-scores (population deviation) on ``train``.

    Returns ``(standardizer, transformed)``.
    """
    X, _ = _matrix(train) if not isinstance(train, np.ndarray) else (np.asarray(train, float), None)
    if X.shape[0] < 2:
        raise InputError("standardization needs at least 2 vectors")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    bad = np.flatnonzero(~(stds > 0))
    if bad.size:
        raise ZeroVarianceFeature(f"feature column(s) {bad.tolist()} have zero variance")
    st = Standardizer(means, stds)
    return st, st.transform(X)


@dataclass(frozen=True, eq=False)
class BinarySvm:
    """``class_a`` is the +1 side of ``w . z + b``."""

    class_a: EmotionLabel
    class_b: EmotionLabel
    weights: np.ndarray
    bias: float
    dual: np.ndarray | None = field(default=None, repr=False)
    iterations: int = 0
    kkt_gap: float = 0.0

    def decision(self, Z):
        return np.asarray(Z) @ self.weights + self.bias


def smo(K, y, C, tol=1e-6, max_iter=None):
    """Solve ``max sum(a) - a'Qa/2`` s.t. ``0 <= a <= C``, ``y'a = 0``.

    ``Q = y y' * K``. Returns ``(alpha, bias, iterations, gap)`` where ``gap``
    is the final maximal KKT violation ``m(a) - M(a)``.
    """
    n = y.size
    if max_iter is None:
        max_iter = max(100_000, 200 * n)
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of a'Qa/2 - sum(a)
    diag = np.diag(Q).copy()
    tau = 1e-12
    it = 0
    gap = np.inf
    while it < max_iter:
        # I_up: can move along +y ; I_low: can move along -y
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
            break
        minus_yg = -y * grad
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        g_max = minus_yg[i]
        g_min = np.min(minus_yg[low])
        gap = g_max - g_min
        if gap <= tol:
            break
        # second-order choice of j among violating low candidates
        cand = low & (minus_yg < g_max)
        b = g_max - minus_yg[cand]
        a = diag[i] + diag[cand] - 2.0 * y[i] * y[cand] * Q[i, cand]
        a = np.where(a > 0, a, tau)
        j = int(np.flatnonzero(cand)[np.argmax(b * b / a)])

        # update the pair along the feasible direction
        quad = diag[i] + diag[j] - 2.0 * y[i] * y[j] * Q[i, j]
        if quad <= 0:
            quad = tau
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            ai, aj = alpha[i] + delta, alpha[j] + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            s = alpha[i] + alpha[j]
            ai, aj = alpha[i] - delta, alpha[j] + delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        di, dj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * di + Q[:, j] * dj
        it += 1

    # bias = -rho; rho averages y*grad over free vectors, else the midpoint
    # of the interval allowed by the bounded ones
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yg[free]))
    else:
        at_upper = alpha >= C
        to_ub = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        ub = float(np.min(yg[to_ub])) if to_ub.any() else np.inf
        lb = float(np.max(yg[~to_ub])) if (~to_ub).any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    bias = -rho
    return alpha, float(bias), it, float(gap)


def train_binary(Z, y, class_a, class_b, C=1.0, tol=1e-6, max_iter=None) -> BinarySvm:
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    K = Z @ Z.T
    alpha, bias, it, gap = smo(K, y, C, tol, max_iter)
    w = (alpha * y) @ Z
    return BinarySvm(class_a, class_b, w, bias, alpha, it, gap)


@dataclass(frozen=True, eq=False)
class SvmModel:
    classes: tuple
    standardizer: Standardizer
    pairwise: tuple
    C: float

    def decisions(self, X):
        Z = self.standardizer.transform(np.atleast_2d(X))
        return np.column_stack([p.decision(Z) for p in self.pairwise])

    def to_dict(self):
        return {
            "version": MODEL_VERSION,
            "classes": [c.value for c in self.classes],
            "standardizer": {
                "means": self.standardizer.means.tolist(),
                "stds": self.standardizer.stds.tolist(),
            },
            "pairwise": [
                {
                    "class_a": p.class_a.value,
                    "class_b": p.class_b.value,
                    "weights": p.weights.tolist(),
                    "bias": p.bias,
                }
                for p in self.pairwise
            ],
            "C": self.C,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InputError("model must be a JSON object")
        try:
            if d.get("version") != MODEL_VERSION:
                raise InputError(f"unsupported model version {d.get('version')!r}")
            classes = tuple(EmotionLabel.parse(c) for c in d["classes"])
            st = Standardizer(
                np.asarray(d["standardizer"]["means"], dtype=np.float64),
                np.asarray(d["standardizer"]["stds"], dtype=np.float64),
            )
            pairs = tuple(
                BinarySvm(
                    EmotionLabel.parse(p["class_a"]),
                    EmotionLabel.parse(p["class_b"]),
                    np.asarray(p["weights"], dtype=np.float64),
                    float(p["bias"]),
                )
                for p in d["pairwise"]
            )
            return cls(classes, st, pairs, float(d["C"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed model: {exc}") from None

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"model file is not JSON: {exc}") from None


def svm_train(data, C=1.0, tol=1e-6, max_iter=None) -> SvmModel:
    """Standardize, then train one binary SVM per class pair (label order)."""
    X, y = _matrix(data)
    if any(lab is None for lab in y):
        raise InputError("every training vector needs a label")
    classes = tuple(c for c in LABELS if c in set(y))
    if len(classes) < 2:
        raise SingleClass("training data must contain at least two classes")
    st, Z = standardize(X)
    labels = np.array([lab.index for lab in y])
    pairs = []
    for ca, cb in combinations(classes, 2):
        sel = (labels == ca.index) | (labels == cb.index)
        yy = np.where(labels[sel] == ca.index, 1.0, -1.0)
        pairs.append(train_binary(Z[sel], yy, ca, cb, C, tol, max_iter))
    return SvmModel(classes, st, tuple(pairs), float(C))


def _vote(model, d):
    votes = {c: 0 for c in model.classes}
    margin = {c: 0.0 for c in model.classes}
    for p, v in zip(model.pairwise, d):
        if v > 0:
            votes[p.class_a] += 1
        elif v < 0:
            votes[p.class_b] += 1
        margin[p.class_a] += v
        margin[p.class_b] -= v
    return min(model.classes, key=lambda c: (-votes[c], -margin[c], c.index))


def svm_predict(model: SvmModel, fv) -> EmotionLabel:
    """Majority vote; ties go to the larger summed signed margin, then to the
    earlier label."""
    x = fv.as_array() if hasattr(fv, "as_array") else np.asarray(fv, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteFeature("cannot classify a non-finite feature vector")
    return _vote(model, model.decisions(x)[0])


def svm_predict_many(model: SvmModel, X):
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("cannot classify non-finite feature vectors")
    return [_vote(model, d) for d in model.decisions(X)]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true labels, columns predictions, both in label order."""

    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def accuracy(self):
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def to_dict(self):
        return {
            "labels": [lab.value for lab in LABELS],
            "counts": self.counts.tolist(),
            "accuracy": self.accuracy,
        }

    def table(self):
        names = [lab.value for lab in LABELS]
        width = max(len(n) for n in names) + 2
        lines = ["true \\ pred".ljust(width) + "".join(n.rjust(width) for n in names)]
        for name, row in zip(names, self.counts):
            lines.append(name.ljust(width) + "".join(str(v).rjust(width) for v in row))
        lines.append(f"accuracy: {self.accuracy:.4f} ({np.trace(self.counts)}/{self.total})")
        return "\n".join(lines)


def confusion_from(true, pred) -> ConfusionMatrix:
    counts = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    for t, p in zip(true, pred):
        counts[t.index, p.index] += 1
    return ConfusionMatrix(counts)


def evaluate(model: SvmModel, test) -> ConfusionMatrix:
    X, y = _matrix(test)
    if X.shape[0] == 0:
        raise InputError("evaluation set is empty")
    if any(lab is None for lab in y):
        raise InputError("every evaluation vector needs a label")
    unknown = sorted({lab.value for lab in y} - {c.value for c in model.classes})
    if unknown:
        raise ClassMismatch(f"labels {unknown} are not among the model classes")
    return confusion_from(y, svm_predict_many(model, X))


@dataclass(frozen=True, eq=False)
class CrossValidation:
    mean: float
    std: float
    accuracies: np.ndarray
    matrices: list

    def to_dict(self):
        return {
            "mean_accuracy": self.mean,
            "std_accuracy": self.std,
            "accuracies": self.accuracies.tolist(),
            "runs": [m.to_dict() for m in self.matrices],
        }


def cross_validate(data, runs=10, test_per_class=12, seed=0, C=1.0) -> CrossValidation:
    """Repeated random per-class hold-out.

    Each run draws ``test_per_class`` vectors of every class without
    replacement as the test set and trains on the rest. Returns the mean and
    population standard deviation of the per-run accuracies.
    """
    X, y = _matrix(data)
    if any(lab is None for lab in y):
        raise InputError("cross-validation needs labelled vectors")
    labels = np.array([lab.index for lab in y])
    classes = [c for c in LABELS if np.any(labels == c.index)]
    if len(classes) < 2:
        raise SingleClass("cross-validation needs at least two classes")
    for c in classes:
        if np.sum(labels == c.index) <= test_per_class:
            raise InsufficientSamples(
                f"class {c.value} has {int(np.sum(labels == c.index))} samples; "
                f"need more than {test_per_class}"
            )
    rng = np.random.default_rng(seed)
    matrices = []
    for _ in range(runs):
        test = np.zeros(labels.size, dtype=bool)
        for c in classes:
            idx = np.flatnonzero(labels == c.index)
            test[rng.choice(idx, size=test_per_class, replace=False)] = True
        train_y = [y[i] for i in np.flatnonzero(~test)]
        test_y = [y[i] for i in np.flatnonzero(test)]
        model = svm_train((X[~test], train_y), C)
        matrices.append(confusion_from(test_y, svm_predict_many(model, X[test])))
    acc = np.array([m.accuracy for m in matrices])
    return CrossValidation(float(acc.mean()), float(acc.std()), acc, matrices)
