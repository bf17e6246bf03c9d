"""One-vs-rest L2-regularized logistic regression, trained by full-batch descent.

Each class ``c`` minimizes

    f(w, b) = 0.5 * ||w||^2 + C * sum_n s_n * log(1 + exp(-y_n (x_n . w + b)))

with ``y_n = +1`` for class ``c`` and ``-1`` otherwise, ``s_n`` the sample
weights, and the bias left unregularized. Training starts from zero.

Step schedule: the first step is ``1 / L`` with
``L = 1 + C / 4 * sum_n s_n (||x_n||^2 + 1)``, an upper bound on the
curvature. An accepted step multiplies the step size by 1.5. A step that
would raise ``f`` is rejected and retried at half the size, so ``f``
never increases from one epoch to the next.
"""

import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_positive, check_seed
from .exceptions import DataError, ParseError
from .vectors import LabeledDataset, SparseVector, format_value

__all__ = [
    "LinearModel",
    "objective",
    "train",
    "predict",
    "predict_dataset",
    "evaluate_accuracy",
    "format_model",
    "parse_model",
    "OneVsRestLogisticRegression",
]

GROWTH = 1.5
MAX_HALVINGS = 60


@dataclass(frozen=True, eq=False)
class LinearModel:
    classes: np.ndarray  # sorted class ids
    weights: np.ndarray  # (n_classes, dim)
    bias: np.ndarray  # (n_classes,)
    C: float
    epochs: int = 0
    seed: int = 0
    # per-class objective after each epoch, kept for diagnostics
    history: tuple = ()

    @property
    def dim(self):
        return self.weights.shape[1]

    @property
    def num_classes(self):
        return self.classes.size

    def scores(self, X):
        X = _as_matrix(X, self.dim)
        return np.asarray(X @ self.weights.T) + self.bias


def _as_matrix(X, dim):
    if isinstance(X, LabeledDataset):
        if X.dim != dim:
            raise DataError(f"dataset dimension {X.dim} != model dimension {dim}")
        return X.to_csr()
    if isinstance(X, SparseVector):
        if X.dim != dim:
            raise DataError(f"vector dimension {X.dim} != model dimension {dim}")
        return sp.csr_matrix((X.values, X.indices - 1, [0, X.nnz]), shape=(1, dim))
    if X.shape[1] != dim:
        raise DataError(f"feature dimension {X.shape[1]} != model dimension {dim}")
    return X


def objective(w, b, X, y, s, C, XT=None):
    """Loss and gradient ``(f, grad_w, grad_b)`` for one binary problem.

    ``XT`` optionally supplies ``X.T`` in a row-major layout.
    """
    margin = y * (X @ w + b)
    loss = 0.5 * np.dot(w, w) + C * np.dot(s, np.logaddexp(0.0, -margin))
    coef = -C * s * y * expit(-margin)
    grad_w = w + (X.T if XT is None else XT) @ coef
    grad_b = coef.sum()
    return loss, grad_w, grad_b


def _fit_binary(X, XT, y, s, C, epochs, step0):
    w = np.zeros(X.shape[1])
    b = 0.0
    f, gw, gb = objective(w, b, X, y, s, C, XT)
    step = step0
    history = [f]
    for _ in range(epochs):
        for _ in range(MAX_HALVINGS):
            w_new = w - step * gw
            b_new = b - step * gb
            f_new, gw_new, gb_new = objective(w_new, b_new, X, y, s, C, XT)
            if f_new <= f:
                break
            step *= 0.5
        else:
            break  # no decrease at any step size: stationary to machine precision
        w, b, f, gw, gb = w_new, b_new, f_new, gw_new, gb_new
        history.append(f)
        step *= GROWTH
    return w, b, history


def _fit_arrays(X, labels, C, epochs, seed, sample_weight=None):
    C = float(check_positive(C, "C"))
    epochs = check_positive(epochs, "epochs", integer=True)
    seed = check_seed(seed)
    X = sp.csr_matrix(X, dtype=np.float64)
    labels = np.asarray(labels).reshape(-1)
    if X.shape[0] != labels.size:
        raise DataError("features and labels have different lengths")
    if X.shape[0] < 2:
        raise DataError("training needs at least 2 records")
    classes = np.unique(labels)
    if classes.size < 2:
        raise DataError(f"training needs at least 2 classes, got only {classes.tolist()}")
    s = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if s.shape != (X.shape[0],) or np.any(s < 0) or not np.all(np.isfinite(s)):
        raise DataError("sample_weight must be finite, nonnegative and one per record")
    row_sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
    step0 = 1.0 / (1.0 + 0.25 * C * np.dot(s, row_sq + 1.0))

    XT = X.T.tocsr()
    weights = np.empty((classes.size, X.shape[1]))
    bias = np.empty(classes.size)
    history = []
    for c, cls in enumerate(classes):
        y = np.where(labels == cls, 1.0, -1.0)
        weights[c], bias[c], h = _fit_binary(X, XT, y, s, C, epochs, step0)
        history.append(tuple(h))
    return LinearModel(classes, weights, bias, C, epochs, seed, tuple(history))


def train(features, C=1.0, epochs=200, seed=0, sample_weight=None):
    """Fit a one-vs-rest model on a :class:`LabeledDataset`.

    Descent starts from zero and is deterministic, so ``seed`` only
    records provenance.
    """
    return _fit_arrays(features.to_csr(), features.labels, C, epochs, seed, sample_weight)


def _argmax_labels(m, scores):
    # np.argmax returns the first maximum; classes are sorted, so ties go to the smallest id
    return m.classes[np.argmax(scores, axis=1)]


def predict(m, x):
    """Class id with the highest score for one :class:`SparseVector`."""
    return int(_argmax_labels(m, m.scores(x))[0])


def predict_dataset(m, ds):
    return _argmax_labels(m, m.scores(ds))


def evaluate_accuracy(m, ds):
    return float(np.mean(predict_dataset(m, ds) == ds.labels))


def format_model(m):
    out = io.StringIO()
    classes = ",".join(str(int(c)) for c in m.classes)
    out.write(f"LINEAR1 classes={classes} dim={m.dim} C={m.C!r} epochs={m.epochs} seed={m.seed}\n")
    for cls, w, b in zip(m.classes.tolist(), m.weights, m.bias.tolist()):
        nz = np.flatnonzero(w)
        cells = "".join(f" {i + 1}:{format_value(w[i])}" for i in nz)
        out.write(f"{cls} {format_value(b)}{cells}\n")
    return out.getvalue()


def parse_model(text):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("LINEAR1 "):
        raise ParseError("missing LINEAR1 header", 1)
    try:
        kv = dict(f.split("=", 1) for f in lines[0].split()[1:])
        classes = np.array([int(c) for c in kv["classes"].split(",")], dtype=np.int64)
        dim, C = int(kv["dim"]), float(kv["C"])
        epochs, seed = int(kv.get("epochs", 0)), int(kv.get("seed", 0))
    except (KeyError, ValueError):
        raise ParseError("malformed model header", 1) from None
    if len(lines) != classes.size + 1:
        raise ParseError(f"expected {classes.size} weight rows", len(lines))
    weights = np.zeros((classes.size, dim))
    bias = np.zeros(classes.size)
    for c, line in enumerate(lines[1:]):
        tokens = line.split()
        try:
            cls = int(tokens[0])
            bias[c] = float(tokens[1])
            for tok in tokens[2:]:
                i, v = tok.split(":")
                weights[c, int(i) - 1] = float(v)
        except (ValueError, IndexError):
            raise ParseError("malformed weight row", c + 2) from None
        if cls != classes[c]:
            raise ParseError("weight rows out of class order", c + 2)
    return LinearModel(classes, weights, bias, C, epochs, seed)


class OneVsRestLogisticRegression(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`train` for arrays and sparse matrices.

    Parameters
    ----------
    C : float, default=1.0
    epochs : int, default=200
    seed : int, default=0
    """

    def __init__(self, C=1.0, epochs=200, seed=0):
        self.C = C
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y, accept_sparse="csr")
        self.model_ = _fit_arrays(X, y, self.C, self.epochs, self.seed, sample_weight)
        self.classes_ = self.model_.classes
        self.coef_ = self.model_.weights
        self.intercept_ = self.model_.bias
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self)
        X = check_array(X, accept_sparse="csr")
        return self.model_.scores(X)

    def predict(self, X):
        return _argmax_labels(self.model_, self.decision_function(X))
