"""Sparse vectors, the sign-splitting transform and the sparse text format.

Indices are 1-based everywhere, both in files and in memory.

Dataset files use one record per line::

    <label> <idx>:<val> <idx>:<val> ...

with strictly ascending indices. Explicit zeros are dropped on read.
"""

import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import frozen
from .exceptions import DataError, ParseError

__all__ = [
    "SparseVector",
    "TransformedVector",
    "LabeledDataset",
    "transform",
    "split_signs",
    "parse_dataset",
    "write_dataset",
    "load_dataset",
    "save_dataset",
    "format_value",
    "SignSplitter",
]


class SparseVector:
    """Immutable real vector of dimension ``dim`` stored as sorted (index, value) pairs.

    Parameters
    ----------
    dim : int
        Dimension D of the vector.
    indices : array-like of int
        Strictly increasing 1-based indices in ``[1, dim]``.
    values : array-like of float
        Finite, nonzero values aligned with ``indices``.
    """

    __slots__ = ("dim", "indices", "values")

    def __init__(self, dim, indices=(), values=()):
        dim = int(dim)
        if dim < 1:
            raise DataError(f"dimension must be >= 1, got {dim}")
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        val = np.asarray(values, dtype=np.float64).reshape(-1)
        if idx.shape != val.shape:
            raise DataError("indices and values must have the same length")
        if idx.size:
            if idx[0] < 1 or idx[-1] > dim:
                raise DataError(f"indices must lie in [1, {dim}]")
            if np.any(np.diff(idx) <= 0):
                raise DataError("indices must be strictly increasing")
            if not np.all(np.isfinite(val)):
                raise DataError("values must be finite")
            if np.any(val == 0):
                raise DataError("stored values must be nonzero")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "indices", frozen(idx, np.int64))
        object.__setattr__(self, "values", frozen(val, np.float64))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64).reshape(-1)
        nz = np.flatnonzero(dense)
        return cls(dense.size, nz + 1, dense[nz])

    @classmethod
    def from_pairs(cls, dim, pairs):
        pairs = list(pairs)
        return cls(dim, [i for i, _ in pairs], [v for _, v in pairs])

    @property
    def nnz(self):
        return int(self.indices.size)

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices - 1] = self.values
        return out

    def items(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, items={self.items()})"


class TransformedVector(SparseVector):
    """Nonnegative vector of dimension 2D produced by :func:`transform`.

    Every stored value is strictly positive, and for each original
    coordinate at most one of the positions ``2i-1`` / ``2i`` is occupied.
    """

    __slots__ = ()

    def __init__(self, dim, indices=(), values=()):
        super().__init__(dim, indices, values)
        if self.dim % 2:
            raise DataError(f"transformed dimension must be even, got {self.dim}")
        if np.any(self.values <= 0):
            raise DataError("transformed values must be strictly positive")
        # (idx + 1) // 2 recovers the original coordinate
        if np.any(np.diff((self.indices + 1) // 2) == 0):
            raise DataError("both halves of an original coordinate are occupied")

    def power(self, p):
        """Elementwise ``p``-th power (stays a valid transformed vector)."""
        return TransformedVector(self.dim, self.indices, self.values**p)


def transform(u):
    """Split a signed vector into a nonnegative vector of twice the dimension.

    A positive entry ``u_i`` lands at position ``2i-1``, a negative one at
    position ``2i`` with its sign flipped.

    >>> transform(SparseVector.from_dense([-4, 6])).to_dense().tolist()
    [0.0, 4.0, 6.0, 0.0]
    """
    if not isinstance(u, SparseVector):
        raise TypeError(f"expected a SparseVector, got {type(u).__name__}")
    if isinstance(u, TransformedVector):
        raise TypeError("vector is already transformed")
    neg = u.values < 0
    indices = 2 * u.indices - 1 + neg
    return TransformedVector(2 * u.dim, indices, np.abs(u.values))


def split_signs(X):
    """Matrix version of :func:`transform` on an array or sparse matrix.

    Column ``j`` (0-based) of ``X`` maps to columns ``2j`` (positive part)
    and ``2j+1`` (negated negative part) of the result, which is CSR.
    """
    X = sp.csr_matrix(X, dtype=np.float64)
    X.eliminate_zeros()
    X.sort_indices()
    neg = X.data < 0
    indices = 2 * X.indices.astype(np.int64) + neg
    return sp.csr_matrix(
        (np.abs(X.data), indices, X.indptr.copy()),
        shape=(X.shape[0], 2 * X.shape[1]),
    )


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered collection of ``(label, SparseVector)`` records of a common dimension."""

    records: tuple
    dim: int

    def __post_init__(self):
        records = tuple((int(label), vec) for label, vec in self.records)
        if not records:
            raise DataError("empty dataset")
        for n, (_, vec) in enumerate(records, start=1):
            if not isinstance(vec, SparseVector):
                raise DataError(f"record {n}: expected a SparseVector")
            if vec.dim != self.dim:
                raise DataError(f"record {n}: dimension {vec.dim} != dataset dimension {self.dim}")
        object.__setattr__(self, "records", records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, n):
        return self.records[n]

    @property
    def labels(self):
        return np.array([label for label, _ in self.records], dtype=np.int64)

    @property
    def vectors(self):
        return [vec for _, vec in self.records]

    def to_csr(self):
        """Feature matrix of shape (n_records, dim) with 0-based columns."""
        indptr = np.zeros(len(self) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([vec.nnz for vec in self.vectors])
        indices = np.concatenate([vec.indices - 1 for vec in self.vectors])
        data = np.concatenate([vec.values for vec in self.vectors])
        return sp.csr_matrix((data, indices, indptr), shape=(len(self), self.dim))

    @classmethod
    def from_arrays(cls, X, y, dim=None):
        """Build a dataset from a dense/sparse matrix and a label vector."""
        X = sp.csr_matrix(X, dtype=np.float64)
        X.eliminate_zeros()
        X.sort_indices()
        y = np.asarray(y).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise DataError("X and y have different numbers of rows")
        dim = X.shape[1] if dim is None else int(dim)
        records = []
        for n in range(X.shape[0]):
            lo, hi = X.indptr[n], X.indptr[n + 1]
            records.append((int(y[n]), SparseVector(dim, X.indices[lo:hi] + 1, X.data[lo:hi])))
        return cls(tuple(records), dim)


def _parse_label(token, line):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"unparseable label {token!r}", line) from None
    if not value.is_integer():
        raise ParseError(f"label must be an integer class id, got {token!r}", line)
    return int(value)


def parse_dataset(text, dim=None, lenient=False):
    """Parse the sparse ``label idx:val ...`` text format.

    Parameters
    ----------
    text : str, bytes or text file object
    dim : int, optional
        Pin the dimension; defaults to the largest index seen.
    lenient : bool
        Skip blank lines and ``#`` comments instead of rejecting them.

    Returns
    -------
    LabeledDataset
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    if not isinstance(text, str):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("ascii")

    parsed = []
    max_index = 0
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, raw in enumerate(lines, start=1):
        line = raw
        if lenient:
            line = line.split("#", 1)[0]
            if not line.strip():
                continue
        elif not line.strip():
            raise ParseError("blank line", lineno)
        elif line.lstrip().startswith("#"):
            raise ParseError("comment lines are not allowed (use lenient mode)", lineno)
        tokens = line.split()
        label = _parse_label(tokens[0], lineno)
        indices, values = [], []
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(f"malformed feature {tok!r}", lineno)
            try:
                idx = int(idx_s)
            except ValueError:
                raise ParseError(f"unparseable index {idx_s!r}", lineno) from None
            try:
                val = float(val_s)
            except ValueError:
                raise ParseError(f"unparseable number {val_s!r}", lineno) from None
            if idx < 1:
                raise ParseError(f"index {idx} is not 1-based", lineno)
            if idx <= prev:
                raise ParseError("nonascending indices", lineno)
            if not math.isfinite(val):
                raise ParseError(f"non-finite value {val_s!r}", lineno)
            prev = idx
            if val != 0.0:
                indices.append(idx)
                values.append(val)
        max_index = max(max_index, prev)
        parsed.append((lineno, label, indices, values))

    if not parsed:
        raise DataError("empty dataset")
    if dim is None:
        dim = max(max_index, 1)
    elif dim < max_index:
        raise DataError(f"dimension override {dim} is below the largest index {max_index}")
    records = tuple((label, SparseVector(dim, idx, val)) for _, label, idx, val in parsed)
    return LabeledDataset(records, dim)


def format_value(value):
    """Shortest decimal that round-trips to the same double."""
    value = float(value)
    if value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


def write_dataset(ds):
    """Serialize a dataset to ASCII bytes in the sparse line format."""
    out = io.StringIO()
    for label, vec in ds:
        out.write(str(label))
        for i, v in zip(vec.indices.tolist(), vec.values.tolist()):
            out.write(f" {i}:{format_value(v)}")
        out.write("\n")
    return out.getvalue().encode("ascii")


def load_dataset(path, dim=None, lenient=False):
    with open(path, "rb") as fh:
        return parse_dataset(fh.read(), dim=dim, lenient=lenient)


def save_dataset(ds, path):
    with open(path, "wb") as fh:
        fh.write(write_dataset(ds))


class SignSplitter(TransformerMixin, BaseEstimator):
    """Transformer applying the sign split to each row of a feature matrix.

    Output has ``2 * n_features`` nonnegative columns in CSR format.
    """

    def fit(self, X, y=None):
        X = check_array(X, accept_sparse="csr")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, accept_sparse="csr")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but SignSplitter was fitted with {self.n_features_in_}"
            )
        return split_signs(X)
