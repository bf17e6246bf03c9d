"""b-bit one-hot encoding of GCWS sketches into sparse binary features.

Hash ``j`` with sample ``i*`` turns into a single 1 at position

    (j - 1) * 2**b + (i* mod 2**b) + 1            (1-based)

so a sketch of ``k`` hashes becomes a vector of length ``2**b * k`` with
exactly ``k`` ones, and the inner product of two encodings divided by
``k`` is the fraction of hashes whose low ``b`` bits of ``i*`` agree.
``t*`` is dropped.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_positive, frozen
from .exceptions import DataError, EmptyVectorError, ProvenanceError, UsageError
from .gcws import HashSketch, Sampler
from .vectors import LabeledDataset, SparseVector, TransformedVector, split_signs, transform

__all__ = ["EncodedFeatures", "encode", "dot_estimate", "encode_dataset", "GCWSEncoder"]

MAX_BITS = 32


def _check_bits(b):
    b = check_positive(b, "b", integer=True)
    if b > MAX_BITS:
        raise UsageError(f"b must be <= {MAX_BITS}, got {b}")
    return b


@dataclass(frozen=True, eq=False)
class EncodedFeatures:
    positions: np.ndarray
    b: int
    provenance: tuple  # (seed, p, k, dim) of the source sketch

    def __post_init__(self):
        object.__setattr__(self, "positions", frozen(self.positions, np.int64))

    @property
    def k(self):
        return self.provenance[2]

    @property
    def length(self):
        return (1 << self.b) * self.k

    def to_sparse_vector(self):
        return SparseVector(self.length, self.positions, np.ones(self.positions.size))


def _positions(i_star, b):
    width = 1 << b
    offsets = np.arange(i_star.shape[0], dtype=np.int64) * width
    return offsets + (i_star & (width - 1)) + 1


def encode(s, b):
    """Encode a :class:`HashSketch` with ``b`` bits per hash."""
    if not isinstance(s, HashSketch):
        raise TypeError("encode expects a HashSketch")
    b = _check_bits(b)
    return EncodedFeatures(_positions(s.i_star, b), b, s.provenance)


def dot_estimate(fu, fv):
    """Shared nonzeros over ``k``: the kernel estimate a linear model sees."""
    if fu.b != fv.b or fu.provenance != fv.provenance:
        raise ProvenanceError(
            f"encoding mismatch: b={fu.b} {fu.provenance} vs b={fv.b} {fv.provenance}"
        )
    return float(np.count_nonzero(fu.positions == fv.positions)) / fu.k


def encode_dataset(ds, p, seed, k, b, n_jobs=1):
    """Sign-split, sketch and encode every record; labels are kept.

    Returns a :class:`LabeledDataset` of dimension ``2**b * k`` whose
    records carry ``k`` ones each.
    """
    b = _check_bits(b)
    p = float(check_positive(p, "p"))
    vectors = []
    for n, vec in enumerate(ds.vectors, start=1):
        if vec.nnz == 0:
            raise EmptyVectorError(f"record {n} is all zero and cannot be hashed")
        vectors.append(transform(vec))
    sampler = Sampler(seed, k, 2 * ds.dim)
    sketches = sampler.sketch_many(vectors, p, n_jobs=n_jobs)
    length = (1 << b) * sampler.k
    ones = np.ones(sampler.k)
    records = tuple(
        (label, SparseVector(length, _positions(s.i_star, b), ones))
        for label, s in zip(ds.labels.tolist(), sketches)
    )
    return LabeledDataset(records, length)


class GCWSEncoder(TransformerMixin, BaseEstimator):
    """Linearize the pGMM kernel: raw signed features -> sparse binary hashes.

    Parameters
    ----------
    p : float, default=1.0
        Power applied inside the min-max sums.
    n_hashes : int, default=1024
        Number of hashes ``k``.
    b : int, default=8
        Bits kept per hash; the output has ``2**b * n_hashes`` columns.
    seed : int, default=0
        Master seed. Every random draw is a pure function of it.
    n_jobs : int, default=1
        Threads used for sketching; output does not depend on it.

    Examples
    --------
    >>> import numpy as np
    >>> enc = GCWSEncoder(n_hashes=16, b=4, seed=3).fit(np.array([[1.0, -2.0]]))
    >>> enc.transform(np.array([[1.0, -2.0], [0.5, 2.0]])).sum(axis=1).A.ravel().tolist()
    [16.0, 16.0]
    """

    def __init__(self, p=1.0, n_hashes=1024, b=8, seed=0, n_jobs=1):
        self.p = p
        self.n_hashes = n_hashes
        self.b = b
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, accept_sparse="csr")
        check_positive(self.p, "p")
        _check_bits(self.b)
        self.n_features_in_ = X.shape[1]
        self.sampler_ = Sampler(self.seed, self.n_hashes, 2 * self.n_features_in_)
        self.n_features_out_ = (1 << self.b) * self.sampler_.k
        return self

    def _split_rows(self, X):
        check_is_fitted(self)
        X = check_array(X, accept_sparse="csr")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but GCWSEncoder was fitted with {self.n_features_in_}"
            )
        S = split_signs(X)
        rows = []
        for n in range(S.shape[0]):
            lo, hi = S.indptr[n], S.indptr[n + 1]
            if lo == hi:
                raise DataError(f"row {n} is all zero and cannot be hashed")
            rows.append(TransformedVector(S.shape[1], S.indices[lo:hi] + 1, S.data[lo:hi]))
        return rows

    def sketch(self, X):
        """Per-row :class:`HashSketch` objects."""
        return self.sampler_.sketch_many(self._split_rows(X), float(self.p), n_jobs=self.n_jobs)

    def transform(self, X):
        sketches = self.sketch(X)
        k = self.sampler_.k
        cols = np.concatenate([_positions(s.i_star, self.b) - 1 for s in sketches])
        indptr = np.arange(len(sketches) + 1, dtype=np.int64) * k
        return sp.csr_matrix(
            (np.ones(cols.size), cols, indptr), shape=(len(sketches), self.n_features_out_)
        )
