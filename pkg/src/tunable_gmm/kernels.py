"""Exact evaluation of the GMM kernel family, the cosine-RBF and linear baselines.

All GMM-family kernels are functions of the power ratio

    R_p(a, b) = sum_i min(a_i, b_i)^p / sum_i max(a_i, b_i)^p

over sign-split vectors ``a`` and ``b``; ``gamma`` raises the ratio to a
power and ``lambda_e`` applies ``exp(-lambda_e * (1 - .))`` on top.
"""

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from ._validation import check_n_jobs, check_positive
from .exceptions import DataError, EmptyVectorError, NumericError, UsageError
from .vectors import LabeledDataset, SparseVector, TransformedVector, transform

__all__ = [
    "Family",
    "KernelSpec",
    "GramMatrix",
    "gmm",
    "pgmm",
    "evaluate",
    "kernel",
    "gram",
    "format_kernel_value",
    "write_precomputed",
    "pairwise_gmm",
]

# above this exponent, powers are summed in log space (x**p overflows for x > ~34 at p = 200)
LOG_SPACE_P = 30.0


class Family(str, enum.Enum):
    LINEAR = "linear"
    RBF = "rbf"
    GMM = "gmm"
    EGMM = "egmm"
    PGMM = "pgmm"
    GGMM = "ggmm"
    PGGMM = "pggmm"
    EPGMM = "epgmm"
    EGGMM = "eggmm"
    EPGGMM = "epggmm"

    @property
    def needs_lambda_e(self):
        return self in (Family.RBF, Family.EGMM, Family.EPGMM, Family.EGGMM, Family.EPGGMM)

    @property
    def needs_p(self):
        return self in (Family.PGMM, Family.PGGMM, Family.EPGMM, Family.EPGGMM)

    @property
    def needs_gamma(self):
        return self in (Family.GGMM, Family.PGGMM, Family.EGGMM, Family.EPGGMM)

    @property
    def is_gmm(self):
        return self not in (Family.LINEAR, Family.RBF)


GMM_FAMILIES = tuple(f for f in Family if f.is_gmm)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with exactly the parameters it needs."""

    family: Family
    lambda_e: float = None
    p: float = None
    gamma: float = None

    def __post_init__(self):
        try:
            family = Family(self.family.lower() if isinstance(self.family, str) else self.family)
        except ValueError:
            raise UsageError(f"unknown kernel family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        for name, needed in (
            ("lambda_e", family.needs_lambda_e),
            ("p", family.needs_p),
            ("gamma", family.needs_gamma),
        ):
            value = getattr(self, name)
            if needed:
                if value is None:
                    raise UsageError(f"kernel {family.value} requires {name}")
                object.__setattr__(self, name, float(check_positive(value, name)))
            elif value is not None:
                raise UsageError(f"kernel {family.value} does not take {name}")

    def describe(self):
        parts = [self.family.value]
        for name in ("lambda_e", "p", "gamma"):
            if getattr(self, name) is not None:
                parts.append(f"{name}={getattr(self, name)!r}")
        return " ".join(parts)


def _check_pair(a, b):
    for v in (a, b):
        if not isinstance(v, TransformedVector):
            raise TypeError(f"expected a TransformedVector, got {type(v).__name__}")
    if a.dim != b.dim:
        raise DataError(f"dimension mismatch: {a.dim} != {b.dim}")
    if a.nnz == 0 and b.nnz == 0:
        raise EmptyVectorError("GMM kernel is undefined for two all-zero vectors")


def _aligned(a, b):
    """Both vectors' values on the sorted union of their supports."""
    union = np.union1d(a.indices, b.indices)
    va = np.zeros(union.size)
    vb = np.zeros(union.size)
    va[np.searchsorted(union, a.indices)] = a.values
    vb[np.searchsorted(union, b.indices)] = b.values
    return va, vb


def _power_ratio(a, b, p):
    _check_pair(a, b)
    va, vb = _aligned(a, b)
    lo = np.minimum(va, vb)
    hi = np.maximum(va, vb)
    if p == 1.0:
        return float(lo.sum() / hi.sum())
    if p <= LOG_SPACE_P:
        return float((lo**p).sum() / (hi**p).sum())
    lo = lo[lo > 0]
    if lo.size == 0:
        return 0.0
    return float(np.exp(logsumexp(p * np.log(lo)) - logsumexp(p * np.log(hi))))


def gmm(a, b):
    """Generalized min-max similarity of two sign-split vectors, in [0, 1]."""
    return _power_ratio(a, b, 1.0)


def pgmm(a, b, p):
    return _power_ratio(a, b, float(check_positive(p, "p")))


def _dot(u, v):
    common, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
    return float(np.dot(u.values[iu], v.values[iv]))


def evaluate(spec, a=None, b=None, raw_a=None, raw_b=None):
    """Evaluate ``spec`` on a pair of vectors.

    GMM-family kernels read the sign-split vectors ``a`` and ``b``; the
    LINEAR and RBF baselines read the original signed vectors ``raw_a``
    and ``raw_b``.
    """
    family = spec.family
    if not family.is_gmm:
        if raw_a is None or raw_b is None:
            raise UsageError(f"kernel {family.value} needs the raw vectors")
        if raw_a.dim != raw_b.dim:
            raise DataError(f"dimension mismatch: {raw_a.dim} != {raw_b.dim}")
        dot = _dot(raw_a, raw_b)
        if family is Family.LINEAR:
            return dot
        norm = np.sqrt(np.dot(raw_a.values, raw_a.values) * np.dot(raw_b.values, raw_b.values))
        if norm == 0:
            raise NumericError("cosine similarity is undefined for a zero-norm vector")
        return float(np.exp(-spec.lambda_e * (1.0 - dot / norm)))

    value = _power_ratio(a, b, spec.p if family.needs_p else 1.0)
    if family.needs_gamma:
        value = value**spec.gamma
    if family.needs_lambda_e:
        value = float(np.exp(-spec.lambda_e * (1.0 - value)))
    return value


def kernel(spec, u, v):
    """Evaluate ``spec`` directly on two raw (signed) SparseVectors."""
    if spec.family.is_gmm:
        return evaluate(spec, transform(u), transform(v))
    return evaluate(spec, raw_a=u, raw_b=v)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    spec: KernelSpec
    labels: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]


def gram(ds, spec, block_size=64, n_jobs=1):
    """Kernel matrix of a dataset; each unordered pair is evaluated once.

    Rows are processed in blocks of ``block_size``; blocks may run on
    ``n_jobs`` threads. Every entry is computed by the same call no matter
    how blocks are scheduled, so the output does not depend on ``n_jobs``.
    """
    if not isinstance(ds, LabeledDataset):
        raise TypeError("gram expects a LabeledDataset")
    block_size = check_positive(block_size, "block_size", integer=True)
    n_jobs = check_n_jobs(n_jobs)
    raw = ds.vectors
    tv = [transform(v) for v in raw] if spec.family.is_gmm else raw
    n = len(raw)
    K = np.empty((n, n))

    def fill(start):
        for i in range(start, min(start + block_size, n)):
            for j in range(i, n):
                if spec.family.is_gmm:
                    K[i, j] = evaluate(spec, tv[i], tv[j])
                else:
                    K[i, j] = evaluate(spec, raw_a=raw[i], raw_b=raw[j])
                K[j, i] = K[i, j]

    starts = range(0, n, block_size)
    if n_jobs == 1:
        for s in starts:
            fill(s)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(fill, starts))
    return GramMatrix(K, spec, ds.labels)


def format_kernel_value(value):
    """17 significant digits, trailing zeros kept (``1.0000000000000000``)."""
    return "%#.17g" % value


def write_precomputed(gm):
    """Render a Gram matrix as precomputed-kernel rows ``label 0:i 1:K(i,1) ...``."""
    lines = []
    for i in range(gm.n):
        cells = " ".join(
            f"{j + 1}:{format_kernel_value(v)}" for j, v in enumerate(gm.values[i].tolist())
        )
        lines.append(f"{int(gm.labels[i])} 0:{i + 1} {cells}\n")
    return "".join(lines).encode("ascii")


def _rows(X):
    X = sp.csr_matrix(X, dtype=np.float64)
    X.eliminate_zeros()
    X.sort_indices()
    return [
        SparseVector(X.shape[1], X.indices[X.indptr[r]:X.indptr[r + 1]] + 1,
                     X.data[X.indptr[r]:X.indptr[r + 1]])
        for r in range(X.shape[0])
    ]


def pairwise_gmm(X, Y=None, *, family="gmm", lambda_e=None, p=None, gamma=None):
    """Kernel matrix between the rows of ``X`` and ``Y`` (raw signed features).

    Accepts dense arrays or scipy sparse matrices, so it can be handed to
    estimators that take a callable kernel, e.g.
    ``SVC(kernel=functools.partial(pairwise_gmm, family="pgmm", p=0.5))``.
    """
    spec = KernelSpec(family, lambda_e=lambda_e, p=p, gamma=gamma)
    rx = _rows(X)
    ry = rx if Y is None else _rows(Y)
    if rx and ry and rx[0].dim != ry[0].dim:
        raise DataError(f"X has {rx[0].dim} features but Y has {ry[0].dim}")
    if spec.family.is_gmm:
        tx = [transform(v) for v in rx]
        ty = tx if Y is None else [transform(v) for v in ry]
        K = np.array([[evaluate(spec, a, b) for b in ty] for a in tx]).reshape(len(rx), len(ry))
    else:
        K = np.array([[evaluate(spec, raw_a=a, raw_b=b) for b in ry] for a in rx]).reshape(len(rx), len(ry))
    return K
