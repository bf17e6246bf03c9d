"""Generalized consistent weighted sampling (GCWS) for the pGMM kernel.

For a sign-split vector ``x`` and hash index ``j`` every nonzero coordinate
``i`` gets ``r_i, c_i ~ Gamma(2, 1)`` and ``beta_i ~ Uniform(0, 1)`` from
the counter-based generator in :mod:`tunable_gmm._random`, and

    t_i = floor(p * ln(x_i) / r_i + beta_i)
    a_i = ln(c_i) - r_i * (t_i + 1 - beta_i)

The sample is ``(i*, t*) = (argmin_i a_i, t_{i*})``. Zero coordinates are
skipped: ``ln 0 = -inf`` sends their ``a_i`` to ``+inf``. Ties go to the
smallest coordinate. For two vectors hashed with the same seed,
``P[(i*, t*) agree] = pGMM``, and ``P[i* agree]`` approximates it.

The integer-gamma variant draws ``gamma`` independent samples per hash
(``p = 1``), using ``slot = 0 .. gamma-1`` to separate the replicas; all
replicas must agree for a collision, which happens with probability
``GMM ** gamma``.
"""

import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _random
from ._validation import check_n_jobs, check_positive, check_seed, frozen
from .exceptions import DataError, EmptyVectorError, ParseError, ProvenanceError
from .vectors import TransformedVector

__all__ = [
    "CwsRandoms",
    "HashSample",
    "HashSketch",
    "GammaSketch",
    "Mode",
    "derive_randoms",
    "gcws_hash",
    "sketch",
    "gamma_sketch",
    "estimate_pgmm",
    "estimate_ggmm",
    "Sampler",
    "format_sketches",
    "parse_sketches",
]

# max (hash x coordinate) cells evaluated at once
_CHUNK_CELLS = 1 << 20
# max cells of a per-sampler randoms table (3 float64 arrays)
_TABLE_CELLS = 1 << 21


class CwsRandoms(NamedTuple):
    r: float
    c: float
    beta: float


class HashSample(NamedTuple):
    i_star: int
    t_star: int


class Mode(str, enum.Enum):
    EXACT_PAIR = "exact"
    INDEX_ONLY = "index"


def derive_randoms(seed, j, i, slot=0):
    """Randoms of hash ``j`` at coordinate ``i`` (both 1-based), replica ``slot``."""
    seed = check_seed(seed)
    keys = _random.coordinate_keys(seed, j, i)
    r, c, beta = _random.cws_randoms(keys, slot)
    return CwsRandoms(float(r), float(c), float(beta))


@dataclass(frozen=True, eq=False)
class HashSketch:
    """``k`` GCWS samples of one vector plus the parameters that produced them."""

    i_star: np.ndarray
    t_star: np.ndarray
    seed: int
    p: float
    k: int
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "i_star", frozen(self.i_star, np.int64))
        object.__setattr__(self, "t_star", frozen(self.t_star, np.int64))
        if self.i_star.size != self.k or self.t_star.size != self.k:
            raise DataError(f"sketch must hold exactly k={self.k} samples")
        if self.k and (self.i_star.min() < 1 or self.i_star.max() > self.dim):
            raise DataError(f"sample index outside [1, {self.dim}]")

    @property
    def provenance(self):
        return (self.seed, self.p, self.k, self.dim)

    @property
    def samples(self):
        return [HashSample(i, t) for i, t in zip(self.i_star.tolist(), self.t_star.tolist())]

    def __eq__(self, other):
        if not isinstance(other, HashSketch):
            return NotImplemented
        return (
            self.provenance == other.provenance
            and np.array_equal(self.i_star, other.i_star)
            and np.array_equal(self.t_star, other.t_star)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GammaSketch:
    """``k`` tuples of ``gamma`` independent GCWS samples (``p`` fixed at 1)."""

    i_star: np.ndarray  # shape (k, gamma)
    t_star: np.ndarray
    seed: int
    gamma: int
    k: int
    dim: int

    p = 1.0

    def __post_init__(self):
        for name in ("i_star", "t_star"):
            arr = np.array(getattr(self, name), dtype=np.int64).reshape(self.k, self.gamma)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def provenance(self):
        return (self.seed, self.gamma, self.k, self.dim)

    @property
    def samples(self):
        return [
            tuple(HashSample(i, t) for i, t in zip(ri, rt))
            for ri, rt in zip(self.i_star.tolist(), self.t_star.tolist())
        ]

    def __eq__(self, other):
        if not isinstance(other, GammaSketch):
            return NotImplemented
        return (
            self.provenance == other.provenance
            and np.array_equal(self.i_star, other.i_star)
            and np.array_equal(self.t_star, other.t_star)
        )

    __hash__ = None


def _check_vector(x):
    if not isinstance(x, TransformedVector):
        raise TypeError(f"expected a TransformedVector, got {type(x).__name__}")
    if x.nnz == 0:
        raise EmptyVectorError("cannot hash an all-zero vector")


def _argmin_samples(idx, scaled_log, r, log_c, beta):
    """Samples for a block of hashes; ``r``, ``log_c``, ``beta`` are (hashes, nnz)."""
    t = np.floor(scaled_log / r + beta)
    a = log_c - r * (t + 1.0 - beta)
    best = np.argmin(a, axis=1)
    rows = np.arange(best.size)
    return idx[best], t[rows, best].astype(np.int64)


class Sampler:
    """GCWS sampler with fixed ``(seed, k, dim)``, reusable across vectors.

    When ``k * dim`` is small enough the randoms for every (hash,
    coordinate) cell are derived once and cached per replica slot;
    otherwise they are derived on demand for each vector's support. Both
    routes evaluate the same elementwise formulas and give identical bits.
    """

    def __init__(self, seed, k, dim, cache=True):
        self.seed = check_seed(seed)
        self.k = check_positive(k, "k", integer=True)
        self.dim = check_positive(dim, "dim", integer=True)
        self.cache = cache and self.k * self.dim <= _TABLE_CELLS
        self._tables = {}
        self._chunk = None

    def _table(self, slot):
        if slot not in self._tables:
            keys = _random.coordinate_keys(
                self.seed,
                np.arange(1, self.k + 1)[:, None],
                np.arange(1, self.dim + 1)[None, :],
            )
            r, c, beta = _random.cws_randoms(keys, slot)
            self._tables[slot] = (r, np.log(c), beta)
        return self._tables[slot]

    def hash_range(self, x, p, js, slot=0):
        """Samples of ``x`` for the 1-based hash indices ``js``."""
        _check_vector(x)
        if x.dim != self.dim:
            raise DataError(f"vector dimension {x.dim} != sampler dimension {self.dim}")
        js = np.asarray(js, dtype=np.int64).reshape(-1)
        idx = x.indices
        scaled_log = p * np.log(x.values)
        i_out = np.empty(js.size, dtype=np.int64)
        t_out = np.empty(js.size, dtype=np.int64)
        step = max(1, _CHUNK_CELLS // idx.size)
        for lo in range(0, js.size, step):
            block = js[lo:lo + step]
            if self.cache:
                r, log_c, beta = self._table(slot)
                rows = (block - 1)[:, None]
                cols = (idx - 1)[None, :]
                r, log_c, beta = r[rows, cols], log_c[rows, cols], beta[rows, cols]
            else:
                keys = _random.coordinate_keys(self.seed, block[:, None], idx[None, :])
                r, c, beta = _random.cws_randoms(keys, slot)
                log_c = np.log(c)
            i_out[lo:lo + step], t_out[lo:lo + step] = _argmin_samples(
                idx, scaled_log, r, log_c, beta
            )
        return i_out, t_out

    def sketch(self, x, p):
        p = float(check_positive(p, "p"))
        i_star, t_star = self.hash_range(x, p, np.arange(1, self.k + 1))
        return HashSketch(i_star, t_star, self.seed, p, self.k, self.dim)

    def gamma_sketch(self, x, gamma):
        gamma = check_positive(gamma, "gamma", integer=True)
        js = np.arange(1, self.k + 1)
        i_star = np.empty((self.k, gamma), dtype=np.int64)
        t_star = np.empty((self.k, gamma), dtype=np.int64)
        for slot in range(gamma):
            i_star[:, slot], t_star[:, slot] = self.hash_range(x, 1.0, js, slot=slot)
        return GammaSketch(i_star, t_star, self.seed, gamma, self.k, self.dim)

    def sketch_many(self, vectors, p, n_jobs=1):
        """Sketch every vector; output order follows input order for any ``n_jobs``."""
        n_jobs = check_n_jobs(n_jobs)
        vectors = list(vectors)
        if self.cache:
            self._table(0)  # build before threads start
        if n_jobs == 1:
            return [self.sketch(x, p) for x in vectors]
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(lambda x: self.sketch(x, p), vectors))


def gcws_hash(x, p, seed, j):
    """A single GCWS sample of ``x`` for hash index ``j`` (1-based)."""
    j = check_positive(j, "j", integer=True)
    p = float(check_positive(p, "p"))
    sampler = Sampler(seed, j, x.dim, cache=False)
    i_star, t_star = sampler.hash_range(x, p, [j])
    return HashSample(int(i_star[0]), int(t_star[0]))


def sketch(x, p, seed, k):
    """``k`` GCWS samples of ``x``; cost O(k * nnz(x))."""
    return Sampler(seed, k, x.dim, cache=False).sketch(x, p)


def gamma_sketch(x, gamma, seed, k):
    return Sampler(seed, k, x.dim, cache=False).gamma_sketch(x, gamma)


def _check_provenance(su, sv):
    if type(su) is not type(sv):
        raise ProvenanceError("cannot compare sketches of different kinds")
    if su.provenance != sv.provenance:
        raise ProvenanceError(
            f"sketch provenance mismatch: (seed, p, k, dim) {su.provenance} vs {sv.provenance}"
        )


def estimate_pgmm(su, sv, mode=Mode.EXACT_PAIR):
    """Fraction of hashes on which two sketches collide.

    ``EXACT_PAIR`` requires ``(i*, t*)`` to agree and is unbiased for pGMM;
    ``INDEX_ONLY`` compares ``i*`` alone.
    """
    mode = Mode(mode)
    if not isinstance(su, HashSketch):
        raise TypeError("estimate_pgmm expects HashSketch inputs")
    _check_provenance(su, sv)
    match = su.i_star == sv.i_star
    if mode is Mode.EXACT_PAIR:
        match &= su.t_star == sv.t_star
    return float(np.count_nonzero(match)) / su.k


def estimate_ggmm(su, sv):
    """Fraction of hashes whose ``gamma`` replicas all collide (estimates GMM**gamma)."""
    if not isinstance(su, GammaSketch):
        raise TypeError("estimate_ggmm expects GammaSketch inputs")
    _check_provenance(su, sv)
    match = np.all((su.i_star == sv.i_star) & (su.t_star == sv.t_star), axis=1)
    return float(np.count_nonzero(match)) / su.k


# -- persistence -------------------------------------------------------------

def format_sketches(sketches):
    """Text blocks: a ``GCWS1``/``GCWS1G`` header line followed by ``k`` sample lines."""
    out = io.StringIO()
    for s in sketches:
        if isinstance(s, GammaSketch):
            out.write(f"GCWS1G seed={s.seed} p=1.0 k={s.k} dim={s.dim} gamma={s.gamma}\n")
            for ri, rt in zip(s.i_star.tolist(), s.t_star.tolist()):
                out.write(" ".join(f"{i} {t}" for i, t in zip(ri, rt)) + "\n")
        else:
            out.write(f"GCWS1 seed={s.seed} p={s.p!r} k={s.k} dim={s.dim}\n")
            for i, t in zip(s.i_star.tolist(), s.t_star.tolist()):
                out.write(f"{i} {t}\n")
    return out.getvalue()


def _parse_header(line, lineno):
    tag, *fields = line.split()
    try:
        kv = dict(f.split("=", 1) for f in fields)
        header = {
            "seed": int(kv["seed"]),
            "p": float(kv["p"]),
            "k": int(kv["k"]),
            "dim": int(kv["dim"]),
        }
        if tag == "GCWS1G":
            header["gamma"] = int(kv["gamma"])
    except (KeyError, ValueError):
        raise ParseError(f"malformed sketch header {line!r}", lineno) from None
    return tag, header


def parse_sketches(text):
    """Inverse of :func:`format_sketches`."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    sketches = []
    n = 0
    while n < len(lines):
        tag = lines[n].split(" ", 1)[0]
        if tag not in ("GCWS1", "GCWS1G"):
            raise ParseError(f"expected a GCWS1 header, got {lines[n]!r}", n + 1)
        tag, h = _parse_header(lines[n], n + 1)
        body = lines[n + 1:n + 1 + h["k"]]
        if len(body) != h["k"]:
            raise ParseError(f"sketch truncated: expected {h['k']} sample lines", n + 1)
        width = 2 * h.get("gamma", 1)
        try:
            rows = [[int(tok) for tok in row.split()] for row in body]
        except ValueError:
            raise ParseError("unparseable sample line", n + 2) from None
        if any(len(row) != width for row in rows):
            raise ParseError(f"sample lines must hold {width} integers", n + 2)
        arr = np.array(rows, dtype=np.int64).reshape(h["k"], width)
        if tag == "GCWS1G":
            sketches.append(GammaSketch(arr[:, 0::2], arr[:, 1::2], h["seed"], h["gamma"], h["k"], h["dim"]))
        else:
            sketches.append(HashSketch(arr[:, 0], arr[:, 1], h["seed"], h["p"], h["k"], h["dim"]))
        n += 1 + h["k"]
    if not sketches:
        raise DataError("no sketches found")
    return sketches
