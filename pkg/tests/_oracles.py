"""Independent reference implementations used to check the library.

Everything here is a literal, dense, loop-over-coordinates translation of
the definitions, written without calling into ``tunable_gmm`` kernels.
"""

import math
from fractions import Fraction

import numpy as np


def dense_split(u):
    """Sign split of a dense list: position 2i-1 gets u_i > 0, position 2i gets -u_i."""
    out = [0.0] * (2 * len(u))
    for i, x in enumerate(u, start=1):
        if x > 0:
            out[2 * i - 2] = x
        else:
            out[2 * i - 1] = -x
    return out


def dense_power_ratio(u, v, p=1.0):
    a, b = dense_split(u), dense_split(v)
    num = sum(min(x, y) ** p for x, y in zip(a, b))
    den = sum(max(x, y) ** p for x, y in zip(a, b))
    return num / den


def dense_kernel(family, u, v, lambda_e=None, p=None, gamma=None):
    """All GMM-family kernels and the baselines, straight from their formulas."""
    family = family.lower()
    if family == "linear":
        return sum(x * y for x, y in zip(u, v))
    if family == "rbf":
        cos = sum(x * y for x, y in zip(u, v)) / math.sqrt(
            sum(x * x for x in u) * sum(y * y for y in v)
        )
        return math.exp(-lambda_e * (1 - cos))
    pp = p if "p" in family[:-3] else 1.0
    g = gamma if "g" in family[:-3] else 1.0
    base = dense_power_ratio(u, v, pp) ** g
    if family.startswith("e"):
        return math.exp(-lambda_e * (1 - base))
    return base


def exact_gmm(u, v):
    """GMM as an exact rational for integer (or rational) inputs."""
    a = [Fraction(x) for x in dense_split([Fraction(x) for x in u])]
    b = [Fraction(x) for x in dense_split([Fraction(x) for x in v])]
    return sum(min(x, y) for x, y in zip(a, b)) / sum(max(x, y) for x, y in zip(a, b))


def resemblance(u, v):
    su = {i for i, x in enumerate(u) if x != 0}
    sv = {i for i, x in enumerate(v) if x != 0}
    return len(su & sv) / len(su | sv)


def binomial_bound(q, k, sigmas=4.0):
    return sigmas * math.sqrt(q * (1 - q) / k)


def random_signed(rng, dim, density=0.6, scale=3.0):
    """Dense signed vector with roughly ``density`` nonzeros (at least one)."""
    x = rng.normal(scale=scale, size=dim) * (rng.random(dim) < density)
    if not np.any(x):
        x[rng.integers(dim)] = rng.normal(scale=scale) or 1.0
    return x


def related_pair(rng, dim, density=0.6, noise=0.5):
    """Two signed vectors sharing part of their support, so the kernel is not tiny."""
    u = random_signed(rng, dim, density)
    v = u * np.exp(noise * rng.normal(size=dim)) * (rng.random(dim) < 0.85)
    extra = rng.normal(scale=3.0, size=dim) * (rng.random(dim) < 0.15)
    v = v + extra
    if not np.any(v):
        v = u.copy()
    return u, v
