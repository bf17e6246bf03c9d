"""Counter-based random numbers keyed on (seed, hash index, coordinate, draw).

Each uniform is a pure function of its key, built by chaining the
SplitMix64 finalizer (Stafford "Mix13") over the key fields::

    h0 = mix(seed ^ K0)
    h1 = mix(h0 + j * G1)
    h2 = mix(h1 + i * G2)
    u  = mix(h2 + (8 * slot + draw + 1) * G3)

and mapping the top 53 bits to ``(bits + 0.5) / 2**53``, which lies in the
open interval (0, 1). The construction is frozen: sketches written with
``RNG_VERSION`` must stay reproducible, so do not change constants here
without bumping the version.
"""

import numpy as np

RNG_VERSION = "splitmix64-chain-v1"

_K0 = np.uint64(0x243F6A8885A308D3)
_G1 = np.uint64(0x9E3779B97F4A7C15)
_G2 = np.uint64(0xC2B2AE3D27D4EB4F)
_G3 = np.uint64(0x165667B19E3779F9)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# draws per slot: r uses 0-1, c uses 2-3, beta uses 4
DRAWS_PER_SLOT = 8


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _as_u64(x):
    return np.asarray(x, dtype=np.int64).astype(np.uint64)


def coordinate_keys(seed, j, i):
    """Per-(hash, coordinate) keys; ``j`` and ``i`` broadcast against each other."""
    with np.errstate(over="ignore"):
        h = mix64(np.uint64(seed) ^ _K0)
        h = mix64(h + _as_u64(j) * _G1)
        return mix64(h + _as_u64(i) * _G2)


def uniforms(keys, slot, draw):
    """Uniform(0, 1) variates (0 and 1 excluded) for draw ``draw`` of ``slot``."""
    counter = np.uint64(DRAWS_PER_SLOT * int(slot) + int(draw) + 1)
    with np.errstate(over="ignore"):
        bits = mix64(keys + counter * _G3)
    return ((bits >> _S11).astype(np.float64) + 0.5) * _INV53


def cws_randoms(keys, slot=0):
    """The (r, c, beta) triple of the weighted sampler for every key.

    ``r`` and ``c`` are Gamma(2, 1), realized as a sum of two unit
    exponentials; ``beta`` is Uniform(0, 1).
    """
    r = -np.log(uniforms(keys, slot, 0)) - np.log(uniforms(keys, slot, 1))
    c = -np.log(uniforms(keys, slot, 2)) - np.log(uniforms(keys, slot, 3))
    beta = uniforms(keys, slot, 4)
    return r, c, beta
