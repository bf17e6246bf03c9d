"""Small input-validation helpers used across modules."""

import numbers

import numpy as np

from .exceptions import UsageError


def check_positive(value, name, *, integer=False, allow_none=False):
    """Return ``value`` if it is a finite number > 0, else raise UsageError."""
    if value is None:
        if allow_none:
            return None
        raise UsageError(f"{name} is required")
    if isinstance(value, bool):
        raise UsageError(f"{name} must be a number, got {value!r}")
    if integer:
        if not isinstance(value, numbers.Integral):
            raise UsageError(f"{name} must be an integer, got {value!r}")
        value = int(value)
    elif not isinstance(value, numbers.Real):
        raise UsageError(f"{name} must be a real number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise UsageError(f"{name} must be > 0, got {value!r}")
    return value


def check_seed(seed):
    """Validate a 64-bit unsigned master seed."""
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise UsageError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def check_n_jobs(n_jobs):
    if n_jobs is None:
        return 1
    n_jobs = check_positive(n_jobs, "n_jobs", integer=True)
    return n_jobs


def frozen(array, dtype):
    """Copy ``array`` into a read-only contiguous array of ``dtype``."""
    out = np.array(array, dtype=dtype, copy=True).reshape(-1)
    out.setflags(write=False)
    return out
