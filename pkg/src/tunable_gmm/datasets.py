"""Deterministic synthetic data with signed features and nonlinear class structure."""

import numpy as np

from .vectors import LabeledDataset


def make_signed_energy(n_samples=2000, n_features=50, n_classes=4, group_size=8,
                       boost=2.5, shift=0.35, seed=0):
    """Classes that differ in *where* the energy sits, not in its sign.

    Every feature is standard normal. For class ``c`` the magnitudes of a
    dedicated group of ``group_size`` features are multiplied by ``boost``
    with signs left random, so the class means coincide on those features
    and a linear model on the raw values gets little from them. A weak
    mean ``shift`` on one extra feature per class leaves the raw problem
    above chance. Labels are ``1 .. n_classes``.

    Returns
    -------
    X : ndarray of shape (n_samples, n_features)
    y : ndarray of shape (n_samples,)
    """
    if n_classes * (group_size + 1) > n_features:
        raise ValueError("n_features too small for the requested groups")
    rng = np.random.default_rng(seed)
    y = rng.integers(n_classes, size=n_samples)
    X = rng.standard_normal((n_samples, n_features))
    rows = np.arange(n_samples)
    for c in range(n_classes):
        members = rows[y == c]
        group = slice(c * group_size, (c + 1) * group_size)
        X[members, group] *= boost
        X[members, n_classes * group_size + c] += shift
    return X, y + 1


def signed_energy_split(n_train=2000, n_test=2000, seed=0, **kwargs):
    """Train/test :class:`LabeledDataset` pair drawn from one stream."""
    X, y = make_signed_energy(n_train + n_test, seed=seed, **kwargs)
    train = LabeledDataset.from_arrays(X[:n_train], y[:n_train])
    test = LabeledDataset.from_arrays(X[n_train:], y[n_train:])
    return train, test
