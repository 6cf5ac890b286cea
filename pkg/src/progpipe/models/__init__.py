"""The six classifiers, each exposing a positive-class probability.

``train(algorithm, X, y, params, rng)`` dispatches by tag; every trained
model carries ``algorithm`` and ``n_features`` and implements
``predict_proba(X)`` deterministically.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .cart import CartModel, CartParams, train_cart
from .elastic_net import (
    ElasticNetModel,
    ElasticNetParams,
    mean_deviance_gradient,
    train_elastic_net,
)
from .forest import ForestModel, ForestParams, train_random_forest
from .gbm import GbmModel, GbmParams, train_gbm
from .gp import GpModel, GpParams, train_gp_rbf
from .svm import SvmModel, SvmParams, train_svm_rbf

ALGORITHMS = ("RF", "SVM", "GBM", "EN", "GP", "CART")

PARAM_TYPES = {
    "RF": ForestParams,
    "SVM": SvmParams,
    "GBM": GbmParams,
    "EN": ElasticNetParams,
    "GP": GpParams,
    "CART": CartParams,
}

_TRAINERS = {
    "RF": train_random_forest,
    "SVM": train_svm_rbf,
    "GBM": lambda X, y, p, rng: train_gbm(X, y, p),
    "EN": lambda X, y, p, rng: train_elastic_net(X, y, p),
    "GP": lambda X, y, p, rng: train_gp_rbf(X, y, p),
    "CART": lambda X, y, p, rng: train_cart(X, y, p),
}


def _validate(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D and aligned with y")
    if not np.isfinite(X).all():
        raise DataError("X must be fully numeric with no missing values")
    if not np.isin(y, (0, 1)).all():
        raise DataError("y must be binary")
    return X, y


def train(algorithm: str, X, y, params, rng=None):
    """Train one classifier.  ``rng`` feeds the stochastic trainers (RF
    bagging and feature sampling, SVM Platt folds); the rest ignore it."""
    if algorithm not in ALGORITHMS:
        raise DataError(f"unknown algorithm {algorithm!r}")
    X, y = _validate(X, y)
    if not isinstance(params, PARAM_TYPES[algorithm]):
        raise DataError(
            f"{algorithm} expects {PARAM_TYPES[algorithm].__name__}, "
            f"got {type(params).__name__}"
        )
    if rng is None:
        rng = np.random.default_rng(0)
    return _TRAINERS[algorithm](X, y, params, rng)


def predict_proba(model, X) -> np.ndarray:
    """Positive-class probability per row, validated against training width."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DataError(
            f"expected {model.n_features} features, got {X.shape[1] if X.ndim == 2 else 'non-2D'}"
        )
    p = model.predict_proba(X)
    return np.clip(p, 0.0, 1.0)


__all__ = [
    "ALGORITHMS",
    "PARAM_TYPES",
    "train",
    "predict_proba",
    "CartModel",
    "CartParams",
    "train_cart",
    "ElasticNetModel",
    "ElasticNetParams",
    "mean_deviance_gradient",
    "train_elastic_net",
    "ForestModel",
    "ForestParams",
    "train_random_forest",
    "GbmModel",
    "GbmParams",
    "train_gbm",
    "GpModel",
    "GpParams",
    "train_gp_rbf",
    "SvmModel",
    "SvmParams",
    "train_svm_rbf",
]
