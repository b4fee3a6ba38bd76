"""Multinomial naive Bayes over non-negative count features."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import ContractError
from .encoding import encode_labels


def log_normalize(jll: np.ndarray) -> np.ndarray:
    """Row-wise ``jll - logsumexp(jll)``; rows may contain -inf (empty classes)."""
    m = jll.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(jll - m).sum(axis=1, keepdims=True))
    return jll - lse


class NaiveBayesClassifier(BaseEstimator, ClassifierMixin):
    """Maximum-likelihood class priors, add-alpha smoothed feature likelihoods.

    Always scores all ``n_classes`` labels; a class with no training
    documents gets prior 0 (log-prior -inf) and is never predicted.
    """

    def __init__(self, alpha=1.0, n_classes=5):
        self.alpha = alpha
        self.n_classes = n_classes

    def fit(self, X, y):
        if not self.alpha > 0:
            raise ContractError("alpha must be > 0")
        X = sp.csr_matrix(X, dtype=np.float64)
        y = encode_labels(y, self.n_classes)
        if X.shape[0] == 0:
            raise ContractError("cannot fit naive Bayes on an empty corpus")
        if X.shape[0] != len(y):
            raise ContractError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
        if X.nnz and X.data.min() < 0:
            raise ContractError("naive Bayes needs non-negative counts")
        onehot = np.zeros((len(y), self.n_classes))
        onehot[np.arange(len(y)), y] = 1.0
        self.classes_ = np.arange(self.n_classes)
        self.n_features_in_ = X.shape[1]
        self.class_count_ = onehot.sum(axis=0)
        self.feature_count_ = np.asarray((X.T @ onehot).T)
        self._refresh()
        return self

    def _refresh(self):
        with np.errstate(divide="ignore"):
            self.class_log_prior_ = np.log(self.class_count_ / self.class_count_.sum())
        totals = self.feature_count_.sum(axis=1, keepdims=True)
        self.feature_log_prob_ = np.log(
            (self.feature_count_ + self.alpha) / (totals + self.alpha * self.n_features_in_))

    def _check_X(self, X):
        check_is_fitted(self, "feature_log_prob_")
        X = sp.csr_matrix(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = self._check_X(X)
        return np.asarray(X @ self.feature_log_prob_.T) + self.class_log_prior_

    def predict_log_proba(self, X) -> np.ndarray:
        return log_normalize(self.joint_log_likelihood(X))

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(self.predict_log_proba(X))

    def decision_function(self, X) -> np.ndarray:
        return self.predict_log_proba(X)

    def predict(self, X) -> np.ndarray:
        # argmax takes the first maximum, i.e. the fixed label order
        return self.classes_[np.argmax(self.predict_log_proba(X), axis=1)]
