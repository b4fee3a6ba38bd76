"""Three-group feed-forward classifier trained with ULMFiT-style schedules.

Layer groups: G0 projects the sparse input (linear), G1 is a ReLU hidden
layer followed by dropout, G2 produces the class logits. Training is
mini-batch Adam on the mean cross-entropy, with a slanted triangular
learning rate, per-group discriminative rates and a gradual-unfreezing
schedule. Frozen groups get neither parameter nor optimizer-state updates.
"""
from __future__ import annotations

import logging
import math
from typing import Dict, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import normalize
from sklearn.utils.validation import check_is_fitted

from ..errors import ContractError, TrainingError
from .encoding import encode_labels
from .schedules import STLRParams, UnfreezeSchedule, discriminative_lrs, stlr_lr

log = logging.getLogger(__name__)

GROUPS = {0: ("W0", "b0"), 1: ("W1", "b1"), 2: ("W2", "b2")}
BETA1, BETA2, EPS = 0.9, 0.999, 1e-8


def init_params(n_in: int, n_proj: int, n_hidden: int, n_out: int,
                rng: np.random.Generator) -> Dict[str, np.ndarray]:
    def glorot(fan_in, fan_out):
        a = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=(fan_in, fan_out))

    return {
        # the input is L2-normalised and sparse, so glorot on n_in would be far too small
        "W0": rng.normal(0.0, 1.0 / math.sqrt(n_proj), size=(n_in, n_proj)),
        "b0": np.zeros(n_proj),
        "W1": glorot(n_proj, n_hidden),
        "b1": np.zeros(n_hidden),
        "W2": glorot(n_hidden, n_out),
        "b2": np.zeros(n_out),
    }


def forward(params, X, mask=None):
    """Return ``(logits, cache)``. ``mask`` is an inverted-dropout multiplier on G1."""
    z0 = np.asarray(X @ params["W0"]) + params["b0"]
    pre1 = z0 @ params["W1"] + params["b1"]
    a1 = np.maximum(pre1, 0.0)
    d1 = a1 if mask is None else a1 * mask
    logits = d1 @ params["W2"] + params["b2"]
    return logits, (X, z0, pre1, d1, mask)


def cross_entropy(logits: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and its gradient with respect to the logits."""
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - lse
    n = len(y)
    loss = -logp[np.arange(n), y].mean()
    grad = np.exp(logp)
    grad[np.arange(n), y] -= 1.0
    return loss, grad / n


def loss_and_grads(params, X, y, mask=None, groups: Sequence[int] = (0, 1, 2)):
    """Loss plus gradients for the parameters of ``groups`` only."""
    logits, (X, z0, pre1, d1, mask) = forward(params, X, mask)
    loss, g = cross_entropy(logits, y)
    grads = {}
    groups = set(groups)
    if 2 in groups:
        grads["W2"] = d1.T @ g
        grads["b2"] = g.sum(axis=0)
    if groups & {0, 1}:
        g1 = g @ params["W2"].T
        if mask is not None:
            g1 = g1 * mask
        g1 = g1 * (pre1 > 0)
        if 1 in groups:
            grads["W1"] = z0.T @ g1
            grads["b1"] = g1.sum(axis=0)
        if 0 in groups:
            g0 = g1 @ params["W1"].T
            grads["W0"] = np.asarray(X.T @ g0)
            grads["b0"] = g0.sum(axis=0)
    return loss, grads


class MLPClassifier(BaseEstimator, ClassifierMixin):
    """Feed-forward sentiment classifier over hashed n-gram counts.

    ``lr`` is the peak of the slanted triangular schedule for the last group;
    earlier groups get it divided by ``decay`` per group. ``unfreeze`` is
    ``"gradual"``, ``"none"`` (train everything every epoch) or an explicit
    :class:`UnfreezeSchedule`.
    """

    def __init__(self, proj_dim=64, hidden_dim=64, dropout=0.4, batch_size=32, epochs=5,
                 lr=1e-2, stlr_ratio=32.0, cut_frac=0.1, decay=2.6, weight_decay=0.0,
                 unfreeze="gradual", random_state=0, n_classes=5):
        self.proj_dim = proj_dim
        self.hidden_dim = hidden_dim
        self.dropout = dropout
        self.batch_size = batch_size
        self.epochs = epochs
        self.lr = lr
        self.stlr_ratio = stlr_ratio
        self.cut_frac = cut_frac
        self.decay = decay
        self.weight_decay = weight_decay
        self.unfreeze = unfreeze
        self.random_state = random_state
        self.n_classes = n_classes

    def _schedule(self) -> UnfreezeSchedule:
        if isinstance(self.unfreeze, UnfreezeSchedule):
            if self.unfreeze.epochs != self.epochs:
                raise ContractError(
                    f"unfreeze schedule covers {self.unfreeze.epochs} epochs, training runs {self.epochs}")
            return self.unfreeze
        if self.unfreeze == "gradual":
            return UnfreezeSchedule.gradual(self.epochs, len(GROUPS))
        if self.unfreeze in ("none", None):
            return UnfreezeSchedule.full(self.epochs, len(GROUPS))
        raise ContractError(f"unknown unfreeze mode {self.unfreeze!r}")

    @staticmethod
    def _prepare(X):
        return normalize(sp.csr_matrix(X, dtype=np.float64))

    def fit(self, X, y, callback=None):
        """Train from scratch.

        ``callback(epoch, model)`` runs once with epoch 0 right after
        initialisation and then after every epoch, so parameters can be
        inspected on both sides of each epoch.
        """
        if self.epochs < 1 or self.batch_size < 1:
            raise ContractError("epochs and batch_size must be >= 1")
        if not 0 <= self.dropout < 1:
            raise ContractError("dropout must lie in [0, 1)")
        X = self._prepare(X)
        y = encode_labels(y, self.n_classes)
        n = X.shape[0]
        if n == 0:
            raise ContractError("cannot train on an empty corpus")
        if n != len(y):
            raise ContractError(f"X has {n} rows but y has {len(y)} labels")
        schedule = self._schedule()

        rng = np.random.default_rng(self.random_state)
        self.classes_ = np.arange(self.n_classes)
        self.n_features_in_ = X.shape[1]
        self.params_ = init_params(X.shape[1], self.proj_dim, self.hidden_dim, self.n_classes, rng)
        moments = {k: (np.zeros_like(v), np.zeros_like(v)) for k, v in self.params_.items()}
        updates = {g: 0 for g in GROUPS}

        steps_per_epoch = math.ceil(n / self.batch_size)
        stlr = STLRParams(self.lr, self.stlr_ratio, self.cut_frac,
                          max(2, steps_per_epoch * self.epochs))
        self.stlr_ = stlr
        self.loss_curve_ = []
        self.lr_history_ = []
        keep = 1.0 - self.dropout
        t = 0
        if callback is not None:
            callback(0, self)
        for epoch in range(1, self.epochs + 1):
            trainable = sorted(schedule[epoch])
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                mask = None
                if self.dropout > 0:
                    mask = (rng.random((len(idx), self.hidden_dim)) < keep) / keep
                loss, grads = loss_and_grads(self.params_, X[idx], y[idx], mask, trainable)
                if not np.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss {loss} at epoch {epoch}, step {t} "
                        f"(lr={stlr_lr(t, stlr):.3g}, groups={trainable})")
                group_lrs = discriminative_lrs(stlr_lr(t, stlr), len(GROUPS), self.decay)
                self.lr_history_.append(group_lrs)
                for g in trainable:
                    updates[g] += 1
                    self._adam_step(g, grads, moments, group_lrs[g], updates[g])
                epoch_loss += loss * len(idx)
                t += 1
            self.loss_curve_.append(epoch_loss / n)
            log.debug("epoch %d groups=%s loss=%.4f", epoch, trainable, epoch_loss / n)
            if callback is not None:
                callback(epoch, self)
        return self

    def _adam_step(self, group, grads, moments, lr, step):
        c1 = 1 - BETA1 ** step
        c2 = 1 - BETA2 ** step
        for name in GROUPS[group]:
            p, g = self.params_[name], grads[name]
            m, v = moments[name]
            m *= BETA1
            m += (1 - BETA1) * g
            v *= BETA2
            v += (1 - BETA2) * g * g
            if self.weight_decay:
                p -= lr * self.weight_decay * p
            p -= lr * (m / c1) / (np.sqrt(v / c2) + EPS)

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        X = self._prepare(X)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"model expects {self.n_features_in_} features, got {X.shape[1]}")
        return forward(self.params_, X)[0]

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_function(X)
        z = np.exp(z - z.max(axis=1, keepdims=True))
        return z / z.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def group_params(self, group: int) -> Dict[str, np.ndarray]:
        check_is_fitted(self, "params_")
        return {name: self.params_[name] for name in GROUPS[group]}
