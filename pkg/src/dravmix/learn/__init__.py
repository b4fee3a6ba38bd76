"""Desk-scale sentiment classifiers and their training schedules."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from sklearn.pipeline import Pipeline

from ..corpus import Corpus, Label
from ..errors import ContractError
from .features import (FeatureSpace, HashedNgramVectorizer, SparseVec, feature_index,
                       featurize, featurize_many, ngram_counts)
from .mlp import GROUPS, MLPClassifier, cross_entropy, forward, init_params, loss_and_grads
from .nb import NaiveBayesClassifier
from .schedules import STLRParams, UnfreezeSchedule, discriminative_lrs, stlr_lr, stlr_schedule

__all__ = [
    "GROUPS", "FeatureSpace", "HashedNgramVectorizer", "MLPClassifier", "NaiveBayesClassifier",
    "STLRParams", "SparseVec", "TrainConfig", "UnfreezeSchedule", "cross_entropy",
    "discriminative_lrs", "feature_index", "featurize", "featurize_many", "forward",
    "init_params", "load_model", "loss_and_grads", "ngram_counts", "predict", "save_model",
    "stlr_lr", "stlr_schedule", "text_pipeline", "train_mlp", "train_nb",
]

#: ULMFiT fine-tuning settings: learning-rate sweep bounds and dropout
ULMFIT_LR_RANGE = (1e-8, 1e-2)
ULMFIT_DROPOUT = 0.5
#: transformer-with-BiLSTM head settings: LSTM units and max sequence length
BILSTM_UNITS = 256
MAX_LEN = 128


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow the usual transformer fine-tuning recipe."""

    batch_size: int = 32
    epochs: int = 5
    lr: float = 2e-5
    dropout: float = 0.4
    decay: float = 2.6
    weight_decay: float = 0.0
    max_len: int = MAX_LEN
    seed: int = 0
    loss: str = "cross-entropy"
    optimizer: str = "adam"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ContractError("epochs and batch_size must be >= 1")


Model = Union[NaiveBayesClassifier, MLPClassifier]


def _xy(corpus: Corpus, space: FeatureSpace):
    if len(corpus) == 0:
        raise ContractError("cannot train on an empty corpus")
    return featurize_many(corpus.texts, space), np.array([int(s.label) for s in corpus.samples])


def train_nb(corpus: Corpus, space: FeatureSpace, alpha: float = 1.0) -> NaiveBayesClassifier:
    X, y = _xy(corpus, space)
    return NaiveBayesClassifier(alpha=alpha).fit(X, y)


def train_mlp(corpus: Corpus, space: FeatureSpace, config: TrainConfig = TrainConfig(),
              stlr: Optional[STLRParams] = None, unfreeze: Optional[UnfreezeSchedule] = None,
              seed: Optional[int] = None, **mlp_params) -> MLPClassifier:
    """Train the MLP on ``corpus``.

    ``stlr`` supplies lr_max, ratio and cut_frac; its step count is replaced
    by the actual number of optimizer steps. ``config.max_len`` must match
    ``space.max_tokens`` since truncation happens at featurization.
    """
    if space.max_tokens != config.max_len:
        raise ContractError(f"config.max_len={config.max_len} but space.max_tokens={space.max_tokens}")
    X, y = _xy(corpus, space)
    model = MLPClassifier(
        dropout=config.dropout, batch_size=config.batch_size, epochs=config.epochs,
        lr=stlr.lr_max if stlr else config.lr,
        stlr_ratio=stlr.ratio if stlr else 32.0,
        cut_frac=stlr.cut_frac if stlr else 0.1,
        decay=config.decay, weight_decay=config.weight_decay,
        unfreeze=unfreeze if unfreeze is not None else "gradual",
        random_state=config.seed if seed is None else seed, **mlp_params)
    return model.fit(X, y)


def predict(model: Model, text: str, space: FeatureSpace) -> Tuple[Label, np.ndarray]:
    """Label and the 5 class scores (NB: log-posteriors, MLP: logits)."""
    if model.n_features_in_ != space.n_features:
        raise ContractError(
            f"model was trained on {model.n_features_in_} features, space has {space.n_features}")
    scores = model.decision_function(featurize_many([text], space))[0]
    return Label(int(np.argmax(scores))), scores


def text_pipeline(kind: str, space: FeatureSpace = FeatureSpace(), **params) -> Pipeline:
    clf = {"nb": NaiveBayesClassifier, "mlp": MLPClassifier}[kind](**params)
    return Pipeline([("features", HashedNgramVectorizer.from_space(space)), ("clf", clf)])


FORMAT_VERSION = 1
_FITTED = {
    "nb": ("classes_", "class_count_", "feature_count_"),
    "mlp": ("classes_",),
}


def save_model(path, model: Model, space: FeatureSpace) -> None:
    """Write model weights, estimator params and the feature space to one ``.npz``."""
    kind = "nb" if isinstance(model, NaiveBayesClassifier) else "mlp"
    params = model.get_params()
    if isinstance(params.get("unfreeze"), UnfreezeSchedule):
        params["unfreeze"] = {"plan": params["unfreeze"].to_dict()}
    meta = {"format": "dravmix-model", "version": FORMAT_VERSION, "kind": kind,
            "params": params, "space": space.to_dict(),
            "n_features_in": int(model.n_features_in_)}
    arrays = {name: getattr(model, name) for name in _FITTED[kind]}
    if kind == "mlp":
        arrays.update({f"param_{k}": v for k, v in model.params_.items()})
    with open(path, "wb") as fh:
        np.savez_compressed(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def load_model(path) -> Tuple[Model, FeatureSpace]:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != "dravmix-model":
            raise ContractError(f"{path} is not a saved model")
        if meta["version"] > FORMAT_VERSION:
            raise ContractError(f"{path}: model format v{meta['version']} is newer than supported")
        params = meta["params"]
        if isinstance(params.get("unfreeze"), dict):
            plan = {int(e): g for e, g in params["unfreeze"]["plan"].items()}
            params["unfreeze"] = UnfreezeSchedule(plan)
        kind = meta["kind"]
        model = (NaiveBayesClassifier if kind == "nb" else MLPClassifier)(**params)
        for name in _FITTED[kind]:
            setattr(model, name, data[name])
        model.n_features_in_ = meta["n_features_in"]
        if kind == "nb":
            model._refresh()
        else:
            model.params_ = {k[len("param_"):]: data[k] for k in data.files if k.startswith("param_")}
    return model, FeatureSpace.from_dict(meta["space"])
