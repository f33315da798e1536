"""Scikit-learn style facade over the path discriminator.

X is a list of ``(tokens, PathFeatures)`` pairs where tokens are the
instruction token strings (pre-encoded int ids also work) and y the
target scores in [0, 1]; ``predict`` returns model scores for the same
shape.  Hyperparameters live in the constructor so ``get_params`` /
``set_params`` and ``clone`` behave as sklearn expects.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator, RegressorMixin

from .discriminator import TrainConfig, TrainItem, build_model, collate_items, train
from .encoding import Vocab
from .errors import DataError
from .instruction_parser import default_parser
from .semantic_map import CategoryTable


class ScoreRegressor(BaseEstimator, RegressorMixin):
    def __init__(self, d=120, n_layers=6, n_heads=12, fusion="interleave",
                 dropout=0.1, epochs=16, batch_size=16, lr=1e-4,
                 weight_decay=0.01, mask_rate=0.15, seed=0, num_threads=1):
        self.d = d
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.fusion = fusion
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.mask_rate = mask_rate
        self.seed = seed
        self.num_threads = num_threads

    def _items(self, X, y=None):
        targets = np.zeros(len(X)) if y is None else np.asarray(y, dtype=float)
        if len(targets) != len(X):
            raise DataError(f"X has {len(X)} rows but y has {len(targets)}")
        items = []
        for (tokens, feats), t in zip(X, targets):
            if len(tokens) and isinstance(tokens[0], str):
                tokens = self.vocab_.encode(list(tokens))
            items.append(TrainItem(tokens=np.asarray(tokens, dtype=np.int64),
                                   features=feats, y=float(t)))
        return items

    def fit(self, X, y):
        if len(X) == 0:
            raise DataError("empty training set")
        self.vocab_ = Vocab.from_lexicon(default_parser().lexicon)
        self.model_ = build_model(
            self.vocab_, CategoryTable.bundled(), seed=self.seed, d=self.d,
            n_layers=self.n_layers, n_heads=self.n_heads, fusion=self.fusion,
            dropout=self.dropout)
        config = TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, lr=self.lr,
            weight_decay=self.weight_decay, mask_rate=self.mask_rate,
            seed=self.seed, num_threads=self.num_threads)
        self.history_ = train(self.model_, self._items(X, y), config,
                              pad_id=self.vocab_.pad_id())
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise DataError("call fit() before predict()")
        self.model_.eval()
        items = self._items(X)
        out = np.empty(len(items))
        with torch.no_grad():
            for lo in range(0, len(items), self.batch_size):
                chunk = items[lo:lo + self.batch_size]
                batch = collate_items(chunk, self.vocab_.pad_id())
                scores, _ = self.model_(batch)
                out[lo:lo + len(chunk)] = scores.numpy()
        return out
