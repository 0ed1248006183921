"""scikit-learn style anomaly detector wrapping the learner and validator."""

from __future__ import annotations

import os
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_is_fitted

from .automaton import EXISTENTIAL, FIRST_TYPE_STRICT, Anomaly, Verdict, validate
from .events import StreamConfig, XmlInputError, abstract, iter_events
from .learner import MergeParams, infer

__all__ = ["XvpaAnomalyDetector", "check_documents", "document_events"]


def check_documents(X) -> list:
    """Normalize ``X`` to a list of documents.

    A document is XML text (``str``), encoded bytes, a path, or an already
    tokenized event sequence.  A single document is not accepted as ``X``.
    """
    if isinstance(X, (str, bytes, bytearray, os.PathLike)):
        raise TypeError("X must be a collection of documents, not a single document")
    try:
        docs = list(X)
    except TypeError:
        raise TypeError(f"X must be iterable, got {type(X).__name__}") from None
    for i, d in enumerate(docs):
        if not isinstance(d, (str, bytes, bytearray, os.PathLike, list, tuple)):
            raise TypeError(f"document {i} has unsupported type {type(d).__name__}")
    return docs


def document_events(doc, config: StreamConfig) -> Iterable:
    if isinstance(doc, str):
        return iter_events(doc.encode("utf-8"), config)
    if isinstance(doc, (bytes, bytearray, os.PathLike)):
        return iter_events(doc, config)
    return doc


class XvpaAnomalyDetector(OutlierMixin, BaseEstimator):
    """Learns normal document structure and datatypes; flags deviations.

    ``predict`` returns +1 for accepted documents and -1 for anomalies
    (including malformed input).
    """

    def __init__(
        self,
        k: int = 1,
        l: int = 2,
        mode: str = EXISTENTIAL,
        max_depth: int = 1024,
        keep_whitespace: bool = False,
        trim_text: bool = True,
    ):
        self.k = k
        self.l = l
        self.mode = mode
        self.max_depth = max_depth
        self.keep_whitespace = keep_whitespace
        self.trim_text = trim_text

    def _config(self) -> StreamConfig:
        return StreamConfig(
            max_depth=self.max_depth,
            keep_whitespace_text=self.keep_whitespace,
            trim_text=self.trim_text,
        )

    def fit(self, X, y=None):
        if self.mode not in (EXISTENTIAL, FIRST_TYPE_STRICT):
            raise ValueError(f"mode must be {EXISTENTIAL!r} or {FIRST_TYPE_STRICT!r}")
        docs = check_documents(X)
        config = self._config()
        params = MergeParams(self.k, self.l)
        self.automaton_ = infer(
            (document_events(d, config) for d in docs), params=params, trim=self.trim_text
        )
        self.n_documents_ = len(docs)
        return self

    def validate(self, X) -> list[Verdict]:
        check_is_fitted(self, "automaton_")
        config = self._config()
        out = []
        for d in check_documents(X):
            try:
                events = abstract(document_events(d, config), trim=self.trim_text)
                out.append(validate(self.automaton_, events, self.mode))
            except XmlInputError as exc:  # raised before the first event
                out.append(Verdict(False, (Anomaly(1, "malformed", str(exc), frozenset()),)))
        return out

    def predict(self, X):
        return np.array([1 if v.accepted else -1 for v in self.validate(X)], dtype=int)

    def decision_function(self, X):
        return self.predict(X).astype(float)
