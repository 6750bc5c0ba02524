# Copyright 2026 The zsql Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python access to the zsql text-to-SQL core.

Queries are dicts in the WikiSQL ``sql`` shape:
``{"sel": int, "agg": int, "conds": [[column, op, value], ...]}``.
"""

import json
import os

from . import _zsql
from ._zsql import (
    CheckpointError,
    DataError,
    ExecutionError,
    TrainingError,
    normalize_text,
    schema_key,
    tokenize,
)

__all__ = [
    "CheckpointError",
    "DataError",
    "ExecutionError",
    "Model",
    "TrainingError",
    "categorize_errors",
    "derive_labels",
    "evaluate",
    "execute",
    "normalize_text",
    "query_match",
    "schema_key",
    "split_by_shots",
    "tokenize",
    "train",
]


def _paths(tables):
    if isinstance(tables, (str, os.PathLike)):
        tables = [tables]
    return [os.fspath(t) for t in tables]


def split_by_shots(train, test, tables):
    """Shot buckets W-0..W-6 of a test file as {"buckets": [...], "overflow": [...]}."""
    return json.loads(_zsql.split_by_shots(os.fspath(train), os.fspath(test), _paths(tables)))


def derive_labels(question, headers, sql):
    """Sketch, tags, value spans and mapping targets of one example, or a skip record."""
    return json.loads(_zsql.derive_labels(question, list(headers), json.dumps(sql)))


def execute(sql, headers, rows):
    """Runs a query over in-memory rows; returns {"kind": "empty"|"scalar"|"cells", ...}."""
    return json.loads(_zsql.execute(json.dumps(sql), list(headers), json.dumps(rows)))


def query_match(pred, gold):
    return _zsql.query_match(json.dumps(pred), json.dumps(gold))


def categorize_errors(pred, gold):
    return _zsql.categorize_errors(json.dumps(pred), json.dumps(gold))


def evaluate(predictions, test, tables, train=None):
    """Accuracy report for a list of predicted queries aligned with a test file."""
    return json.loads(
        _zsql.evaluate(
            json.dumps(list(predictions)),
            os.fspath(test),
            _paths(tables),
            os.fspath(train) if train else "",
        )
    )


class Model:
    """A trained model; build one with :func:`train` or :meth:`Model.load`."""

    def __init__(self, native):
        self._native = native

    @classmethod
    def load(cls, path):
        return cls(_zsql.Model.load(os.fspath(path)))

    def save(self, path):
        self._native.save(os.fspath(path))

    def predict(self, question, headers):
        return json.loads(self._native.predict(question, list(headers)))

    def predict_file(self, test, tables):
        return json.loads(self._native.predict_file(os.fspath(test), _paths(tables)))

    @property
    def config(self):
        return json.loads(self._native.config())

    @property
    def parameter_count(self):
        return self._native.parameter_count


def train(train, tables, dev=None, **settings):
    """Trains on a WikiSQL-format file. Keyword settings use config keys
    (``lstm_hidden=50``, ``max_epochs=5``, ...). Returns (model, log)."""
    native, info = _zsql.train(
        os.fspath(train),
        _paths(tables),
        {k: str(v).lower() if isinstance(v, bool) else str(v) for k, v in settings.items()},
        os.fspath(dev) if dev else "",
    )
    return Model(native), json.loads(info)
