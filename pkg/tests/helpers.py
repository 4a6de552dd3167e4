"""Small stand-in models and oracles shared by the tests."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from oracle_siege.auth import BudgetExhausted, Decision
from oracle_siege.models.base import Classifier


@dataclass
class RuleModel(Classifier):
    """Binary NO/YES model given by a boolean function of the raw rows."""

    rule: Callable = None
    k: int = 1

    def __post_init__(self):
        if not self.classes:
            self.classes = ["NO", "YES"]

    @property
    def n_features(self):
        return self.k

    def class_scores(self, X):
        yes = np.asarray(self.rule(X), dtype=float)
        return np.column_stack([1.0 - yes, yes])


class FunctionOracle:
    """Stand-in for an :class:`AdversaryOracle` backed by ``accept(claim, row) -> bool``.

    A stream is accepted when a strict majority of its rows are.
    """

    def __init__(self, accept, k, stream_size=1, bounds=None, budget=200):
        self.accept = accept
        self.k = k
        self.stream_size = stream_size
        self.bounds = None if bounds is None else np.asarray(bounds, dtype=float)
        self.budget = budget
        self.count = 0
        self.log = []

    @property
    def remaining(self):
        return self.budget - self.count

    def query(self, claim, stream):
        if self.count >= self.budget:
            raise BudgetExhausted(self.budget)
        stream = np.atleast_2d(stream)
        assert stream.shape == (self.stream_size, self.k)
        self.count += 1
        ok = sum(bool(self.accept(claim, row)) for row in stream) * 2 > len(stream)
        self.log.append((claim, stream.copy(), ok))
        return Decision.YES if ok else Decision.NO
