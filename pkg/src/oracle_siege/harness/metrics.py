"""Coverage matrices and the masquerade metrics computed from them."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class Cell:
    success: bool
    queries: int | None = None
    internal_confidence: float | None = None
    accepted: str | None = None
    error: str | None = None


@dataclass
class CoverageMatrix:
    """Adversaries by victims over one participating principal set.

    Diagonal cells hold self-authentication with hold-out data and never
    count toward masquerade.
    """

    principals: list[str]
    cells: dict = field(default_factory=dict)  # (adversary, victim) -> Cell

    def __getitem__(self, key) -> Cell | None:
        return self.cells.get(key)

    def __setitem__(self, key, cell: Cell):
        a, v = key
        if a not in self.principals or v not in self.principals:
            raise KeyError(f"{key} is outside the participating set")
        self.cells[key] = cell

    def off_diagonal(self):
        for (a, v), cell in self.cells.items():
            if a != v:
                yield a, v, cell

    def diagonal(self) -> dict[str, Cell]:
        return {a: self.cells[(a, a)] for a in self.principals if (a, a) in self.cells}

    def to_json(self) -> dict:
        rows = []
        for a in self.principals:
            for v in self.principals:
                cell = self.cells.get((a, v))
                if cell is not None:
                    rows.append({"adversary": a, "victim": v, **asdict(cell)})
        return {"principals": list(self.principals), "cells": rows}

    @classmethod
    def from_json(cls, data: dict) -> "CoverageMatrix":
        m = cls(list(data["principals"]))
        for row in data["cells"]:
            row = dict(row)
            a, v = row.pop("adversary"), row.pop("victim")
            m[(a, v)] = Cell(**row)
        return m


@dataclass
class MetricsReport:
    p_of_m: float
    mean_queries: float | None
    std_queries: float | None
    distinct_victims_hit: int
    adversary_success_rate: float
    successful_pairs: int
    attempted_pairs: int
    queries_spent_total: int

    def to_json(self) -> dict:
        return asdict(self)


def compute_metrics(matrix: CoverageMatrix, population) -> MetricsReport:
    """P(M) = |victims compromised by at least one adversary| / |population|.

    Query statistics cover successful cells only.
    """
    population = list(population)
    hits = [(a, v, c) for a, v, c in matrix.off_diagonal() if c.success]
    victims = {v for _, v, _ in hits}
    adversaries = {a for a, _, _ in hits}
    q = np.array([c.queries for _, _, c in hits if c.queries is not None], dtype=float)
    attempted = list(matrix.off_diagonal())
    return MetricsReport(
        p_of_m=len(victims) / len(population) if population else 0.0,
        mean_queries=float(q.mean()) if len(q) else None,
        std_queries=float(q.std()) if len(q) else None,
        distinct_victims_hit=len(victims),
        adversary_success_rate=len(adversaries) / len(population) if population else 0.0,
        successful_pairs=len(hits),
        attempted_pairs=len(attempted),
        queries_spent_total=int(sum(c.queries or 0 for _, _, c in attempted)),
    )
