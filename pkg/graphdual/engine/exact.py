# graphdual/engine/exact.py
from __future__ import annotations
from fractions import Fraction
from typing import Sequence

from graphdual.core.errors import SimulationError

SparseRow = dict[int, Fraction]


class SparseRationalSystem:
    """
    Exact Gaussian elimination over ``Fraction`` on row dictionaries.

    Columns are pivoted in index order; among the rows still holding a
    column, the one with the fewest entries is taken as pivot, which keeps
    fill-in low on the banded collision systems.
    """

    def __init__(self, rows: Sequence[SparseRow], rhs: Sequence[Fraction]):
        if len(rows) != len(rhs):
            raise ValueError("rows and rhs differ in length")
        self.size = len(rows)
        self.rows: list[SparseRow] = [{c: Fraction(v) for c, v in row.items() if v != 0} for row in rows]
        self.rhs: list[Fraction] = [Fraction(v) for v in rhs]
        self.columns: list[set[int]] = [set() for _ in range(self.size)]
        for i, row in enumerate(self.rows):
            for c in row:
                self.columns[c].add(i)

    def solve(self) -> list[Fraction]:
        rows, rhs, columns = self.rows, self.rhs, self.columns
        free = set(range(self.size))
        pivot_of: list[int] = [-1] * self.size

        for k in range(self.size):
            holders = [i for i in columns[k] if i in free]
            if not holders:
                raise SimulationError(f"singular rational system at column {k}")
            p = min(holders, key=lambda i: (len(rows[i]), i))
            free.discard(p)
            pivot_of[k] = p
            prow = rows[p]
            pval = prow[k]
            for i in holders:
                if i == p:
                    continue
                row = rows[i]
                factor = row[k] / pval
                for c, v in prow.items():
                    nv = row.get(c, 0) - factor * v
                    if nv:
                        if c not in row:
                            columns[c].add(i)
                        row[c] = nv
                    elif c in row:
                        del row[c]
                        columns[c].discard(i)
                rhs[i] -= factor * rhs[p]

        x: list[Fraction] = [Fraction(0)] * self.size
        for k in reversed(range(self.size)):
            p = pivot_of[k]
            acc = rhs[p]
            for c, v in rows[p].items():
                if c != k:
                    acc -= v * x[c]
            x[k] = acc / rows[p][k]
        return x


def solve_rational(rows: Sequence[SparseRow], rhs: Sequence[Fraction]) -> list[Fraction]:
    return SparseRationalSystem(rows, rhs).solve()
