"""Information-theoretic comparison of two partitions (VI and NMI).

Both metrics are evaluated from a sparse contingency table of community
overlaps.  Logarithms are natural, so VI is reported in nats; use
:func:`nats_to_bits` for a base-2 reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)


@dataclass
class ContingencyTable:
    """Sparse overlap table between a ground partition (rows) and a detected
    partition (columns).  Only nonzero cells are stored."""

    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    row_sizes: np.ndarray
    col_sizes: np.ndarray
    universe_size: int

    @property
    def num_rows(self):
        return self.row_sizes.size

    @property
    def num_cols(self):
        return self.col_sizes.size

    @property
    def total(self):
        return int(self.counts.sum())

    def cells(self):
        """Dict view {(row, col): count}, for small tables and tests."""
        return {(int(r), int(c)): int(n)
                for r, c, n in zip(self.rows, self.cols, self.counts)}

    def transposed(self):
        order = np.lexsort((self.rows, self.cols))
        return ContingencyTable(
            rows=self.cols[order],
            cols=self.rows[order],
            counts=self.counts[order],
            row_sizes=self.col_sizes,
            col_sizes=self.row_sizes,
            universe_size=self.universe_size,
        )


def _row_grouped_sum(rows, terms, num_rows):
    # accumulate per row, then across rows: keeps rounding independent of
    # how many cells a single large community contributes
    partial = np.zeros(num_rows)
    np.add.at(partial, rows, terms)
    return float(partial.sum())


def variation_of_information(table):
    """VI(C, C') = -(1/n) * sum_ij n_ij * log(n_ij^2 / (|c_i| |c'_j|)).

    Zero overlaps contribute nothing (0 log 0 = 0); identical partitions give
    exactly 0.
    """
    n = table.universe_size
    if n <= 0:
        raise ValueError("empty universe")
    ov = table.counts.astype(np.float64)
    denom = table.row_sizes[table.rows] * table.col_sizes[table.cols]
    terms = ov * np.log(ov * ov / denom)
    return -_row_grouped_sum(table.rows, terms, table.num_rows) / n


def mutual_information(table):
    """I(C, C') in nats, from the same overlap table."""
    n = table.universe_size
    if n <= 0:
        raise ValueError("empty universe")
    ov = table.counts.astype(np.float64)
    denom = table.row_sizes[table.rows] * table.col_sizes[table.cols]
    terms = (ov / n) * np.log(ov * n / denom)
    return _row_grouped_sum(table.rows, terms, table.num_rows)


def partition_entropy(sizes, universe_size):
    """H = -sum |c|/n log(|c|/n); zero only for a single all-covering community."""
    p = np.asarray(sizes, dtype=np.float64) / universe_size
    return -float(np.sum(p * np.log(p)))


def normalized_mutual_information(table):
    """NMI(C, C') = 2 I(C, C') / (H(C) + H(C')).

    When both partitions consist of a single community covering the whole
    universe the entropies vanish and the partitions are necessarily
    identical; that degenerate case is defined as 1.0.
    """
    h_rows = partition_entropy(table.row_sizes, table.universe_size)
    h_cols = partition_entropy(table.col_sizes, table.universe_size)
    if h_rows + h_cols == 0.0:
        return 1.0
    return 2.0 * mutual_information(table) / (h_rows + h_cols)


def nats_to_bits(value):
    return value / LN2
