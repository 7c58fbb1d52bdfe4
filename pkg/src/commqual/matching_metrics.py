"""Best-match comparison metrics: F-measure and normalized Van Dongen.

Both reduce to three per-community maxima over the overlap table:

* ``max_normed[i]`` = max_j 2 |c_i ∩ c'_j| / (|c_i| + |c'_j|)
* ``max_t[i]``      = max_j |c_i ∩ c'_j|   (best match of a ground community)
* ``max_d[j]``      = max_i |c_i ∩ c'_j|   (best match of a detected community)

Maxima can be accumulated from any sequence of shard pairs, which is what the
parallel engine does; merging per-worker copies is an element-wise max.
"""

from __future__ import annotations

import numpy as np

from ._overlap import group_from_shard, overlap_row


class MatchMaxima:
    __slots__ = ("max_normed", "max_t", "max_d")

    def __init__(self, max_normed, max_t, max_d):
        self.max_normed = max_normed
        self.max_t = max_t
        self.max_d = max_d

    @classmethod
    def empty(cls, num_ground, num_detected):
        return cls(
            np.zeros(num_ground),
            np.zeros(num_ground, dtype=np.int64),
            np.zeros(num_detected, dtype=np.int64),
        )

    def copy(self):
        return MatchMaxima(self.max_normed.copy(), self.max_t.copy(), self.max_d.copy())

    def merge(self, other):
        return MatchMaxima(
            np.maximum(self.max_normed, other.max_normed),
            np.maximum(self.max_t, other.max_t),
            np.maximum(self.max_d, other.max_d),
        )

    @classmethod
    def from_contingency(cls, table):
        m = cls.empty(table.num_rows, table.num_cols)
        if table.counts.size:
            normed = 2.0 * table.counts / (
                table.row_sizes[table.rows] + table.col_sizes[table.cols])
            np.maximum.at(m.max_normed, table.rows, normed)
            np.maximum.at(m.max_t, table.rows, table.counts)
            np.maximum.at(m.max_d, table.cols, table.counts)
        return m


def update_maxima(maxima, ground_shard, detected_shard):
    """Fold the overlaps of one (ground shard, detected shard) pair into a copy
    of ``maxima`` and return it.

    Scanning every such pair exactly once, in any order, yields the same
    maxima as a single full-partition scan.
    """
    out = maxima.copy()
    if len(detected_shard) == 0 or len(ground_shard) == 0:
        return out
    dgroup = group_from_shard(detected_shard)
    for gid, members in zip(ground_shard.comm_ids, ground_shard.communities):
        ov = overlap_row(members, dgroup)
        nz = np.flatnonzero(ov)
        if nz.size == 0:
            continue
        normed = 2.0 * ov[nz] / (members.size + dgroup.sizes[nz])
        out.max_normed[gid] = max(out.max_normed[gid], float(normed.max()))
        out.max_t[gid] = max(out.max_t[gid], int(ov[nz].max()))
        np.maximum.at(out.max_d, dgroup.ids[nz], ov[nz])
    return out


def f_measure(maxima, ground_sizes, universe_size):
    """Size-weighted mean of each ground community's best normalized match."""
    if universe_size <= 0:
        raise ValueError("empty universe")
    return float(np.dot(ground_sizes, maxima.max_normed)) / universe_size


def nvd(maxima, universe_size):
    """Normalized Van Dongen: 1 - (sum of best matches both ways) / (2n)."""
    if universe_size <= 0:
        raise ValueError("empty universe")
    matched = int(maxima.max_t.sum()) + int(maxima.max_d.sum())
    return 1.0 - matched / (2.0 * universe_size)
