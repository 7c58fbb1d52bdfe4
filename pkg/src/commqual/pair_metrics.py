"""Pair-counting agreement metrics: Rand, adjusted Rand, Jaccard.

All three derive from the node-pair confusion counts

* ``a11`` pairs together in both partitions
* ``a10`` together in the first only
* ``a01`` together in the second only
* ``a00`` together in neither

over all n(n-1)/2 unordered pairs.  Counts are exact Python integers.
Pair metrics require both partitions to cover the full universe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateIndexError(ValueError):
    """The index's denominator vanished for a non-trivial reason."""


@dataclass(frozen=True)
class PairCounts:
    a11: int
    a10: int
    a01: int
    a00: int

    @property
    def total(self):
        return self.a11 + self.a10 + self.a01 + self.a00

    def __add__(self, other):
        return PairCounts(self.a11 + other.a11, self.a10 + other.a10,
                          self.a01 + other.a01, self.a00 + other.a00)

    def as_tuple(self):
        return (self.a11, self.a10, self.a01, self.a00)


def _covered_labels(map1, map2):
    c1 = map1.covered_nodes()
    c2 = map2.covered_nodes()
    if not np.array_equal(c1, c2):
        raise ValueError("partitions cover different node sets")
    if c1.size != map1.universe_size:
        raise ValueError("pair counting requires full universe coverage")
    return map1.comm_of[c1], map2.comm_of[c1]


def pair_counts_bruteforce(map1, map2):
    """Literal double loop over all unordered node pairs.  O(n^2); reference
    implementation for small inputs."""
    g, d = _covered_labels(map1, map2)
    gl, dl = g.tolist(), d.tolist()
    n = len(gl)
    a11 = a10 = a01 = a00 = 0
    for i in range(n - 1):
        gi, di = gl[i], dl[i]
        for j in range(i + 1, n):
            same_g = gl[j] == gi
            same_d = dl[j] == di
            if same_g:
                if same_d:
                    a11 += 1
                else:
                    a10 += 1
            elif same_d:
                a01 += 1
            else:
                a00 += 1
    return PairCounts(a11, a10, a01, a00)


def pair_counts_striped(map1, map2, num_stripes=1, stripe_id=0):
    """Row-striped pair scan: rows i with i % num_stripes == stripe_id, each
    row comparing node i against all j > i (vectorized).

    Summing the partial counts over all stripes reproduces the full counts
    exactly.
    """
    if num_stripes <= 0:
        raise ValueError("num_stripes must be positive")
    if not 0 <= stripe_id < num_stripes:
        raise ValueError("stripe_id out of range")
    g, d = _covered_labels(map1, map2)
    n = g.size
    width = int(d.max()) + 1 if n else 1
    combo = g * width + d
    if combo.size and int(combo.max()) < 2**31:
        combo = combo.astype(np.int32)
        g = g.astype(np.int32)
        d = d.astype(np.int32)
    a11 = a10 = a01 = a00 = 0
    for i in range(stripe_id, n - 1, num_stripes):
        tg = g[i + 1:]
        td = d[i + 1:]
        both = int(np.count_nonzero(combo[i + 1:] == combo[i]))
        sg = int(np.count_nonzero(tg == g[i]))
        sd = int(np.count_nonzero(td == d[i]))
        rest = n - 1 - i
        a11 += both
        a10 += sg - both
        a01 += sd - both
        a00 += rest - sg - sd + both
    return PairCounts(a11, a10, a01, a00)


def pair_counts_fast(table):
    """Closed-form counts from the contingency table.

    a11 and the marginal pair totals are sums of binomial(x, 2) over cells and
    community sizes; a00 is the complement.  O(nonzero cells).
    """
    if table.total != table.universe_size:
        raise ValueError("pair counting requires full universe coverage")

    def choose2(arr):
        return int(sum(x * (x - 1) // 2 for x in arr.tolist()))

    a11 = choose2(table.counts)
    rows_pairs = choose2(table.row_sizes)
    cols_pairs = choose2(table.col_sizes)
    n = table.universe_size
    total = n * (n - 1) // 2
    a10 = rows_pairs - a11
    a01 = cols_pairs - a11
    a00 = total - a11 - a10 - a01
    return PairCounts(a11, a10, a01, a00)


def rand_index(counts):
    """(a11 + a00) / total; agreement fraction over all pairs."""
    if counts.total <= 0:
        raise ValueError("no node pairs to count")
    return (counts.a11 + counts.a00) / counts.total


def adjusted_rand_index(counts):
    """Rand index corrected for chance.

    Denominator zero happens only in full-agreement corner cases (both
    partitions all-singletons or both one block); those score 1.0.  Any other
    vanishing denominator is reported as degenerate.
    """
    if counts.total <= 0:
        raise ValueError("no node pairs to count")
    a11, a10, a01 = counts.a11, counts.a10, counts.a01
    expected = (a11 + a10) * (a11 + a01) / counts.total
    denom = 0.5 * ((a11 + a10) + (a11 + a01)) - expected
    if denom == 0.0:
        if a10 == 0 and a01 == 0:
            return 1.0
        raise DegenerateIndexError("adjusted Rand denominator is zero")
    return (a11 - expected) / denom


def jaccard_index(counts):
    """a11 / (a11 + a10 + a01); both-singleton partitions score 1.0."""
    if counts.total <= 0:
        raise ValueError("no node pairs to count")
    denom = counts.a11 + counts.a10 + counts.a01
    if denom == 0:
        return 1.0
    return counts.a11 / denom
