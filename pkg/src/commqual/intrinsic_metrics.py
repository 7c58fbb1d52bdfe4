"""Intrinsic partition quality: modularity, modularity density, and
per-community structural measures.

These need only the network and one partition (no ground truth).  The
partition must live in the network's dense node-id space.  Per-community
inputs are summarized in :class:`CommunityStats`; every metric below is a pure
function of those counts, so sharded evaluation sums the same per-community
contributions in a different grouping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CommunityStats:
    """Edge counts around one community.

    ``in_edges`` counts edges with both endpoints inside, ``out_edges`` edges
    with exactly one endpoint inside.  ``neighbor_edges`` maps neighboring
    community id -> number of connecting edges.  Edges to nodes assigned to no
    community are counted in ``out_edges`` and flagged in ``unassigned_edges``.
    """

    community_id: int
    size: int
    in_edges: int
    out_edges: int
    neighbor_edges: dict = field(default_factory=dict)
    unassigned_edges: int = 0


@dataclass
class CommunityRow:
    """The six per-community measures, plus identifying info."""

    community_id: int
    size: int
    intra_edges: int
    intra_density: float
    contraction: float
    inter_edges: int
    expansion: float
    conductance: float
    degenerate: bool = False  # no incident edges at all; conductance forced to 0


@dataclass
class IntrinsicReport:
    q: float
    qds: float
    total_edges: int
    rows: list

    @property
    def community_count(self):
        return len(self.rows)

    def means(self):
        """Unweighted means of the six measures across communities."""
        k = len(self.rows)
        acc = {"intra_edges": 0.0, "intra_density": 0.0, "contraction": 0.0,
               "inter_edges": 0.0, "expansion": 0.0, "conductance": 0.0}
        for r in self.rows:
            acc["intra_edges"] += r.intra_edges
            acc["intra_density"] += r.intra_density
            acc["contraction"] += r.contraction
            acc["inter_edges"] += r.inter_edges
            acc["expansion"] += r.expansion
            acc["conductance"] += r.conductance
        return {name: val / k for name, val in acc.items()}


def _concat_ranges(starts, ends):
    # indices [s0..e0) ++ [s1..e1) ++ ... as one array
    lens = ends - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    seg = np.repeat(np.arange(lens.size), lens)
    first = np.zeros(lens.size, dtype=np.int64)
    np.cumsum(lens[:-1], out=first[1:])
    pos = np.arange(total, dtype=np.int64) - first[seg]
    return starts[seg] + pos


def community_stats(network, partition, community_ids=None):
    """Gather :class:`CommunityStats` for the given community ids (default all).

    One vectorized pass per community over its incident adjacency rows, so the
    cost is proportional to the total degree of the communities requested.
    """
    if partition.label_space > network.node_count:
        raise ValueError("partition references nodes beyond the network")
    comm_of = np.full(network.node_count, -1, dtype=np.int64)
    for k, members in enumerate(partition.communities):
        comm_of[members] = k

    if community_ids is None:
        community_ids = range(len(partition.communities))

    out = []
    for k in community_ids:
        members = partition.communities[k]
        idx = _concat_ranges(network.indptr[members], network.indptr[members + 1])
        labels = comm_of[network.indices[idx]]
        internal_ends = int(np.count_nonzero(labels == k))
        unassigned = int(np.count_nonzero(labels == -1))
        cross = labels[(labels != k) & (labels >= 0)]
        pairs = {}
        if cross.size:
            ids, cnts = np.unique(cross, return_counts=True)
            pairs = {int(i): int(c) for i, c in zip(ids, cnts)}
        out.append(CommunityStats(
            community_id=int(k),
            size=int(members.size),
            in_edges=internal_ends // 2,
            out_edges=int(labels.size - internal_ends),
            neighbor_edges=pairs,
            unassigned_edges=unassigned,
        ))
    return out


def modularity(stats, total_edges):
    """Q = sum_c [ in_c/m - ((2 in_c + out_c) / 2m)^2 ]."""
    if total_edges <= 0:
        raise ValueError("network has no edges")
    m = float(total_edges)
    q = 0.0
    for s in stats:
        q += s.in_edges / m - ((2 * s.in_edges + s.out_edges) / (2 * m)) ** 2
    return q


def modularity_density(stats, total_edges, sizes=None):
    """Density-weighted modularity with a split penalty.

    Each community's term weighs the modularity contribution by its internal
    pair density and subtracts, per neighboring community, the product of
    shared edge fraction and cross-pair density.  ``sizes`` maps community id
    to size and is required when ``stats`` does not cover all communities;
    single-node communities have internal density 0 by convention.
    """
    if total_edges <= 0:
        raise ValueError("network has no edges")
    if sizes is None:
        sizes = {s.community_id: s.size for s in stats}
    m = float(total_edges)
    total = 0.0
    for s in stats:
        nc = s.size
        d_c = 2.0 * s.in_edges / (nc * (nc - 1)) if nc > 1 else 0.0
        total += s.in_edges / m * d_c
        total -= ((2 * s.in_edges + s.out_edges) / (2 * m) * d_c) ** 2
        for j, e_cc in s.neighbor_edges.items():
            d_cc = e_cc / (nc * float(sizes[j]))
            total -= e_cc / (2 * m) * d_cc
    return total


def community_measures(stats, _total_edges=None):
    """Expand stats into the six per-community measures."""
    rows = []
    for s in stats:
        nc = s.size
        volume = 2 * s.in_edges + s.out_edges
        rows.append(CommunityRow(
            community_id=s.community_id,
            size=nc,
            intra_edges=s.in_edges,
            intra_density=(2.0 * s.in_edges / (nc * (nc - 1)) if nc > 1 else 0.0),
            contraction=2.0 * s.in_edges / nc,
            inter_edges=s.out_edges,
            expansion=s.out_edges / nc,
            conductance=(s.out_edges / volume if volume > 0 else 0.0),
            degenerate=volume == 0,
        ))
    return rows


def intrinsic_report(network, partition):
    """Full sequential evaluation: Q, Qds, and all per-community rows."""
    stats = community_stats(network, partition)
    return IntrinsicReport(
        q=modularity(stats, network.edge_count),
        qds=modularity_density(stats, network.edge_count),
        total_edges=network.edge_count,
        rows=community_measures(stats),
    )
