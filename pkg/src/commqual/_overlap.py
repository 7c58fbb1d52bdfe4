"""Vectorized community-overlap scans shared by metric and engine code.

A :class:`CommunityGroup` is a columnar view of several communities: all
member arrays concatenated, with offsets and a parallel array giving each
member's local community index.  Overlap of one community against the whole
group is then a single searchsorted pass plus a bincount, instead of a Python
loop over group communities.
"""

from __future__ import annotations

import numpy as np


class CommunityGroup:
    __slots__ = ("ids", "sizes", "members", "offsets", "member_comm")

    def __init__(self, ids, sizes, members, offsets, member_comm):
        self.ids = ids
        self.sizes = sizes
        self.members = members
        self.offsets = offsets
        self.member_comm = member_comm

    def __len__(self):
        return self.ids.size

    @classmethod
    def from_communities(cls, ids, communities):
        """Compile (ids, member-array list) into columnar form.

        Member arrays must be sorted ascending; community containers built by
        this package always are.
        """
        k = len(communities)
        ids = np.asarray(ids, dtype=np.int64)
        sizes = np.array([c.size for c in communities], dtype=np.int64)
        offsets = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        members = (np.concatenate(communities) if k
                   else np.empty(0, dtype=np.int64))
        member_comm = np.repeat(np.arange(k, dtype=np.int64), sizes)
        return cls(ids, sizes, members, offsets, member_comm)

    def community(self, local_index):
        lo, hi = self.offsets[local_index], self.offsets[local_index + 1]
        return self.members[lo:hi]


def overlap_row(sorted_members, group):
    """Count |c ∩ c'| of one sorted community against every group community.

    Returns an int64 array aligned with ``group.ids``.  Cost is
    O(|group| log |c|), independent of how the group splits into communities.
    """
    k = len(group)
    if k == 0 or sorted_members.size == 0:
        return np.zeros(k, dtype=np.int64)
    pos = np.searchsorted(sorted_members, group.members)
    pos_c = np.minimum(pos, sorted_members.size - 1)
    found = sorted_members[pos_c] == group.members
    return np.bincount(group.member_comm[found], minlength=k)


def group_from_shard(shard_obj):
    return CommunityGroup.from_communities(shard_obj.comm_ids, shard_obj.communities)


def group_from_partition(partition):
    return CommunityGroup.from_communities(
        np.arange(len(partition.communities), dtype=np.int64),
        partition.communities,
    )
