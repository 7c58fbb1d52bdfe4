"""Metric evaluation across the sequential, shared-memory, and ring backends.

Each family follows the same shape: communities are sharded by
``community_id mod num_workers``; shared-memory workers read the full input
copy-on-write while ring workers only ever combine their own shard with
shards received over the ring.  Reduction happens in worker-id order so
repeated runs produce identical results.

All entry points return ``(result, PhaseTiming)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..graph import PartitionShard, build_contingency, local_subgraph, shard
from ..info_metrics import (
    normalized_mutual_information, variation_of_information,
)
from ..matching_metrics import MatchMaxima, f_measure, nvd, update_maxima
from ..pair_metrics import (
    PairCounts, adjusted_rand_index, jaccard_index, pair_counts_fast,
    pair_counts_striped, rand_index,
)
from ..intrinsic_metrics import (
    CommunityStats, community_measures, community_stats, intrinsic_report,
    IntrinsicReport, modularity, modularity_density,
)
from .._overlap import CommunityGroup, group_from_shard, overlap_row
from .transport import (
    RING, SEQ, SHM, BackendConfig, PhaseTiming, WorkerStats, run_workers,
)


@dataclass
class InfoMetrics:
    vi: float
    nmi: float


@dataclass
class MatchingMetrics:
    f_measure: float
    nvd: float


@dataclass
class PairMetrics:
    counts: PairCounts
    rand: float
    adjusted_rand: float
    jaccard: float


def _sequential_timing(compute_s):
    stats = WorkerStats(worker_id=0, total_s=compute_s, compute_s=compute_s)
    return PhaseTiming.from_workers([stats])


def _check_universe(ground, detected):
    if ground.universe_size != detected.universe_size:
        raise ValueError("partitions declare different universe sizes")


def _records_of(shard_obj):
    return list(zip(shard_obj.comm_ids.tolist(), shard_obj.communities))


def _shard_from_records(origin, num_workers, records, universe_size):
    ids = np.array([rid for rid, _ in records], dtype=np.int64)
    return PartitionShard(origin, num_workers, ids,
                          [members for _, members in records], universe_size)


# ---------------------------------------------------------------------------
# Information-theoretic family
# ---------------------------------------------------------------------------


def _entropy_part(sizes, n):
    if len(sizes) == 0:
        return 0.0
    p = np.asarray(sizes, dtype=np.float64) / n
    return -float(np.sum(p * np.log(p)))


def _info_scan(ground_comms, dgroup, n):
    """Accumulate the VI and MI cell terms of the given ground communities
    against a compiled detected group.  Returns (vi_terms, mi_terms)."""
    vi_sum = 0.0
    mi_sum = 0.0
    for members in ground_comms:
        ov = overlap_row(members, dgroup)
        nz = np.flatnonzero(ov)
        if nz.size == 0:
            continue
        o = ov[nz].astype(np.float64)
        denom = members.size * dgroup.sizes[nz].astype(np.float64)
        vi_sum += float(np.sum(o * np.log(o * o / denom)))
        mi_sum += float(np.sum((o / n) * np.log(o * n / denom)))
    return vi_sum, mi_sum


def _info_worker(ctx, ground, detected):
    w, p = ctx.num_workers, ctx.worker_id
    n = ground.universe_size
    with ctx.compute():
        gshard = shard(ground, w, p)
        dshard = shard(detected, w, p)
        h_rows = _entropy_part(gshard.sizes, n)
        h_cols = _entropy_part(dshard.sizes, n)
        if ctx.ring_enabled or w == 1:
            vi_sum, mi_sum = _info_scan(gshard.communities,
                                        group_from_shard(dshard), n)
        else:
            # shared memory: scan own rows against the full detected partition
            full = CommunityGroup.from_communities(
                np.arange(len(detected.communities)), detected.communities)
            vi_sum, mi_sum = _info_scan(gshard.communities, full, n)
    if ctx.ring_enabled or w == 1:
        for _origin, records in ctx.circulate(_records_of(dshard)):
            with ctx.compute():
                fgroup = CommunityGroup.from_communities(
                    [rid for rid, _ in records],
                    [members for _, members in records])
                dv, dm = _info_scan(gshard.communities, fgroup, n)
                vi_sum += dv
                mi_sum += dm
    return {"vi": vi_sum, "mi": mi_sum, "h_rows": h_rows, "h_cols": h_cols}


def run_info_metrics(ground, detected, config=None):
    """VI and NMI of detected against ground truth."""
    config = config or BackendConfig()
    _check_universe(ground, detected)
    n = ground.universe_size

    if config.backend == SEQ:
        t0 = time.perf_counter()
        table = build_contingency(ground, detected)
        result = InfoMetrics(
            vi=variation_of_information(table),
            nmi=normalized_mutual_information(table),
        )
        return result, _sequential_timing(time.perf_counter() - t0)

    out = run_workers(
        _info_worker, (ground, detected), config.num_workers,
        ring=config.backend == RING,
        channel_capacity=config.channel_capacity,
        timer_enabled=config.timer_enabled,
    )
    vi_sum = mi_sum = h_rows = h_cols = 0.0
    for payload, _stats in out:
        vi_sum += payload["vi"]
        mi_sum += payload["mi"]
        h_rows += payload["h_rows"]
        h_cols += payload["h_cols"]
    denom = h_rows + h_cols
    result = InfoMetrics(
        vi=-vi_sum / n,
        nmi=1.0 if denom == 0.0 else 2.0 * mi_sum / denom,
    )
    return result, PhaseTiming.from_workers([s for _, s in out])


# ---------------------------------------------------------------------------
# Best-match family
# ---------------------------------------------------------------------------


def _matching_worker(ctx, ground, detected):
    w, p = ctx.num_workers, ctx.worker_id
    n = ground.universe_size
    with ctx.compute():
        gshard = shard(ground, w, p)
        dshard = shard(detected, w, p)
        m = MatchMaxima.empty(len(ground.communities), len(detected.communities))
        if ctx.ring_enabled or w == 1:
            m = update_maxima(m, gshard, dshard)
        else:
            m = update_maxima(m, gshard, shard(detected, 1, 0))
    if ctx.ring_enabled or w == 1:
        # phase 1: my ground rows against every detected shard
        for origin, records in ctx.circulate(_records_of(dshard)):
            with ctx.compute():
                m = update_maxima(
                    m, gshard, _shard_from_records(origin, w, records, n))
        # phase 2: every ground shard against my detected columns
        for origin, records in ctx.circulate(_records_of(gshard)):
            with ctx.compute():
                m = update_maxima(
                    m, _shard_from_records(origin, w, records, n), dshard)
    return {"max_normed": m.max_normed, "max_t": m.max_t, "max_d": m.max_d}


def run_matching_metrics(ground, detected, config=None):
    """F-measure and normalized Van Dongen distance."""
    config = config or BackendConfig()
    _check_universe(ground, detected)
    n = ground.universe_size

    if config.backend == SEQ:
        t0 = time.perf_counter()
        m = MatchMaxima.from_contingency(build_contingency(ground, detected))
        result = MatchingMetrics(
            f_measure=f_measure(m, ground.sizes, n),
            nvd=nvd(m, n),
        )
        return result, _sequential_timing(time.perf_counter() - t0)

    out = run_workers(
        _matching_worker, (ground, detected), config.num_workers,
        ring=config.backend == RING,
        channel_capacity=config.channel_capacity,
        timer_enabled=config.timer_enabled,
    )
    merged = MatchMaxima.empty(len(ground.communities), len(detected.communities))
    for payload, _stats in out:
        merged = merged.merge(MatchMaxima(
            payload["max_normed"], payload["max_t"], payload["max_d"]))
    result = MatchingMetrics(
        f_measure=f_measure(merged, ground.sizes, n),
        nvd=nvd(merged, n),
    )
    return result, PhaseTiming.from_workers([s for _, s in out])


# ---------------------------------------------------------------------------
# Pair-counting family
# ---------------------------------------------------------------------------


def _choose2(values):
    return int(sum(x * (x - 1) // 2 for x in values))


def _pair_shm_worker(ctx, ground, detected_comm_of, detected_sizes):
    w, p = ctx.num_workers, ctx.worker_id
    with ctx.compute():
        gshard = shard(ground, w, p)
        a11 = 0
        row_pairs = 0
        for members in gshard.communities:
            labels = detected_comm_of[members]
            _, cnt = np.unique(labels, return_counts=True)
            a11 += _choose2(cnt.tolist())
            row_pairs += members.size * (members.size - 1) // 2
        col_pairs = _choose2(
            detected_sizes[p::w].tolist())
    return {"a11": a11, "row_pairs": row_pairs, "col_pairs": col_pairs}


def _pair_brute_worker(ctx, ground_comm_of, detected_comm_of, universe_size):
    from ..graph import NodeCommunityMap
    w, p = ctx.num_workers, ctx.worker_id
    with ctx.compute():
        m1 = NodeCommunityMap(ground_comm_of, universe_size)
        m2 = NodeCommunityMap(detected_comm_of, universe_size)
        counts = pair_counts_striped(m1, m2, num_stripes=w, stripe_id=p)
    return {"a11": counts.a11, "a10": counts.a10,
            "a01": counts.a01, "a00": counts.a00}


def _pair_ring_worker(ctx, ground, detected_comm_of):
    """Ring pair counting under a once-per-pair ownership rule.

    Pairs with both nodes in this worker's ground shard are counted locally
    from exact cell identities.  For a cross-shard pair the worker owning the
    smaller ground community id counts it, using per-detected-label prefix
    sums over its own cells, so remote rounds contribute only to a01/a00.
    """
    w, p = ctx.num_workers, ctx.worker_id
    with ctx.compute():
        gshard = shard(ground, w, p)
        # my nodes as (ground id, detected label) columns
        if len(gshard):
            g_col = np.repeat(gshard.comm_ids, gshard.sizes)
            d_col = detected_comm_of[np.concatenate(gshard.communities)]
        else:
            g_col = np.empty(0, dtype=np.int64)
            d_col = np.empty(0, dtype=np.int64)

        a11 = a10 = a01 = a00 = 0
        # exact cell counts (g, d) -> n_gd for my shard
        if g_col.size:
            width = int(d_col.max()) + 1
            uniq, cell_cnt = np.unique(g_col * width + d_col, return_counts=True)
            cell_g = uniq // width
            cell_d = uniq % width
            a11 = _choose2(cell_cnt.tolist())
            row_pairs = _choose2(gshard.sizes.tolist())
            a10 = row_pairs - a11
            # same-detected pairs across two of my ground communities
            my_total = int(g_col.size)
            same_d_within = 0
            for d in np.unique(cell_d).tolist():
                seg = cell_cnt[cell_d == d]
                t = int(seg.sum())
                same_d_within += (t * t - int((seg * seg).sum())) // 2
            cross_within = (my_total * my_total - int((gshard.sizes ** 2).sum())) // 2
            a01 = same_d_within
            a00 = cross_within - same_d_within
            # prefix structures for the ownership rule (my g < foreign g)
            my_g_ids = gshard.comm_ids
            cum_all = np.zeros(my_g_ids.size + 1, dtype=np.int64)
            np.cumsum(gshard.sizes, out=cum_all[1:])
            per_d = {}
            order = np.lexsort((cell_g, cell_d))
            dg, gg, cc = cell_d[order], cell_g[order], cell_cnt[order]
            starts = np.flatnonzero(np.diff(dg)) + 1
            for seg_d, seg_g, seg_c in zip(
                    np.split(dg, starts), np.split(gg, starts), np.split(cc, starts)):
                cum = np.zeros(seg_g.size + 1, dtype=np.int64)
                np.cumsum(seg_c, out=cum[1:])
                per_d[int(seg_d[0])] = (seg_g, cum)
        else:
            my_g_ids = np.empty(0, dtype=np.int64)
            cum_all = np.zeros(1, dtype=np.int64)
            per_d = {}

        # my records: per ground community, the detected labels of its members
        records = []
        for gid, members in zip(gshard.comm_ids.tolist(), gshard.communities):
            records.append((gid, detected_comm_of[members]))

    for _origin, foreign in ctx.circulate(records):
        with ctx.compute():
            for gid, labels in foreign:
                # nodes of mine in ground communities with id < foreign gid
                sel = int(cum_all[np.searchsorted(my_g_ids, gid)])
                if sel == 0:
                    continue
                same = 0
                uniq_d, cnt_d = np.unique(labels, return_counts=True)
                for d, c in zip(uniq_d.tolist(), cnt_d.tolist()):
                    seg = per_d.get(d)
                    if seg is not None:
                        seg_g, cum = seg
                        same += c * int(cum[np.searchsorted(seg_g, gid)])
                a01 += same
                a00 += labels.size * sel - same
    return {"a11": a11, "a10": a10, "a01": a01, "a00": a00}


def _require_full_coverage(ground, detected):
    gmap = ground.node_map()
    dmap = detected.node_map()
    gc, dc = gmap.covered_nodes(), dmap.covered_nodes()
    if not np.array_equal(gc, dc):
        raise ValueError("partitions cover different node sets")
    if gc.size != ground.universe_size:
        raise ValueError("pair metrics require full universe coverage")
    return gmap, dmap


def run_pair_metrics(ground, detected, config=None, method="fast"):
    """Pair confusion counts and the Rand, adjusted Rand, Jaccard indices.

    ``method="bruteforce"`` switches the seq and shm backends to the striped
    all-pairs scan (the ring backend has its own record-circulation scheme
    and rejects it).
    """
    config = config or BackendConfig()
    _check_universe(ground, detected)
    if method not in ("fast", "bruteforce"):
        raise ValueError(f"unknown pair-counting method {method!r}")
    gmap, dmap = _require_full_coverage(ground, detected)
    n = ground.universe_size

    if config.backend == SEQ:
        t0 = time.perf_counter()
        if method == "bruteforce":
            counts = pair_counts_striped(gmap, dmap)
        else:
            counts = pair_counts_fast(build_contingency(ground, detected))
        return _pair_result(counts), _sequential_timing(time.perf_counter() - t0)

    if config.backend == SHM and method == "bruteforce":
        out = run_workers(
            _pair_brute_worker, (gmap.comm_of, dmap.comm_of, n),
            config.num_workers, timer_enabled=config.timer_enabled)
        counts = PairCounts(0, 0, 0, 0)
        for payload, _stats in out:
            counts = counts + PairCounts(payload["a11"], payload["a10"],
                                         payload["a01"], payload["a00"])
        return _pair_result(counts), PhaseTiming.from_workers([s for _, s in out])

    if config.backend == SHM:
        out = run_workers(
            _pair_shm_worker, (ground, dmap.comm_of, detected.sizes),
            config.num_workers, timer_enabled=config.timer_enabled)
        a11 = sum(payload["a11"] for payload, _ in out)
        row_pairs = sum(payload["row_pairs"] for payload, _ in out)
        col_pairs = sum(payload["col_pairs"] for payload, _ in out)
        total = n * (n - 1) // 2
        counts = PairCounts(a11, row_pairs - a11, col_pairs - a11,
                            total - row_pairs - col_pairs + a11)
        return _pair_result(counts), PhaseTiming.from_workers([s for _, s in out])

    if method == "bruteforce":
        raise ValueError("the ring backend has no brute-force mode")
    out = run_workers(
        _pair_ring_worker, (ground, dmap.comm_of), config.num_workers,
        ring=True, channel_capacity=config.channel_capacity,
        timer_enabled=config.timer_enabled)
    counts = PairCounts(0, 0, 0, 0)
    for payload, _stats in out:
        counts = counts + PairCounts(payload["a11"], payload["a10"],
                                     payload["a01"], payload["a00"])
    return _pair_result(counts), PhaseTiming.from_workers([s for _, s in out])


def _pair_result(counts):
    return PairMetrics(
        counts=counts,
        rand=rand_index(counts),
        adjusted_rand=adjusted_rand_index(counts),
        jaccard=jaccard_index(counts),
    )


# ---------------------------------------------------------------------------
# Intrinsic family
# ---------------------------------------------------------------------------


def _intrinsic_worker(ctx, network, partition, use_subgraph):
    w, p = ctx.num_workers, ctx.worker_id
    m = network.edge_count
    sizes = partition.sizes
    with ctx.compute():
        own_ids = list(range(p, len(partition.communities), w))
        if use_subgraph and w > 1:
            sh = shard(partition, w, p)
            sub = local_subgraph(network, sh)
            if sub.node_count:
                comm_of_sub = _scatter_comm_of(partition, network.node_count)[sub.orig_ids]
                stats = []
                for gid, members in zip(sh.comm_ids.tolist(), sh.communities):
                    local = np.searchsorted(sub.orig_ids, members)
                    stats.append(_stats_one(sub, comm_of_sub, gid, local))
            else:
                stats = []
        else:
            stats = community_stats(network, partition, community_ids=own_ids)
        q_part = modularity(stats, m) if stats else 0.0
        qds_part = modularity_density(stats, m, sizes=sizes) if stats else 0.0
        ids = np.array([s.community_id for s in stats], dtype=np.int64)
        size_arr = np.array([s.size for s in stats], dtype=np.int64)
        in_arr = np.array([s.in_edges for s in stats], dtype=np.int64)
        out_arr = np.array([s.out_edges for s in stats], dtype=np.int64)
        un_arr = np.array([s.unassigned_edges for s in stats], dtype=np.int64)
    # communication free even on the ring backend: no circulation is opened
    return {"q": q_part, "qds": qds_part, "ids": ids, "size": size_arr,
            "in_edges": in_arr, "out_edges": out_arr, "unassigned": un_arr}


def _scatter_comm_of(partition, node_count):
    comm_of = np.full(node_count, -1, dtype=np.int64)
    for k, members in enumerate(partition.communities):
        comm_of[members] = k
    return comm_of


def _stats_one(network, comm_of, community_id, members_local):
    from ..intrinsic_metrics import _concat_ranges
    idx = _concat_ranges(network.indptr[members_local],
                         network.indptr[members_local + 1])
    labels = comm_of[network.indices[idx]]
    internal_ends = int(np.count_nonzero(labels == community_id))
    unassigned = int(np.count_nonzero(labels == -1))
    cross = labels[(labels != community_id) & (labels >= 0)]
    pairs = {}
    if cross.size:
        ids, cnts = np.unique(cross, return_counts=True)
        pairs = {int(i): int(c) for i, c in zip(ids, cnts)}
    return CommunityStats(
        community_id=int(community_id),
        size=int(members_local.size),
        in_edges=internal_ends // 2,
        out_edges=int(labels.size - internal_ends),
        neighbor_edges=pairs,
        unassigned_edges=unassigned,
    )


def run_intrinsic_metrics(network, partition, config=None):
    """Modularity, modularity density, and the per-community measures."""
    config = config or BackendConfig()
    if partition.label_space > network.node_count:
        raise ValueError("partition references nodes beyond the network")
    if network.edge_count <= 0:
        raise ValueError("network has no edges")

    if config.backend == SEQ:
        t0 = time.perf_counter()
        report = intrinsic_report(network, partition)
        return report, _sequential_timing(time.perf_counter() - t0)

    out = run_workers(
        _intrinsic_worker,
        (network, partition, config.backend == RING),
        config.num_workers,
        ring=config.backend == RING,
        channel_capacity=config.channel_capacity,
        timer_enabled=config.timer_enabled,
    )
    q = sum(payload["q"] for payload, _ in out)
    qds = sum(payload["qds"] for payload, _ in out)
    ids = np.concatenate([payload["ids"] for payload, _ in out])
    size = np.concatenate([payload["size"] for payload, _ in out])
    inn = np.concatenate([payload["in_edges"] for payload, _ in out])
    outd = np.concatenate([payload["out_edges"] for payload, _ in out])
    una = np.concatenate([payload["unassigned"] for payload, _ in out])
    order = np.argsort(ids)
    stats = [
        CommunityStats(int(ids[i]), int(size[i]), int(inn[i]), int(outd[i]),
                       neighbor_edges={}, unassigned_edges=int(una[i]))
        for i in order
    ]
    report = IntrinsicReport(
        q=q, qds=qds, total_edges=network.edge_count,
        rows=community_measures(stats),
    )
    return report, PhaseTiming.from_workers([s for _, s in out])
