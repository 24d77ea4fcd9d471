"""Batch per-replication kernels.

Each kernel takes a ``(reps, items)`` cost matrix and returns a ``(reps, 3)``
array with columns ``cstar``, ``vcg`` (total VCG cost) and ``sumsq`` (sum of
squared costs over the selected basis).  ``vcg`` is ``inf`` when a selected
item has no replacement.

Loop kernels are compiled by numba unless ``VCG_LAB_DISABLE_NUMBA`` is set
(see :mod:`vcglab._accel`); the uniform-matroid kernel then switches to a
vectorized numpy path and the graphic kernels run interpreted.
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, njit

CSTAR, VCG, SUMSQ = 0, 1, 2


@njit
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit
def _kruskal(order, eu, ev, nv, costs, skip, first, parent, picked):
    """Greedy on a graphic matroid.

    Edges are scanned in ``order`` except that ``first`` (if >= 0) is scanned
    before all others at cost 0 and ``skip`` (if >= 0) is never taken.
    Writes chosen edges into ``picked`` and returns ``(count, cost)``.
    """
    for i in range(nv):
        parent[i] = i
    count = 0
    total = 0.0
    if first >= 0:
        parent[_find(parent, eu[first])] = _find(parent, ev[first])
        if eu[first] != ev[first]:
            picked[count] = first
            count += 1
    for idx in range(order.shape[0]):
        e = order[idx]
        if e == skip or e == first:
            continue
        ru = _find(parent, eu[e])
        rv = _find(parent, ev[e])
        if ru != rv:
            parent[ru] = rv
            picked[count] = e
            count += 1
            total += costs[e]
            if count == nv - 1:
                break
    return count, total


@njit
def graphic_batch_definition(costs, eu, ev, nv):
    """Thresholds by re-running greedy with each selected edge excluded / zeroed."""
    reps, m = costs.shape
    out = np.empty((reps, 3))
    parent = np.empty(nv, dtype=np.int64)
    tree = np.empty(nv, dtype=np.int64)
    scratch = np.empty(nv, dtype=np.int64)
    for r in range(reps):
        c = costs[r]
        order = np.argsort(c, kind="mergesort")
        count, cstar = _kruskal(order, eu, ev, nv, c, -1, -1, parent, tree)
        vcg = 0.0
        sumsq = 0.0
        for j in range(count):
            a = tree[j]
            sumsq += c[a] * c[a]
            n_inf, c_inf = _kruskal(order, eu, ev, nv, c, a, -1, parent, scratch)
            if n_inf < count:
                vcg = np.inf
                continue
            _, c_zero = _kruskal(order, eu, ev, nv, c, -1, a, parent, scratch)
            vcg += c_inf - c_zero
        out[r, 0] = cstar
        out[r, 1] = vcg
        out[r, 2] = sumsq
    return out


@njit
def graphic_batch_replacement(costs, eu, ev, nv):
    """Thresholds from replacement edges: for each tree edge, the cheapest
    non-tree edge whose tree path covers it.  Non-tree edges are processed in
    ascending cost and covered tree edges are contracted, so each tree edge is
    assigned once.  Requires a connected graph.

    The two greedy totals behind each threshold are then summed in the order
    greedy would add them, so the output is bit-identical to
    :func:`graphic_batch_definition`.
    """
    reps, m = costs.shape
    out = np.empty((reps, 3))
    parent = np.empty(nv, dtype=np.int64)
    tree = np.empty(nv, dtype=np.int64)
    in_tree = np.zeros(m, dtype=np.bool_)
    rep = np.empty(m, dtype=np.int64)
    pos = np.empty(m, dtype=np.int64)
    # tree adjacency as CSR built per replication
    deg = np.empty(nv + 1, dtype=np.int64)
    adj = np.empty(2 * nv, dtype=np.int64)
    adj_e = np.empty(2 * nv, dtype=np.int64)
    up = np.empty(nv, dtype=np.int64)
    par_v = np.empty(nv, dtype=np.int64)
    par_e = np.empty(nv, dtype=np.int64)
    depth = np.empty(nv, dtype=np.int64)
    stack = np.empty(nv, dtype=np.int64)
    for r in range(reps):
        c = costs[r]
        order = np.argsort(c, kind="mergesort")
        count, cstar = _kruskal(order, eu, ev, nv, c, -1, -1, parent, tree)
        for e in range(m):
            in_tree[e] = False
            pos[order[e]] = e
        deg[:] = 0
        for j in range(count):
            e = tree[j]
            in_tree[e] = True
            rep[e] = -1
            deg[eu[e] + 1] += 1
            deg[ev[e] + 1] += 1
        for i in range(nv):
            deg[i + 1] += deg[i]
        fill = deg[:nv].copy()
        for j in range(count):
            e = tree[j]
            adj[fill[eu[e]]] = ev[e]
            adj_e[fill[eu[e]]] = e
            fill[eu[e]] += 1
            adj[fill[ev[e]]] = eu[e]
            adj_e[fill[ev[e]]] = e
            fill[ev[e]] += 1
        # root the tree at vertex 0
        for i in range(nv):
            depth[i] = -1
            up[i] = i
        depth[0] = 0
        par_v[0] = 0
        par_e[0] = -1
        top = 0
        stack[0] = 0
        while top >= 0:
            x = stack[top]
            top -= 1
            for p in range(deg[x], deg[x + 1]):
                y = adj[p]
                if depth[y] < 0:
                    depth[y] = depth[x] + 1
                    par_v[y] = x
                    par_e[y] = adj_e[p]
                    top += 1
                    stack[top] = y
        for idx in range(m):
            e = order[idx]
            if in_tree[e]:
                continue
            x = _find(up, eu[e])
            y = _find(up, ev[e])
            while x != y:
                if depth[x] < depth[y]:
                    x, y = y, x
                rep[par_e[x]] = e
                up[x] = par_v[x]
                x = _find(up, x)
        vcg = 0.0
        sumsq = 0.0
        for j in range(count):
            a = tree[j]
            sumsq += c[a] * c[a]
            f = rep[a]
            if f < 0:
                vcg = np.inf
                continue
            # greedy without a takes the tree minus a plus f; with a free it keeps the tree
            c_inf = 0.0
            c_zero = 0.0
            pending = True
            for i in range(count):
                if i == j:
                    continue
                e = tree[i]
                if pending and pos[e] > pos[f]:
                    c_inf += c[f]
                    pending = False
                c_inf += c[e]
                c_zero += c[e]
            if pending:
                c_inf += c[f]
            vcg += c_inf - c_zero
        out[r, 0] = cstar
        out[r, 1] = vcg
        out[r, 2] = sumsq
    return out


@njit
def _uniform_loop(costs, k):
    reps, m = costs.shape
    out = np.empty((reps, 3))
    order = np.empty(m, dtype=np.int64)
    for r in range(reps):
        c = costs[r]
        if m <= 32:
            # stable insertion sort into a reused buffer; same order as mergesort
            for i in range(m):
                x = c[i]
                j = i
                while j > 0 and c[order[j - 1]] > x:
                    order[j] = order[j - 1]
                    j -= 1
                order[j] = i
        else:
            order = np.argsort(c, kind="mergesort")
        cstar = 0.0
        sumsq = 0.0
        for j in range(k):
            cstar += c[order[j]]
            sumsq += c[order[j]] * c[order[j]]
        vcg = 0.0
        for j in range(k):
            a = order[j]
            # greedy without a: first k of the remaining order
            c_inf = 0.0
            taken = 0
            for idx in range(m):
                b = order[idx]
                if b == a:
                    continue
                c_inf += c[b]
                taken += 1
                if taken == k:
                    break
            if taken < k:
                vcg = np.inf
                break
            # greedy with a at cost 0: a first, then k-1 of the rest
            c_zero = 0.0
            taken = 1
            for idx in range(m):
                if taken == k:
                    break
                b = order[idx]
                if b == a:
                    continue
                c_zero += c[b]
                taken += 1
            vcg += c_inf - c_zero
        out[r, 0] = cstar
        out[r, 1] = vcg
        out[r, 2] = sumsq
    return out


def _uniform_numpy(costs, k):
    reps, m = costs.shape
    srt = np.sort(costs, axis=1)
    sel = srt[:, :k]
    out = np.empty((reps, 3))
    out[:, CSTAR] = sel.sum(axis=1)
    out[:, SUMSQ] = (sel * sel).sum(axis=1)
    if k >= m:
        out[:, VCG] = np.inf
    else:
        # excluding a selected a brings in the (k+1)-th cheapest
        c_inf = out[:, CSTAR, None] - sel + srt[:, k, None]
        c_zero = out[:, CSTAR, None] - sel
        out[:, VCG] = (c_inf - c_zero).sum(axis=1)
    return out


def uniform_batch(costs, k):
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    if NUMBA_ENABLED:
        return _uniform_loop(costs, int(k))
    return _uniform_numpy(costs, int(k))


def family_batch(costs, incidence, chunk=65536):
    """Definition-level VCG for an explicit family, vectorized over replications."""
    costs = np.asarray(costs, dtype=np.float64)
    inc = np.asarray(incidence, dtype=np.float64)
    reps, m = costs.shape
    out = np.empty((reps, 3))
    member = inc.astype(bool)
    for lo in range(0, reps, chunk):
        c = costs[lo:lo + chunk]
        sc = c @ inc.T                                   # (R, S) structure costs
        best = np.argmin(sc, axis=1)
        cstar = sc[np.arange(len(c)), best]
        sel = member[best]                               # (R, m) selected items
        vcg = np.zeros(len(c))
        for a in range(m):
            without = np.where(member[:, a], np.inf, sc).min(axis=1)
            zeroed = (sc - np.outer(c[:, a], inc[:, a])).min(axis=1)
            thr = without - zeroed
            vcg += np.where(sel[:, a], thr, 0.0)
        out[lo:lo + chunk, CSTAR] = cstar
        out[lo:lo + chunk, VCG] = vcg
        out[lo:lo + chunk, SUMSQ] = np.where(sel, c * c, 0.0).sum(axis=1)
    return out


@njit
def graphic_rank_bridges(costs, eu, ev, nv, tvals):
    """Rank and bridge count of ``A(t)`` for each replication and each ``t``."""
    reps, m = costs.shape
    nt = tvals.shape[0]
    ranks = np.empty((reps, nt), dtype=np.int64)
    brs = np.empty((reps, nt), dtype=np.int64)
    parent = np.empty(nv, dtype=np.int64)
    for r in range(reps):
        c = costs[r]
        for it in range(nt):
            t = tvals[it]
            for i in range(nv):
                parent[i] = i
            rk = 0
            for e in range(m):
                if c[e] <= t:
                    ru = _find(parent, eu[e])
                    rv = _find(parent, ev[e])
                    if ru != rv:
                        parent[ru] = rv
                        rk += 1
            nb = 0
            for a in range(m):
                if c[a] > t:
                    continue
                for i in range(nv):
                    parent[i] = i
                rk2 = 0
                for e in range(m):
                    if e != a and c[e] <= t:
                        ru = _find(parent, eu[e])
                        rv = _find(parent, ev[e])
                        if ru != rv:
                            parent[ru] = rv
                            rk2 += 1
                if rk2 < rk:
                    nb += 1
            ranks[r, it] = rk
            brs[r, it] = nb
    return ranks, brs


def uniform_rank_bridges(costs, k, tvals):
    """Rank ``min(|A(t)|, k)``; every element of ``A(t)`` is a bridge iff ``|A(t)| <= k``."""
    counts = (np.asarray(costs)[:, None, :] <= np.asarray(tvals)[None, :, None]).sum(axis=2)
    ranks = np.minimum(counts, k)
    brs = np.where(counts <= k, counts, 0)
    return ranks, brs


@njit
def _greedy_masked(order, costs, eu, ev, nv, k, graphic, full, excl, zero, parent):
    """Greedy on a uniform (``graphic=False``, rank ``k``) or graphic matroid
    with bitmask edits: ``zero`` items cost 0, ``excl`` items are unavailable.
    Returns the cost, or ``inf`` when fewer than ``full`` elements fit."""
    m = costs.shape[0]
    for i in range(nv):
        parent[i] = i
    count = 0
    total = 0.0
    # zeroed items and genuine zero costs first, by index
    for a in range(m):
        if count == full:
            break
        if ((zero >> a) & 1 or costs[a] == 0.0) and not (excl >> a) & 1:
            if graphic:
                ru = _find(parent, eu[a])
                rv = _find(parent, ev[a])
                if ru == rv:
                    continue
                parent[ru] = rv
            elif count >= k:
                continue
            count += 1
    for idx in range(m):
        if count == full:
            break
        a = order[idx]
        if (zero >> a) & 1 or costs[a] == 0.0 or (excl >> a) & 1:
            continue
        if graphic:
            ru = _find(parent, eu[a])
            rv = _find(parent, ev[a])
            if ru == rv:
                continue
            parent[ru] = rv
        elif count >= k:
            continue
        count += 1
        total += costs[a]
    if count < full:
        return np.inf
    return total


@njit
def extended_sweep(costs, eu, ev, nv, k, graphic, full, masks):
    """Extended thresholds ``v(F, a)`` for every ``F`` in ``masks`` (bitmasks)
    and every ``a`` in ``F``; entries for ``a`` outside ``F`` are NaN."""
    m = costs.shape[0]
    order = np.argsort(costs, kind="mergesort")
    parent = np.empty(max(nv, 1), dtype=np.int64)
    out = np.full((masks.shape[0], m), np.nan)
    for i in range(masks.shape[0]):
        f = masks[i]
        lo = _greedy_masked(order, costs, eu, ev, nv, k, graphic, full, 0, f, parent)
        for a in range(m):
            if (f >> a) & 1:
                bit = np.int64(1) << a
                hi = _greedy_masked(order, costs, eu, ev, nv, k, graphic, full, bit, f & ~bit, parent)
                out[i, a] = hi - lo if hi < np.inf else np.inf
    return out


@njit
def extended_sweep_batch(costs, eu, ev, nv, k, graphic, full, masks):
    """:func:`extended_sweep` for every row of a ``(reps, m)`` cost matrix."""
    reps, m = costs.shape
    out = np.empty((reps, masks.shape[0], m))
    for r in range(reps):
        out[r] = extended_sweep(costs[r], eu, ev, nv, k, graphic, full, masks)
    return out
