"""Hot loops: max-flow on the contracted level graph, residual reachability,
CSR assembly and exhaustive subset enumeration.

Graph layout shared by every kernel: arcs come in sister pairs ``(2k, 2k+1)`` so
``a ^ 1`` is the reverse arc; ``head[a]`` is the arc's target; ``adj[start[v]:start[v+1]]``
lists the arcs leaving ``v``; ``tcap[v] > 0`` is residual source capacity and
``tcap[v] < 0`` residual sink capacity.  All capacities are int64 weight units.
"""
import numpy as np

from ._backend import USE_NUMBA, njit

NONE = -1
TERMINAL = -2
ORPHAN = -3

INT32_LIMIT = 2**31 - 1


# --------------------------------------------------------------------------- CSR


@njit
def _csr_numba(tail, n):
    start = np.zeros(n + 1, np.int64)
    for a in range(tail.shape[0]):
        start[tail[a] + 1] += 1
    for v in range(n):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    adj = np.empty(tail.shape[0], np.int64)
    for a in range(tail.shape[0]):
        v = tail[a]
        adj[fill[v]] = a
        fill[v] += 1
    return start, adj


def _csr_numpy(tail, n):
    counts = np.bincount(tail, minlength=n)
    start = np.zeros(n + 1, np.int64)
    np.cumsum(counts, out=start[1:])
    adj = np.argsort(tail, kind="stable").astype(np.int64)
    return start, adj


def build_csr(tail, n):
    """Arc ids grouped by tail node, in increasing arc order within each node."""
    tail = np.ascontiguousarray(tail, dtype=np.int64)
    if USE_NUMBA:
        return _csr_numba(tail, n)
    return _csr_numpy(tail, n)


# ----------------------------------------------------------- Boykov-Kolmogorov


@njit
def _bk_maxflow(n, start, adj, head, cap, tcap):
    # Two search trees (1 = source, 2 = sink) grown from the terminal-linked nodes.
    # parent[v] is the arc from v to its parent in the tree.  cap / tcap are
    # overwritten with the residual capacities.
    tree = np.zeros(n, np.int8)
    parent = np.full(n, NONE, np.int64)
    ts = np.zeros(n, np.int64)
    dist = np.zeros(n, np.int64)
    qsize = n + 1
    active = np.empty(qsize, np.int64)
    in_active = np.zeros(n, np.bool_)
    qh = 0
    qt = 0
    orph = np.empty(qsize, np.int64)
    oh = 0
    ot = 0
    flow = 0
    time = 1
    big = n + 10

    for v in range(n):
        if tcap[v] > 0:
            tree[v] = 1
        elif tcap[v] < 0:
            tree[v] = 2
        else:
            continue
        parent[v] = TERMINAL
        ts[v] = time
        dist[v] = 1
        active[qt] = v
        qt = (qt + 1) % qsize
        in_active[v] = True

    cur = -1
    while True:
        if cur < 0 or tree[cur] == 0:
            cur = -1
            while qh != qt:
                v = active[qh]
                qh = (qh + 1) % qsize
                in_active[v] = False
                if tree[v] != 0:
                    cur = v
                    break
            if cur < 0:
                break
        p = cur

        # grow
        mid = -1
        if tree[p] == 1:
            for k in range(start[p], start[p + 1]):
                a = adj[k]
                if cap[a] > 0:
                    q = head[a]
                    if tree[q] == 0:
                        tree[q] = 1
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
                        if not in_active[q]:
                            active[qt] = q
                            qt = (qt + 1) % qsize
                            in_active[q] = True
                    elif tree[q] == 2:
                        mid = a
                        break
                    elif ts[q] <= ts[p] and dist[q] > dist[p]:
                        # same tree: re-hang q under p when that shortens its path
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
        else:
            for k in range(start[p], start[p + 1]):
                a = adj[k]
                if cap[a ^ 1] > 0:
                    q = head[a]
                    if tree[q] == 0:
                        tree[q] = 2
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
                        if not in_active[q]:
                            active[qt] = q
                            qt = (qt + 1) % qsize
                            in_active[q] = True
                    elif tree[q] == 1:
                        mid = a ^ 1
                        break
                    elif ts[q] <= ts[p] and dist[q] > dist[p]:
                        # same tree: re-hang q under p when that shortens its path
                        parent[q] = a ^ 1
                        ts[q] = ts[p]
                        dist[q] = dist[p] + 1
        if mid < 0:
            cur = -1
            continue

        # augment along source-root .. tail(mid) -> head(mid) .. sink-root
        u = head[mid ^ 1]
        w = head[mid]
        b = cap[mid]
        x = u
        while parent[x] != TERMINAL:
            a = parent[x]
            if cap[a ^ 1] < b:
                b = cap[a ^ 1]
            x = head[a]
        if tcap[x] < b:
            b = tcap[x]
        x = w
        while parent[x] != TERMINAL:
            a = parent[x]
            if cap[a] < b:
                b = cap[a]
            x = head[a]
        if -tcap[x] < b:
            b = -tcap[x]

        cap[mid] -= b
        cap[mid ^ 1] += b
        x = u
        while parent[x] != TERMINAL:
            a = parent[x]
            cap[a ^ 1] -= b
            cap[a] += b
            if cap[a ^ 1] == 0:
                parent[x] = ORPHAN
                orph[ot] = x
                ot = (ot + 1) % qsize
            x = head[a]
        tcap[x] -= b
        if tcap[x] == 0:
            parent[x] = ORPHAN
            orph[ot] = x
            ot = (ot + 1) % qsize
        x = w
        while parent[x] != TERMINAL:
            a = parent[x]
            cap[a] -= b
            cap[a ^ 1] += b
            if cap[a] == 0:
                parent[x] = ORPHAN
                orph[ot] = x
                ot = (ot + 1) % qsize
            x = head[a]
        tcap[x] += b
        if tcap[x] == 0:
            parent[x] = ORPHAN
            orph[ot] = x
            ot = (ot + 1) % qsize
        flow += b
        time += 1

        # adopt orphans
        while oh != ot:
            v = orph[oh]
            oh = (oh + 1) % qsize
            t = tree[v]
            best = NONE
            dmin = big
            for k in range(start[v], start[v + 1]):
                a = adj[k]
                q = head[a]
                if tree[q] != t:
                    continue
                if t == 1:
                    if cap[a ^ 1] <= 0:
                        continue
                elif cap[a] <= 0:
                    continue
                j = q
                d = 0
                ok = False
                while True:
                    if ts[j] == time:
                        d += dist[j]
                        ok = True
                        break
                    aj = parent[j]
                    d += 1
                    if aj == TERMINAL:
                        ts[j] = time
                        dist[j] = 1
                        ok = True
                        break
                    if aj < 0:
                        break
                    j = head[aj]
                if ok:
                    if d < dmin:
                        best = a
                        dmin = d
                    j = q
                    while ts[j] != time:
                        ts[j] = time
                        dist[j] = d
                        d -= 1
                        j = head[parent[j]]
            if best != NONE:
                parent[v] = best
                ts[v] = time
                dist[v] = dmin + 1
                continue
            for k in range(start[v], start[v + 1]):
                a = adj[k]
                q = head[a]
                if tree[q] != t:
                    continue
                if t == 1:
                    resid = cap[a ^ 1] > 0
                else:
                    resid = cap[a] > 0
                if resid and not in_active[q]:
                    active[qt] = q
                    qt = (qt + 1) % qsize
                    in_active[q] = True
                pa = parent[q]
                if pa >= 0 and head[pa] == v:
                    parent[q] = ORPHAN
                    orph[ot] = q
                    ot = (ot + 1) % qsize
            tree[v] = 0
            parent[v] = NONE
    return flow



# ------------------------------------------------------------ push-relabel
# Highest-label preflow push with periodic global relabelling and the gap
# heuristic.  Only phase one is run: once no active node can reach the sink the
# preflow value is the max-flow value, and the nodes that still reach the sink
# in the residual graph form the smallest sink side.

@njit
def _global_relabel(n, start, adj, head, cap, rt, d, queue):
    # exact distances to the sink run from 1 to n; n + 1 marks "cannot reach"
    inf = n + 1
    for v in range(n):
        d[v] = inf
    qh = 0; qt = 0
    for v in range(n):
        if rt[v] > 0:
            d[v] = 1
            queue[qt] = v; qt += 1
    while qh < qt:
        y = queue[qh]; qh += 1
        dy = d[y] + 1
        for k in range(start[y], start[y + 1]):
            a = adj[k]
            x = head[a]
            if d[x] == inf and cap[a ^ 1] > 0:
                d[x] = dy
                queue[qt] = x; qt += 1

@njit
def _pr_maxflow(n, start, adj, head, cap, tcap):
    inf = n + 1
    excess = np.zeros(n, np.int64)
    rt = np.zeros(n, np.int64)
    for v in range(n):
        if tcap[v] > 0:
            excess[v] = tcap[v]
        elif tcap[v] < 0:
            rt[v] = -tcap[v]
    d = np.empty(n, np.int64)
    cur = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    bfirst = np.full(inf + 1, -1, np.int64)
    bnext = np.full(n, -1, np.int64)
    count = np.zeros(inf + 1, np.int64)
    flow = 0
    m = head.shape[0]
    while True:
        _global_relabel(n, start, adj, head, cap, rt, d, queue)
        for l in range(inf + 1):
            bfirst[l] = -1
            count[l] = 0
        maxa = -1
        for v in range(n):
            cur[v] = start[v]
            if d[v] < inf:
                count[d[v]] += 1
                if excess[v] > 0:
                    bnext[v] = bfirst[d[v]]
                    bfirst[d[v]] = v
                    if d[v] > maxa:
                        maxa = d[v]
        work = 0
        limit = 6 * n + m // 2
        redo = False
        while True:
            while maxa >= 0 and bfirst[maxa] == -1:
                maxa -= 1
            if maxa < 0:
                break
            v = bfirst[maxa]
            bfirst[maxa] = bnext[v]
            if d[v] != maxa or excess[v] == 0:
                continue
            # discharge
            while excess[v] > 0:
                if d[v] == 1 and rt[v] > 0:
                    delta = excess[v] if excess[v] < rt[v] else rt[v]
                    rt[v] -= delta
                    excess[v] -= delta
                    flow += delta
                    continue
                dv1 = d[v] - 1
                k = cur[v]
                end = start[v + 1]
                while k < end:
                    a = adj[k]
                    if cap[a] > 0:
                        x = head[a]
                        if d[x] == dv1:
                            delta = excess[v] if excess[v] < cap[a] else cap[a]
                            cap[a] -= delta
                            cap[a ^ 1] += delta
                            if excess[x] == 0:
                                bnext[x] = bfirst[dv1]
                                bfirst[dv1] = x
                                if dv1 > maxa:
                                    maxa = dv1
                            excess[x] += delta
                            excess[v] -= delta
                            if excess[v] == 0:
                                break
                    k += 1
                cur[v] = k
                if excess[v] == 0:
                    break
                # relabel
                old = d[v]
                dmin = inf
                if rt[v] > 0:
                    dmin = 0
                for kk in range(start[v], end):
                    a = adj[kk]
                    if cap[a] > 0:
                        dx = d[head[a]]
                        if dx < dmin:
                            dmin = dx
                work += 12 + end - start[v]
                newd = dmin + 1
                count[old] -= 1
                if count[old] == 0:
                    # gap: nothing at this label can reach the sink any more
                    for u in range(n):
                        if d[u] > old and d[u] < inf:
                            count[d[u]] -= 1
                            d[u] = inf
                    d[v] = inf
                    break
                if newd >= inf:
                    d[v] = inf
                    break
                d[v] = newd
                count[newd] += 1
                cur[v] = start[v]
            if excess[v] > 0 and d[v] < inf:
                bnext[v] = bfirst[d[v]]
                bfirst[d[v]] = v
                if d[v] > maxa:
                    maxa = d[v]
            if work > limit:
                redo = True
                break
        if not redo:
            break
    _global_relabel(n, start, adj, head, cap, rt, d, queue)
    return flow, d < inf


@njit
def _reach_numba(n, start, adj, head, cap, tcap):
    # src_side: reachable from the source in the residual graph.
    # sink_side: can reach the sink in the residual graph.
    src_side = np.zeros(n, np.bool_)
    sink_side = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    top = 0
    for v in range(n):
        if tcap[v] > 0:
            src_side[v] = True
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        for k in range(start[x], start[x + 1]):
            a = adj[k]
            if cap[a] > 0:
                y = head[a]
                if not src_side[y]:
                    src_side[y] = True
                    stack[top] = y
                    top += 1
    for v in range(n):
        if tcap[v] < 0:
            sink_side[v] = True
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        y = stack[top]
        for k in range(start[y], start[y + 1]):
            a = adj[k]
            if cap[a ^ 1] > 0:
                x = head[a]
                if not sink_side[x]:
                    sink_side[x] = True
                    stack[top] = x
                    top += 1
    return src_side, sink_side


def _maxflow_scipy(n, head, cap, tcap):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import breadth_first_order, maximum_flow

    # scipy's maximum_flow works on int32 capacities and silently wraps wider ones.
    bound = min(int(tcap[tcap > 0].sum()), int(-tcap[tcap < 0].sum()))
    top = int(cap.max()) if cap.size else 0
    if max(bound, top) > INT32_LIMIT // 2:
        raise OverflowError(
            "flow bound exceeds int32; use the numba backend for this instance"
        )
    s, t = n, n + 1
    tail = head[np.arange(head.shape[0]) ^ 1]
    pos = np.flatnonzero(tcap > 0)
    neg = np.flatnonzero(tcap < 0)
    rows = np.concatenate([tail, np.full(pos.size, s), neg])
    cols = np.concatenate([head, pos, np.full(neg.size, t)])
    data = np.concatenate([cap, tcap[pos], -tcap[neg]]).astype(np.int32)
    C = csr_matrix((data, (rows, cols)), shape=(n + 2, n + 2))
    res = maximum_flow(C, s, t, method="dinic")
    R = (C - res.flow).tocsr()
    R.data[R.data < 0] = 0
    R.eliminate_zeros()
    src_side = np.zeros(n + 2, bool)
    src_side[breadth_first_order(R, s, directed=True, return_predecessors=False)] = True
    sink_side = np.zeros(n + 2, bool)
    RT = R.T.tocsr()
    sink_side[breadth_first_order(RT, t, directed=True, return_predecessors=False)] = True
    return int(res.flow_value), src_side[:n], sink_side[:n]


def solve_maxflow(n, start, adj, head, cap, tcap, want_min=True, method="auto"):
    """Max flow on the contracted graph.

    Returns ``(flow_units, min_side, max_side)``: boolean masks over the free nodes for
    the smallest and the largest minimum-cut source sides (``min_side`` is ``None``
    when ``want_min`` is false).  ``cap`` and ``tcap`` are left untouched.

    ``method``: ``"pr"`` push-relabel (numba), ``"bk"`` Boykov-Kolmogorov (numba),
    ``"scipy"`` Dinic from scipy; ``"auto"`` picks push-relabel under numba and scipy
    otherwise.
    """
    if n == 0:
        return 0, np.zeros(0, bool), np.zeros(0, bool)
    if method == "auto":
        method = "pr" if USE_NUMBA else "scipy"
    if method in ("pr", "bk") and not USE_NUMBA:
        raise RuntimeError(f"method {method!r} needs the numba backend")
    tcap = np.asarray(tcap, np.int64)
    if method == "pr":
        f, reach = _pr_maxflow(n, start, adj, head, cap.copy(), tcap.copy())
        min_side = None
        if want_min:
            # arc capacities are symmetric, so swapping the terminals transposes the
            # network; its smallest sink side is our smallest source side
            _, min_side = _pr_maxflow(n, start, adj, head, cap.copy(), -tcap)
        return int(f), min_side, ~reach
    if method == "bk":
        c = cap.astype(np.int64, copy=True)
        tc = tcap.copy()
        f = _bk_maxflow(n, start, adj, head, c, tc)
        src_side, sink_side = _reach_numba(n, start, adj, head, c, tc)
        return int(f), src_side, ~sink_side
    if method == "scipy":
        f, src_side, sink_side = _maxflow_scipy(n, head, cap, tcap)
        return f, src_side, ~sink_side
    raise ValueError(f"unknown max-flow method {method!r}")


# ------------------------------------------------------------- enumeration


@njit
def _enum_numba(nf, start, adj, head, cap, src, snk, base):
    total = 1 << nf
    out = np.empty(total, np.int64)
    state = np.zeros(nf, np.bool_)
    c = base
    for i in range(nf):
        c += src[i]
    out[0] = c
    g = 0
    for i in range(1, total):
        k = 0
        while (i >> k) & 1 == 0:
            k += 1
        if state[k]:
            c += src[k] - snk[k]
        else:
            c += snk[k] - src[k]
        for e in range(start[k], start[k + 1]):
            a = adj[e]
            if state[head[a]] == state[k]:
                c += cap[a]
            else:
                c -= cap[a]
        state[k] = not state[k]
        g ^= 1 << k
        out[g] = c
    return out


def _enum_numpy(nf, head, cap, src, snk, base, chunk=1 << 14):
    total = 1 << nf
    out = np.empty(total, np.int64)
    ta = head[1::2]
    hd = head[0::2]
    w = cap[0::2]
    shifts = np.arange(nf, dtype=np.int64)
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        bits = ((masks[:, None] >> shifts[None, :]) & 1).astype(bool)
        c = base + (~bits).astype(np.int64) @ src + bits.astype(np.int64) @ snk
        if w.size:
            c = c + (bits[:, ta] != bits[:, hd]).astype(np.int64) @ w
        out[lo : lo + masks.size] = c
    return out


def enumerate_cut_costs(nf, start, adj, head, cap, src, snk, base):
    """Cut cost of every membership mask over ``nf`` free nodes.

    Bit ``i`` of the mask puts free node ``i`` on the source side.  Cost counts
    ``src[i]`` for excluded nodes, ``snk[i]`` for included ones, the capacity of
    each free-free arc pair that is cut, plus ``base``.
    """
    if nf > 26:
        raise ValueError("enumeration limited to 26 free nodes")
    src = np.asarray(src, np.int64)
    snk = np.asarray(snk, np.int64)
    if USE_NUMBA:
        return _enum_numba(nf, start, adj, head, cap, src, snk, np.int64(base))
    return _enum_numpy(nf, head, cap, src, snk, int(base))
