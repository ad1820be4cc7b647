"""Deterministic int64 max-flow (Dinic) with residual-side extraction.

Arcs are stored in pairs: arc ``a`` and its reverse ``a ^ 1``.  An
undirected edge of weight w is one pair with both capacities w; a
directed terminal arc is a pair with reverse capacity 0.  Everything is
int64, so cut values are exact.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_adjacency(src, n_nodes):
    """Linked-list adjacency (head, nxt) for arcs listed by source node."""
    m = src.shape[0]
    head = np.full(n_nodes, -1, dtype=np.int64)
    nxt = np.full(m, -1, dtype=np.int64)
    for a in range(m):
        u = src[a]
        nxt[a] = head[u]
        head[u] = a
    return head, nxt


@njit(cache=True)
def dinic(head, nxt, to, cap, s, t, n_nodes):
    """Maximum s-t flow; mutates cap into the residual capacities."""
    level = np.empty(n_nodes, dtype=np.int64)
    iters = np.empty(n_nodes, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    nstack = np.empty(n_nodes + 2, dtype=np.int64)
    path = np.empty(n_nodes + 2, dtype=np.int64)
    total = np.int64(0)
    big = np.int64(0x3FFFFFFFFFFFFFFF)
    while True:
        for i in range(n_nodes):
            level[i] = -1
        level[s] = 0
        qh = 0
        qt = 0
        queue[qt] = s
        qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            a = head[u]
            while a != -1:
                v = to[a]
                if cap[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
                a = nxt[a]
        if level[t] < 0:
            break
        for i in range(n_nodes):
            iters[i] = head[i]
        depth = 0
        nstack[0] = s
        u = s
        while True:
            if u == t:
                f = big
                for d in range(depth):
                    a = path[d]
                    if cap[a] < f:
                        f = cap[a]
                for d in range(depth):
                    a = path[d]
                    cap[a] -= f
                    cap[a ^ 1] += f
                total += f
                nd = depth
                for d in range(depth):
                    if cap[path[d]] == 0:
                        nd = d
                        break
                depth = nd
                u = nstack[depth]
                continue
            a = iters[u]
            advanced = False
            while a != -1:
                v = to[a]
                if cap[a] > 0 and level[v] == level[u] + 1:
                    iters[u] = a
                    path[depth] = a
                    depth += 1
                    nstack[depth] = v
                    u = v
                    advanced = True
                    break
                a = nxt[a]
                iters[u] = a
            if not advanced:
                level[u] = -1
                if depth == 0:
                    break
                depth -= 1
                u = nstack[depth]
    return total


@njit(cache=True)
def reachable_from(head, nxt, to, cap, start, n_nodes):
    """Nodes reachable from start over arcs with positive residual."""
    seen = np.zeros(n_nodes, dtype=np.bool_)
    queue = np.empty(n_nodes, dtype=np.int64)
    seen[start] = True
    qh = 0
    qt = 0
    queue[qt] = start
    qt += 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        a = head[u]
        while a != -1:
            v = to[a]
            if cap[a] > 0 and not seen[v]:
                seen[v] = True
                queue[qt] = v
                qt += 1
            a = nxt[a]
    return seen


@njit(cache=True)
def reaching_to(head, nxt, to, cap, target, n_nodes):
    """Nodes that can reach target over arcs with positive residual."""
    seen = np.zeros(n_nodes, dtype=np.bool_)
    queue = np.empty(n_nodes, dtype=np.int64)
    seen[target] = True
    qh = 0
    qt = 0
    queue[qt] = target
    qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        a = head[v]
        while a != -1:
            u = to[a]
            # arc a is v->u; its pair is u->v with residual cap[a ^ 1]
            if cap[a ^ 1] > 0 and not seen[u]:
                seen[u] = True
                queue[qt] = u
                qt += 1
            a = nxt[a]
    return seen


def max_flow_min_cut(arc_u, arc_v, cap_fwd, cap_bwd, s, t, n_nodes):
    """Solve max-flow; return (flow value, minimal source side, maximal source side).

    ``arc_u -> arc_v`` carries capacity ``cap_fwd``; the paired reverse arc
    carries ``cap_bwd`` (equal for undirected edges, 0 for directed arcs).
    """
    m = arc_u.shape[0]
    to = np.empty(2 * m, dtype=np.int64)
    src = np.empty(2 * m, dtype=np.int64)
    cap = np.empty(2 * m, dtype=np.int64)
    to[0::2] = arc_v
    to[1::2] = arc_u
    src[0::2] = arc_u
    src[1::2] = arc_v
    cap[0::2] = cap_fwd
    cap[1::2] = cap_bwd
    head, nxt = build_adjacency(src, n_nodes)
    flow = dinic(head, nxt, to, cap, s, t, n_nodes)
    minimal = reachable_from(head, nxt, to, cap, s, n_nodes)
    maximal = ~reaching_to(head, nxt, to, cap, t, n_nodes)
    return int(flow), minimal, maximal
