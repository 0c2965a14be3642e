"""Array-based network simplex for uncapacitated transportation problems.

Solves  min sum c_a f_a  s.t. sum_{a out of i} f_a = s_i (sources),
sum_{a into j} f_a = w_j (targets), f >= 0, over a given candidate arc set.
Returns primal flows and dual node potentials, so callers can both extract
optimal plans and price arcs outside the candidate set (column generation
with an exact reduced-cost certificate).

The implementation is the textbook strong spanning tree method with an
artificial root, block (Dantzig-in-block) pricing, and subtree re-hanging;
numba-jitted, so candidate sets with a few hundred thousand arcs solve in
seconds.  Falls back to scipy's HiGHS when numba is unavailable.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _solve_kernel(n_src, n_dst, asrc, adst, acost, supply, demand,
                  max_pivots, block_size):
    """Core pivot loop.  Returns (status, flows, potentials).

    status: 0 = optimal, 1 = pivot budget exhausted.
    Node ids: sources 0..n_src-1, targets n_src..n_src+n_dst-1, root last.
    Tree arcs are indexed n_arcs..n_arcs+N-2 (artificials).
    """
    n_nodes = n_src + n_dst + 1
    root = n_nodes - 1
    n_arcs = asrc.shape[0]
    n_all = n_arcs + n_nodes - 1

    # unified arc arrays including artificials (source->root, root->target)
    big = 1.0
    for a in range(n_arcs):
        if acost[a] > big:
            big = acost[a]
    big = big * (n_nodes + 1)

    src = np.empty(n_all, dtype=np.int64)
    dst = np.empty(n_all, dtype=np.int64)
    cst = np.empty(n_all, dtype=np.float64)
    for a in range(n_arcs):
        src[a] = asrc[a]
        dst[a] = n_src + adst[a]
        cst[a] = acost[a]
    for i in range(n_src):
        a = n_arcs + i
        src[a] = i
        dst[a] = root
        cst[a] = big
    for j in range(n_dst):
        a = n_arcs + n_src + j
        src[a] = root
        dst[a] = n_src + j
        cst[a] = big

    flow = np.zeros(n_all, dtype=np.float64)
    parent = np.full(n_nodes, -1, dtype=np.int64)
    pred_arc = np.full(n_nodes, -1, dtype=np.int64)
    depth = np.zeros(n_nodes, dtype=np.int64)
    pot = np.zeros(n_nodes, dtype=np.float64)
    head_child = np.full(n_nodes, -1, dtype=np.int64)
    next_sib = np.full(n_nodes, -1, dtype=np.int64)
    prev_sib = np.full(n_nodes, -1, dtype=np.int64)

    def attach(v, p):
        parent[v] = p
        c = head_child[p]
        next_sib[v] = c
        prev_sib[v] = -1
        if c != -1:
            prev_sib[c] = v
        head_child[p] = v

    def detach(v):
        p = parent[v]
        pv = prev_sib[v]
        nx = next_sib[v]
        if pv == -1:
            head_child[p] = nx
        else:
            next_sib[pv] = nx
        if nx != -1:
            prev_sib[nx] = pv
        parent[v] = -1
        next_sib[v] = -1
        prev_sib[v] = -1

    # initial star tree on artificial arcs
    for i in range(n_src):
        attach(i, root)
        pred_arc[i] = n_arcs + i
        depth[i] = 1
        pot[i] = big            # reduced cost of i->root equals zero
        flow[n_arcs + i] = supply[i]
    for j in range(n_dst):
        v = n_src + j
        attach(v, root)
        pred_arc[v] = n_arcs + n_src + j
        depth[v] = 1
        pot[v] = -big           # reduced cost of root->j equals zero
        flow[n_arcs + n_src + j] = demand[j]

    stack = np.empty(n_nodes, dtype=np.int64)
    old_arc = np.empty(n_nodes, dtype=np.int64)
    block_start = 0
    pivots = 0
    while pivots < max_pivots:
        # --- pricing: best arc in a rotating block window ---------------
        enter = -1
        best = -1e-10
        scanned = 0
        start = block_start
        while scanned < n_arcs:
            stop = start + block_size
            if stop > n_arcs:
                stop = n_arcs
            for a in range(start, stop):
                red = cst[a] - pot[src[a]] + pot[dst[a]]
                if red < best:
                    best = red
                    enter = a
            scanned += stop - start
            if enter != -1:
                block_start = stop % n_arcs if n_arcs > 0 else 0
                break
            start = stop % n_arcs if n_arcs > 0 else 0
        if enter == -1:
            return 0, flow[:n_arcs], pot
        pivots += 1

        u = src[enter]
        v = dst[enter]
        # --- find the cycle bottleneck -----------------------------------
        # adding t on u->v forces t units back from v to u along the tree
        # path v .. LCA .. u.  Walking x up to p=parent[x]:
        #   v-side (shipping x->p): arc p->x runs against it -> bound;
        #   u-side (shipping p->x): arc x->p runs against it -> bound.
        a_node = u
        b_node = v
        t = 1e300
        leave = -1
        leave_on_u_side = False
        da = depth[a_node]
        db = depth[b_node]
        while da > db:
            arc = pred_arc[a_node]
            if src[arc] == a_node and flow[arc] < t:
                t = flow[arc]
                leave = arc
                leave_on_u_side = True
            a_node = parent[a_node]
            da -= 1
        while db > da:
            arc = pred_arc[b_node]
            if dst[arc] == b_node and flow[arc] < t:
                t = flow[arc]
                leave = arc
                leave_on_u_side = False
            b_node = parent[b_node]
            db -= 1
        while a_node != b_node:
            arc = pred_arc[a_node]
            if src[arc] == a_node and flow[arc] < t:
                t = flow[arc]
                leave = arc
                leave_on_u_side = True
            a_node = parent[a_node]
            arc = pred_arc[b_node]
            if dst[arc] == b_node and flow[arc] < t:
                t = flow[arc]
                leave = arc
                leave_on_u_side = False
            b_node = parent[b_node]
        lca = a_node

        if leave == -1 or t >= 1e299:
            # an all-forward negative cycle means the LP is unbounded,
            # impossible for balanced transportation: numeric breakdown
            return 2, flow[:n_arcs], pot

        # --- apply flow change -------------------------------------------
        flow[enter] += t
        node = u
        while node != lca:
            arc = pred_arc[node]
            if dst[arc] == node:
                flow[arc] += t
            else:
                flow[arc] -= t
            node = parent[node]
        node = v
        while node != lca:
            arc = pred_arc[node]
            if src[arc] == node:
                flow[arc] += t
            else:
                flow[arc] -= t
            node = parent[node]

        # --- exchange entering and leaving arcs: re-hang the subtree -----
        # cutting the leaving arc separates the component holding the
        # entering endpoint on that side; re-root it there and hang it off
        # the other endpoint through the entering arc
        if leave_on_u_side:
            hang_from = v
            new_child = u
        else:
            hang_from = u
            new_child = v
        cnode = src[leave] if parent[src[leave]] == dst[leave] else dst[leave]

        # collect the chain new_child .. cnode (parent walk in the old tree)
        path_len = 0
        node = new_child
        while True:
            stack[path_len] = node
            path_len += 1
            if node == cnode:
                break
            node = parent[node]
        for idx in range(path_len):
            old_arc[idx] = pred_arc[stack[idx]]
        # detach every chain node from its old parent, then rebuild the
        # chain reversed: stack[idx+1] hangs under stack[idx]
        for idx in range(path_len):
            detach(stack[idx])
        for idx in range(path_len - 1):
            attach(stack[idx + 1], stack[idx])
            pred_arc[stack[idx + 1]] = old_arc[idx]
        attach(new_child, hang_from)
        pred_arc[new_child] = enter

        # recompute depth and potentials on the re-hung subtree (iterative
        # DFS from new_child)
        sp = 0
        stack[sp] = new_child
        sp += 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            p = parent[node]
            depth[node] = depth[p] + 1
            arc = pred_arc[node]
            if src[arc] == node:
                # arc node->p : 0 = c - pot[node] + pot[p]
                pot[node] = cst[arc] + pot[p]
            else:
                pot[node] = pot[p] - cst[arc]
            c = head_child[node]
            while c != -1:
                stack[sp] = c
                sp += 1
                c = next_sib[c]
    return 1, flow[:n_arcs], pot


def solve_transportation(asrc, adst, acost, supply, demand,
                         max_pivot_factor=60, block_size=1024):
    """Exact transportation solve on a candidate arc set.

    Returns (flows, f, g) where f, g are source/target dual potentials with
    reduced costs c_ij - f_i - g_j >= 0 on every candidate arc.  Raises
    RuntimeError when the pivot budget is exhausted (caller falls back).
    """
    if not HAVE_NUMBA:
        raise RuntimeError("numba unavailable")
    asrc = np.ascontiguousarray(asrc, dtype=np.int64)
    adst = np.ascontiguousarray(adst, dtype=np.int64)
    acost = np.ascontiguousarray(acost, dtype=np.float64)
    supply = np.ascontiguousarray(supply, dtype=np.float64)
    demand = np.ascontiguousarray(demand, dtype=np.float64)
    n_nodes = len(supply) + len(demand) + 1
    max_pivots = max_pivot_factor * n_nodes
    status, flows, pot = _solve_kernel(
        len(supply), len(demand), asrc, adst, acost, supply, demand,
        max_pivots, min(block_size, max(1, len(asrc))),
    )
    if status != 0:
        raise RuntimeError("network simplex pivot budget exhausted")
    n = len(supply)
    # convert min-cost-flow potentials to transportation duals:
    # red = c - pot[src] + pot[dst] = c - f_i - g_j with f = pot[:n],
    # g = -pot[n:]
    f = pot[:n].copy()
    g = -pot[n:n + len(demand)].copy()
    return flows, f, g
