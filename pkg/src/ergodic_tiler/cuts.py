"""Component-size cuts, their prices, and small measure-limit utilities.

On finite models "leaves only small pieces" is the whole story, so cuts are
parameterized by the component-size threshold K and every report carries the
K it was computed at.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TooLargeForExact, VanishingPrecondition
from .validation import as_vertex_array

EXACT_COMPONENT_LIMIT = 20


@dataclass(frozen=True)
class CutReport:
    mode: str
    method: str
    K: int
    cut: tuple
    price: float
    largest_component: int
    largest_ratio: float | None
    exact: bool


def _kept_component_sizes(graph, removed_mask):
    labels, n_lab = graph.subgraph_components(~removed_mask)
    if n_lab == 0:
        return np.zeros(0, dtype=np.int64), labels
    return np.bincount(labels[labels >= 0], minlength=n_lab), labels


def is_K_finitizing_vertex_cut(graph, V, K):
    """True iff removing V leaves only components with at most K vertices."""
    if K < 1:
        raise ValueError("K must be at least 1")
    removed = np.zeros(graph.vertex_count, dtype=bool)
    V = as_vertex_array(V, graph.vertex_count)
    removed[V] = True
    sizes, _ = _kept_component_sizes(graph, removed)
    return bool(sizes.size == 0 or sizes.max() <= K)


def is_K_finitizing_edge_cut(graph, H, K):
    """True iff deleting the edges H leaves only components of at most K vertices."""
    if K < 1:
        raise ValueError("K must be at least 1")
    cut = {(min(u, v), max(u, v)) for u, v in H}
    labels = np.full(graph.vertex_count, -1, dtype=np.int64)
    nxt = 0
    for start in range(graph.vertex_count):
        if labels[start] != -1:
            continue
        labels[start] = nxt
        stack = [start]
        while stack:
            v = stack.pop()
            for u in graph.neighbors(v):
                e = (min(v, int(u)), max(v, int(u)))
                if e in cut or labels[u] != -1:
                    continue
                labels[u] = nxt
                stack.append(int(u))
        nxt += 1
    sizes = np.bincount(labels, minlength=nxt)
    return bool(sizes.size == 0 or sizes.max() <= K)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return self.size[ra]
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return self.size[ra]

    def snapshot(self):
        return (list(self.parent), list(self.size))

    def restore(self, snap):
        self.parent, self.size = list(snap[0]), list(snap[1])


def _exact_vertex_cut_component(graph, members, weight, K):
    """Minimum-weight vertex cut leaving pieces of at most K, by branch and bound.

    Vertices are decided in decreasing-degree order; a kept piece exceeding K
    prunes the branch, as does a cut weight at or above the incumbent.
    """
    members = [int(v) for v in members]
    order = sorted(members, key=lambda v: (-graph.degree(v), v))
    local = {v: i for i, v in enumerate(order)}
    nbrs = [[local[int(u)] for u in graph.neighbors(v) if int(u) in local] for v in order]
    w = [float(weight[v]) for v in order]
    n = len(order)

    best_cut = list(range(n))
    best_cost = sum(w)

    state = ["?"] * n
    uf = _UnionFind(n)

    def recurse(i, cost):
        nonlocal best_cut, best_cost
        if cost >= best_cost:
            return
        if i == n:
            best_cost = cost
            best_cut = [j for j in range(n) if state[j] == "cut"]
            return
        # keep branch first: cheap when no small-K violation appears
        snap = uf.snapshot()
        ok = True
        state[i] = "keep"
        for j in nbrs[i]:
            if j < i and state[j] == "keep":
                if uf.union(i, j) > K:
                    ok = False
                    break
        if ok and uf.size[uf.find(i)] <= K:
            recurse(i + 1, cost)
        uf.restore(snap)

        state[i] = "cut"
        recurse(i + 1, cost + w[i])
        state[i] = "?"

    recurse(0, 0.0)
    return [order[j] for j in best_cut], best_cost


def _greedy_vertex_cut_component(graph, members, weight, K):
    """Upper bound: repeatedly split the largest oversized piece at its best separator."""
    members = set(int(v) for v in members)
    cut = []
    while True:
        keep_mask = np.zeros(graph.vertex_count, dtype=bool)
        keep_mask[list(members)] = True
        labels, n_lab = graph.subgraph_components(keep_mask)
        sizes = np.bincount(labels[labels >= 0], minlength=n_lab) if n_lab else np.zeros(0, dtype=int)
        over = [c for c in range(n_lab) if sizes[c] > K]
        if not over:
            return cut
        target = max(over, key=lambda c: sizes[c])
        piece = [v for v in members if labels[v] == target]
        best = None
        for v in sorted(piece):
            mask2 = keep_mask.copy()
            mask2[v] = False
            labels2, n2 = graph.subgraph_components(mask2)
            s2 = np.bincount(labels2[labels2 >= 0], minlength=n2) if n2 else np.zeros(0, dtype=int)
            local = [s2[labels2[u]] for u in piece if u != v]
            key = (max(local) if local else 0, float(weight[v]), v)
            if best is None or key < best[0]:
                best = (key, v)
        v = best[1]
        cut.append(v)
        members.discard(v)


def _local_vertex_cut_component(graph, members, weight, K):
    """Greedy cut followed by a redundancy-pruning pass."""
    cut = _greedy_vertex_cut_component(graph, members, weight, K)
    cut_set = set(cut)
    for v in sorted(cut, key=lambda v: (-float(weight[v]), v)):
        trial = cut_set - {v}
        keep_mask = np.zeros(graph.vertex_count, dtype=bool)
        keep_mask[list(set(int(u) for u in members) - trial)] = True
        labels, n_lab = graph.subgraph_components(keep_mask)
        sizes = np.bincount(labels[labels >= 0], minlength=n_lab) if n_lab else np.zeros(0, dtype=int)
        if sizes.size == 0 or sizes.max() <= K:
            cut_set = trial
    return sorted(cut_set)


def vertex_price(graph, mu, K, method="exact", cocycle=None):
    """Cheapest vertex set whose removal leaves pieces of at most K vertices.

    The exact method is a per-component branch and bound, limited to
    components of at most 20 vertices; greedy and local produce labeled upper
    bounds on graphs of any size.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if method not in ("exact", "greedy", "local"):
        raise ValueError(f"unknown method {method!r}")
    cut = []
    for c in range(graph.component_count):
        members = graph.component_members(c)
        if len(members) <= K:
            continue
        if method == "exact":
            if len(members) > EXACT_COMPONENT_LIMIT:
                raise TooLargeForExact(
                    f"component {c} has {len(members)} vertices > {EXACT_COMPONENT_LIMIT}"
                )
            part, _ = _exact_vertex_cut_component(graph, members, mu.atoms, K)
        elif method == "greedy":
            part = _greedy_vertex_cut_component(graph, members, mu.atoms, K)
        else:
            part = _local_vertex_cut_component(graph, members, mu.atoms, K)
        cut.extend(int(v) for v in part)

    cut = sorted(cut)
    removed = np.zeros(graph.vertex_count, dtype=bool)
    removed[cut] = True
    sizes, labels = _kept_component_sizes(graph, removed)
    largest = int(sizes.max()) if sizes.size else 0
    largest_ratio = None
    if cocycle is not None and sizes.size:
        nw = cocycle.component_normalized_weights(graph)
        best = 0.0
        for lab in range(len(sizes)):
            piece = np.flatnonzero(labels == lab)
            if piece.size:
                pw = nw[piece]
                best = max(best, float(pw.sum() / pw.max()))
        largest_ratio = best
    return CutReport(
        mode="vertex",
        method=method,
        K=int(K),
        cut=tuple(cut),
        price=float(mu.atoms[cut].sum()) if cut else 0.0,
        largest_component=largest,
        largest_ratio=largest_ratio,
        exact=(method == "exact"),
    )


def uniform_edge_measure(graph):
    m = graph.edge_count
    if m == 0:
        return {}
    return {(int(u), int(v)): 1.0 / m for u, v in graph.edges()}


def edge_measure_from_maps(maps, mu):
    """Geometric-weight lift of a vertex measure along a list of partial maps.

    Each map is a dict from vertex to vertex; the n-th map contributes
    2^-(n+1) * mu(x) to the edge {x, map(x)}.
    """
    nu = {}
    for n, mp in enumerate(maps):
        scale = 2.0 ** (-(n + 1))
        for x, y in mp.items():
            if x == y:
                continue
            e = (min(int(x), int(y)), max(int(x), int(y)))
            nu[e] = nu.get(e, 0.0) + scale * float(mu.atoms[int(x)])
    return nu


def _exact_edge_cut_component(graph, members, nu, K):
    members = set(int(v) for v in members)
    edges = [
        (int(u), int(v))
        for u, v in graph.edges()
        if int(u) in members and int(v) in members
    ]
    edges.sort(key=lambda e: (-(nu.get(e, 0.0)), e))
    n_e = len(edges)
    best_cost = sum(nu.get(e, 0.0) for e in edges)
    best_cut = list(edges)
    idx = {v: i for i, v in enumerate(sorted(members))}

    chosen = []

    def feasible_sizes(cut_set):
        uf = _UnionFind(len(members))
        for e in edges:
            if e not in cut_set:
                if uf.union(idx[e[0]], idx[e[1]]) > K:
                    return False
        return True

    def recurse(i, cost, uf):
        nonlocal best_cost, best_cut
        if cost >= best_cost:
            return
        if i == n_e:
            best_cost = cost
            best_cut = list(chosen)
            return
        e = edges[i]
        # keep the edge
        snap = uf.snapshot()
        if uf.union(idx[e[0]], idx[e[1]]) <= K:
            recurse(i + 1, cost, uf)
        uf.restore(snap)
        # cut the edge
        chosen.append(e)
        recurse(i + 1, cost + nu.get(e, 0.0), uf)
        chosen.pop()

    recurse(0, 0.0, _UnionFind(len(members)))
    return best_cut, best_cost


def _greedy_edge_cut_component(graph, members, nu, K):
    members = set(int(v) for v in members)
    alive = {
        (int(u), int(v))
        for u, v in graph.edges()
        if int(u) in members and int(v) in members
    }
    cut = []
    while True:
        labels = {v: None for v in members}
        nxt = 0
        adj = {v: [] for v in members}
        for u, v in alive:
            adj[u].append(v)
            adj[v].append(u)
        for s in sorted(members):
            if labels[s] is not None:
                continue
            labels[s] = nxt
            stack = [s]
            while stack:
                v = stack.pop()
                for u in adj[v]:
                    if labels[u] is None:
                        labels[u] = nxt
                        stack.append(u)
            nxt += 1
        sizes = [0] * nxt
        for v in members:
            sizes[labels[v]] += 1
        over = [c for c in range(nxt) if sizes[c] > K]
        if not over:
            return cut
        target = max(over, key=lambda c: sizes[c])
        candidates = [e for e in alive if labels[e[0]] == target]
        best = None
        for e in sorted(candidates):
            trial = alive - {e}
            piece = [v for v in members if labels[v] == target]
            sub_labels = {v: None for v in piece}
            adj2 = {v: [] for v in piece}
            for a, b in trial:
                if a in sub_labels and b in sub_labels:
                    adj2[a].append(b)
                    adj2[b].append(a)
            worst = 0
            k = 0
            for s in piece:
                if sub_labels[s] is not None:
                    continue
                count = 1
                sub_labels[s] = k
                stack = [s]
                while stack:
                    v = stack.pop()
                    for u in adj2[v]:
                        if sub_labels[u] is None:
                            sub_labels[u] = k
                            count += 1
                            stack.append(u)
                worst = max(worst, count)
                k += 1
            key = (worst, nu.get(e, 0.0), e)
            if best is None or key < best[0]:
                best = (key, e)
        e = best[1]
        alive.discard(e)
        cut.append(e)


def edge_price(graph, nu=None, K=1, method="exact", mu=None):
    """Cheapest edge set whose deletion leaves pieces of at most K vertices.

    nu defaults to the uniform distribution on edges.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if method not in ("exact", "greedy", "local"):
        raise ValueError(f"unknown method {method!r}")
    if nu is None:
        nu = uniform_edge_measure(graph)
    else:
        nu = {(min(int(u), int(v)), max(int(u), int(v))): float(x) for (u, v), x in nu.items()}

    cut = []
    for c in range(graph.component_count):
        members = graph.component_members(c)
        if len(members) <= K:
            continue
        if method == "exact":
            if len(members) > EXACT_COMPONENT_LIMIT:
                raise TooLargeForExact(
                    f"component {c} has {len(members)} vertices > {EXACT_COMPONENT_LIMIT}"
                )
            part, _ = _exact_edge_cut_component(graph, members, nu, K)
        else:
            part = _greedy_edge_cut_component(graph, members, nu, K)
        cut.extend(part)

    cut = sorted(set(cut))
    price = sum(nu.get(e, 0.0) for e in cut)
    ok = is_K_finitizing_edge_cut(graph, cut, K)
    if not ok:
        raise RuntimeError("internal: produced edge set is not a valid cut")
    # component stats after deletion
    labels = np.full(graph.vertex_count, -1, dtype=np.int64)
    nxt = 0
    cut_set = set(cut)
    for start in range(graph.vertex_count):
        if labels[start] != -1:
            continue
        labels[start] = nxt
        stack = [start]
        while stack:
            v = stack.pop()
            for u in graph.neighbors(v):
                e = (min(v, int(u)), max(v, int(u)))
                if e in cut_set or labels[u] != -1:
                    continue
                labels[u] = nxt
                stack.append(int(u))
        nxt += 1
    sizes = np.bincount(labels, minlength=nxt) if nxt else np.zeros(0, dtype=int)
    return CutReport(
        mode="edge",
        method=method,
        K=int(K),
        cut=tuple(cut),
        price=float(price),
        largest_component=int(sizes.max()) if sizes.size else 0,
        largest_ratio=None,
        exact=(method == "exact"),
    )


def vanishing_sequence(sets, mu):
    """Tail unions B_n of the input sets: decreasing, with null intersection
    whenever the input masses actually vanish.

    Warns when the final tail keeps positive mass (degenerate input).
    """
    n_sets = len(sets)
    arrays = [as_vertex_array(s) for s in sets]
    out = []
    for i in range(n_sets):
        tail = arrays[i + 1:]
        if tail:
            out.append(np.unique(np.concatenate(tail)))
        else:
            out.append(np.empty(0, dtype=np.int64))
    if out and mu.mass(out[-1]) > 0:
        warnings.warn(
            "input sets do not vanish: the final tail union keeps positive mass",
            VanishingPrecondition,
        )
    return out


def limsup_mass(sets, mu, period=None):
    """Mass of the limit-superior set versus the limit-superior of the masses.

    A finite list stands for an infinite sequence: by default the last set
    repeats forever; with a period p, the last p sets cycle forever. The
    first return value always dominates the second.
    """
    if not sets:
        raise ValueError("need at least one set")
    arrays = [as_vertex_array(s) for s in sets]
    if period is None:
        tail = [arrays[-1]]
    else:
        if not (1 <= period <= len(arrays)):
            raise ValueError("period must be between 1 and len(sets)")
        tail = arrays[-period:]
    limsup_set = np.unique(np.concatenate([a for a in tail] + [np.empty(0, dtype=np.int64)]))
    mass_of_limsup = mu.mass(limsup_set)
    limsup_of_mass = max(mu.mass(a) for a in tail)
    return mass_of_limsup, limsup_of_mass
