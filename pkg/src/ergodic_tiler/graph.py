"""Finite weighted graphs, multiplicative vertex weights, and invariant measures.

A cocycle on a finite connected graph is always a coboundary, so it is stored
as one log-weight per vertex; every pairwise ratio is a difference of logs.
Quantities that must not depend on a reference vertex are computed after
dividing by the largest weight of the set at hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CrossComponent, DisconnectedClass, EmptySet, MalformedGraph
from .validation import as_values_array, as_vertex_array, require_nonempty, require_same_component


class WeightedGraph:
    """Simple undirected graph in CSR form with per-vertex component labels."""

    __slots__ = ("vertex_count", "indptr", "indices", "component_id", "_edges")

    def __init__(self, vertex_count, indptr, indices, component_id, edges):
        self.vertex_count = int(vertex_count)
        self.indptr = indptr
        self.indices = indices
        self.component_id = component_id
        self._edges = edges

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v):
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def adjacency(self):
        """Per-vertex sorted neighbor lists (views into the CSR arrays)."""
        return [self.neighbors(v) for v in range(self.vertex_count)]

    @property
    def edge_count(self):
        return len(self._edges)

    def edges(self):
        """Edges as an (m, 2) array with u < v, sorted lexicographically."""
        return self._edges

    @property
    def component_count(self):
        return int(self.component_id.max()) + 1 if self.vertex_count else 0

    def component_members(self, c):
        return np.flatnonzero(self.component_id == c)

    def components(self):
        return [self.component_members(c) for c in range(self.component_count)]

    def subgraph_components(self, keep_mask):
        """Component label per vertex of the induced subgraph on keep_mask.

        Vertices outside the mask get label -1.
        """
        labels = np.full(self.vertex_count, -1, dtype=np.int64)
        next_label = 0
        for start in np.flatnonzero(keep_mask):
            if labels[start] != -1:
                continue
            labels[start] = next_label
            stack = [int(start)]
            while stack:
                v = stack.pop()
                for u in self.neighbors(v):
                    if keep_mask[u] and labels[u] == -1:
                        labels[u] = next_label
                        stack.append(int(u))
            next_label += 1
        return labels, next_label


@dataclass(frozen=True)
class Cocycle:
    """Positive vertex weights in the log domain.

    ratio(x, y) is the mass of x relative to y; the multiplicative identity
    ratio(x,y) * ratio(y,z) = ratio(x,z) telescopes exactly because every
    ratio is a difference of the same per-vertex logs.
    """

    log_weight: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_weight, dtype=float)
        object.__setattr__(self, "log_weight", lw)

    def log_ratio(self, x, y):
        return self.log_weight[x] - self.log_weight[y]

    def ratio(self, x, y):
        return math.exp(self.log_weight[x] - self.log_weight[y])

    def normalized_weights(self, anchor_log=None):
        """exp(log_weight - anchor_log); defaults to the global max (values <= 1)."""
        if anchor_log is None:
            anchor_log = float(self.log_weight.max()) if self.log_weight.size else 0.0
        return np.exp(self.log_weight - anchor_log)

    def component_normalized_weights(self, graph):
        """Weights divided by the max weight of their own component."""
        lw = self.log_weight
        n_comp = graph.component_count
        comp_max = np.full(n_comp, -np.inf)
        np.maximum.at(comp_max, graph.component_id, lw)
        return np.exp(lw - comp_max[graph.component_id])

    def fraction_weights(self):
        """Weights as exact rationals (floats are dyadic rationals)."""
        return [Fraction(math.exp(v)) for v in self.log_weight]


def build_graph(edges, log_weights):
    """Build a simple symmetric graph with BFS component labels.

    Rejects self-loops, duplicate edges (in either orientation), endpoints out
    of range, and non-finite weights.
    """
    lw = np.asarray(log_weights, dtype=float)
    n = len(lw)
    if n and not np.all(np.isfinite(lw)):
        raise MalformedGraph("log-weights must be finite")

    seen = set()
    norm = []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise MalformedGraph(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise MalformedGraph(f"edge ({u}, {v}) endpoint out of range for {n} vertices")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise MalformedGraph(f"duplicate edge {key}")
        seen.add(key)
        norm.append(key)

    if norm:
        earr = np.array(sorted(norm), dtype=np.int64)
        both = np.concatenate([earr, earr[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n)
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        indices = both[:, 1].copy()
    else:
        earr = np.empty((0, 2), dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices = np.empty(0, dtype=np.int64)

    component_id = np.full(n, -1, dtype=np.int64)
    label = 0
    for start in range(n):
        if component_id[start] != -1:
            continue
        component_id[start] = label
        stack = [start]
        while stack:
            v = stack.pop()
            for u in indices[indptr[v]:indptr[v + 1]]:
                if component_id[u] == -1:
                    component_id[u] = label
                    stack.append(int(u))
        label += 1

    graph = WeightedGraph(n, indptr, indices, component_id, earr)
    return graph, Cocycle(lw)


def outer_boundary(graph, U):
    """Vertices outside U adjacent to some vertex of U."""
    U = as_vertex_array(U, graph.vertex_count)
    require_nonempty(U)
    in_u = np.zeros(graph.vertex_count, dtype=bool)
    in_u[U] = True
    out = set()
    for u in U:
        for v in graph.neighbors(u):
            if not in_u[v]:
                out.add(int(v))
    return np.array(sorted(out), dtype=np.int64)


def is_connected_set(graph, U):
    """True iff the induced subgraph on U is connected; empty and singletons count."""
    U = as_vertex_array(U, graph.vertex_count)
    if U.size <= 1:
        return True
    in_u = np.zeros(graph.vertex_count, dtype=bool)
    in_u[U] = True
    seen = {int(U[0])}
    stack = [int(U[0])]
    while stack:
        v = stack.pop()
        for u in graph.neighbors(v):
            if in_u[u] and int(u) not in seen:
                seen.add(int(u))
                stack.append(int(u))
    return len(seen) == U.size


def rho_max_ratio(graph, cocycle, U):
    """Total mass of U over its largest single mass; in [1, len(U)]."""
    U = as_vertex_array(U, graph.vertex_count)
    require_nonempty(U)
    require_same_component(graph, U)
    lw = cocycle.log_weight[U]
    return float(np.exp(lw - lw.max()).sum())


def rho_order_key(cocycle, x):
    """Sort key for the weight order with vertex-id tie-break.

    Ascending sort gives the increasing weight order; reverse it for the
    decreasing enumeration (ties then come out in increasing id order).
    """
    return (float(cocycle.log_weight[x]), -int(x))


def rho_sorted(cocycle, vertices, descending=True):
    verts = [int(v) for v in vertices]
    verts.sort(key=lambda v: rho_order_key(cocycle, v), reverse=descending)
    return verts


@dataclass(frozen=True)
class RhoMeasure:
    """Probability measure whose atom ratios within a component equal the weight ratios."""

    component_mass: np.ndarray
    atoms: np.ndarray

    @classmethod
    def from_cocycle(cls, graph, cocycle, component_mass=None):
        """Size-proportional component masses by default, so a trivial cocycle
        yields the uniform measure."""
        n_comp = graph.component_count
        if component_mass is None:
            sizes = np.bincount(graph.component_id, minlength=n_comp).astype(float)
            component_mass = sizes / sizes.sum() if graph.vertex_count else sizes
        else:
            component_mass = np.asarray(component_mass, dtype=float)
            if component_mass.shape != (n_comp,):
                raise ValueError(f"need one mass per component ({n_comp})")
            if np.any(component_mass <= 0):
                raise ValueError("component masses must be positive")
            if not math.isclose(component_mass.sum(), 1.0, rel_tol=1e-12):
                raise ValueError("component masses must sum to 1")
        nw = cocycle.component_normalized_weights(graph)
        comp_tot = np.zeros(n_comp)
        np.add.at(comp_tot, graph.component_id, nw)
        atoms = component_mass[graph.component_id] * nw / comp_tot[graph.component_id]
        return cls(component_mass=component_mass, atoms=atoms)

    @staticmethod
    def fraction_atoms(graph, cocycle, component_mass=None):
        """Exact rational atoms built from the same normalized weights the
        float path uses, so identities involving both sides telescope in Q."""
        n_comp = graph.component_count
        if component_mass is None:
            sizes = np.bincount(graph.component_id, minlength=n_comp)
            total = int(sizes.sum())
            component_mass = [Fraction(int(s), total) for s in sizes]
        nw = cocycle.component_normalized_weights(graph)
        w = [Fraction(float(x)) for x in nw]
        comp_tot = [Fraction(0)] * n_comp
        for v in range(graph.vertex_count):
            comp_tot[graph.component_id[v]] += w[v]
        return [
            component_mass[graph.component_id[v]] * w[v] / comp_tot[graph.component_id[v]]
            for v in range(graph.vertex_count)
        ]

    def mass(self, U):
        U = np.asarray(list(U) if not isinstance(U, np.ndarray) else U, dtype=np.int64)
        return float(self.atoms[U].sum()) if U.size else 0.0

    def total(self):
        return float(self.atoms.sum())

    def integrate(self, values):
        return float(np.dot(self.atoms, as_values_array(values, len(self.atoms))))


@dataclass(frozen=True)
class QuotientResult:
    """Contraction of a graph along connected equivalence classes."""

    graph: WeightedGraph
    cocycle: Cocycle
    values: np.ndarray
    class_of: np.ndarray
    classes: tuple


def quotient(graph, cocycle, values, relation):
    """Contract each class of the relation to a single vertex.

    The new weight of a class is the sum of its members' weights, the new
    function value is the weighted mean over the class, and two classes are
    adjacent iff some edge crosses between them. Every class must induce a
    connected subgraph.
    """
    values = as_values_array(values, graph.vertex_count)
    for cls in relation.classes:
        if len(cls) > 1 and not is_connected_set(graph, cls):
            raise DisconnectedClass(f"class with members {cls[:8].tolist()}... is not connected")

    class_of = relation.class_of
    k = len(relation.classes)
    lw = cocycle.log_weight

    cls_max = np.full(k, -np.inf)
    np.maximum.at(cls_max, class_of, lw)
    w = np.exp(lw - cls_max[class_of])
    cls_tot = np.zeros(k)
    np.add.at(cls_tot, class_of, w)
    cls_fdot = np.zeros(k)
    np.add.at(cls_fdot, class_of, values * w)
    q_logw = cls_max + np.log(cls_tot)
    q_vals = cls_fdot / cls_tot

    base_edges = graph.edges()
    if len(base_edges):
        qe = class_of[base_edges]
        qe = qe[qe[:, 0] != qe[:, 1]]
        lo = np.minimum(qe[:, 0], qe[:, 1])
        hi = np.maximum(qe[:, 0], qe[:, 1])
        out_edges = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(qe) else np.empty((0, 2), dtype=np.int64)
    else:
        out_edges = np.empty((0, 2), dtype=np.int64)

    qgraph, qcocycle = build_graph(out_edges, q_logw)
    qcocycle = Cocycle(q_logw)
    return QuotientResult(
        graph=qgraph,
        cocycle=qcocycle,
        values=q_vals,
        class_of=class_of.copy(),
        classes=tuple(np.array(c, dtype=np.int64) for c in relation.classes),
    )


def cocycle_identity_holds(cocycle, x, y, z):
    """Exact check of the multiplicative identity, done in rational arithmetic."""
    a = Fraction(float(cocycle.log_weight[x]))
    b = Fraction(float(cocycle.log_weight[y]))
    c = Fraction(float(cocycle.log_weight[z]))
    return (a - b) + (b - c) == a - c


def read_graph_file(path):
    """Parse the line-oriented graph format.

    Header ``n m``, then m edge lines ``u v``, then n lines ``logw f``.
    ``#`` starts a comment.
    """
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.append(line.split())
    if not tokens:
        raise MalformedGraph(f"{path}: empty graph file")
    header = tokens[0]
    if len(header) != 2:
        raise MalformedGraph(f"{path}: header must be 'n m'")
    n, m = int(header[0]), int(header[1])
    if len(tokens) != 1 + m + n:
        raise MalformedGraph(f"{path}: expected {1 + m + n} lines, found {len(tokens)}")
    edges = [(int(t[0]), int(t[1])) for t in tokens[1:1 + m]]
    logw = np.empty(n)
    vals = np.empty(n)
    for i, t in enumerate(tokens[1 + m:]):
        if len(t) != 2:
            raise MalformedGraph(f"{path}: vertex line {i} must be 'logw f'")
        logw[i] = float(t[0])
        vals[i] = float(t[1])
    graph, cocycle = build_graph(edges, logw)
    return graph, cocycle, vals


def write_graph_file(path, graph, cocycle, values):
    values = as_values_array(values, graph.vertex_count)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.vertex_count} {graph.edge_count}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")
        for lw, fv in zip(cocycle.log_weight, values):
            fh.write(f"{float(lw)!r} {float(fv)!r}\n")
