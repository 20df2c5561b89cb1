"""Weight-averaged function values over sets and equivalence classes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EmptySet, NotDisjoint, TargetOutOfRange
from .graph import is_connected_set, outer_boundary, rho_max_ratio
from .validation import (
    as_values_array,
    as_vertex_array,
    check_positive,
    check_unit_interval,
    require_nonempty,
    require_same_component,
)


class VertexFunction:
    """Per-vertex real values with a cached sup norm."""

    __slots__ = ("values", "_sup")

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        self._sup = float(np.abs(self.values).max()) if self.values.size else 0.0

    @property
    def sup_norm(self):
        return self._sup

    def l1_norm(self, mu):
        return float(np.dot(mu.atoms, np.abs(self.values)))

    def mean(self, mu):
        return float(np.dot(mu.atoms, self.values))

    def centered(self, mu):
        return VertexFunction(self.values - self.mean(mu))

    def __len__(self):
        return len(self.values)


def weighted_average(values, cocycle, U, exact=False):
    """Weight-averaged value of f over U; independent of the reference vertex.

    Weights inside U are divided by their maximum before summing, so the
    computation never overflows and is anchored at the heaviest point.
    """
    U = as_vertex_array(U)
    require_nonempty(U)
    vals = as_values_array(values)[U]
    lw = cocycle.log_weight[U]
    w = np.exp(lw - lw.max())
    if exact:
        num = sum(Fraction(float(v)) * Fraction(float(x)) for v, x in zip(vals, w))
        return num / sum(Fraction(float(x)) for x in w)
    return float(np.dot(vals, w) / w.sum())


def union_identity_check(values, cocycle, U, V):
    """Both sides of the two-set mixing identity for averages.

    lhs is the average over the union; rhs mixes the two averages with the
    sets' relative masses. Returns (lhs, rhs).
    """
    U = as_vertex_array(U)
    V = as_vertex_array(V)
    require_nonempty(U, "U")
    require_nonempty(V, "V")
    if np.intersect1d(U, V).size:
        raise NotDisjoint("U and V overlap")
    lhs = weighted_average(values, cocycle, np.concatenate([U, V]))
    anchor = float(max(cocycle.log_weight[U].max(), cocycle.log_weight[V].max()))
    mu_u = float(np.exp(cocycle.log_weight[U] - anchor).sum())
    mu_v = float(np.exp(cocycle.log_weight[V] - anchor).sum())
    au = weighted_average(values, cocycle, U)
    av = weighted_average(values, cocycle, V)
    rhs = (mu_u * au + mu_v * av) / (mu_u + mu_v)
    return lhs, rhs


def mean_over(graph, values, cocycle, relation, exact=False):
    """Class-wise weighted mean, returned as a function constant on classes.

    In exact mode the weights are the component-normalized ones as exact
    rationals, shared with RhoMeasure.fraction_atoms, so the expectation
    identity holds with no tolerance.
    """
    vals = as_values_array(values, graph.vertex_count)
    if exact:
        nw = cocycle.component_normalized_weights(graph)
        w = [Fraction(float(x)) for x in nw]
        out_exact = [None] * graph.vertex_count
        for cls in relation.classes:
            require_same_component(graph, cls, "equivalence class")
            num = sum(Fraction(float(vals[v])) * w[v] for v in cls)
            den = sum(w[v] for v in cls)
            a = num / den
            for v in cls:
                out_exact[v] = a
        return out_exact
    out = np.empty(graph.vertex_count)
    for cls in relation.classes:
        require_same_component(graph, cls, "equivalence class")
        out[cls] = weighted_average(vals, cocycle, cls)
    return VertexFunction(out)


def chebyshev_restriction(graph, values, cocycle, relation, mu, eps):
    """Union of classes where the class mean is at most l1(f)/eps in absolute value.

    The discarded classes carry mass at most eps.
    """
    check_unit_interval(eps, "eps")
    f = values if isinstance(values, VertexFunction) else VertexFunction(as_values_array(values, graph.vertex_count))
    bound = f.l1_norm(mu) / eps
    means = mean_over(graph, f.values, cocycle, relation)
    keep = [cls for cls in relation.classes if abs(means.values[cls[0]]) <= bound]
    if keep:
        return np.sort(np.concatenate(keep))
    return np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class GrowthResult:
    vertices: np.ndarray
    average: float
    delta: float
    target: float


def growth_slack(values, cocycle, U, V):
    """The one-step average perturbation bound for growing U inside V."""
    U = as_vertex_array(U)
    V = as_vertex_array(V)
    rest = np.setdiff1d(V, U)
    if rest.size == 0:
        return 0.0
    vals = as_values_array(values)
    sup_rest = float(np.abs(vals[rest]).max())
    anchor = float(cocycle.log_weight[V].max())
    max_rest = float(np.exp(cocycle.log_weight[rest] - anchor).max())
    mass_u = float(np.exp(cocycle.log_weight[U] - anchor).sum())
    return sup_rest * max_rest / mass_u


def intermediate_value_grow(graph, values, cocycle, U, V, r):
    """Grow U toward V one vertex at a time, steering the average toward r.

    Both sets must be connected with U inside V and r between their averages.
    Returns the connected intermediate set whose average came closest to r,
    together with the instance's perturbation bound.
    """
    U = as_vertex_array(U, graph.vertex_count)
    V = as_vertex_array(V, graph.vertex_count)
    require_nonempty(U, "U")
    if np.setdiff1d(U, V).size:
        raise ValueError("U must be contained in V")
    require_same_component(graph, V)
    if not is_connected_set(graph, U) or not is_connected_set(graph, V):
        raise ValueError("U and V must both be connected")

    vals = as_values_array(values, graph.vertex_count)
    a_u = weighted_average(vals, cocycle, U)
    a_v = weighted_average(vals, cocycle, V)
    lo, hi = min(a_u, a_v), max(a_u, a_v)
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= r <= hi + slack):
        raise TargetOutOfRange(f"r={r} outside [{lo}, {hi}]")

    delta = growth_slack(vals, cocycle, U, V)

    anchor = float(cocycle.log_weight[V].max())
    w = np.exp(cocycle.log_weight - anchor)
    in_v = np.zeros(graph.vertex_count, dtype=bool)
    in_v[V] = True
    in_cur = np.zeros(graph.vertex_count, dtype=bool)
    in_cur[U] = True

    mass = float(w[U].sum())
    fsum = float(np.dot(vals[U], w[U]))
    frontier = set()
    for u in U:
        for v in graph.neighbors(u):
            if in_v[v] and not in_cur[v]:
                frontier.add(int(v))

    best_set = U.copy()
    best_err = abs(fsum / mass - r)
    current = list(U)

    while frontier:
        pick, pick_err = None, None
        for v in sorted(frontier):
            err = abs((fsum + vals[v] * w[v]) / (mass + w[v]) - r)
            if pick is None or err < pick_err:
                pick, pick_err = v, err
        frontier.discard(pick)
        in_cur[pick] = True
        current.append(pick)
        mass += w[pick]
        fsum += vals[pick] * w[pick]
        for v in graph.neighbors(pick):
            if in_v[v] and not in_cur[v]:
                frontier.add(int(v))
        err = abs(fsum / mass - r)
        if err < best_err:
            best_err = err
            best_set = np.array(sorted(current), dtype=np.int64)

    avg = weighted_average(vals, cocycle, best_set)
    return GrowthResult(vertices=best_set, average=avg, delta=delta, target=float(r))


@dataclass(frozen=True)
class LambdaSign:
    tag: str
    lam: float
    average: float

    @property
    def central(self):
        return self.tag == "central"


def lambda_classify(values, cocycle, U, lam):
    """Classify the average of f over U against the open window (-lam, lam).

    The window is open, the rays are closed: an average equal to +/- lam is
    signed, never central.
    """
    check_positive(lam, "lam")
    a = weighted_average(values, cocycle, U)
    if a >= lam:
        tag = "positive"
    elif a <= -lam:
        tag = "negative"
    else:
        tag = "central"
    return LambdaSign(tag=tag, lam=float(lam), average=a)


def quotient_ratio(graph, cocycle, U, relation):
    """Mass of U over the largest mass of a relation class inside it."""
    U = as_vertex_array(U, graph.vertex_count)
    require_nonempty(U)
    require_same_component(graph, U)
    anchor = float(cocycle.log_weight[U].max())
    w = np.exp(cocycle.log_weight - anchor)
    total = float(w[U].sum())
    biggest = 0.0
    for ci in np.unique(relation.class_of[U]):
        cls = relation.classes[ci]
        biggest = max(biggest, float(w[cls].sum()))
    return total / biggest


def family_S_membership(graph, values, cocycle, U, lam, min_ratio, relation):
    """Membership in the family of invariant, connected, centered sets of large
    quotient ratio."""
    check_positive(lam, "lam")
    check_positive(min_ratio, "min_ratio")
    U = as_vertex_array(U, graph.vertex_count)
    if U.size == 0:
        return False
    for ci in np.unique(relation.class_of[U]):
        cls = relation.classes[ci]
        mask = np.isin(cls, U)
        if not mask.all():
            return False
    if not is_connected_set(graph, U):
        return False
    if not lambda_classify(values, cocycle, U, lam).central:
        return False
    return quotient_ratio(graph, cocycle, U, relation) >= min_ratio
