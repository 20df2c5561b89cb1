"""Input validation helpers used across the public API."""

from __future__ import annotations

import numpy as np

from .errors import CrossComponent, EmptySet


def as_vertex_array(U, vertex_count=None):
    """Coerce a vertex collection to a sorted, duplicate-free int array."""
    arr = np.unique(np.asarray(list(U) if not isinstance(U, np.ndarray) else U, dtype=np.int64))
    if vertex_count is not None and arr.size:
        if arr[0] < 0 or arr[-1] >= vertex_count:
            raise IndexError(f"vertex ids must lie in [0, {vertex_count}); got {arr[0]}..{arr[-1]}")
    return arr


def require_nonempty(U, what="vertex set"):
    if len(U) == 0:
        raise EmptySet(f"{what} must be nonempty")
    return U


def require_same_component(graph, U, what="vertex set"):
    """Raise CrossComponent unless all of U lies in one component of the graph."""
    comps = np.unique(graph.component_id[np.asarray(U, dtype=np.int64)])
    if comps.size > 1:
        raise CrossComponent(f"{what} spans components {comps.tolist()}")
    return int(comps[0]) if comps.size else -1


def as_values_array(values, vertex_count=None):
    """Accept a VertexFunction or a plain sequence; return a float array."""
    vals = getattr(values, "values", values)
    arr = np.asarray(vals, dtype=float)
    if vertex_count is not None and arr.shape != (vertex_count,):
        raise ValueError(f"expected {vertex_count} per-vertex values, got shape {arr.shape}")
    return arr


def check_unit_interval(x, name):
    if not (0.0 < x < 1.0):
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {x}")
    return float(x)


def check_positive(x, name):
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return float(x)
