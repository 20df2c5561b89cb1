"""The staged tiling loop, its reductions and constants, and the estimator API.

Each stage contracts the graph by the relation built so far, finds a packed
and saturated prepartition of near-balanced, large-ratio sets on the
contraction, and lifts it back. The joined relations form an increasing chain
of connected finite equivalence relations whose tile averages are driven
toward the global mean.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .averages import VertexFunction
from .errors import BadDenominator, NotFitted, StallDiagnostic
from .graph import Cocycle, RhoMeasure, quotient
from .packing import CentralFamily, SearchBudget, packed_and_saturated
from .partition import EquivRel, Prepartition
from .reports import ConvergenceReport
from .validation import as_values_array, check_positive, check_unit_interval

SPILL_FRACTION = 2.0 / 13.0


@dataclass(frozen=True)
class ReductionResult:
    values: np.ndarray
    level: float
    tail_l1: float


def linf_reduction(values, mu, eps):
    """Clip the observable at the smallest level whose l1 tail is below (eps/2)^2."""
    check_unit_interval(eps, "eps")
    f = as_values_array(values)
    budget = (eps / 2.0) ** 2
    levels = np.unique(np.abs(f))
    candidates = np.concatenate([[0.0], levels])

    def tail(level):
        return float(np.dot(mu.atoms, np.maximum(np.abs(f) - level, 0.0)))

    chosen = None
    for level in candidates:
        if tail(level) < budget:
            chosen = float(level)
            break
    if chosen is None:
        raise AssertionError("finite observables always admit a clipping level")
    g = np.clip(f, -chosen, chosen)
    return ReductionResult(values=g, level=chosen, tail_l1=tail(chosen))


def cutting_one_side_delta(eps, sup_norm):
    """Window half-width eps^2 / (sup + 1) passed down to the stage schedule."""
    check_positive(eps, "eps")
    if sup_norm < 0:
        raise ValueError("sup_norm must be nonnegative")
    return eps * eps / (sup_norm + 1.0)


def schedule_constants(delta, sup_norm, n_stages):
    """Stage constants: geometrically shrinking windows, geometrically growing
    ratio floors, and the induced pack thresholds.

    lam[n] * ratio[n] = (4/3)^n * delta grows without bound, which is what the
    stage argument needs.
    """
    lam = {n: delta * 3.0 ** (-n) for n in range(1, n_stages + 3)}
    ratio = {n: float(4 ** n) for n in range(1, n_stages + 1)}
    pack = {n: lam[n + 2] / (sup_norm + lam[n + 1]) for n in range(1, n_stages + 1)}
    return lam, ratio, pack


@dataclass
class TilingState:
    delta: float
    sup_norm: float
    lambdas: dict
    ratios: dict
    packs: dict
    prepartitions: list = field(default_factory=list)
    relations: list = field(default_factory=list)
    status: str = "empty"
    stall_components: tuple = ()
    spill_checks: list = field(default_factory=list)


def _stage_statistics(graph, cocycle, mu, f, relation, target, eps, frontier):
    nw = cocycle.component_normalized_weights(graph)
    labels = relation.class_of
    k = relation.class_count
    tot = np.zeros(k)
    np.add.at(tot, labels, nw)
    fdot = np.zeros(k)
    np.add.at(fdot, labels, f * nw)
    class_mean = fdot / tot

    touched = np.zeros(k, dtype=bool)
    if frontier is not None and len(frontier):
        touched[labels[frontier]] = True

    within_class = np.abs(class_mean - target) <= eps
    ok = within_class[labels] & ~touched[labels]
    mass_within = float(mu.atoms[ok].sum())
    frontier_mass = float(mu.atoms[touched[labels]].sum())

    sizes = np.bincount(labels, minlength=k)
    hist = {}
    for s in sizes:
        hist[int(s)] = hist.get(int(s), 0) + 1
    mean_values = class_mean[labels]
    return mass_within, frontier_mass, int(sizes.max()), float(sizes.mean()), hist, mean_values


def _spill_check(graph, cocycle, part, relation, covered_mask, components):
    """Fraction test on stalled components: cells against the classes touching
    the covered-side boundary of the stuck region."""
    nw = cocycle.component_normalized_weights(graph)
    boundary = set()
    for v in np.flatnonzero(covered_mask):
        for u in graph.neighbors(int(v)):
            if not covered_mask[u]:
                boundary.add(int(v))
                break
    if not boundary:
        return []
    s_classes = {int(relation.class_of[v]) for v in boundary}
    in_s = np.isin(relation.class_of, list(s_classes))
    checks = []
    comp_set = set(components)
    for cell in part.cells:
        comp = int(graph.component_id[cell[0]])
        if comp not in comp_set:
            continue
        inside = float(nw[cell[in_s[cell]]].sum())
        outside = float(nw[cell[~in_s[cell]]].sum())
        ok = outside >= SPILL_FRACTION * inside
        checks.append(
            {
                "cell_anchor": int(cell[0]),
                "component": comp,
                "inside_mass": inside,
                "outside_mass": outside,
                "ok": bool(ok),
            }
        )
    return checks


def run_tiling(model, eps, max_stages=12, budget=None, raise_on_stall=True):
    """Drive the staged tiling loop on a generated model.

    Stops as soon as tiles within eps of the global mean carry mass 1 - eps,
    or after max_stages with diagnostics. A stage that adds no coverage and no
    statistic progress raises StallDiagnostic (carrying the partial state)
    unless raise_on_stall is false.
    """
    check_unit_interval(eps, "eps")
    graph, cocycle, mu = model.graph, model.cocycle, model.measure
    n = graph.vertex_count
    f = as_values_array(model.values, n)
    frontier = model.frontier

    target = float(np.dot(mu.atoms, f))
    centered = f - target
    reduction = linf_reduction(centered, mu, eps)
    g = reduction.values
    sup = float(np.abs(g).max()) if n else 0.0
    delta = cutting_one_side_delta(eps, sup)
    lambdas, ratios, packs = schedule_constants(delta, sup, max_stages)

    state = TilingState(delta=delta, sup_norm=sup, lambdas=lambdas, ratios=ratios, packs=packs)
    report = ConvergenceReport(
        config={
            "model.kind": model.spec.kind,
            "model.n": model.spec.n,
            "model.p": model.spec.p,
            "model.q": model.spec.q,
            "run.eps": eps,
            "run.max_stages": max_stages,
        },
        seed=model.spec.seed,
        target_mean=target,
    )

    relation = EquivRel.identity(n)
    covered = np.zeros(n, dtype=bool)
    best_mass = -1.0
    covered_mass_prev = -1.0
    class_count_prev = n + 1
    state.status = "budget_exhausted"

    for stage in range(1, max_stages + 1):
        t0 = time.perf_counter()
        if budget is None:
            # a candidate's unit count bounds its mass ratio, so the cap must
            # track the stage's ratio floor
            stage_budget = SearchBudget(max_units=int(min(max(128, 4 * ratios[stage]), 4096)))
        else:
            stage_budget = budget
        if ratios[stage] > stage_budget.max_units:
            state.status = "stalled"
            report.diagnostics = {
                "reason": "ratio floor exceeds the candidate budget",
                "stage": stage,
                "ratio_floor": ratios[stage],
                "max_units": stage_budget.max_units,
            }
            break
        q = quotient(graph, cocycle, g, relation)
        family = CentralFamily(q.values, lambdas[stage], ratios[stage])
        qpart = packed_and_saturated(q.graph, q.cocycle, family, packs[stage], stage_budget)
        lifted = [
            np.sort(np.concatenate([q.classes[int(qi)] for qi in cell])) for cell in qpart.cells
        ]
        part = Prepartition.from_cells(lifted, n)
        relation = relation.join(part.to_equiv())
        state.prepartitions.append(part)
        state.relations.append(relation)
        covered |= part.domain_mask()

        mass_within, frontier_mass, max_tile, mean_tile, hist, _ = _stage_statistics(
            graph, cocycle, mu, f, relation, target, eps, frontier
        )
        wall_ms = (time.perf_counter() - t0) * 1000.0
        report.add_stage(stage, eps, mass_within, max_tile, mean_tile, wall_ms, hist)
        report.frontier_mass = frontier_mass

        if mass_within >= 1.0 - eps:
            state.status = "converged"
            break

        covered_mass = float(mu.atoms[covered].sum())
        refined = relation.class_count < class_count_prev
        class_count_prev = relation.class_count
        if (
            mass_within <= best_mass
            and covered_mass <= covered_mass_prev
            and not refined
            and stage < max_stages
        ):
            stalled_comps = tuple(
                sorted({int(c) for c in np.unique(graph.component_id[~covered])})
            )
            state.status = "stalled"
            state.stall_components = stalled_comps
            state.spill_checks = _spill_check(graph, cocycle, part, relation, covered, stalled_comps)
            report.diagnostics = {
                "stall_components": list(stalled_comps),
                "spill_checks": state.spill_checks,
            }
            if raise_on_stall:
                raise StallDiagnostic(
                    f"no progress at stage {stage}; components {stalled_comps} are stuck",
                    state=state,
                    report=report,
                    components=stalled_comps,
                )
            break
        best_mass = max(best_mass, mass_within)
        covered_mass_prev = covered_mass

    report.status = state.status
    return state, report


@dataclass(frozen=True)
class VisibilityComponentReport:
    component: int
    size: int
    ratio: float
    max_block_visibility: float | None
    flagged: bool


@dataclass(frozen=True)
class FinitizingVisibilityReport:
    components: tuple
    flagged_components: tuple
    free_mass_fraction: float


def finitizing_visibility_check(graph, cocycle, values, prepart, lam, min_ratio, detail_limit=4096):
    """Measure how far the graph off the prepartition's domain can see.

    Reports, per connected piece of the off-domain subgraph, its mass ratio
    and (on small pieces) the largest block visibility; a piece whose ratio
    reaches the family's floor is flagged as a packedness gap.
    """
    free_mask = ~prepart.domain_mask()
    labels, n_lab = graph.subgraph_components(free_mask)
    nw = cocycle.component_normalized_weights(graph)
    comps = []
    flagged = []
    lw = cocycle.log_weight
    for lab in range(n_lab):
        piece = np.flatnonzero(labels == lab)
        pw = nw[piece]
        ratio = float(pw.sum() / pw.max())
        max_vis = None
        if len(piece) <= detail_limit:
            max_vis = 0.0
            piece_set = set(int(v) for v in piece)
            for x in piece:
                cap = lw[x]
                seen = {int(x)}
                stack = [int(x)]
                while stack:
                    v = stack.pop()
                    for u in graph.neighbors(v):
                        u = int(u)
                        if u in piece_set and u not in seen and lw[u] <= cap:
                            seen.add(u)
                            stack.append(u)
                mass = float(np.exp(lw[list(seen)] - cap).sum())
                max_vis = max(max_vis, mass)
        is_flagged = ratio >= min_ratio
        comps.append(
            VisibilityComponentReport(
                component=lab,
                size=int(len(piece)),
                ratio=ratio,
                max_block_visibility=max_vis,
                flagged=is_flagged,
            )
        )
        if is_flagged:
            flagged.append(lab)
    total = float(nw.sum())
    free_fraction = float(nw[free_mask].sum() / total) if total else 0.0
    return FinitizingVisibilityReport(
        components=tuple(comps),
        flagged_components=tuple(flagged),
        free_mass_fraction=free_fraction,
    )


def ratio_experiment(model, g, eps, max_stages=12, budget=None, f=None, raise_on_stall=True):
    """Tile under the g-rescaled weights and report the two-function ratio
    statistic against the quotient of the global means.

    With g identically 1 this reduces to run_tiling on the original weights.
    """
    garr = as_values_array(g, model.graph.vertex_count)
    if np.any(garr <= 0):
        raise BadDenominator("g must be strictly positive everywhere")
    farr = as_values_array(f if f is not None else model.values, model.graph.vertex_count)

    graph = model.graph
    sigma = Cocycle(model.cocycle.log_weight + np.log(garr))
    total_g = float(np.dot(model.measure.atoms, garr))
    nu_atoms = model.measure.atoms * garr / total_g
    comp_mass = np.zeros(graph.component_count)
    np.add.at(comp_mass, graph.component_id, nu_atoms)
    nu = RhoMeasure(component_mass=comp_mass, atoms=nu_atoms)

    from .models import ModelBundle

    rescaled = ModelBundle(
        spec=model.spec,
        graph=graph,
        cocycle=sigma,
        measure=nu,
        values=VertexFunction(farr / garr),
        frontier=model.frontier,
        raw_mean=0.0,
    )
    state, _inner = run_tiling(rescaled, eps, max_stages, budget, raise_on_stall)

    target_ratio = float(np.dot(model.measure.atoms, farr)) / total_g
    report = ConvergenceReport(
        config={
            "model.kind": model.spec.kind,
            "model.n": model.spec.n,
            "model.p": model.spec.p,
            "model.q": model.spec.q,
            "run.eps": eps,
            "run.max_stages": max_stages,
        },
        seed=model.spec.seed,
        target_mean=target_ratio,
    )
    nw = model.cocycle.component_normalized_weights(graph)
    for i, relation in enumerate(state.relations):
        labels = relation.class_of
        k = relation.class_count
        fsum = np.zeros(k)
        gsum = np.zeros(k)
        np.add.at(fsum, labels, farr * nw)
        np.add.at(gsum, labels, garr * nw)
        ratio = fsum / gsum
        touched = np.zeros(k, dtype=bool)
        if model.frontier is not None and len(model.frontier):
            touched[labels[model.frontier]] = True
        ok = (np.abs(ratio - target_ratio) <= eps)[labels] & ~touched[labels]
        mass_within = float(model.measure.atoms[ok].sum())
        sizes = np.bincount(labels, minlength=k)
        hist = {}
        for s in sizes:
            hist[int(s)] = hist.get(int(s), 0) + 1
        inner_row = _inner.rows[i]
        report.add_stage(i + 1, eps, mass_within, int(sizes.max()), float(sizes.mean()), inner_row.wall_ms, hist)
    report.status = state.status
    return state, report


def tile_ratios(model, relation, g=None, f=None):
    """Per-vertex ratio statistic under one relation (g defaults to 1)."""
    n = model.graph.vertex_count
    farr = as_values_array(f if f is not None else model.values, n)
    garr = as_values_array(g, n) if g is not None else np.ones(n)
    if np.any(garr <= 0):
        raise BadDenominator("g must be strictly positive everywhere")
    nw = model.cocycle.component_normalized_weights(model.graph)
    labels = relation.class_of
    k = relation.class_count
    fsum = np.zeros(k)
    gsum = np.zeros(k)
    np.add.at(fsum, labels, farr * nw)
    np.add.at(gsum, labels, garr * nw)
    return (fsum / gsum)[labels]


class ErgodicTiler:
    """Estimator wrapper around the staged tiling loop.

    Parameters mirror run_tiling; fit(model) learns the chain of relations
    and stores per-vertex tile labels, after which transform averages any
    observable over the learned tiles.
    """

    def __init__(self, eps=0.05, max_stages=12, exhaustive_limit=12, max_units=64, raise_on_stall=False):
        self.eps = eps
        self.max_stages = max_stages
        self.exhaustive_limit = exhaustive_limit
        self.max_units = max_units
        self.raise_on_stall = raise_on_stall

    _param_names = ("eps", "max_stages", "exhaustive_limit", "max_units", "raise_on_stall")

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def fit(self, model):
        budget = SearchBudget(exhaustive_limit=self.exhaustive_limit, max_units=self.max_units)
        state, report = run_tiling(
            model,
            eps=self.eps,
            max_stages=self.max_stages,
            budget=budget,
            raise_on_stall=self.raise_on_stall,
        )
        self.model_ = model
        self.state_ = state
        self.report_ = report
        self.relation_ = state.relations[-1] if state.relations else EquivRel.identity(model.graph.vertex_count)
        self.labels_ = self.relation_.class_of.copy()
        return self

    def _check_fitted(self):
        if not hasattr(self, "state_"):
            raise NotFitted("call fit(model) first")

    def transform(self, values=None):
        """Average an observable over the learned tiles (per-vertex output)."""
        self._check_fitted()
        model = self.model_
        vals = as_values_array(values if values is not None else model.values, model.graph.vertex_count)
        nw = model.cocycle.component_normalized_weights(model.graph)
        labels = self.relation_.class_of
        k = self.relation_.class_count
        tot = np.zeros(k)
        fdot = np.zeros(k)
        np.add.at(tot, labels, nw)
        np.add.at(fdot, labels, vals * nw)
        return (fdot / tot)[labels]

    def fit_transform(self, model, values=None):
        return self.fit(model).transform(values)

    def score(self, model=None):
        """Final fraction of mass whose tile average met the tolerance."""
        self._check_fitted()
        return self.report_.final_mass
