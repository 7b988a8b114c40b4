"""Exact min-imbalance solvers for two covariates.

Two routes:

* min-cost flow: one node per level of each covariate plus two hub nodes that
  absorb excess and deficit at unit cost; flow on a level-1 -> level-2 arc is
  the number of controls taken from that intersection cell.
* max-flow: source -> covariate-1 levels -> covariate-2 levels -> sink, with
  level arcs capped at the treatment sizes. The maximum flow selects controls
  that create no excess anywhere; the remaining selection size is then filled
  first from cells touching a deficient level, then arbitrarily.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .core import (Cell, Dataset, LevelIndex, Selection, check_capacity, imbalance_value,
                   index_levels, intersection_counts, level_totals)
from .errors import CertificateError, NotTwoCovariates, QTooLarge, WrongSelectionSize
from .netflow import (Arc, FlowAssignment, FlowNetwork, certify_maxflow, certify_mcnf,
                      maxflow_solve, mcnf_solve)


@dataclass(frozen=True)
class FlowGraph:
    """A network plus, for every arc, what it stands for.

    Legend entries are ``("x", (i1, i2))`` for cell arcs, ``("e1", i1)``,
    ``("d1", i1)``, ``("e2", i2)``, ``("d2", i2)`` for excess/deficit arcs, and
    ``("s", i1)`` / ``("t", i2)`` for the max-flow source and sink arcs.
    """

    network: FlowNetwork
    legend: tuple[tuple[str, object], ...]
    source: int | None = None
    sink: int | None = None

    def cell_flows(self, flows) -> dict[Cell, int]:
        return {key: f for (kind, key), f in zip(self.legend, flows) if kind == "x"}


@dataclass(frozen=True)
class Solve2Result:
    selection: Selection
    objective: int
    method: str
    q: int
    f_star: int | None = None
    s_plus_size: int | None = None
    lbar1: int | None = None
    lbar2: int | None = None
    graph: FlowGraph | None = field(default=None, repr=False, compare=False)
    flow: FlowAssignment | None = field(default=None, repr=False, compare=False)


def _require_two(index: LevelIndex) -> None:
    if index.P != 2:
        raise NotTwoCovariates(f"exact flow solvers need exactly 2 covariates, got {index.P}")


def _check_q(index: LevelIndex, q: int) -> None:
    if q < 0:
        raise QTooLarge(f"selection size must be nonnegative, got {q}")
    if q > index.n_control:
        raise QTooLarge(f"selection size {q} exceeds control group size {index.n_control}")


def build_mcnf_graph(index: LevelIndex, cells: Mapping[Cell, int], q: int | None = None) -> FlowGraph:
    """Min-cost flow network whose optimum is the minimum imbalance at size ``q``.

    Nodes ``0..k1-1`` are covariate-1 levels, ``k1..k1+k2-1`` covariate-2
    levels, then hub 1 and hub 2. Hub arcs are uncapacitated in principle and
    get the finite bound ``n + n'``.
    """
    _require_two(index)
    q = index.n if q is None else q
    k1, k2 = index.k
    n, big = index.n, index.n + index.n_control
    hub1, hub2 = k1 + k2, k1 + k2 + 1
    supplies = list(index.treated[0]) + [-x for x in index.treated[1]] + [q - n, n - q]
    arcs: list[Arc] = []
    legend: list[tuple[str, object]] = []
    for (i1, i2), u in sorted(cells.items()):
        arcs.append(Arc(i1, k1 + i2, u, 0))
        legend.append(("x", (i1, i2)))
    for i1 in range(k1):
        arcs += [Arc(hub1, i1, big, 1), Arc(i1, hub1, big, 1)]
        legend += [("e1", i1), ("d1", i1)]
    for i2 in range(k2):
        arcs += [Arc(k1 + i2, hub2, big, 1), Arc(hub2, k1 + i2, big, 1)]
        legend += [("e2", i2), ("d2", i2)]
    return FlowGraph(FlowNetwork(k1 + k2 + 2, tuple(arcs), tuple(supplies)), tuple(legend))


def build_maxflow_graph(index: LevelIndex, cells: Mapping[Cell, int]) -> FlowGraph:
    """Source 0, covariate-1 levels ``1..k1``, covariate-2 levels, sink last."""
    _require_two(index)
    k1, k2 = index.k
    source, sink = 0, k1 + k2 + 1
    arcs: list[Arc] = []
    legend: list[tuple[str, object]] = []
    for i1, ell in enumerate(index.treated[0]):
        arcs.append(Arc(source, 1 + i1, ell))
        legend.append(("s", i1))
    for (i1, i2), u in sorted(cells.items()):
        arcs.append(Arc(1 + i1, 1 + k1 + i2, u))
        legend.append(("x", (i1, i2)))
    for i2, ell in enumerate(index.treated[1]):
        arcs.append(Arc(1 + k1 + i2, sink, ell))
        legend.append(("t", i2))
    return FlowGraph(FlowNetwork(k1 + k2 + 2, tuple(arcs)), tuple(legend), source, sink)


def solve_mcnf_counts(index: LevelIndex, cells: Mapping[Cell, int], q: int | None = None) -> Solve2Result:
    _require_two(index)
    q = index.n if q is None else q
    _check_q(index, q)
    graph = build_mcnf_graph(index, cells, q)
    flow = mcnf_solve(graph.network)
    if not certify_mcnf(graph.network, flow):
        raise CertificateError("min-cost flow failed the reduced-cost check")
    counts = {c: x for c, x in graph.cell_flows(flow.flows).items() if x}
    if imbalance_value(index, counts) != flow.objective:
        raise CertificateError("flow cost disagrees with recomputed imbalance")
    return Solve2Result(Selection(counts), flow.objective, "mcnf", q, graph=graph, flow=flow)


def solve_mcnf2(dataset: Dataset, q: int | None = None) -> Solve2Result:
    index = index_levels(dataset)
    return solve_mcnf_counts(index, intersection_counts(dataset, index), q)


def recover_selection(index: LevelIndex, cells: Mapping[Cell, int], xstar: Mapping[Cell, int],
                      q: int | None = None) -> tuple[Selection, int]:
    """Grow a maximum flow's cell counts to a size-``q`` selection.

    Each covariate-1 level, then each covariate-2 level, is topped up towards
    ``min(treatment count, control count)`` from its cells in lexicographic
    order; whatever is still missing to reach ``q`` is padded from the first
    cells with spare controls. Returns the counts and the padding size.
    """
    _require_two(index)
    q = index.n if q is None else q
    _check_q(index, q)
    counts = {c: x for c, x in xstar.items() if x}
    size = sum(counts.values())
    if q < size:
        raise ValueError(f"q={q} is below the flow value {size}")
    totals = level_totals(index, counts)
    by_level: list[list[list[Cell]]] = [[[] for _ in range(k)] for k in index.k]
    for cell in sorted(cells):
        by_level[0][cell[0]].append(cell)
        by_level[1][cell[1]].append(cell)

    def add(cell: Cell, amount: int) -> None:
        nonlocal size
        counts[cell] = counts.get(cell, 0) + amount
        totals[0][cell[0]] += amount
        totals[1][cell[1]] += amount
        size += amount

    for p in (0, 1):
        for i in range(index.k[p]):
            for cell in by_level[p][i]:
                need = min(index.treated[p][i], index.control[p][i]) - totals[p][i]
                if need <= 0 or size == q:
                    break
                take = min(need, cells[cell] - counts.get(cell, 0), q - size)
                if take > 0:
                    add(cell, take)

    s_plus = q - size
    for cell in sorted(cells):
        if size == q:
            break
        take = min(cells[cell] - counts.get(cell, 0), q - size)
        if take > 0:
            add(cell, take)
    return Selection(counts), s_plus


def _trim(xstar: Mapping[Cell, int], q: int) -> dict[Cell, int]:
    """Drop units from cells in reverse lexicographic order until ``q`` remain."""
    counts = dict(xstar)
    surplus = sum(counts.values()) - q
    for cell in sorted(counts, reverse=True):
        if surplus <= 0:
            break
        take = min(counts[cell], surplus)
        counts[cell] -= take
        surplus -= take
    return {c: x for c, x in counts.items() if x}


def solve_maxflow_counts(index: LevelIndex, cells: Mapping[Cell, int],
                         q: int | None = None) -> Solve2Result:
    _require_two(index)
    q = index.n if q is None else q
    _check_q(index, q)
    graph = build_maxflow_graph(index, cells)
    flow = maxflow_solve(graph.network, graph.source, graph.sink)
    ok, _ = certify_maxflow(graph.network, flow, graph.source, graph.sink)
    if not ok:
        raise CertificateError("max-flow has an augmenting path left")
    f_star = flow.objective
    xstar = graph.cell_flows(flow.flows)
    if q < f_star:
        selection, s_plus = Selection(_trim(xstar, q)), 0
    else:
        selection, s_plus = recover_selection(index, cells, xstar, q)
    return Solve2Result(selection, imbalance_value(index, selection.counts), "maxflow", q,
                        f_star=f_star, s_plus_size=s_plus,
                        lbar1=index.lbar(0), lbar2=index.lbar(1), graph=graph, flow=flow)


def solve_maxflow2(dataset: Dataset, q: int | None = None) -> Solve2Result:
    index = index_levels(dataset)
    return solve_maxflow_counts(index, intersection_counts(dataset, index), q)


def classify_3type(index: LevelIndex, cells: Mapping[Cell, int] | None,
                   selection: Selection | Mapping[Cell, int]) -> tuple[int, int, int]:
    """Split a size-n selection into the three sample types used in the lower-bound argument.

    Type 1 takes samples whose levels are both in excess, type 2 samples with
    at least one level in excess (discrepancies are decremented as samples are
    taken), type 3 is the remainder. Cells are scanned in lexicographic order.
    For any size-n selection the imbalance equals ``4n - 2*s2 - 4*s3``.
    """
    _require_two(index)
    counts = selection.counts if isinstance(selection, Selection) else selection
    if cells is not None:
        check_capacity(counts, cells)
    size = sum(counts.values())
    if size != index.n:
        raise WrongSelectionSize(f"selection has {size} samples, expected n={index.n}")
    totals = level_totals(index, counts)
    dis = [[totals[p][i] - index.treated[p][i] for i in range(index.k[p])] for p in (0, 1)]
    left = {c: s for c, s in sorted(counts.items()) if s}

    def take(cell: Cell, amount: int) -> None:
        left[cell] -= amount
        dis[0][cell[0]] -= amount
        dis[1][cell[1]] -= amount

    s1 = 0
    # discrepancies only decrease, so one lexicographic pass exhausts each phase
    for (i1, i2), r in left.items():
        t = min(r, dis[0][i1], dis[1][i2])
        if t > 0:
            take((i1, i2), t)
            s1 += t
    s2 = 0
    for (i1, i2), r in left.items():
        t = min(r, max(dis[0][i1], dis[1][i2]))
        if t > 0:
            take((i1, i2), t)
            s2 += t
    return s1, s2, index.n - s1 - s2
