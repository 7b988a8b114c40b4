"""Second stage of matching-with-balance: assign kappa controls per treated sample.

Given how many controls to take from each level-intersection cell, the
minimum-distance assignment is a min-cost flow: one source per cell supplying
its count, unit arcs to the cell's controls, unit arcs priced at the distance
from every control to every treated sample, and a demand of kappa at each
treated sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .core import Cell, Dataset, cell_members, index_levels
from .errors import CertificateError, Infeasible, InfeasibleSizes, MalformedRow
from .netflow import Arc, FlowNetwork, certify_mcnf, mcnf_solve

SCALE = 1000
"""Fixed-point factor for real-valued distances (see :func:`scale_distance`)."""


def scale_distance(value: str | float, scale: int = SCALE) -> int:
    """Real distance -> integer units: multiply by ``scale`` and round half up."""
    d = Decimal(str(value)) * scale
    if d < 0:
        raise ValueError(f"distance {value} is negative")
    return int(d.quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class DistanceMatrix:
    treatment_ids: tuple[str, ...]
    control_ids: tuple[str, ...]
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.values) != len(self.treatment_ids):
            raise ValueError("distance matrix row count does not match treatment ids")
        for row in self.values:
            if len(row) != len(self.control_ids):
                raise ValueError("distance matrix row length does not match control ids")
            if any(v < 0 for v in row):
                raise ValueError("distances must be nonnegative")

    @classmethod
    def from_rows(cls, dataset: Dataset, rows: Sequence[Sequence[int]]) -> "DistanceMatrix":
        return cls(tuple(s.id for s in dataset.treatment), tuple(s.id for s in dataset.control),
                   tuple(tuple(r) for r in rows))

    def lookup(self) -> dict[tuple[str, str], int]:
        return {(t, c): v for t, row in zip(self.treatment_ids, self.values)
                for c, v in zip(self.control_ids, row)}


def read_distance_csv(path: str | Path, scale: int = 1) -> DistanceMatrix:
    """Header row ``<corner>,<control ids...>``; one row per treatment id.

    Cells are parsed as integers, or as reals scaled by ``scale`` when
    ``scale > 1``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedRow("distance file is empty", 1)
    control_ids = tuple(x.strip() for x in rows[0][1:])
    treatment_ids, values = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(control_ids) + 1:
            raise MalformedRow(f"expected {len(control_ids) + 1} fields, got {len(row)}", r)
        treatment_ids.append(row[0].strip())
        try:
            values.append(tuple(scale_distance(x.strip(), scale) if scale > 1 else int(x)
                                for x in row[1:]))
        except ValueError as exc:
            raise MalformedRow(str(exc), r) from None
    return DistanceMatrix(tuple(treatment_ids), control_ids, tuple(values))


@dataclass(frozen=True)
class Assignment:
    controls: dict[str, tuple[str, ...]]
    total_cost: int
    kappa: int


def assign_controls(dataset: Dataset, cell_sizes: Mapping[Cell, int], kappa: int,
                    distances: DistanceMatrix) -> Assignment:
    """Minimum total distance assignment of ``kappa`` distinct controls per treated sample,
    taking exactly ``cell_sizes[cell]`` controls from each cell."""
    index = index_levels(dataset)
    members = cell_members(dataset, index)
    sizes = {c: s for c, s in sorted(cell_sizes.items()) if s}
    if sum(sizes.values()) != kappa * dataset.n:
        raise InfeasibleSizes(
            f"cell sizes sum to {sum(sizes.values())}, need kappa*n = {kappa * dataset.n}")
    for cell, s in sizes.items():
        if s < 0 or s > len(members.get(cell, ())):
            raise InfeasibleSizes(
                f"cell {cell} asks for {s} controls but has {len(members.get(cell, ()))}")
    dist = distances.lookup()

    treated = [s.id for s in dataset.treatment]
    controls = [c for cell in sizes for c in members[cell]]
    n_cells = len(sizes)
    t_node = {t: n_cells + len(controls) + j for j, t in enumerate(treated)}
    supplies = list(sizes.values()) + [0] * len(controls) + [-kappa] * len(treated)
    arcs: list[Arc] = []
    pair_arcs: list[tuple[str, str]] = []
    c_node = n_cells
    for k, cell in enumerate(sizes):
        for c in members[cell]:
            arcs.append(Arc(k, c_node, 1, 0))
            pair_arcs.append(("", ""))
            for t in treated:
                if (t, c) not in dist:
                    raise InfeasibleSizes(f"no distance given for treatment {t!r}, control {c!r}")
                arcs.append(Arc(c_node, t_node[t], 1, dist[t, c]))
                pair_arcs.append((t, c))
            c_node += 1
    network = FlowNetwork(len(supplies), tuple(arcs), tuple(supplies))
    try:
        flow = mcnf_solve(network)
    except Infeasible as exc:
        raise InfeasibleSizes(str(exc)) from None
    if not certify_mcnf(network, flow):
        raise CertificateError("assignment flow failed the reduced-cost check")
    chosen: dict[str, list[str]] = {t: [] for t in treated}
    for (t, c), f in zip(pair_arcs, flow.flows):
        if t and f:
            chosen[t].append(c)
    return Assignment({t: tuple(sorted(cs)) for t, cs in chosen.items()}, flow.objective, kappa)
