"""Problem data model: samples, level indexing, intersection cells, imbalance.

A selection is represented by how many controls it takes from each
level-intersection cell (the controls sharing one level on every covariate).
Imbalance depends only on those counts, so every solver works on counts and
:func:`materialize` turns counts into concrete control ids at the end.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CellOverflow, EmptyTreatment, KappaOutOfRange
from .rng import SplitMix64

Cell = tuple[int, ...]


@dataclass(frozen=True)
class Sample:
    id: str
    levels: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    covariates: tuple[str, ...]
    treatment: tuple[Sample, ...]
    control: tuple[Sample, ...]

    def __post_init__(self):
        for name in ("covariates", "treatment", "control"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.covariates:
            raise ValueError("at least one covariate is required")
        P = len(self.covariates)
        for group, samples in (("treatment", self.treatment), ("control", self.control)):
            seen = set()
            for s in samples:
                if len(s.levels) != P:
                    raise ValueError(
                        f"{group} sample {s.id!r} has {len(s.levels)} labels, expected {P}")
                if s.id in seen:
                    raise ValueError(f"duplicate {group} id {s.id!r}")
                seen.add(s.id)

    @property
    def P(self) -> int:
        return len(self.covariates)

    @property
    def n(self) -> int:
        return len(self.treatment)

    @property
    def n_control(self) -> int:
        return len(self.control)

    @classmethod
    def from_labels(cls, treatment: Iterable[Sequence[str]], control: Iterable[Sequence[str]],
                    covariates: Sequence[str] | None = None) -> "Dataset":
        """Build a dataset from bare label tuples, numbering ids ``t0, t1, ...`` and ``c0, ...``."""
        treatment = [tuple(str(x) for x in row) for row in treatment]
        control = [tuple(str(x) for x in row) for row in control]
        if covariates is None:
            first = (treatment or control or [()])[0]
            covariates = [f"x{p + 1}" for p in range(len(first))]
        return cls(tuple(covariates),
                   tuple(Sample(f"t{j}", row) for j, row in enumerate(treatment)),
                   tuple(Sample(f"c{j}", row) for j, row in enumerate(control)))


@dataclass(frozen=True)
class LevelIndex:
    """Per covariate: sorted level labels, treatment counts and control counts."""

    labels: tuple[tuple[str, ...], ...]
    treated: tuple[tuple[int, ...], ...]
    control: tuple[tuple[int, ...], ...]
    _lookup: tuple[dict[str, int], ...] = field(repr=False, compare=False, default=())

    @property
    def P(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> tuple[int, ...]:
        return tuple(len(ls) for ls in self.labels)

    @property
    def n(self) -> int:
        return sum(self.treated[0])

    @property
    def n_control(self) -> int:
        return sum(self.control[0])

    def position(self, p: int, label: str) -> int:
        return self._lookup[p][label]

    def cell_of(self, sample: Sample) -> Cell:
        return tuple(self._lookup[p][label] for p, label in enumerate(sample.levels))

    def lbar(self, p: int) -> int:
        """Sum over levels of ``min(treatment count, control count)`` for covariate ``p``."""
        return sum(min(a, b) for a, b in zip(self.treated[p], self.control[p]))


def index_levels(dataset: Dataset) -> LevelIndex:
    if dataset.n == 0:
        raise EmptyTreatment("treatment group is empty")
    labels, treated, control, lookup = [], [], [], []
    for p in range(dataset.P):
        t = Counter(s.levels[p] for s in dataset.treatment)
        c = Counter(s.levels[p] for s in dataset.control)
        # str ordering compares code points, which matches byte order for UTF-8
        ordered = tuple(sorted(set(t) | set(c)))
        labels.append(ordered)
        treated.append(tuple(t[x] for x in ordered))
        control.append(tuple(c[x] for x in ordered))
        lookup.append({x: i for i, x in enumerate(ordered)})
    return LevelIndex(tuple(labels), tuple(treated), tuple(control), tuple(lookup))


def intersection_counts(dataset: Dataset, index: LevelIndex) -> dict[Cell, int]:
    """Control count of every nonempty level-intersection cell, keys in sorted order."""
    counts = Counter(index.cell_of(s) for s in dataset.control)
    return dict(sorted(counts.items()))


def cell_members(dataset: Dataset, index: LevelIndex) -> dict[Cell, list[str]]:
    """Control ids in each nonempty cell, in row order."""
    members: dict[Cell, list[str]] = defaultdict(list)
    for s in dataset.control:
        members[index.cell_of(s)].append(s.id)
    return dict(sorted(members.items()))


@dataclass(frozen=True)
class Selection:
    counts: Mapping[Cell, int]
    ids: tuple[str, ...] | None = None

    @property
    def size(self) -> int:
        return sum(self.counts.values())

    def nonzero(self) -> dict[Cell, int]:
        return {c: s for c, s in sorted(self.counts.items()) if s}


@dataclass(frozen=True)
class LevelDiscrepancy:
    covariate: int
    level: int
    label: str
    target: int
    selected: int

    @property
    def discrepancy(self) -> int:
        return self.selected - self.target

    @property
    def excess(self) -> int:
        return max(0, self.selected - self.target)

    @property
    def deficit(self) -> int:
        return max(0, self.target - self.selected)


@dataclass(frozen=True)
class ImbalanceReport:
    levels: tuple[LevelDiscrepancy, ...]

    @property
    def total(self) -> int:
        return sum(abs(lv.discrepancy) for lv in self.levels)

    @property
    def total_excess(self) -> int:
        return sum(lv.excess for lv in self.levels)

    @property
    def total_deficit(self) -> int:
        return sum(lv.deficit for lv in self.levels)


def level_totals(index: LevelIndex, counts: Mapping[Cell, int]) -> list[list[int]]:
    """Selected count at every level of every covariate."""
    totals = [[0] * k for k in index.k]
    for cell, s in counts.items():
        if s:
            for p, i in enumerate(cell):
                totals[p][i] += s
    return totals


def check_capacity(counts: Mapping[Cell, int], cells: Mapping[Cell, int]) -> None:
    for cell, s in counts.items():
        if s < 0:
            raise CellOverflow(f"negative count {s} for cell {cell}")
        if s > cells.get(cell, 0):
            raise CellOverflow(f"cell {cell} selects {s} of {cells.get(cell, 0)} controls")


def imbalance(index: LevelIndex, selection: Selection | Mapping[Cell, int],
              cells: Mapping[Cell, int] | None = None) -> ImbalanceReport:
    """Per-level discrepancies of a selection against the treatment level sizes.

    When ``cells`` (the intersection counts) is given, counts exceeding a
    cell's population raise :class:`CellOverflow`.
    """
    counts = selection.counts if isinstance(selection, Selection) else selection
    if cells is not None:
        check_capacity(counts, cells)
    totals = level_totals(index, counts)
    return ImbalanceReport(tuple(
        LevelDiscrepancy(p, i, index.labels[p][i], index.treated[p][i], totals[p][i])
        for p in range(index.P) for i in range(index.k[p])))


def imbalance_value(index: LevelIndex, counts: Mapping[Cell, int]) -> int:
    totals = level_totals(index, counts)
    return sum(abs(totals[p][i] - index.treated[p][i])
               for p in range(index.P) for i in range(index.k[p]))


def imbalance_of_ids(dataset: Dataset, ids: Iterable[str]) -> int:
    """Imbalance recomputed straight from control rows, bypassing cell counts."""
    chosen = set(ids)
    by_id = {s.id: s for s in dataset.control}
    missing = chosen - by_id.keys()
    if missing:
        raise ValueError(f"unknown control ids: {sorted(missing)[:5]}")
    total = 0
    for p in range(dataset.P):
        target = Counter(s.levels[p] for s in dataset.treatment)
        got = Counter(by_id[j].levels[p] for j in chosen)
        total += sum(abs(got[x] - target[x]) for x in set(target) | set(got))
    return total


def materialize(dataset: Dataset, selection: Selection | Mapping[Cell, int], seed: int = 0,
                index: LevelIndex | None = None) -> list[str]:
    """Pick concrete control ids realizing the cell counts; sorted, reproducible by seed."""
    counts = selection.counts if isinstance(selection, Selection) else selection
    index = index or index_levels(dataset)
    members = cell_members(dataset, index)
    check_capacity(counts, {c: len(m) for c, m in members.items()})
    rng = SplitMix64(seed)
    chosen: list[str] = []
    for cell in sorted(counts):
        s = counts[cell]
        if s == len(members[cell]):
            chosen.extend(members[cell])
        elif s:
            chosen.extend(rng.sample(members[cell], s))
    return sorted(chosen)


def kappa_expand(dataset: Dataset, kappa: int) -> Dataset:
    """Replace each treatment sample by ``kappa`` copies with fresh ids ``<id>#<copy>``."""
    if dataset.n == 0:
        raise EmptyTreatment("treatment group is empty")
    if not 1 <= kappa <= dataset.n_control // dataset.n:
        raise KappaOutOfRange(
            f"kappa must lie in [1, {dataset.n_control // dataset.n}], got {kappa}")
    if kappa == 1:
        return dataset
    treatment = tuple(Sample(f"{s.id}#{c}", s.levels)
                      for s in dataset.treatment for c in range(1, kappa + 1))
    return Dataset(dataset.covariates, treatment, dataset.control)
