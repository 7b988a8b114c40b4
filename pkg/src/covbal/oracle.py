"""Exhaustive min-imbalance oracle and instance generators.

The oracle enumerates cell-count vectors rather than control subsets: two
selections with the same counts per level-intersection cell have the same
imbalance, so counts are all that matter and there are far fewer of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Cell, Dataset, Sample, imbalance_value, index_levels, intersection_counts
from .errors import QTooLarge, TooLarge
from .rng import SplitMix64

MAX_CELLS = 12
MAX_CONTROLS = 16


@dataclass(frozen=True)
class OracleResult:
    objective: int
    counts: dict[Cell, int]
    optimal_count: int

    @property
    def unique(self) -> bool:
        return self.optimal_count == 1


def exact_min_imbalance(dataset: Dataset, q: int | None = None, *,
                        max_cells: int = MAX_CELLS,
                        max_controls: int = MAX_CONTROLS) -> OracleResult:
    """Minimum imbalance over all selections of size ``q`` (default n), any P.

    ``optimal_count`` is the number of distinct optimal cell-count vectors.
    Raises :class:`TooLarge` beyond the size guards.
    """
    index = index_levels(dataset)
    cells = intersection_counts(dataset, index)
    q = dataset.n if q is None else q
    if not 0 <= q <= dataset.n_control:
        raise QTooLarge(f"selection size {q} outside [0, {dataset.n_control}]")
    if len(cells) > max_cells or dataset.n_control > max_controls:
        raise TooLarge(f"{len(cells)} cells / {dataset.n_control} controls exceed the "
                       f"oracle guard ({max_cells} cells, {max_controls} controls)")

    keys = list(cells)
    caps = [cells[c] for c in keys]
    # suffix capacity lets us prune branches that cannot reach q
    room = [0] * (len(keys) + 1)
    for j in range(len(keys) - 1, -1, -1):
        room[j] = room[j + 1] + caps[j]
    totals = [[0] * k for k in index.k]
    treated = index.treated
    chosen = [0] * len(keys)
    best: list = [None, None, 0]

    def visit(j: int, remaining: int) -> None:
        if j == len(keys):
            value = sum(abs(totals[p][i] - treated[p][i])
                        for p in range(index.P) for i in range(index.k[p]))
            if best[0] is None or value < best[0]:
                best[0], best[1], best[2] = value, list(chosen), 1
            elif value == best[0]:
                best[2] += 1
            return
        cell = keys[j]
        lo = max(0, remaining - room[j + 1])
        for s in range(lo, min(caps[j], remaining) + 1):
            chosen[j] = s
            for p, i in enumerate(cell):
                totals[p][i] += s
            visit(j + 1, remaining - s)
            for p, i in enumerate(cell):
                totals[p][i] -= s
        chosen[j] = 0

    visit(0, q)
    counts = {c: s for c, s in zip(keys, best[1]) if s}
    assert imbalance_value(index, counts) == best[0]
    return OracleResult(best[0], counts, best[2])


def random_instance(P: int, n: int, n_control: int, k: int | Sequence[int],
                    seed: int) -> Dataset:
    """Uniform i.i.d. level labels per sample and covariate, reproducible by seed.

    Labels are ``L<level>`` zero-padded to the width of the level count; ids
    are ``t<j>`` and ``c<j>`` zero-padded likewise, so lexicographic order is
    numeric order.
    """
    ks = [k] * P if isinstance(k, int) else list(k)
    if len(ks) != P or min(ks, default=1) < 1 or P < 1 or n < 0 or n_control < 0:
        raise ValueError("random_instance needs P >= 1, k >= 1 per covariate, n, n' >= 0")
    rng = SplitMix64(seed)
    widths = [len(str(kp - 1)) for kp in ks]

    def draw() -> tuple[str, ...]:
        return tuple(f"L{rng.below(kp):0{w}d}" for kp, w in zip(ks, widths))

    tw, cw = len(str(max(n - 1, 0))), len(str(max(n_control - 1, 0)))
    treatment = tuple(Sample(f"t{j:0{tw}d}", draw()) for j in range(n))
    control = tuple(Sample(f"c{j:0{cw}d}", draw()) for j in range(n_control))
    return Dataset(tuple(f"x{p + 1}" for p in range(P)), treatment, control)


@dataclass(frozen=True)
class ThreeDMInstance:
    """3-dimensional matching: ``size`` elements per coordinate, triples over ``1..size``."""

    size: int
    triples: tuple[tuple[int, int, int], ...]
    planted: tuple[tuple[int, int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(tuple(t) for t in self.triples))
        for t in self.triples:
            if len(t) != 3 or not all(1 <= x <= self.size for x in t):
                raise ValueError(f"triple {t} out of range 1..{self.size}")
        if self.planted is not None:
            planted = tuple(tuple(t) for t in self.planted)
            object.__setattr__(self, "planted", planted)
            if not set(planted) <= set(self.triples):
                raise ValueError("planted matching is not a subset of the triples")
            for p in range(3):
                if sorted(t[p] for t in planted) != list(range(1, self.size + 1)):
                    raise ValueError("planted triples do not cover every element exactly once")


def random_3dm_instance(size: int, extra: int, seed: int) -> ThreeDMInstance:
    """A planted perfect matching plus ``extra`` uniformly random triples, shuffled."""
    rng = SplitMix64(seed)
    cols = []
    for _ in range(3):
        perm = list(range(1, size + 1))
        rng.shuffle(perm)
        cols.append(perm)
    planted = [tuple(c[j] for c in cols) for j in range(size)]
    triples = planted + [tuple(1 + rng.below(size) for _ in range(3)) for _ in range(extra)]
    rng.shuffle(triples)
    return ThreeDMInstance(size, tuple(triples), tuple(sorted(planted)))


def gen_3dm_dataset(instance: ThreeDMInstance) -> Dataset:
    """Three-covariate dataset with minimum imbalance 0 at q=|X| iff a perfect matching exists.

    Treatment sample j has level j on all three covariates, so every level has
    exactly one treatment sample; each triple becomes one control sample.
    """
    width = len(str(instance.size))
    label = lambda x: f"{x:0{width}d}"  # noqa: E731
    tw = len(str(max(len(instance.triples) - 1, 0)))
    treatment = tuple(Sample(f"t{j:0{width}d}", (label(j),) * 3)
                      for j in range(1, instance.size + 1))
    control = tuple(Sample(f"c{j:0{tw}d}", tuple(label(x) for x in t))
                    for j, t in enumerate(instance.triples))
    return Dataset(("x1", "x2", "x3"), treatment, control)
