"""Independent brute-force oracles used as ground truth by the tests.

Nothing here calls the flow engine or the solvers; every function works
straight from definitions (subset enumeration, cut enumeration, permutations).
"""

from collections import Counter
from itertools import combinations, permutations, product

from covbal.core import Dataset
from covbal.netflow import UNBOUNDED

INSTANCE_A = Dataset.from_labels([("a", "x"), ("a", "y"), ("b", "y")],
                                 [("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")])
INSTANCE_B = Dataset.from_labels([("a", "x"), ("b", "y")], [("a", "y"), ("a", "y")])
INSTANCE_C = Dataset.from_labels([("a", "x"), ("b", "x")], [("a", "x"), ("a", "x"), ("a", "y")])


def brute_mcnf(network):
    """Minimum cost over every integer flow vector, or None if infeasible."""
    ranges = []
    for a in network.arcs:
        cap = a.capacity if a.capacity is not UNBOUNDED else network.total_supply
        ranges.append(range(a.lower, cap + 1))
    best = None
    for flows in product(*ranges):
        net = [0] * network.node_count
        for a, f in zip(network.arcs, flows):
            net[a.tail] += f
            net[a.head] -= f
        if net == list(network.supplies):
            cost = sum(a.cost * f for a, f in zip(network.arcs, flows))
            best = cost if best is None else min(best, cost)
    return best


def brute_min_cut(network, source, sink):
    """Minimum s-t cut capacity over all 2^(|V|-2) source sides."""
    others = [v for v in range(network.node_count) if v not in (source, sink)]
    best = None
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            side = {source, *extra}
            cut = sum(a.capacity for a in network.arcs if a.tail in side and a.head not in side)
            best = cut if best is None else min(best, cut)
    return best


def raw_imbalance(dataset, chosen, kappa=1):
    """Sum over covariates and labels of | selected count - kappa * treatment count |."""
    total = 0
    for p in range(dataset.P):
        target = Counter(s.levels[p] for s in dataset.treatment)
        got = Counter(s.levels[p] for s in chosen)
        total += sum(abs(got[x] - kappa * target[x]) for x in set(target) | set(got))
    return total


def brute_min_imbalance(dataset, q, kappa=1):
    """Minimum over every size-q subset of control samples."""
    return min(raw_imbalance(dataset, subset, kappa)
               for subset in combinations(dataset.control, q))


def sample_loop_recovery(index, cells, xstar, q):
    """Greedy top-up recovery, one control at a time.

    Scans cells lexicographically and adds a unit to the first cell with a
    spare control whose covariate-1 level, else covariate-2 level, is short
    of its treatment count; pads from the first spare cells when none exist.
    Returns (counts, padding size).
    """
    counts = dict(xstar)
    tot = [[0] * k for k in index.k]
    for (i1, i2), x in counts.items():
        tot[0][i1] += x
        tot[1][i2] += x
    size = sum(counts.values())
    order = sorted(cells)
    while size < q:
        pick = None
        for p in (0, 1):
            for c in order:
                if counts.get(c, 0) < cells[c] and tot[p][c[p]] < index.treated[p][c[p]]:
                    pick = c
                    break
            if pick:
                break
        if pick is None:
            break
        counts[pick] = counts.get(pick, 0) + 1
        tot[0][pick[0]] += 1
        tot[1][pick[1]] += 1
        size += 1
    s_plus = q - size
    for c in order:
        while size < q and counts.get(c, 0) < cells[c]:
            counts[c] = counts.get(c, 0) + 1
            size += 1
    return {c: x for c, x in counts.items() if x}, s_plus


def brute_assignment(dataset, sizes_by_cell, cell_of, kappa, dist):
    """Cheapest kappa-to-1 assignment respecting the cell counts, by permutation search.

    ``cell_of`` maps control id -> cell; ``dist[(t, c)]`` is the distance.
    """
    treated = [s.id for s in dataset.treatment]
    slots = [t for t in treated for _ in range(kappa)]
    controls = [s.id for s in dataset.control]
    best = None
    for chosen in combinations(controls, len(slots)):
        if Counter(cell_of[c] for c in chosen) != Counter(
                {c: s for c, s in sizes_by_cell.items() if s}):
            continue
        for perm in permutations(chosen):
            cost = sum(dist[t, c] for t, c in zip(slots, perm))
            best = cost if best is None else min(best, cost)
    return best


def has_perfect_3dm(size, triples):
    """Exhaustive 3-dimensional matching search."""
    for combo in combinations(range(len(triples)), size):
        picked = [triples[j] for j in combo]
        if all(len({t[p] for t in picked}) == size for p in range(3)):
            return True
    return False
