"""Integer min-cost flow and max-flow with optimality certificates.

Min-cost flow uses successive shortest paths with node potentials: a
label-setting (Dijkstra) search on reduced costs from the lowest-index node
that still has excess, after which every zero-reduced-cost path from that node
is a shortest path, so flow is pushed along all of them with a blocking-flow
pass before the next search. Max-flow is Dinic's algorithm (BFS level graph
plus blocking flows).

Both solvers work on a private residual copy; a :class:`FlowNetwork` is never
mutated and may be shared between concurrent solves.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import Infeasible, InfeasibleAssignment, MissingPotentials

UNBOUNDED = None
"""Capacity sentinel for uncapacitated arcs."""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: int | None
    cost: int = 0
    lower: int = 0


@dataclass(frozen=True)
class FlowNetwork:
    node_count: int
    arcs: tuple[Arc, ...] = ()
    supplies: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        supplies = tuple(self.supplies) if self.supplies else (0,) * self.node_count
        object.__setattr__(self, "supplies", supplies)
        _check_int(self.node_count, "node_count")
        if self.node_count < 0:
            raise ValueError("node_count must be nonnegative")
        if len(supplies) != self.node_count:
            raise ValueError(
                f"expected {self.node_count} supplies, got {len(supplies)}")
        for b in supplies:
            _check_int(b, "supply")
        for k, a in enumerate(self.arcs):
            for name in ("tail", "head", "cost", "lower"):
                _check_int(getattr(a, name), f"arc {k} {name}")
            if not (0 <= a.tail < self.node_count and 0 <= a.head < self.node_count):
                raise ValueError(f"arc {k} endpoint out of range")
            if a.lower < 0:
                raise ValueError(f"arc {k} has negative lower bound")
            if a.capacity is not UNBOUNDED:
                _check_int(a.capacity, f"arc {k} capacity")
                if a.capacity < a.lower:
                    raise ValueError(f"arc {k} has capacity below its lower bound")

    @property
    def total_supply(self) -> int:
        return sum(b for b in self.supplies if b > 0)


@dataclass(frozen=True)
class FlowAssignment:
    flows: tuple[int, ...]
    objective: int
    potentials: tuple[int, ...] | None = None


def _check_int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{what} must be an int, got {value!r}")


class _Residual:
    """Forward-star residual graph; arc ``2k`` is original arc ``k``, ``2k+1`` its reverse."""

    def __init__(self, node_count: int, arcs: Iterable[tuple[int, int, int, int]]):
        self.n = node_count
        self.adj: list[list[int]] = [[] for _ in range(node_count)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []
        for tail, head, cap, cost in arcs:
            e = len(self.to)
            self.to += (head, tail)
            self.cap += (cap, 0)
            self.cost += (cost, -cost)
            self.adj[tail].append(e)
            self.adj[head].append(e + 1)

    def levels(self, source: int, admissible: Callable[[int, int], bool] | None = None,
               stop: Callable[[int], bool] | None = None) -> list[int]:
        level = [-1] * self.n
        level[source] = 0
        queue = deque([source])
        to, cap, adj = self.to, self.cap, self.adj
        while queue:
            u = queue.popleft()
            if stop is not None and u != source and stop(u):
                continue
            for e in adj[u]:
                v = to[e]
                if cap[e] > 0 and level[v] < 0 and (admissible is None or admissible(u, e)):
                    level[v] = level[u] + 1
                    queue.append(v)
        return level

    def blocking_flow(self, source: int, level: list[int], sink_room: Callable[[int], int],
                      limit: int, admissible: Callable[[int, int], bool] | None = None,
                      absorb: Callable[[int, int], None] | None = None) -> int:
        """Push flow from ``source`` along level-increasing arcs until blocked.

        ``sink_room(v)`` is how much node ``v`` can still absorb (0 for
        ordinary nodes); ``absorb(v, amount)`` is told about each delivery.
        Returns the amount pushed, at most ``limit``.
        """
        to, cap, adj = self.to, self.cap, self.adj
        it = [0] * self.n
        pushed = 0
        path: list[int] = []
        u = source
        while pushed < limit:
            room = sink_room(u) if u != source else 0
            if room > 0:
                delta = min(limit - pushed, room)
                for e in path:
                    if cap[e] < delta:
                        delta = cap[e]
                for e in path:
                    cap[e] -= delta
                    cap[e ^ 1] += delta
                pushed += delta
                if absorb is not None:
                    absorb(u, delta)
                path.clear()
                u = source
                continue
            edges = adj[u]
            i = it[u]
            while i < len(edges):
                e = edges[i]
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1 and (
                        admissible is None or admissible(u, e)):
                    break
                i += 1
            it[u] = i
            if i < len(edges):
                path.append(edges[i])
                u = to[edges[i]]
            else:
                level[u] = -1
                if u == source:
                    break
                e = path.pop()
                u = to[e ^ 1]
                it[u] += 1
        return pushed


def _resolve_capacity(arc: Arc, bound: int) -> int:
    return bound if arc.capacity is UNBOUNDED else arc.capacity


def mcnf_solve(network: FlowNetwork) -> FlowAssignment:
    """Minimum-cost integer flow meeting every node's supply exactly.

    Arc costs must be nonnegative. Unbounded arcs are capped at the total
    supply of the instance, which never cuts off an optimum. Raises
    :class:`Infeasible` when some supply cannot reach any remaining demand.
    """
    if sum(network.supplies) != 0:
        raise Infeasible(f"supplies sum to {sum(network.supplies)}, not 0",
                         remainder=abs(sum(network.supplies)))
    for a in network.arcs:
        if a.cost < 0:
            raise ValueError("negative arc costs are not supported")

    # Lower bounds are shifted out: send `lower` up front, solve for the rest.
    excess = list(network.supplies)
    for a in network.arcs:
        excess[a.tail] -= a.lower
        excess[a.head] += a.lower
    bound = sum(b for b in excess if b > 0)
    room_caps = [bound if a.capacity is UNBOUNDED else a.capacity - a.lower
                 for a in network.arcs]
    res = _Residual(network.node_count,
                    ((a.tail, a.head, c, a.cost) for a, c in zip(network.arcs, room_caps)))
    n = network.node_count
    pi = [0] * n
    to, cap, cost, adj = res.to, res.cap, res.cost, res.adj

    def absorb(v: int, amount: int) -> None:
        excess[v] += amount

    for s in range(n):
        while excess[s] > 0:
            dist = _dijkstra(res, s, pi)
            reached = [d for d in dist if d is not None]
            if not any(dist[v] is not None and excess[v] < 0 for v in range(n)):
                remaining = sum(b for b in excess if b > 0)
                raise Infeasible(
                    f"node {s} has {excess[s]} units of supply that cannot reach any demand; "
                    f"{remaining} units unsatisfied in total",
                    remainder=remaining)
            far = max(reached)
            for v in range(n):
                pi[v] += far if dist[v] is None else dist[v]

            def admissible(u: int, e: int) -> bool:
                return cost[e] + pi[u] - pi[to[e]] == 0

            def room(v: int) -> int:
                return -excess[v] if excess[v] < 0 else 0

            while excess[s] > 0:
                level = res.levels(s, admissible, stop=lambda v: excess[v] < 0)
                if not any(level[v] >= 0 and excess[v] < 0 for v in range(n)):
                    break
                pushed = res.blocking_flow(s, level, room, excess[s], admissible, absorb)
                excess[s] -= pushed
                if pushed == 0:
                    break

    flows = tuple(a.lower + c - cap[2 * k]
                  for k, (a, c) in enumerate(zip(network.arcs, room_caps)))
    objective = sum(f * a.cost for f, a in zip(flows, network.arcs))
    return FlowAssignment(flows=flows, objective=objective, potentials=tuple(pi))


def _dijkstra(res: _Residual, source: int, pi: Sequence[int]) -> list[int | None]:
    """Shortest reduced-cost distances from ``source``; ``None`` if unreachable."""
    dist: list[int | None] = [None] * res.n
    dist[source] = 0
    done = [False] * res.n
    heap = [(0, source)]
    to, cap, cost, adj = res.to, res.cap, res.cost, res.adj
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        pu = pi[u]
        for e in adj[u]:
            if cap[e] <= 0:
                continue
            v = to[e]
            if done[v]:
                continue
            nd = d + cost[e] + pu - pi[v]
            dv = dist[v]
            if dv is None or nd < dv:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def maxflow_solve(network: FlowNetwork, source: int, sink: int) -> FlowAssignment:
    """Maximum ``source``-``sink`` flow by Dinic's algorithm. Costs are ignored."""
    if source == sink:
        raise ValueError("source and sink must differ")
    for a in network.arcs:
        if a.lower:
            raise ValueError("max-flow does not support lower bounds")
    bound = sum(a.capacity for a in network.arcs if a.capacity is not UNBOUNDED)
    res = _Residual(network.node_count,
                    ((a.tail, a.head, _resolve_capacity(a, bound), 0) for a in network.arcs))
    infinite = bound + 1
    value = 0
    while True:
        level = res.levels(source)
        if level[sink] < 0:
            break
        value += res.blocking_flow(source, level,
                                   lambda v: infinite if v == sink else 0, infinite)
    flows = tuple(
        _resolve_capacity(a, bound) - res.cap[2 * k] for k, a in enumerate(network.arcs))
    return FlowAssignment(flows=flows, objective=value)


def _check_feasible(network: FlowNetwork, assignment: FlowAssignment,
                    exempt: tuple[int, ...] = ()) -> list[int]:
    """Validate bounds and balance; return per-node net outflow."""
    if len(assignment.flows) != len(network.arcs):
        raise InfeasibleAssignment(
            f"{len(assignment.flows)} flows for {len(network.arcs)} arcs")
    net = [0] * network.node_count
    for k, (a, f) in enumerate(zip(network.arcs, assignment.flows)):
        if f < a.lower or (a.capacity is not UNBOUNDED and f > a.capacity):
            raise InfeasibleAssignment(f"arc {k} flow {f} outside [{a.lower}, {a.capacity}]")
        net[a.tail] += f
        net[a.head] -= f
    for v in range(network.node_count):
        if v not in exempt and net[v] != network.supplies[v]:
            raise InfeasibleAssignment(
                f"node {v} net outflow {net[v]} != supply {network.supplies[v]}")
    return net


def residual_reachable(network: FlowNetwork, flows: Sequence[int], source: int) -> set[int]:
    adj: list[list[int]] = [[] for _ in range(network.node_count)]
    for a, f in zip(network.arcs, flows):
        if a.capacity is UNBOUNDED or f < a.capacity:
            adj[a.tail].append(a.head)
        if f > a.lower:
            adj[a.head].append(a.tail)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def certify_maxflow(network: FlowNetwork, assignment: FlowAssignment, source: int,
                    sink: int) -> tuple[bool, frozenset[int]]:
    """Check maximality via residual reachability.

    Returns ``(is_maximum, cut)`` where ``cut`` is the set of nodes reachable
    from ``source`` in the residual network. When the flow is maximum this is
    the source side of a minimum cut.
    """
    _check_feasible(network, assignment, exempt=(source, sink))
    side = residual_reachable(network, assignment.flows, source)
    return sink not in side, frozenset(side)


def certify_mcnf(network: FlowNetwork, assignment: FlowAssignment) -> bool:
    """True iff every residual arc has nonnegative reduced cost under the potentials."""
    if assignment.potentials is None:
        raise MissingPotentials("assignment carries no node potentials")
    _check_feasible(network, assignment)
    pi = assignment.potentials
    for a, f in zip(network.arcs, assignment.flows):
        reduced = a.cost + pi[a.tail] - pi[a.head]
        if (a.capacity is UNBOUNDED or f < a.capacity) and reduced < 0:
            return False
        if f > a.lower and reduced > 0:
            return False
    return True


def dump_network(network: FlowNetwork) -> str:
    """Line-oriented text form: header lines, then ``tail head lower cap cost`` per arc."""
    lines = [f"nodes {network.node_count}",
             "supplies " + " ".join(map(str, network.supplies))]
    for a in network.arcs:
        cap = "inf" if a.capacity is UNBOUNDED else str(a.capacity)
        lines.append(f"{a.tail} {a.head} {a.lower} {cap} {a.cost}")
    return "\n".join(lines) + "\n"


def load_network(text: str) -> FlowNetwork:
    node_count = 0
    supplies: tuple[int, ...] = ()
    arcs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "nodes":
            node_count = int(parts[1])
        elif parts[0] == "supplies":
            supplies = tuple(int(p) for p in parts[1:])
        else:
            tail, head, lower, cap, cost = parts
            arcs.append(Arc(int(tail), int(head),
                            UNBOUNDED if cap == "inf" else int(cap), int(cost), int(lower)))
    return FlowNetwork(node_count, tuple(arcs), supplies)
