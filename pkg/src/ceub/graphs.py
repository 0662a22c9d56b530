"""Bipartite allocation graph and utility-preserving cycle elimination.

G(x) has an (undirected) edge between agent i and item j exactly when
x[i][j] > 0. Any Pareto-optimal fully-allocated x can be transformed
into one whose graph is a forest without changing a single agent's
utility: every graph cycle supports a closed chain of share transfers
that keeps each intermediate agent exactly whole, and Pareto optimality
forces the chain to close neutrally for the first agent too, so pushing
it until some edge hits zero removes an edge for free.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import InternalVerificationFailed, NotParetoOptimal
from .market import Allocation, Instance, _check_dims, make_allocation
from .rationals import ONE, Rational

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AllocationGraph:
    agent_count: int
    item_count: int
    agent_items: tuple  # per agent: ascending item indices with x > 0
    item_agents: tuple  # per item: ascending agent indices with x > 0

    @property
    def edge_count(self) -> int:
        return sum(len(items) for items in self.agent_items)

    def edges(self):
        for i, items in enumerate(self.agent_items):
            for j in items:
                yield (i, j)


@dataclass(frozen=True)
class SimpleCycle:
    """Alternating cycle a_0, j_0, a_1, j_1, ..., j_{k-1} back to a_0.

    Item j_t is shared by agents a_t and a_{t+1 mod k}; every hop is a
    positive-allocation edge and all vertices are distinct, k >= 2.
    """

    agents: tuple
    items: tuple

    @property
    def length(self) -> int:
        return len(self.agents)


@dataclass(frozen=True)
class CycleShift:
    """The transfer amounts applied along a cycle and the edge it zeroes.

    epsilons[t] is the share of item j_t moved to agent a_t (and away
    from agent a_{t+1 mod k}); consecutive amounts obey the exact
    compensation chain eps[t+1] = eps[t] * v[a_{t+1}][j_t] / v[a_{t+1}][j_{t+1}].
    """

    epsilons: tuple
    zeroed_edge: tuple


def build_graph(inst: Instance, alloc: Allocation) -> AllocationGraph:
    """The bipartite sharing graph of an allocation."""
    _check_dims(inst, alloc)
    n, m = inst.agent_count, inst.item_count
    agent_items = tuple(
        tuple(j for j in range(m) if alloc.x[i][j] != 0) for i in range(n)
    )
    item_agents = tuple(
        tuple(i for i in range(n) if alloc.x[i][j] != 0) for j in range(m)
    )
    return AllocationGraph(n, m, agent_items, item_agents)


def find_cycle(g: AllocationGraph) -> SimpleCycle | None:
    """Some simple cycle of G, or None if G is a forest.

    Depth-first search from the lowest-index unvisited agent vertex with
    ascending neighbor order, so the result is deterministic; the cycle
    is normalized to start at its lowest agent, heading toward its
    lower-indexed neighbor item.
    """
    n = g.agent_count
    size = n + g.item_count

    def neighbors(v: int):
        return g.agent_items[v] if v < n else g.item_agents[v - n]

    visited = [False] * size
    for root in range(size):
        if visited[root]:
            continue
        path = []  # current DFS path of vertex ids
        pos = {}  # vertex -> index in path
        stack = [(root, -1, 0)]  # (vertex, parent, next neighbor offset)
        while stack:
            v, parent, offset = stack.pop()
            if offset == 0:
                visited[v] = True
                pos[v] = len(path)
                path.append(v)
            raw = neighbors(v)
            advanced = False
            for idx in range(offset, len(raw)):
                w = raw[idx] if v >= n else raw[idx] + n
                if w == parent:
                    continue
                if w in pos:
                    return _normalize(path[pos[w]:], n)
                if not visited[w]:
                    stack.append((v, parent, idx + 1))
                    stack.append((w, v, 0))
                    advanced = True
                    break
            if not advanced:
                del pos[v]
                path.pop()
    return None


def _normalize(vertices, n: int) -> SimpleCycle:
    start = min(range(len(vertices)), key=lambda k: vertices[k] if vertices[k] < n else n)
    seq = vertices[start:] + vertices[:start]
    if seq[-1] < seq[1]:
        seq = [seq[0]] + seq[:0:-1]
    return SimpleCycle(agents=tuple(seq[0::2]), items=tuple(v - n for v in seq[1::2]))


def _check_cycle(alloc: Allocation, cycle: SimpleCycle) -> None:
    k = cycle.length
    if k < 2 or len(cycle.items) != k:
        raise ValueError(f"not a valid cycle: {k} agents, {len(cycle.items)} items")
    if len(set(cycle.agents)) != k or len(set(cycle.items)) != k:
        raise ValueError("cycle vertices are not distinct")
    for t in range(k):
        a_here, a_next = cycle.agents[t], cycle.agents[(t + 1) % k]
        j = cycle.items[t]
        if alloc.x[a_here][j] == 0 or alloc.x[a_next][j] == 0:
            raise ValueError(f"cycle hop at item {j} is not a positive-allocation edge")


def eliminate_cycle(inst: Instance, alloc: Allocation, cycle: SimpleCycle):
    """Push the compensation chain around the cycle until an edge zeroes.

    Returns (new allocation, CycleShift). Every agent's utility is
    preserved exactly; if the chain cannot close neutrally the input was
    not Pareto optimal (one traversal direction would be a strict
    improvement) and NotParetoOptimal is raised.
    """
    _check_dims(inst, alloc)
    _check_cycle(alloc, cycle)
    agents, items = cycle.agents, cycle.items
    k = cycle.length
    v = inst.values

    ratio = ONE
    for t in range(k):
        ratio = ratio * v[agents[t]][items[t]] / v[agents[(t + 1) % k]][items[t]]
    if ratio != 1:
        direction = "forward" if ratio > 1 else "reverse"
        raise NotParetoOptimal(
            f"cycle closes with ratio {ratio}; the {direction} traversal strictly "
            f"improves agent {agents[0]} while keeping all others whole"
        )

    # Accumulated chain factors: eps_t = eps_0 * chain[t].
    chain = [ONE]
    for t in range(k - 1):
        nxt = agents[t + 1]
        chain.append(chain[t] * v[nxt][items[t]] / v[nxt][items[t + 1]])

    eps0 = None
    zero_at = -1
    for t in range(k):
        bound = alloc.x[agents[(t + 1) % k]][items[t]] / chain[t]
        if eps0 is None or bound < eps0:
            eps0 = bound
            zero_at = t
    # Each item's column sum is unchanged by the shift, so the increased
    # entries stay <= 1 automatically once the decreased ones stay >= 0.
    epsilons = tuple(eps0 * c for c in chain)

    rows = [list(row) for row in alloc.x]
    for t in range(k):
        rows[agents[t]][items[t]] += epsilons[t]
        rows[agents[(t + 1) % k]][items[t]] -= epsilons[t]
    result = make_allocation(rows)
    zeroed = (agents[(zero_at + 1) % k], items[zero_at])
    if result.x[zeroed[0]][zeroed[1]] != 0:
        raise InternalVerificationFailed("chosen edge did not reach zero")
    return result, CycleShift(epsilons=epsilons, zeroed_edge=zeroed)


def make_cycle_free(inst: Instance, alloc: Allocation) -> Allocation:
    """Eliminate cycles until G(x) is a forest; utilities never change.

    Each elimination removes at least one edge, so the loop runs at most
    |edges| times.
    """
    _check_dims(inst, alloc)
    budget = build_graph(inst, alloc).edge_count + 1
    current = alloc
    for _ in range(budget):
        cycle = find_cycle(build_graph(inst, current))
        if cycle is None:
            return current
        current, shift = eliminate_cycle(inst, current, cycle)
        log.debug("eliminated cycle %s/%s, zeroed %s", cycle.agents, cycle.items, shift.zeroed_edge)
    raise InternalVerificationFailed("cycle elimination failed to terminate")
