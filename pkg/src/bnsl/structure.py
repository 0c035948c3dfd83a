"""DAG structures, their equivalence classes, and structure-level utilities.

Covers validation and topological ordering, covered-arc tests and reversal,
conversion to the equivalence-class pattern (CPDAG) via v-structure
orientation plus the four orientation-propagation rules, structural Hamming
distance between patterns, connected components, tournament-component
detection and counting, exhaustive DAG enumeration for small n, and a
brute-force NML evaluator used as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp, xlogy

from .dataset import Dataset, config_indices, contingency, counts_loglik
from .errors import DataError, ResourceLimitError

# brute-force NML enumerates (prod arities)^N joint datasets
NML_BRUTEFORCE_LIMIT = 1 << 24
ENUMERATION_MAX_NODES = 5
COUNT_MAX_NODES = 12


@dataclass(frozen=True)
class DagStructure:
    """Directed acyclic graph given by per-node sorted parent tuples."""

    n: int
    parents: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DataError("a graph needs at least one node")
        if len(self.parents) != self.n:
            raise DataError("parent list length must equal the node count")
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        object.__setattr__(self, "parents", parents)
        for child, ps in enumerate(parents):
            if list(ps) != sorted(set(ps)):
                raise DataError(
                    f"parents of node {child} must be sorted without duplicates")
            for p in ps:
                if not 0 <= p < self.n:
                    raise DataError(f"parent index {p} out of range")
                if p == child:
                    raise DataError(f"node {child} cannot be its own parent")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != self.n:
                raise DataError("names length must equal the node count")
            object.__setattr__(self, "names", names)
        topological_order(self)  # raises on cycles

    def arc_count(self) -> int:
        return sum(len(ps) for ps in self.parents)

    def has_arc(self, a: int, b: int) -> bool:
        return a in self.parents[b]

    def adjacent(self, a: int, b: int) -> bool:
        return a in self.parents[b] or b in self.parents[a]


def topological_order(g: DagStructure) -> tuple[int, ...]:
    """Topological order of g; ties are broken by smallest node index."""
    placed: set[int] = set()
    remaining = set(range(g.n))
    order = []
    while remaining:
        ready = [v for v in sorted(remaining)
                 if all(p in placed for p in g.parents[v])]
        if not ready:
            raise DataError("graph contains a directed cycle")
        v = ready[0]
        order.append(v)
        placed.add(v)
        remaining.remove(v)
    return tuple(order)


def is_covered_arc(g: DagStructure, a: int, b: int) -> bool:
    """True when the arc a -> b is covered: parents(b) = {a} + parents(a)."""
    if not g.has_arc(a, b):
        raise DataError(f"no arc {a} -> {b} in the graph")
    return set(g.parents[b]) == {a} | set(g.parents[a])


def reverse_covered_arc(g: DagStructure, a: int, b: int) -> DagStructure:
    """Reverse a covered arc a -> b, staying inside the equivalence class."""
    if not is_covered_arc(g, a, b):
        raise DataError(f"arc {a} -> {b} is not covered")
    parents = list(g.parents)
    parents[b] = tuple(p for p in parents[b] if p != a)
    parents[a] = tuple(sorted(parents[a] + (b,)))
    return DagStructure(g.n, tuple(parents), g.names)


@dataclass(frozen=True)
class Cpdag:
    """Equivalence-class pattern: compelled arcs plus reversible edges."""

    n: int
    directed: frozenset
    undirected: frozenset

    def __post_init__(self):
        directed = frozenset((int(u), int(v)) for u, v in self.directed)
        undirected = frozenset(
            (min(int(u), int(v)), max(int(u), int(v))) for u, v in self.undirected)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)
        for u, v in directed | undirected:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise DataError("edge endpoint out of range")
        spans = {(min(u, v), max(u, v)) for u, v in directed}
        if spans & undirected:
            raise DataError("an edge cannot be both directed and undirected")


def _apply_orientation_rules(n: int, arc: np.ndarray) -> None:
    """Propagate compelled orientations to a fixpoint, in place.

    arc[u, v] and arc[v, u] both set means an undirected edge; only
    arc[u, v] means u -> v. The four rules:

      1: a -> b, b - c, a and c nonadjacent        => b -> c
      2: a -> b -> c, a - c                        => a -> c
      3: a - b, a - c, a - d, c -> b, d -> b,
         c and d nonadjacent                       => a -> b
      4: c - b, c - d, c - a, d -> a, a -> b,
         d and b nonadjacent                       => c -> b
    """

    def adjacent(u, v):
        return arc[u, v] or arc[v, u]

    def undirected(u, v):
        return arc[u, v] and arc[v, u]

    def orient(u, v):
        arc[v, u] = False

    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(n):
                if a == b or not arc[a, b] or arc[b, a]:
                    continue
                # a -> b is directed here
                for c in range(n):
                    if c in (a, b):
                        continue
                    if undirected(b, c) and not adjacent(a, c):
                        orient(b, c)
                        changed = True
        for a in range(n):
            for c in range(n):
                if a == c or not undirected(a, c):
                    continue
                for b in range(n):
                    if b in (a, c):
                        continue
                    if arc[a, b] and not arc[b, a] and arc[b, c] and not arc[c, b]:
                        orient(a, c)
                        changed = True
                        break
        for a in range(n):
            for b in range(n):
                if a == b or not undirected(a, b):
                    continue
                into_b = [c for c in range(n)
                          if c not in (a, b) and arc[c, b] and not arc[b, c]
                          and undirected(a, c)]
                if any(not adjacent(c, d)
                       for i, c in enumerate(into_b) for d in into_b[i + 1:]):
                    orient(a, b)
                    changed = True
        for c in range(n):
            for b in range(n):
                if c == b or not undirected(c, b):
                    continue
                done = False
                for a in range(n):
                    if a in (b, c) or not (arc[a, b] and not arc[b, a]):
                        continue
                    if not undirected(c, a):
                        continue
                    for d in range(n):
                        if d in (a, b, c):
                            continue
                        if (arc[d, a] and not arc[a, d] and undirected(c, d)
                                and not adjacent(d, b)):
                            orient(c, b)
                            changed = True
                            done = True
                            break
                    if done:
                        break


def to_cpdag(g: DagStructure) -> Cpdag:
    """Pattern of g's equivalence class.

    Starts from the skeleton with only the v-structure arcs directed, then
    closes under the orientation rules.
    """
    n = g.n
    arc = np.zeros((n, n), dtype=bool)
    for child, ps in enumerate(g.parents):
        for p in ps:
            arc[p, child] = True
            arc[child, p] = True
    for child, ps in enumerate(g.parents):
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                if not g.adjacent(a, b):
                    arc[child, a] = False
                    arc[child, b] = False
    _apply_orientation_rules(n, arc)
    directed = set()
    undirected = set()
    for u in range(n):
        for v in range(u + 1, n):
            if arc[u, v] and arc[v, u]:
                undirected.add((u, v))
            elif arc[u, v]:
                directed.add((u, v))
            elif arc[v, u]:
                directed.add((v, u))
    return Cpdag(n, frozenset(directed), frozenset(undirected))


def _pair_status(p: Cpdag):
    status = {}
    for u, v in p.undirected:
        status[(u, v)] = "undirected"
    for u, v in p.directed:
        status[(min(u, v), max(u, v))] = ("->" if u < v else "<-")
    return status


def cpdag_shd(p1: Cpdag, p2: Cpdag) -> int:
    """Number of node pairs whose edge status differs between two patterns."""
    if p1.n != p2.n:
        raise DataError("patterns must share the node count")
    s1, s2 = _pair_status(p1), _pair_status(p2)
    pairs = set(s1) | set(s2)
    return sum(1 for pair in pairs if s1.get(pair) != s2.get(pair))


def shd(g1: DagStructure, g2: DagStructure) -> int:
    """Structural Hamming distance between the equivalence classes of two DAGs."""
    if g1.n != g2.n:
        raise DataError("graphs must share the node count")
    return cpdag_shd(to_cpdag(g1), to_cpdag(g2))


def connected_components(g: DagStructure) -> tuple[tuple[int, ...], ...]:
    """Connected components of the skeleton, each sorted, ordered by minimum."""
    seen: set[int] = set()
    comps = []
    neighbors = [set() for _ in range(g.n)]
    for child, ps in enumerate(g.parents):
        for p in ps:
            neighbors[child].add(p)
            neighbors[p].add(child)
    for start in range(g.n):
        if start in seen:
            continue
        stack = [start]
        comp = set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(neighbors[v] - comp)
        seen |= comp
        comps.append(tuple(sorted(comp)))
    return tuple(comps)


def is_tournament_component_dag(g: DagStructure) -> bool:
    """True when every connected component induces a complete (tournament) DAG."""
    for comp in connected_components(g):
        for i, u in enumerate(comp):
            for v in comp[i + 1:]:
                if not g.adjacent(u, v):
                    return False
    return True


def _partitions(n: int):
    """Integer partitions of n as nonincreasing tuples."""

    def rec(remaining, maximum):
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, maximum), 0, -1):
            for rest in rec(remaining - part, part):
                yield (part,) + rest

    yield from rec(n, n)


def count_tournament_component_dags(n: int) -> int:
    """Number of labeled DAGs on n nodes whose components are all tournaments.

    Components are linear orders on their node sets, so the count is the
    number of ways to partition n labeled items into a set of sequences:
    sum over integer partitions of n! / prod(multiplicity factorials).
    """
    if not 0 <= n <= COUNT_MAX_NODES:
        raise ResourceLimitError(
            f"tournament-component count supported for 0 <= n <= "
            f"{COUNT_MAX_NODES}, got {n}")
    total = 0
    for part in _partitions(n):
        mult: dict[int, int] = {}
        for p in part:
            mult[p] = mult.get(p, 0) + 1
        denom = 1
        for m in mult.values():
            denom *= math.factorial(m)
        total += math.factorial(n) // denom
    return total


@lru_cache(maxsize=None)
def enumerate_dags(n: int) -> tuple[tuple[int, ...], ...]:
    """Every labeled DAG on n nodes, as tuples of per-node parent bitmasks.

    Vectorized filter over all 2^(n(n-1)) parent-set assignments; refuses
    n > 5 where that space stops being enumerable.
    """
    if not 1 <= n <= ENUMERATION_MAX_NODES:
        raise ResourceLimitError(
            f"exhaustive DAG enumeration supported for n <= "
            f"{ENUMERATION_MAX_NODES}, got {n}")
    base = 1 << (n - 1)
    total = base ** n
    idx = np.arange(total, dtype=np.int64)
    masks = np.empty((total, n), dtype=np.int64)
    for i in range(n):
        comp = (idx // base ** i) % base
        low = comp & ((1 << i) - 1)
        masks[:, i] = low | ((comp >> i) << (i + 1))
    removed = np.zeros(total, dtype=np.int64)
    bits = 1 << np.arange(n, dtype=np.int64)
    alive = np.ones((total, n), dtype=bool)
    for _ in range(n):
        ready = alive & ((masks & ~removed[:, None]) == 0)
        removed |= (ready * bits).sum(axis=1)
        alive &= ~ready
    keep = masks[removed == (1 << n) - 1]
    return tuple(tuple(int(m) for m in row) for row in keep)


def mask_to_parents(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def parents_to_mask(parents) -> int:
    mask = 0
    for p in parents:
        mask |= 1 << int(p)
    return mask


def dag_from_masks(masks, names=None) -> DagStructure:
    return DagStructure(len(masks), tuple(mask_to_parents(m) for m in masks),
                        names)


def parameter_count(g: DagStructure, arities) -> int:
    """Free-parameter count sum_i q_i (r_i - 1) with full parent-space q_i."""
    if len(arities) != g.n:
        raise DataError("arities length must equal the node count")
    total = 0
    for child, ps in enumerate(g.parents):
        q = 1
        for p in ps:
            q *= int(arities[p])
        total += q * (int(arities[child]) - 1)
    return total


def _dataset_max_loglik(data: Dataset, g: DagStructure) -> float:
    total = 0.0
    for child in range(g.n):
        table = contingency(data, child, g.parents[child])
        total += counts_loglik(table.counts, table.row_totals)
    return total


@lru_cache(maxsize=None)
def _nml_log_normalizer(arities: tuple[int, ...], parents: tuple[tuple[int, ...], ...],
                        n_rows: int) -> float:
    """ln sum over all datasets D' of P(D' | ML parameters of D'), by enumeration."""
    n = len(arities)
    m = 1
    for a in arities:
        m *= a
    total = m ** n_rows
    if total > NML_BRUTEFORCE_LIMIT:
        raise ResourceLimitError(
            f"{m}**{n_rows} candidate datasets exceed the enumeration guard")
    # decode every joint cell into per-variable values once
    cells = np.arange(m, dtype=np.int64)
    values = np.empty((m, n), dtype=np.int64)
    rem = cells.copy()
    for i in range(n - 1, -1, -1):
        values[:, i] = rem % arities[i]
        rem //= arities[i]
    # per-variable lookup: joint cell -> (parent config, child value) pair id
    pair_ids = []
    pair_sizes = []
    parent_ids = []
    parent_sizes = []
    for i in range(n):
        ps = parents[i]
        q = 1
        for p in ps:
            q *= arities[p]
        j = config_indices(values, ps, arities)
        pair_ids.append(j * arities[i] + values[:, i])
        pair_sizes.append(q * arities[i])
        parent_ids.append(j)
        parent_sizes.append(q)
    radix = m ** np.arange(n_rows - 1, -1, -1, dtype=np.int64)
    partials = []
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        rows_cells = (idx[:, None] // radix) % m  # joint cell per data row
        t = len(idx)
        loglik = np.zeros(t)
        rows_range = np.arange(t)[:, None]
        for i in range(n):
            pc = np.zeros((t, pair_sizes[i]), dtype=np.int64)
            np.add.at(pc, (rows_range, pair_ids[i][rows_cells]), 1)
            jc = np.zeros((t, parent_sizes[i]), dtype=np.int64)
            np.add.at(jc, (rows_range, parent_ids[i][rows_cells]), 1)
            loglik += xlogy(pc, pc).sum(axis=1) - xlogy(jc, jc).sum(axis=1)
        partials.append(logsumexp(loglik))
    return float(logsumexp(np.asarray(partials)))


def nml_bruteforce(data: Dataset, g: DagStructure) -> float:
    """Exact NML log-score of the data under g, by literal dataset enumeration.

    Returns the maximized log-likelihood minus the log-normalizer summed over
    every possible dataset of the same shape. Test oracle only; the guard
    refuses more than 2**24 candidate datasets.
    """
    if data.n_vars != g.n:
        raise DataError("dataset and graph variable counts differ")
    if data.n_rows == 0:
        return 0.0
    norm = _nml_log_normalizer(data.arities, g.parents, data.n_rows)
    return _dataset_max_loglik(data, g) - norm
