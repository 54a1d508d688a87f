"""Finite graph families behind the lower bounds, and a search that refutes them.

A family is a handful of graphs plus deviation links ``(a, b, v)``: graph b
differs from graph a only in the out-edges of v. Any impartial mechanism
must treat v identically in both. :func:`verify_impossibility` searches for
one selection per graph that respects every link and meets the additive
guarantee on every graph. Finding none (UNSAT) proves that no impartial
mechanism on an enclosing class has that guarantee. Finding one (SAT) only
says the family is too small to rule it out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Digraph, GraphError, to_json_obj
from .mechanisms import apwru
from .verify import Aggregator, additive_gap, fraction_json


@dataclass(frozen=True)
class GadgetFamily:
    labels: tuple[str, ...]
    graphs: tuple[Digraph, ...]
    links: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if not self.graphs:
            raise GraphError("a gadget family needs at least one graph")
        if len(self.labels) != len(self.graphs):
            raise GraphError("one label per graph required")
        n = self.graphs[0].n
        if any(g.n != n for g in self.graphs):
            raise GraphError("all family graphs must share the vertex set")
        # a mechanism is a function of the graph, so one variable per graph
        if len(set(self.graphs)) != len(self.graphs):
            raise GraphError("duplicate graphs in family; merge them and their links")
        for a, b, v in self.links:
            ga, gb = self.graphs[a], self.graphs[b]
            if not 1 <= v <= n:
                raise GraphError(f"link vertex {v} out of range")
            if any(ma != mb for i, (ma, mb) in enumerate(zip(ga.masks, gb.masks)) if i != v - 1):
                raise GraphError(
                    f"link ({self.labels[a]}, {self.labels[b]}, {v}): graphs differ outside vertex {v}'s out-edges"
                )

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def max_outdegree(self) -> int:
        return max(g.max_outdegree for g in self.graphs)

    def to_json(self) -> dict:
        return {
            "graphs": [dict(label=lbl, **to_json_obj(g)) for lbl, g in zip(self.labels, self.graphs)],
            "links": [list(link) for link in self.links],
        }


def build_cycle_family(n: int = 3) -> GadgetFamily:
    """A 3-cycle and the three graphs where one cycle vertex reverses its edge."""
    if n < 3:
        raise GraphError(f"the cycle family needs n >= 3, got {n}")
    base = [(1, 2), (2, 3), (3, 1)]
    deviated = {
        1: [(1, 3), (2, 3), (3, 1)],
        2: [(1, 2), (2, 1), (3, 1)],
        3: [(1, 2), (2, 3), (3, 2)],
    }
    graphs = [Digraph.from_edges(n, base)] + [Digraph.from_edges(n, deviated[v]) for v in (1, 2, 3)]
    return GadgetFamily(
        labels=("G", "G1", "G2", "G3"),
        graphs=tuple(graphs),
        links=((0, 1, 1), (0, 2, 2), (0, 3, 3)),
    )


def _complete_on(n: int, sources, targets) -> Digraph:
    return Digraph.from_edges(n, [(u, w) for u in sources for w in targets if u != w])


def build_k_family(n: int, d: int) -> GadgetFamily:
    """Complete graphs on D = {1..d+1} with one (K_v) or two (K_uv) vertices silenced.

    K_uv and K_vu are the same graph and appear once. Links (K_v, K_uv, u)
    for every ordered pair u != v.
    """
    if not 2 <= d <= n - 1:
        raise GraphError(f"the K family needs 2 <= d <= n-1, got n={n}, d={d}")
    core = list(range(1, d + 2))
    labels, graphs, index = [], [], {}
    for v in core:
        index[frozenset((v,))] = len(graphs)
        labels.append(f"K{v}")
        graphs.append(_complete_on(n, [w for w in core if w != v], core))
    for u, v in itertools.combinations(core, 2):
        index[frozenset((u, v))] = len(graphs)
        labels.append(f"K{u},{v}")
        graphs.append(_complete_on(n, [w for w in core if w not in (u, v)], core))
    links = tuple(
        (index[frozenset((v,))], index[frozenset((u, v))], u) for v in core for u in core if u != v
    )
    return GadgetFamily(tuple(labels), tuple(graphs), links)


def build_figure4_family() -> GadgetFamily:
    """The eight-graph chain on four vertices refuting median < 1 and mean < 2/3.

    Starting from a bidirected triangle on {1, 2, 3} that all point at 4,
    two chains of single-vertex deviations (2, 4, 1, 2 and 3, 4, 1, 3) meet
    at the complete graph with vertex 1 silenced.
    """
    e = {
        "start": [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (2, 4), (3, 4)],
        "upper1": [(1, 2), (1, 3), (3, 1), (3, 2), (1, 4), (3, 4)],
        "upper2": [(1, 2), (1, 3), (3, 1), (3, 2), (1, 4), (3, 4), (4, 1), (4, 2), (4, 3)],
        "upper3": [(3, 1), (3, 2), (3, 4), (4, 1), (4, 2), (4, 3)],
        "lower1": [(1, 2), (2, 1), (1, 3), (2, 3), (1, 4), (2, 4)],
        "lower2": [(1, 2), (2, 1), (1, 3), (2, 3), (1, 4), (2, 4), (4, 1), (4, 2), (4, 3)],
        "lower3": [(2, 1), (2, 3), (2, 4), (4, 1), (4, 2), (4, 3)],
        "end": [(2, 1), (2, 3), (2, 4), (3, 1), (3, 2), (3, 4), (4, 1), (4, 2), (4, 3)],
    }
    labels = tuple(e)
    graphs = tuple(Digraph.from_edges(4, e[lbl]) for lbl in labels)
    i = {lbl: pos for pos, lbl in enumerate(labels)}
    links = (
        (i["start"], i["upper1"], 2),
        (i["upper1"], i["upper2"], 4),
        (i["upper2"], i["upper3"], 1),
        (i["upper3"], i["end"], 2),
        (i["start"], i["lower1"], 3),
        (i["lower1"], i["lower2"], 4),
        (i["lower2"], i["lower3"], 1),
        (i["lower3"], i["end"], 3),
    )
    return GadgetFamily(labels, graphs, links)


def build_abstention_free_k_family(n: int, d: int) -> GadgetFamily:
    """K family variant in which every vertex has an outgoing edge.

    Uses D = {1..d}, a feeder x = d+1 pointing at all of D, silenced members
    of D pointing at x, and the remaining vertices on a cycle (or, if there
    is just one, pointing at x). Only sketched as a construction; not part
    of the default checks.
    """
    if n < 4 or d < 3 or d > n - 2:
        raise GraphError(f"the abstention-free family needs n >= 4 and 3 <= d <= n-2, got n={n}, d={d}")
    core = list(range(1, d + 1))
    feeder = d + 1
    rest = list(range(d + 2, n + 1))
    if len(rest) == 1:
        tail = [(rest[0], feeder)]
    else:
        tail = [(rest[i], rest[(i + 1) % len(rest)]) for i in range(len(rest))]

    def build(silenced):
        edges = [(u, w) for u in core if u not in silenced for w in core if u != w]
        edges += [(u, feeder) for u in silenced]
        edges += [(feeder, w) for w in core] + tail
        return Digraph.from_edges(n, edges)

    labels, graphs, index = [], [], {}
    for v in core:
        index[frozenset((v,))] = len(graphs)
        labels.append(f"K{v}")
        graphs.append(build({v}))
    for u, v in itertools.combinations(core, 2):
        index[frozenset((u, v))] = len(graphs)
        labels.append(f"K{u},{v}")
        graphs.append(build({u, v}))
    links = tuple(
        (index[frozenset((v,))], index[frozenset((u, v))], u) for v in core for u in core if u != v
    )
    return GadgetFamily(tuple(labels), tuple(graphs), links)


def relabel(g: Digraph, perm: dict[int, int]) -> Digraph:
    """Apply a vertex permutation given as {old: new}; unlisted vertices stay put."""
    return Digraph.from_edges(g.n, [(perm.get(u, u), perm.get(v, v)) for u, v in g.edges()])


def close_under_permutations(family: GadgetFamily, vertices) -> GadgetFamily:
    """Union of the family's images under every permutation of ``vertices``.

    Graphs that coincide after relabeling are merged, so their links join
    up. This turns a family drawn up to symmetry into one that binds every
    mechanism, symmetric or not.
    """
    vertices = list(vertices)
    labels, graphs, index, links = [], [], {}, []
    for image in itertools.permutations(vertices):
        perm = dict(zip(vertices, image))
        tag = "".join(str(perm[v]) for v in vertices)
        local = []
        for lbl, g in zip(family.labels, family.graphs):
            h = relabel(g, perm)
            if h not in index:
                index[h] = len(graphs)
                labels.append(f"{lbl}@{tag}")
                graphs.append(h)
            local.append(index[h])
        for a, b, v in family.links:
            link = (local[a], local[b], perm.get(v, v))
            if link not in links:
                links.append(link)
    return GadgetFamily(tuple(labels), tuple(graphs), tuple(links))


def build_figure4_closure() -> GadgetFamily:
    """The eight-graph chain under all relabelings of the triangle {1, 2, 3}."""
    return close_under_permutations(build_figure4_family(), (1, 2, 3))


@dataclass(frozen=True)
class ImpossibilityQuery:
    family: GadgetFamily
    objective: Aggregator
    alpha: Fraction
    k: int

    def __post_init__(self):
        if self.alpha < 0:
            raise GraphError(f"alpha must be nonnegative, got {self.alpha}")
        if not 1 <= self.k <= self.family.n:
            raise GraphError(f"k must lie in 1..{self.family.n}, got {self.k}")


@dataclass
class SearchResult:
    satisfiable: bool
    assignment: dict[int, tuple[int, ...]] | None
    nodes: int = 0
    candidates: list[int] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "SAT" if self.satisfiable else "UNSAT"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": None if self.assignment is None else {str(i): list(s) for i, s in sorted(self.assignment.items())},
            "nodes": self.nodes,
            "candidates_per_graph": self.candidates,
            "trace": self.trace,
        }


def _subsets(vertices, k):
    for size in range(0, k + 1):
        yield from itertools.combinations(vertices, size)


def local_candidates(g: Digraph, objective: Aggregator, alpha: Fraction, k: int) -> list[tuple[int, ...]]:
    """Selections of size <= k meeting the guarantee on g, best aggregate first.

    Under MIN, vertices with indegree below max - ceil(alpha) cannot appear.
    """
    deg = g.indegrees
    pool = list(g.vertices)
    if objective is Aggregator.MIN:
        floor = max(deg) - -(-alpha.numerator // alpha.denominator)
        pool = [v for v in pool if deg[v - 1] >= floor]
    found = [(additive_gap(g, s, objective), s) for s in _subsets(pool, k)]
    found = [(gap, s) for gap, s in found if gap <= alpha]
    found.sort(key=lambda item: (item[0], -len(item[1]), item[1]))
    return [s for _, s in found]


def check_assignment(query: ImpossibilityQuery, assignment: dict[int, tuple[int, ...]]) -> list[str]:
    """Problems with a proposed selection per graph; empty means it is feasible."""
    fam = query.family
    problems = []
    for i, g in enumerate(fam.graphs):
        s = assignment.get(i)
        if s is None:
            problems.append(f"{fam.labels[i]}: no selection")
            continue
        if len(s) > query.k:
            problems.append(f"{fam.labels[i]}: {len(s)} vertices selected, budget {query.k}")
        gap = additive_gap(g, s, query.objective)
        if gap > query.alpha:
            problems.append(f"{fam.labels[i]}: gap {gap} exceeds {query.alpha}")
    for a, b, v in fam.links:
        if a in assignment and b in assignment and (v in assignment[a]) != (v in assignment[b]):
            problems.append(f"link {fam.labels[a]} -> {fam.labels[b]} on vertex {v}: membership differs")
    return problems


def verify_impossibility(query: ImpossibilityQuery, exhaustive: bool = False) -> SearchResult:
    """Backtracking search for a link-consistent selection per family graph.

    With ``exhaustive`` set, every combination of subsets is tried with no
    pruning at all; this is the oracle for small families.
    """
    if exhaustive:
        return _exhaustive(query)
    fam = query.family
    cands = [local_candidates(g, query.objective, query.alpha, query.k) for g in fam.graphs]
    result = SearchResult(False, None, candidates=[len(c) for c in cands])
    for i, c in enumerate(cands):
        if not c:
            result.trace.append(f"{fam.labels[i]}: no selection meets gap <= {query.alpha}")
            return result

    neighbors: list[list[tuple[int, int]]] = [[] for _ in fam.graphs]
    for a, b, v in fam.links:
        neighbors[a].append((b, v))
        neighbors[b].append((a, v))

    assigned: dict[int, tuple[int, ...]] = {}

    def consistent(i, s):
        return all((v in s) == (v in assigned[j]) for j, v in neighbors[i] if j in assigned)

    def pick():
        # fewest remaining consistent options first; ties by index
        best, best_opts = None, None
        for i in range(len(fam.graphs)):
            if i in assigned:
                continue
            opts = [s for s in cands[i] if consistent(i, s)]
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = i, opts
        return best, best_opts

    dead_ends: dict[int, int] = {}

    def search():
        if len(assigned) == len(fam.graphs):
            return True
        i, opts = pick()
        if not opts:
            dead_ends[i] = dead_ends.get(i, 0) + 1
            return False
        for s in opts:
            result.nodes += 1
            assigned[i] = s
            if search():
                return True
            del assigned[i]
        return False

    if search():
        result.satisfiable = True
        result.assignment = dict(sorted(assigned.items()))
    else:
        result.trace.append(f"exhausted {result.nodes} partial assignments")
        for i, count in sorted(dead_ends.items()):
            result.trace.append(f"{fam.labels[i]}: no link-consistent selection left ({count} times)")
    return result


def _exhaustive(query: ImpossibilityQuery) -> SearchResult:
    fam = query.family
    if len(fam.graphs) > 4 or fam.n > 4:
        raise GraphError("unpruned search is limited to families of at most 4 graphs on at most 4 vertices")
    every = list(_subsets(range(1, fam.n + 1), query.k))
    result = SearchResult(False, None, candidates=[len(every)] * len(fam.graphs))
    for combo in itertools.product(every, repeat=len(fam.graphs)):
        result.nodes += 1
        assignment = dict(enumerate(combo))
        if not check_assignment(query, assignment):
            result.satisfiable, result.assignment = True, assignment
            return result
    result.trace.append(f"all {result.nodes} assignments violate a constraint")
    return result


def mechanism_assignment(family: GadgetFamily, mechanism=apwru) -> dict[int, tuple[int, ...]]:
    """The selection a concrete mechanism makes on every family graph."""
    return {i: tuple(mechanism(g)) for i, g in enumerate(family.graphs)}


def query_json(query: ImpossibilityQuery) -> dict:
    return {
        "objective": query.objective.value,
        "alpha": fraction_json(query.alpha),
        "k": query.k,
        "n": query.family.n,
        "graphs": len(query.family.graphs),
    }
