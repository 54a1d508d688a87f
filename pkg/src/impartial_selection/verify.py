"""Independent characterization oracle, aggregators and exhaustive sweeps.

``lemma1_select`` decides membership from indegrees and edges of the input
graph alone, without building any of the per-vertex graphs that ``apwru``
constructs, so agreement between the two is a meaningful check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .graph import (
    Digraph,
    GraphClass,
    GraphError,
    LexKey,
    _deviations,
    enumerate_class,
    out_masks,
    sample_class,
    to_json_obj,
)
from .mechanisms import (
    MechanismId,
    Selection,
    Variant,
    apwru,
    apwru_deletion,
    as_callable,
    deletion_radius,
)


class Aggregator(enum.Enum):
    MIN = "min"
    MEDIAN = "median"
    MEAN = "mean"


def aggregate(values: Iterable[int], sigma: Aggregator) -> Fraction:
    """Exact min, median or mean; 0 on the empty multiset.

    The median of an even number of values is the midpoint of the two middle
    order statistics.
    """
    xs = sorted(values)
    if not xs:
        return Fraction(0)
    if sigma is Aggregator.MIN:
        return Fraction(xs[0])
    if sigma is Aggregator.MEAN:
        return Fraction(sum(xs), len(xs))
    mid = len(xs) // 2
    if len(xs) % 2:
        return Fraction(xs[mid])
    return Fraction(xs[mid - 1] + xs[mid], 2)


def additive_gap(g: Digraph, selection: Iterable[int], sigma: Aggregator) -> Fraction:
    selection = list(selection)
    for v in selection:
        if not isinstance(v, int) or not 1 <= v <= g.n:
            raise GraphError(f"selected vertex {v!r} out of range 1..{g.n}")
    deg = g.indegrees
    return max(deg) - aggregate((deg[v - 1] for v in selection), sigma)


def lemma1_select(g: Digraph) -> Selection:
    """Vertices meeting the edge condition and the indegree condition.

    v is kept iff (a) v has an edge to every w whose (indegree, index) key
    beats its own, and (b) v has maximum indegree, or indegree one below it
    and an index larger than every maximum-indegree vertex.
    """
    deg = g.indegrees
    delta = max(deg)
    keys = [LexKey(deg[v - 1], v) for v in g.vertices]
    max_vertices = [v for v in g.vertices if deg[v - 1] == delta]
    selected = []
    for v in g.vertices:
        kv = keys[v - 1]
        if not all(g.has_edge(v, w) for w in g.vertices if keys[w - 1] > kv):
            continue
        if kv.indegree == delta or (kv.indegree == delta - 1 and all(v > w for w in max_vertices)):
            selected.append(v)
    return tuple(selected)


@dataclass(frozen=True)
class SelectionStrata:
    s0: tuple[int, ...]
    s1: tuple[int, ...]
    v_high: int
    v_low: int


def strata(g: Digraph) -> SelectionStrata:
    deg = g.indegrees
    delta = max(deg)
    chosen = apwru(g)
    by_key = sorted(chosen, key=lambda v: (deg[v - 1], v))
    return SelectionStrata(
        s0=tuple(v for v in chosen if deg[v - 1] == delta),
        s1=tuple(v for v in chosen if deg[v - 1] == delta - 1),
        v_high=by_key[-1],
        v_low=by_key[0],
    )


def fraction_json(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


@dataclass(frozen=True)
class Violation:
    graph: Digraph
    vertex: int
    deviation: Digraph

    def sort_key(self):
        return (self.graph.masks, self.vertex, self.deviation.masks)

    def to_json(self) -> dict:
        return {
            "graph": to_json_obj(self.graph),
            "vertex": self.vertex,
            "deviation": to_json_obj(self.deviation),
        }


@dataclass
class VerificationReport:
    mechanism: str
    graph_class: str
    objective: str | None = None
    mode: str = "exhaustive"
    graphs_checked: int = 0
    impartiality_violations: list[Violation] = field(default_factory=list)
    worst_gap: Fraction | None = None
    worst_gap_witness: Digraph | None = None
    max_selection_size: int = 0

    @property
    def impartial(self) -> bool:
        return not self.impartiality_violations

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "graph_class": self.graph_class,
            "objective": self.objective,
            "mode": self.mode,
            "graphs_checked": self.graphs_checked,
            "impartiality_violations": [v.to_json() for v in self.impartiality_violations],
            "worst_gap": None if self.worst_gap is None else fraction_json(self.worst_gap),
            "worst_gap_witness": None if self.worst_gap_witness is None else to_json_obj(self.worst_gap_witness),
            "max_selection_size": self.max_selection_size,
        }


def _memoized(f: Callable[[Digraph], Selection]) -> Callable[[Digraph], frozenset]:
    cache: dict[Digraph, frozenset] = {}

    def call(g: Digraph) -> frozenset:
        try:
            return cache[g]
        except KeyError:
            s = cache[g] = frozenset(f(g))
            return s

    return call


def _name(mechanism) -> str:
    return str(mechanism) if isinstance(mechanism, MechanismId) else getattr(mechanism, "__name__", repr(mechanism))


def _check_pwru_class(mechanism, spec: GraphClass) -> None:
    if isinstance(mechanism, MechanismId) and mechanism.variant is Variant.PWRU and spec.n > 1 and spec.d != 1:
        raise GraphError("pwru is only defined on graphs with outdegree at most 1 (use d=1)")


def sweep(
    mechanism,
    graphs: Iterable[Digraph],
    spec: GraphClass,
    sigma: Aggregator | None = None,
    impartiality: bool = True,
    deviations: Callable[[Digraph, int], Iterable[Digraph]] | None = None,
    mode: str = "exhaustive",
    memoize: bool = True,
) -> VerificationReport:
    """Fold impartiality, gap and size checks over a stream of graphs.

    Selections are cached per graph unless ``memoize`` is off; keep it on
    only for streams over a bounded class. ``deviations(g, v)`` defaults to
    the full class-respecting deviation neighborhood of v. The fold visits graphs in stream order and only
    replaces the gap witness on a strict improvement, so reports are
    reproducible.
    """
    _check_pwru_class(mechanism, spec)
    f = as_callable(mechanism)
    select = _memoized(f) if memoize else (lambda g: frozenset(f(g)))
    if deviations is None:
        choices = [out_masks(spec.n, v, spec.max_out) for v in range(1, spec.n + 1)]

        def deviations(g, v):
            return _deviations(g, v, choices[v - 1])

    report = VerificationReport(
        mechanism=_name(mechanism),
        graph_class=str(spec),
        objective=None if sigma is None else sigma.value,
        mode=mode,
    )
    violations = []
    for g in graphs:
        report.graphs_checked += 1
        chosen = select(g)
        report.max_selection_size = max(report.max_selection_size, len(chosen))
        if sigma is not None:
            gap = additive_gap(g, chosen, sigma)
            if report.worst_gap is None or gap > report.worst_gap:
                report.worst_gap, report.worst_gap_witness = gap, g
        if impartiality:
            for v in g.vertices:
                inside = v in chosen
                for h in deviations(g, v):
                    if (v in select(h)) != inside:
                        violations.append(Violation(g, v, h))
    violations.sort(key=Violation.sort_key)
    report.impartiality_violations = violations
    return report


def check_impartial(mechanism, spec: GraphClass) -> VerificationReport:
    """Membership invariance of every vertex under its own deviations, class-wide."""
    return sweep(mechanism, enumerate_class(spec), spec)


def measure_additive(mechanism, spec: GraphClass, sigma: Aggregator) -> VerificationReport:
    return sweep(mechanism, enumerate_class(spec), spec, sigma, impartiality=False)


def verify_class(mechanism, spec: GraphClass, sigma: Aggregator) -> VerificationReport:
    """Impartiality and additive gap in a single exhaustive pass."""
    return sweep(mechanism, enumerate_class(spec), spec, sigma)


def verify_sampled(mechanism, spec: GraphClass, sigma: Aggregator, count: int, seed: int) -> VerificationReport:
    """Seeded sampling counterpart of :func:`verify_class`.

    Impartiality is spot-checked: for every sampled graph and vertex, one
    deviation drawn from a second generator seeded with ``seed + 1``.
    """
    import random

    _check_pwru_class(mechanism, spec)
    rng = random.Random(seed + 1)
    choices = [out_masks(spec.n, v, spec.max_out) for v in range(1, spec.n + 1)]

    def one_deviation(g, v):
        c = choices[v - 1]
        return _deviations(g, v, [c[rng.randrange(len(c))]])

    return sweep(
        mechanism,
        sample_class(spec, count, seed),
        spec,
        sigma,
        deviations=one_deviation,
        mode=f"sample(count={count}, seed={seed})",
        memoize=False,
    )


def deletion_tightness_candidates(n: int, k: int) -> Iterator[Digraph]:
    """Graphs on which the edge-deletion guarantee could be attained.

    For each choice of a would-be top vertex t whose r lower neighbours all
    point to it, and a higher vertex u pointing only at t, the construction
    leaves t with exactly r deleted in-edges and u with indegree zero.
    """
    r = deletion_radius(n, k)
    for t in range(r + 1, n):
        for u in range(t + 1, n + 1):
            edges = [(t - i, t) for i in range(1, r + 1)] + [(u, t)]
            yield Digraph.from_edges(n, edges)


def find_deletion_tightness_witness(n: int, k: int) -> Digraph | None:
    """First candidate whose measured min-gap equals r + 1, checked by direct evaluation."""
    target = deletion_radius(n, k) + 1
    for g in deletion_tightness_candidates(n, k):
        if additive_gap(g, apwru_deletion(g, k), Aggregator.MIN) == target:
            return g
    return None
