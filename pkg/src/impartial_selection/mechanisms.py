"""Impartial selection mechanisms.

Every mechanism maps a :class:`~impartial_selection.graph.Digraph` to a
sorted tuple of selected vertices. Ties between vertices of equal indegree
are always broken in favour of the greater index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .graph import Digraph, GraphError, out_masks, top

Selection = tuple[int, ...]


class DomainError(ValueError):
    """The mechanism is undefined on the given graph."""


class InternalError(RuntimeError):
    """A property the mechanisms provably satisfy was violated."""


def _nonempty(selected: list[int], name: str, g: Digraph) -> Selection:
    if not selected:
        raise InternalError(f"{name} selected no vertex on {g!r}")
    return tuple(selected)


def pwru(g: Digraph) -> Selection:
    """Plurality with runners-up, defined for graphs with outdegree at most one.

    Selects every maximum-indegree vertex; when that vertex v is unique,
    also every u with indegree one less and an edge (u, v).
    """
    for v in g.vertices:
        if g.masks[v - 1] & (g.masks[v - 1] - 1):
            raise DomainError(f"vertex {v} has outdegree {g.outdegree(v)} > 1")
    deg = g.indegrees
    delta = max(deg)
    selected = [v for v in g.vertices if deg[v - 1] == delta]
    if len(selected) == 1:
        (winner,) = selected
        selected += [u for u in g.vertices if deg[u - 1] == delta - 1 and g.has_edge(u, winner)]
        selected.sort()
    return _nonempty(selected, "pwru", g)


def in_apwru(g: Digraph, v: int) -> bool:
    """Whether v is the tie-break winner once its own out-edges are removed."""
    deg = g.indegrees
    mask = g.masks[v - 1]
    best = (deg[v - 1], v)
    for w in range(1, g.n + 1):
        if w != v and (deg[w - 1] - (mask >> (w - 1) & 1), w) > best:
            return False
    return True


def apwru(g: Digraph) -> Selection:
    """Asymmetric plurality with runners-up: all v with top(G_v) = v."""
    return _nonempty([v for v in g.vertices if in_apwru(g, v)], "apwru", g)


def _drops(g: Digraph, u: int, mask: int, v: int) -> bool:
    return not in_apwru(g.with_out_mask(u, mask), v)


def is_pivotal(g: Digraph, u: int, v: int, exhaustive: bool = False) -> bool:
    """Whether u can rewire its out-edges so that v leaves the apwru selection.

    Unless ``exhaustive`` is set, three candidate rewirings are tried before
    the full sweep over u's deviation neighborhood: dropping all of u's
    edges, pointing only at top(G), and dropping just the edge (u, top(G)).
    """
    if not exhaustive:
        t = top(g)
        current = g.masks[u - 1]
        candidates = [0, current & ~(1 << (t - 1))]
        if t != u:
            candidates.insert(1, 1 << (t - 1))
        if any(_drops(g, u, m, v) for m in candidates):
            return True
    return any(_drops(g, u, m, v) for m in out_masks(g.n, u))


def apwru_pivotal(g: Digraph, exhaustive: bool = False) -> Selection:
    """Members of apwru(G) that are pivotal for every other member."""
    base = apwru(g)
    selected = [
        u for u in base
        if all(is_pivotal(g, u, v, exhaustive) for v in base if v != u)
    ]
    return _nonempty(selected, "apwru_pivotal", g)


def deletion_radius(n: int, k: int) -> int:
    if not 2 <= k <= n:
        raise GraphError(f"selection budget k must lie in 2..{n}, got {k}")
    return (n - 2) // (k - 1)


def deletion_masks(n: int, r: int) -> tuple[int, ...]:
    """Edges (u, v) with u < v <= u + r, as one mask per source vertex."""
    masks = []
    for u in range(1, n + 1):
        m = 0
        for v in range(u + 1, min(u + r, n) + 1):
            m |= 1 << (v - 1)
        masks.append(m)
    return tuple(masks)


def apwru_deletion(g: Digraph, k: int) -> Selection:
    """Drop each vertex's edges to its r next-higher indices, then apply apwru."""
    r = deletion_radius(g.n, k)
    return apwru(g.minus_masks(deletion_masks(g.n, r)))


class Variant(enum.Enum):
    PWRU = "pwru"
    APWRU = "apwru"
    APWRU_PIVOTAL = "apwru-pivotal"
    APWRU_DELETION = "apwru-deletion"


@dataclass(frozen=True)
class MechanismId:
    variant: Variant
    k: int | None = None

    def __post_init__(self):
        if self.variant is Variant.APWRU_DELETION and self.k is None:
            raise GraphError("apwru-deletion requires a selection budget k")

    @classmethod
    def parse(cls, name: str, k: int | None = None) -> MechanismId:
        try:
            variant = Variant(name)
        except ValueError:
            choices = ", ".join(v.value for v in Variant)
            raise GraphError(f"unknown mechanism {name!r} (choose from {choices})") from None
        return cls(variant, k if variant is Variant.APWRU_DELETION else None)

    def __str__(self) -> str:
        if self.variant is Variant.APWRU_DELETION:
            return f"{self.variant.value}[k={self.k}]"
        return self.variant.value


def run(mechanism: MechanismId, g: Digraph) -> Selection:
    v = mechanism.variant
    if v is Variant.PWRU:
        return pwru(g)
    if v is Variant.APWRU:
        return apwru(g)
    if v is Variant.APWRU_PIVOTAL:
        return apwru_pivotal(g)
    return apwru_deletion(g, mechanism.k)


def as_callable(mechanism: MechanismId | Callable[[Digraph], Selection]) -> Callable[[Digraph], Selection]:
    if isinstance(mechanism, MechanismId):
        return lambda g: run(mechanism, g)
    return mechanism
