"""Loop-free digraphs on vertices 1..n and the labeled graph classes built from them.

A graph stores one bitmask per vertex: bit ``u - 1`` of ``masks[v - 1]`` is set
iff the edge ``(v, u)`` exists. The mask tuple is canonical, so structural
equality and hashing come for free.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Iterator, NamedTuple


class GraphError(ValueError):
    """Malformed graph, out-of-range vertex or invalid class parameters."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LexKey(NamedTuple):
    """(indegree, vertex); tuple comparison gives the tie-breaking order."""

    indegree: int
    vertex: int


@dataclass(frozen=True)
class Digraph:
    n: int
    masks: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {self.n!r}")
        if len(self.masks) != self.n:
            raise GraphError(f"expected {self.n} adjacency masks, got {len(self.masks)}")
        full = (1 << self.n) - 1
        for i, m in enumerate(self.masks):
            if m < 0 or m & ~full:
                raise GraphError(f"vertex {i + 1} has an out-neighbor outside 1..{self.n}")
            if m >> i & 1:
                raise GraphError(f"self-loop at vertex {i + 1}")

    @classmethod
    def _trusted(cls, n: int, masks: tuple[int, ...]) -> Digraph:
        # Skips validation; callers guarantee the invariants.
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "masks", masks)
        return g

    @classmethod
    def empty(cls, n: int) -> Digraph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> Digraph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << i) for i in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Digraph:
        """Build a graph, rejecting self-loops, duplicates and out-of-range endpoints."""
        if not isinstance(n, int) or n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {n!r}")
        masks = [0] * n
        for u, v in edges:
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            bit = 1 << (v - 1)
            if masks[u - 1] & bit:
                raise GraphError(f"duplicate edge ({u}, {v})")
            masks[u - 1] |= bit
        return cls(n, tuple(masks))

    @classmethod
    def from_out_neighbors(cls, out_neighbors: Iterable[Iterable[int]]) -> Digraph:
        lists = [list(nbrs) for nbrs in out_neighbors]
        return cls.from_edges(len(lists), ((v + 1, u) for v, nbrs in enumerate(lists) for u in nbrs))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_mask_to_vertices(m) for m in self.masks)

    def successors(self, v: int) -> tuple[int, ...]:
        _check_vertex(self.n, v)
        return _mask_to_vertices(self.masks[v - 1])

    def edges(self) -> list[tuple[int, int]]:
        return [(v, u) for v in self.vertices for u in _mask_to_vertices(self.masks[v - 1])]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.masks[u - 1] >> (v - 1) & 1)

    def outdegree(self, v: int) -> int:
        _check_vertex(self.n, v)
        return bin(self.masks[v - 1]).count("1")

    @property
    def max_outdegree(self) -> int:
        return max(bin(m).count("1") for m in self.masks)

    @cached_property
    def indegrees(self) -> tuple[int, ...]:
        """Indegree of every vertex; position ``v - 1`` holds vertex ``v``."""
        return tuple(sum(m >> u & 1 for m in self.masks) for u in range(self.n))

    def with_out_mask(self, v: int, mask: int) -> Digraph:
        """Copy of the graph with vertex v's out-neighborhood replaced by ``mask``."""
        masks = list(self.masks)
        masks[v - 1] = mask
        return Digraph(self.n, tuple(masks))

    def without_out_edges(self, v: int) -> Digraph:
        _check_vertex(self.n, v)
        masks = list(self.masks)
        masks[v - 1] = 0
        return Digraph._trusted(self.n, tuple(masks))

    def minus_masks(self, removed: tuple[int, ...]) -> Digraph:
        return Digraph._trusted(self.n, tuple(m & ~r for m, r in zip(self.masks, removed)))

    def padded(self, n: int) -> Digraph:
        """Same edges on n >= self.n vertices; the extra vertices are isolated."""
        if n < self.n:
            raise GraphError(f"cannot pad a graph on {self.n} vertices down to {n}")
        return Digraph(n, self.masks + (0,) * (n - self.n))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={self.edges()})"


def _check_vertex(n: int, v) -> None:
    if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= n:
        raise GraphError(f"vertex {v!r} out of range 1..{n}")


def _mask_to_vertices(mask: int) -> tuple[int, ...]:
    out = []
    u = 1
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return tuple(out)


def indegree(g: Digraph, v: int) -> int:
    _check_vertex(g.n, v)
    return g.indegrees[v - 1]


def max_indegree(g: Digraph) -> int:
    return max(g.indegrees)


def lex_key(g: Digraph, v: int) -> LexKey:
    return LexKey(indegree(g, v), v)


def top(g: Digraph) -> int:
    """Maximum-indegree vertex with the greatest index."""
    deg = g.indegrees
    return max(range(g.n), key=lambda i: (deg[i], i)) + 1


@dataclass(frozen=True)
class GraphClass:
    """All labeled loop-free digraphs on n vertices, optionally with outdegree <= d."""

    n: int
    d: int | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {self.n!r}")
        if self.d is not None and not 1 <= self.d <= self.n - 1:
            raise GraphError(f"outdegree bound must lie in 1..{self.n - 1}, got {self.d}")

    @property
    def max_out(self) -> int:
        return self.n - 1 if self.d is None else self.d

    def size(self) -> int:
        per_vertex = sum(comb(self.n - 1, i) for i in range(self.max_out + 1))
        return per_vertex**self.n

    def contains(self, g: Digraph) -> bool:
        return g.n == self.n and g.max_outdegree <= self.max_out

    def __str__(self) -> str:
        return f"G_{self.n}" if self.d is None else f"G_{self.n}({self.d})"


def out_masks(n: int, v: int, max_out: int | None = None) -> list[int]:
    """Admissible out-neighborhoods of v as masks.

    Order: subsets of the other vertices (ascending) in increasing binary
    order, the smallest target being the least significant bit.
    """
    targets = [u for u in range(n) if u != v - 1]
    limit = n - 1 if max_out is None else max_out
    result = []
    for code in range(1 << len(targets)):
        if bin(code).count("1") > limit:
            continue
        mask = 0
        for j, u in enumerate(targets):
            if code >> j & 1:
                mask |= 1 << u
        result.append(mask)
    return result


def deviation_neighborhood(g: Digraph, v: int) -> Iterator[Digraph]:
    """Every graph obtained from g by replacing v's out-edges (g included)."""
    return restricted_deviation_neighborhood(g, v, g.n - 1)


def restricted_deviation_neighborhood(g: Digraph, v: int, d: int) -> Iterator[Digraph]:
    _check_vertex(g.n, v)
    if g.n > 1 and not 1 <= d <= g.n - 1:
        raise GraphError(f"outdegree bound must lie in 1..{g.n - 1}, got {d}")
    return _deviations(g, v, out_masks(g.n, v, d))


def _deviations(g: Digraph, v: int, masks: list[int]) -> Iterator[Digraph]:
    before, after = g.masks[: v - 1], g.masks[v:]
    for m in masks:
        yield Digraph._trusted(g.n, before + (m,) + after)


def enumerate_class(spec: GraphClass) -> Iterator[Digraph]:
    """Every graph of the class exactly once, vertex 1's adjacency varying slowest."""
    choices = [out_masks(spec.n, v, spec.max_out) for v in range(1, spec.n + 1)]
    for masks in itertools.product(*choices):
        yield Digraph._trusted(spec.n, masks)


def sample_class(spec: GraphClass, count: int, seed: int) -> Iterator[Digraph]:
    """Draw ``count`` graphs uniformly from the labeled class.

    Each draw picks, for v = 1..n in turn, one admissible out-neighborhood
    with ``random.Random(seed).randrange``. Independent uniform choices per
    vertex give the uniform distribution over the class.
    """
    rng = random.Random(seed)
    choices = [out_masks(spec.n, v, spec.max_out) for v in range(1, spec.n + 1)]
    for _ in range(count):
        yield Digraph._trusted(spec.n, tuple(c[rng.randrange(len(c))] for c in choices))


# -- text and JSON forms -----------------------------------------------------


def parse_text(text: str) -> Digraph:
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ParseError("expected header 'n <N>'", lineno)
            n = _parse_int(parts[1], lineno)
            if n < 1:
                raise ParseError(f"vertex count must be positive, got {n}", lineno)
            continue
        if len(parts) != 2:
            raise ParseError(f"expected '<u> <v>', got {raw.strip()!r}", lineno)
        u, v = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"edge ({u}, {v}) has an endpoint outside 1..{n}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        if (u, v) in seen:
            raise ParseError(f"duplicate edge ({u}, {v})", lineno)
        seen.add((u, v))
        edges.append((u, v))
    if n is None:
        raise ParseError("missing header 'n <N>'", 1)
    return Digraph.from_edges(n, edges)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"not an integer: {token!r}", lineno) from None


def format_text(g: Digraph) -> str:
    lines = [f"n {g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def to_json_obj(g: Digraph) -> dict:
    return {"n": g.n, "edges": [[u, v] for u, v in g.edges()]}


def from_json_obj(obj) -> Digraph:
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise GraphError("graph JSON must be an object with fields 'n' and 'edges'")
    edges = []
    for e in obj["edges"]:
        if not isinstance(e, list) or len(e) != 2:
            raise GraphError(f"edge must be a 2-element array, got {e!r}")
        edges.append((e[0], e[1]))
    return Digraph.from_edges(obj["n"], edges)


def parse_graph(text: str) -> Digraph:
    """Parse either the JSON form or the line-based text form."""
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        return from_json_obj(obj)
    return parse_text(text)
