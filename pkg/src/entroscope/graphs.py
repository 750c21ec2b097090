"""Edge-labelled directed graphs, finite or lazily generated.

A graph is an alphabet, a vertex-expansion function and a nonempty list of
root vertices.  Infinite graphs never enumerate their vertex set: every
algorithm in this package works on finite forward balls ("windows")
materialized on demand, under a configurable vertex budget.

Structural predicates (determinism, uniform connectedness) are checked on
windows and their results are certificates about the window only, never
global claims about an infinite graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple, Optional

Vertex = Any

DEFAULT_BUDGET = 10**6


class ExpansionBudgetExceeded(RuntimeError):
    """A traversal grew past the configured vertex budget."""


class GraphFormatError(ValueError):
    """Malformed graph description (JSON document or edge list)."""


class Edge(NamedTuple):
    source: Vertex
    label: str
    target: Vertex


def vertex_key(v: Vertex) -> str:
    """Canonical text form of a vertex id.

    Stable across runs and recursive on tuples, so pair vertices of product
    graphs render as ``(v,s)``.  Used for all deterministic orderings and
    for report output.
    """
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "(" + ",".join(vertex_key(c) for c in v) + ")"
    return str(v)


def edge_sort_key(e: Edge):
    return (e.label, vertex_key(e.target))


def label_word(path: Iterable[Edge]) -> tuple[str, ...]:
    """The word read along a path (empty path reads the empty word)."""
    return tuple(e.label for e in path)


def check_path(path: Iterable[Edge]) -> bool:
    """True iff consecutive edges chain (e_i.target == e_{i+1}.source)."""
    prev = None
    for e in path:
        if prev is not None and prev.target != e.source:
            return False
        prev = e
    return True


@dataclass(frozen=True)
class Declared:
    """Constants known to hold globally for a built-in graph family.

    ``conn_k``: uniform-connectedness constant (every edge has a return
    path of length <= conn_k).  ``rho``: spectral radius of the uniform
    chain on the graph.  ``homogeneous``: the graph has a vertex-transitive
    group of label-preserving automorphisms, so window-local denseness
    measurements made at the root extend globally.
    """

    conn_k: Optional[int] = None
    rho: Optional[float] = None
    homogeneous: bool = False


class LabelledGraph:
    """Immutable edge-labelled graph given by an expansion function.

    ``expand(v)`` must return every out-edge of ``v``, each with
    ``source == v``, and must be pure: repeated calls yield the same edge
    set.  ``out_edges`` memoizes, validates and sorts the result (by label,
    then canonical target form) so all downstream traversals and counts are
    reproducible regardless of evaluation order.
    """

    def __init__(
        self,
        alphabet: Iterable[str],
        expand: Callable[[Vertex], Iterable[Edge]],
        roots: Iterable[Vertex],
        name: str = "",
        vertex_list: Optional[Iterable[Vertex]] = None,
        declared: Optional[Declared] = None,
    ):
        self.alphabet = tuple(alphabet)
        if not self.alphabet:
            raise GraphFormatError("alphabet must be nonempty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise GraphFormatError("alphabet contains duplicate symbols")
        self.expand = expand
        self.roots = tuple(roots)
        if not self.roots:
            raise GraphFormatError("graph needs at least one root vertex")
        self.name = name
        self.vertex_list = tuple(vertex_list) if vertex_list is not None else None
        self.declared = declared or Declared()
        self._alpha_set = frozenset(self.alphabet)
        self._cache: dict = {}

    @property
    def is_finite(self) -> bool:
        return self.vertex_list is not None

    def out_edges(self, v: Vertex) -> tuple[Edge, ...]:
        cached = self._cache.get(v)
        if cached is not None:
            return cached
        edges = []
        for e in self.expand(v):
            if not isinstance(e, Edge):
                e = Edge(*e)
            if e.source != v:
                raise GraphFormatError(
                    f"expand({vertex_key(v)}) returned edge with source {vertex_key(e.source)}"
                )
            if e.label not in self._alpha_set:
                raise GraphFormatError(f"edge label {e.label!r} not in alphabet")
            edges.append(e)
        edges.sort(key=edge_sort_key)
        for a, b in zip(edges, edges[1:]):
            if a == b:
                raise GraphFormatError(
                    f"duplicate edge {vertex_key(a.source)} -{a.label}-> {vertex_key(a.target)}"
                )
        result = tuple(edges)
        self._cache[v] = result
        return result


@dataclass(frozen=True)
class Window:
    """Finite forward ball of an (possibly infinite) graph.

    ``vertices`` are exactly those at forward distance <= radius from the
    center; ``edges`` have both endpoints inside, ``boundary`` edges leave
    the window (their sources necessarily sit on the outer shell).
    """

    center: Vertex
    radius: int
    vertices: frozenset
    distances: dict = field(compare=False)
    edges: tuple[Edge, ...] = ()
    boundary: tuple[Edge, ...] = ()

    def inner(self, margin: int = 1) -> frozenset:
        """Vertices at forward distance <= radius - margin from the center."""
        cut = self.radius - margin
        return frozenset(v for v, d in self.distances.items() if d <= cut)

    def sorted_vertices(self) -> list:
        return sorted(self.vertices, key=lambda v: (self.distances[v], vertex_key(v)))


def forward_ball(
    g: LabelledGraph, x: Vertex, radius: int, budget: int = DEFAULT_BUDGET
) -> Window:
    """Materialize the forward ball of the given radius around ``x``.

    Raises ExpansionBudgetExceeded once more than ``budget`` vertices have
    been discovered, signalling that the ball is too large for desk-scale
    inspection.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    distances = {x: 0}
    frontier = [x]
    for d in range(1, radius + 1):
        nxt = []
        for v in sorted(frontier, key=vertex_key):
            for e in g.out_edges(v):
                if e.target not in distances:
                    distances[e.target] = d
                    nxt.append(e.target)
                    if len(distances) > budget:
                        raise ExpansionBudgetExceeded(
                            f"forward ball around {vertex_key(x)} exceeded {budget} vertices"
                        )
        frontier = nxt
        if not frontier:
            break
    inside, boundary = [], []
    for v in sorted(distances, key=vertex_key):
        for e in g.out_edges(v):
            if e.target in distances:
                inside.append(e)
            else:
                boundary.append(e)
    return Window(
        center=x,
        radius=radius,
        vertices=frozenset(distances),
        distances=distances,
        edges=tuple(inside),
        boundary=tuple(boundary),
    )


def full_window(g: LabelledGraph, budget: int = DEFAULT_BUDGET) -> Window:
    """The whole part of the graph reachable from the first root.

    Only terminates for graphs whose reachable part is finite; the budget
    guards against accidentally calling this on an infinite family.
    """
    x = g.roots[0]
    distances = {x: 0}
    frontier = [x]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in sorted(frontier, key=vertex_key):
            for e in g.out_edges(v):
                if e.target not in distances:
                    distances[e.target] = d
                    nxt.append(e.target)
                    if len(distances) > budget:
                        raise ExpansionBudgetExceeded(
                            f"reachable closure from {vertex_key(x)} exceeded {budget} vertices"
                        )
        frontier = nxt
    edges = []
    for v in sorted(distances, key=vertex_key):
        edges.extend(g.out_edges(v))
    return Window(
        center=x,
        radius=max(distances.values(), default=0),
        vertices=frozenset(distances),
        distances=distances,
        edges=tuple(edges),
        boundary=(),
    )


def forward_distance(
    g: LabelledGraph,
    x: Vertex,
    y: Vertex,
    cap: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[int]:
    """Minimal path length from x to y if <= cap, else None."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if x == y:
        return 0
    seen = {x}
    frontier = [x]
    for d in range(1, cap + 1):
        nxt = []
        for v in frontier:
            for e in g.out_edges(v):
                if e.target == y:
                    return d
                if e.target not in seen:
                    seen.add(e.target)
                    nxt.append(e.target)
                    if len(seen) > budget:
                        raise ExpansionBudgetExceeded(
                            f"distance search from {vertex_key(x)} exceeded {budget} vertices"
                        )
        frontier = nxt
        if not frontier:
            break
    return None


def check_deterministic(g: LabelledGraph, w: Window) -> list[tuple[Vertex, str]]:
    """(vertex, label) pairs in the window with two or more outgoing edges
    sharing that label.  Empty list means the window is deterministic."""
    violations = []
    for v in w.sorted_vertices():
        seen: dict[str, int] = {}
        for e in g.out_edges(v):
            seen[e.label] = seen.get(e.label, 0) + 1
        for a in g.alphabet:
            if seen.get(a, 0) >= 2:
                violations.append((v, a))
    return violations


def check_fully_deterministic(
    g: LabelledGraph, w: Window
) -> list[tuple[Vertex, tuple[str, ...]]]:
    """(vertex, missing labels) for window vertices with out-degree < |alphabet|.

    Assumes the window already passed check_deterministic; an empty result
    means every window vertex has exactly one out-edge per symbol.
    """
    missing = []
    for v in w.sorted_vertices():
        present = {e.label for e in g.out_edges(v)}
        gap = tuple(a for a in g.alphabet if a not in present)
        if gap:
            missing.append((v, gap))
    return missing


@dataclass(frozen=True)
class UniformConnectednessResult:
    conn_k: int
    witnesses: dict = field(compare=False)  # edge -> return path (tuple of edges)
    failures: tuple[Edge, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def _shortest_path(g, x, y, cap, budget):
    """Shortest path x -> y of length <= cap as an edge tuple, else None.

    A length-0 (empty) path is returned when x == y.
    """
    if x == y:
        return ()
    parent: dict[Vertex, Edge] = {x: None}  # type: ignore[dict-item]
    frontier = [x]
    for _ in range(cap):
        nxt = []
        for v in frontier:
            for e in g.out_edges(v):
                if e.target not in parent:
                    parent[e.target] = e
                    if e.target == y:
                        path = []
                        t = y
                        while t != x:
                            edge = parent[t]
                            path.append(edge)
                            t = edge.source
                        return tuple(reversed(path))
                    nxt.append(e.target)
                    if len(parent) > budget:
                        raise ExpansionBudgetExceeded(
                            "return-path search exceeded budget"
                        )
        frontier = nxt
        if not frontier:
            break
    return None


def check_uniform_connectedness(
    g: LabelledGraph, w: Window, K: int, budget: int = DEFAULT_BUDGET
) -> UniformConnectednessResult:
    """For every edge x -> y with both ends in the window, search for a
    return path y -> x of length <= K.

    The search expands forward balls of radius K from each edge target and
    may leave the window.  The result certifies the window only.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    witnesses = {}
    failures = []
    for e in w.edges:
        back = _shortest_path(g, e.target, e.source, K, budget)
        if back is None:
            failures.append(e)
        else:
            witnesses[e] = back
    return UniformConnectednessResult(
        conn_k=K, witnesses=witnesses, failures=tuple(failures)
    )


def uniform_connectedness_constant(
    g: LabelledGraph, w: Window, K_max: int, budget: int = DEFAULT_BUDGET
) -> Optional[int]:
    """Smallest K <= K_max certifying uniform connectedness on the window,
    or None.  Length-0 returns (loops) count, matching the definition."""
    worst = 0
    for e in w.edges:
        back = _shortest_path(g, e.target, e.source, K_max, budget)
        if back is None:
            return None
        worst = max(worst, len(back))
    return max(worst, 1)


def explicit_graph(
    alphabet: Iterable[str],
    edges: Iterable[tuple],
    roots: Iterable[Vertex],
    vertices: Optional[Iterable[Vertex]] = None,
    name: str = "",
    declared: Optional[Declared] = None,
) -> LabelledGraph:
    """Finite graph from an explicit edge list of (source, label, target)."""
    triples = [Edge(*t) for t in edges]
    adj: dict[Vertex, list[Edge]] = {}
    seen = set()
    for e in triples:
        if e in seen:
            raise GraphFormatError(
                f"duplicate edge {vertex_key(e.source)} -{e.label}-> {vertex_key(e.target)}"
            )
        seen.add(e)
        adj.setdefault(e.source, []).append(e)
    if vertices is None:
        vset = set(adj)
        for e in triples:
            vset.add(e.target)
        vset.update(roots)
        vertex_list = sorted(vset, key=vertex_key)
    else:
        vertex_list = list(vertices)
        vset = set(vertex_list)
        for e in triples:
            if e.source not in vset or e.target not in vset:
                raise GraphFormatError(f"edge {e} references unknown vertex")
        for r in roots:
            if r not in vset:
                raise GraphFormatError(f"root {vertex_key(r)} not in vertex list")
    return LabelledGraph(
        alphabet=alphabet,
        expand=lambda v: adj.get(v, ()),
        roots=roots,
        name=name,
        vertex_list=vertex_list,
        declared=declared,
    )


@dataclass(frozen=True)
class GraphDocument:
    graph: LabelledGraph
    forbidden: tuple[str, ...] = ()


def parse_graph_document(doc: dict, name: str = "") -> GraphDocument:
    """Parse the JSON graph schema.

    Expected keys: "alphabet" (list of symbols), "vertices" (list of ids),
    "edges" (list of [source, label, target]), "roots" (list of ids), and
    optionally "forbidden" (list of word strings).
    """
    try:
        alphabet = list(doc["alphabet"])
        vertices = list(doc["vertices"])
        raw_edges = list(doc["edges"])
        roots = list(doc["roots"])
    except (KeyError, TypeError) as exc:
        raise GraphFormatError(f"graph document missing field: {exc}") from exc
    edges = []
    for t in raw_edges:
        if len(t) != 3:
            raise GraphFormatError(f"edge entry {t!r} is not a [source, label, target] triple")
        edges.append(Edge(t[0], t[1], t[2]))
    for e in edges:
        if e.label not in alphabet:
            raise GraphFormatError(f"edge label {e.label!r} not in alphabet")
    g = explicit_graph(alphabet, edges, roots, vertices=vertices, name=name)
    forbidden = tuple(doc.get("forbidden", ()))
    return GraphDocument(graph=g, forbidden=forbidden)


def load_graph_json(path) -> GraphDocument:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_graph_document(doc, name=str(path))
