"""Compact metric graphs.

A metric graph is a finite set of vertices joined by edges of positive
length; every edge is identified with the interval [0, length] and points on
the graph are addressed as (edge id, arclength). Graphs are immutable after
construction, so derived structures (adjacency, vertex distance matrices)
are cached against the graph object itself.

Loops (u == v) and multiple edges between the same vertex pair are allowed
here; operations that require Euclidean edges reject them explicitly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    DanglingEndpointError,
    DisconnectedGraphError,
    GraphValidationError,
    NonPositiveLengthError,
    PointError,
)

__all__ = [
    "Edge",
    "PointOnGraph",
    "GraphClass",
    "MetricGraph",
    "build_graph",
    "classify",
    "one_sum",
    "canonical",
    "interval",
    "circle",
    "star",
    "figure_eight",
    "tadpole",
    "mesh",
    "subdivide_edge",
    "vertex_distance_matrix",
]


class Edge(NamedTuple):
    id: str
    u: int
    v: int
    length: float


class PointOnGraph(NamedTuple):
    """A location on the graph: arclength ``t`` in [0, length] along ``edge``."""

    edge: str
    t: float


@dataclass(frozen=True)
class GraphClass:
    """Structural flags of a metric graph (see :func:`classify`)."""

    euclidean_edges: bool
    tree: bool
    euclidean_cycle: bool
    has_loops: bool
    has_multi_edges: bool


@dataclass(frozen=True)
class MetricGraph:
    """Immutable, validated compact metric graph.

    Parameters
    ----------
    vertex_count : int
        Number of vertices, indexed 0 .. vertex_count - 1.
    edges : sequence of Edge
        Edges with unique ids, valid endpoint indices and positive lengths.
        Edge order is preserved and meaningful (meshes, covariance layouts).
    """

    vertex_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        if self.vertex_count < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if not self.edges:
            raise GraphValidationError("graph needs at least one edge")
        seen: set[str] = set()
        for e in self.edges:
            if e.id in seen:
                raise GraphValidationError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if not (0 <= e.u < self.vertex_count and 0 <= e.v < self.vertex_count):
                raise DanglingEndpointError(
                    f"edge {e.id!r} endpoint outside [0, {self.vertex_count})"
                )
            if not (e.length > 0.0 and math.isfinite(e.length)):
                raise NonPositiveLengthError(
                    f"edge {e.id!r} has non-positive length {e.length}"
                )
        self._check_connected()

    def _check_connected(self) -> None:
        reached = {0}
        frontier = [0]
        adj: dict[int, list[int]] = {}
        for e in self.edges:
            adj.setdefault(e.u, []).append(e.v)
            adj.setdefault(e.v, []).append(e.u)
        while frontier:
            w = frontier.pop()
            for nb in adj.get(w, ()):
                if nb not in reached:
                    reached.add(nb)
                    frontier.append(nb)
        if len(reached) != self.vertex_count:
            raise DisconnectedGraphError(
                f"graph is disconnected: reached {len(reached)} of "
                f"{self.vertex_count} vertices"
            )
        for v in range(self.vertex_count):
            if v not in adj:
                raise DisconnectedGraphError(f"vertex {v} has degree 0")

    # -- basic queries ----------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_length(self) -> float:
        return float(sum(e.length for e in self.edges))

    def edge_index(self, edge_id: str) -> int:
        try:
            return _edge_index_map(self)[edge_id]
        except KeyError:
            raise PointError(f"unknown edge id {edge_id!r}") from None

    def edge(self, edge_id: str) -> Edge:
        return self.edges[self.edge_index(edge_id)]

    def degree(self, v: int) -> int:
        """Vertex degree; a loop contributes 2."""
        return sum((e.u == v) + (e.v == v) for e in self.edges)

    def incident(self, v: int) -> tuple[tuple[int, int], ...]:
        """Incident (edge index, end) pairs; end is 0 for t=0, 1 for t=length."""
        out = []
        for j, e in enumerate(self.edges):
            if e.u == v:
                out.append((j, 0))
            if e.v == v:
                out.append((j, 1))
        return tuple(out)

    # -- points -----------------------------------------------------------

    def point(self, edge_id: str, t: float) -> PointOnGraph:
        """Validated point; ``t`` may exceed [0, length] by a 1e-12 slack only."""
        e = self.edge(edge_id)
        slack = 1e-12 * max(1.0, e.length)
        if not (-slack <= t <= e.length + slack):
            raise PointError(
                f"arclength {t} outside [0, {e.length}] on edge {edge_id!r}"
            )
        return PointOnGraph(edge_id, min(max(t, 0.0), e.length))

    def vertex_of(self, p: PointOnGraph) -> int | None:
        """Vertex index if ``p`` sits exactly at an edge endpoint, else None."""
        e = self.edge(p.edge)
        if p.t == 0.0:
            return e.u
        if p.t == e.length:
            return e.v
        return None

    def vertex_point(self, v: int) -> PointOnGraph:
        """Canonical point address of vertex ``v`` (first incident edge end)."""
        if not (0 <= v < self.vertex_count):
            raise PointError(f"vertex {v} outside [0, {self.vertex_count})")
        j, end = self.incident(v)[0]
        e = self.edges[j]
        return PointOnGraph(e.id, e.length if end else 0.0)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "length": e.length}
                for e in self.edges
            ],
        }

    @staticmethod
    def from_json(doc: Mapping | str) -> "MetricGraph":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return build_graph(doc)


@lru_cache(maxsize=None)
def _edge_index_map(g: MetricGraph) -> Mapping[str, int]:
    return {e.id: j for j, e in enumerate(g.edges)}


def build_graph(spec: Mapping) -> MetricGraph:
    """Build a validated graph from a JSON-shaped description.

    Expected shape: ``{"vertices": N, "edges": [{"id", "u", "v", "length"}]}``.
    Edge ids default to ``e<position>`` when omitted.
    """
    try:
        nv = int(spec["vertices"])
        raw = spec["edges"]
    except (KeyError, TypeError) as exc:
        raise GraphValidationError(f"malformed graph description: {exc}") from None
    edges = []
    for j, ed in enumerate(raw):
        edges.append(
            Edge(
                str(ed.get("id", f"e{j}")),
                int(ed["u"]),
                int(ed["v"]),
                float(ed["length"]),
            )
        )
    return MetricGraph(nv, tuple(edges))


# -- vertex distances (used by classification and the metrics module) ------


@lru_cache(maxsize=None)
def vertex_distance_matrix(g: MetricGraph) -> np.ndarray:
    """All-pairs geodesic distances between vertices (read-only array).

    Parallel edges collapse to their minimum length; loops never shorten a
    vertex-to-vertex path.
    """
    n = g.vertex_count
    w = np.full((n, n), np.inf)
    for e in g.edges:
        if e.u != e.v:
            w[e.u, e.v] = min(w[e.u, e.v], e.length)
            w[e.v, e.u] = w[e.u, e.v]
    w[~np.isfinite(w)] = 0.0
    dist = shortest_path(csr_matrix(w), method="D", directed=False)
    np.fill_diagonal(dist, 0.0)
    dist.flags.writeable = False
    return dist


def classify(g: MetricGraph) -> GraphClass:
    """Compute structural flags.

    ``euclidean_edges`` requires: no loops, no multi-edges, and for every
    edge the geodesic distance between its endpoints equals the edge length
    (distance consistency). ``euclidean_cycle`` additionally requires the
    graph to be a single cycle.
    """
    has_loops = any(e.u == e.v for e in g.edges)
    pairs = [frozenset((e.u, e.v)) for e in g.edges if e.u != e.v]
    loop_vs = [e.u for e in g.edges if e.u == e.v]
    has_multi = len(pairs) != len(set(pairs)) or len(loop_vs) != len(set(loop_vs))
    tree = (not has_loops) and g.edge_count == g.vertex_count - 1

    euclidean = not has_loops and not has_multi
    if euclidean:
        dist = vertex_distance_matrix(g)
        for e in g.edges:
            tol = 1e-12 * max(1.0, e.length)
            if abs(dist[e.u, e.v] - e.length) > tol:
                euclidean = False
                break

    cycle = (
        euclidean
        and g.edge_count == g.vertex_count
        and all(g.degree(v) == 2 for v in range(g.vertex_count))
    )
    return GraphClass(
        euclidean_edges=euclidean,
        tree=tree,
        euclidean_cycle=cycle,
        has_loops=has_loops,
        has_multi_edges=has_multi,
    )


# -- composition ------------------------------------------------------------


def one_sum(
    parts: Sequence[MetricGraph],
    joins: Sequence[tuple[int, int]],
) -> MetricGraph:
    """Glue graphs at single shared vertices (iterated 1-sum).

    ``joins[i] = (w, x)`` identifies vertex ``w`` of the sum of
    ``parts[:i+1]`` with vertex ``x`` of ``parts[i+1]``. Vertex indices of
    the accumulated graph are preserved; each subsequent part's remaining
    vertices are appended in order. Geodesic distances inside every part are
    unchanged, and cross-part distances go through the join points.

    Edge ids are kept when globally unique, otherwise every id is prefixed
    with ``p<part index>.``.
    """
    if not parts:
        raise GraphValidationError("one_sum needs at least one part")
    if len(joins) != len(parts) - 1:
        raise GraphValidationError(
            f"expected {len(parts) - 1} joins for {len(parts)} parts, "
            f"got {len(joins)}"
        )
    all_ids = [e.id for p in parts for e in p.edges]
    rename = len(all_ids) != len(set(all_ids))

    def eid(i: int, e: Edge) -> str:
        return f"p{i}.{e.id}" if rename else e.id

    nv = parts[0].vertex_count
    edges = [Edge(eid(0, e), e.u, e.v, e.length) for e in parts[0].edges]
    for i, part in enumerate(parts[1:], start=1):
        w, x = joins[i - 1]
        if not (0 <= w < nv):
            raise GraphValidationError(f"join {i - 1}: vertex {w} missing in sum")
        if not (0 <= x < part.vertex_count):
            raise GraphValidationError(f"join {i - 1}: vertex {x} missing in part {i}")
        remap = {}
        nxt = nv
        for v in range(part.vertex_count):
            if v == x:
                remap[v] = w
            else:
                remap[v] = nxt
                nxt += 1
        nv = nxt
        edges.extend(
            Edge(eid(i, e), remap[e.u], remap[e.v], e.length) for e in part.edges
        )
    return MetricGraph(nv, tuple(edges))


# -- canonical generators ----------------------------------------------------


def interval(length: float = 1.0) -> MetricGraph:
    """Single edge between vertices 0 and 1."""
    return MetricGraph(2, (Edge("e0", 0, 1, float(length)),))


def circle(length: float = 1.0, n: int = 4) -> MetricGraph:
    """Cycle of total length ``length`` with ``n`` equally spaced vertices.

    n = 1 gives a loop edge, n = 2 a double edge; n >= 3 gives a graph with
    Euclidean edges (a Euclidean cycle).
    """
    if n < 1:
        raise GraphValidationError("circle needs n >= 1 vertices")
    if not length > 0:
        raise NonPositiveLengthError(f"non-positive circle length {length}")
    piece = float(length) / n
    edges = tuple(Edge(f"e{j}", j, (j + 1) % n, piece) for j in range(n))
    return MetricGraph(n, edges)


def star(lengths: Iterable[float]) -> MetricGraph:
    """Star with leaves 0..k-1 and center k; edge j runs leaf -> center."""
    ls = [float(x) for x in lengths]
    if not ls:
        raise GraphValidationError("star needs at least one edge")
    k = len(ls)
    edges = tuple(Edge(f"e{j}", j, k, ls[j]) for j in range(k))
    return MetricGraph(k + 1, edges)


def figure_eight(
    length1: float, length2: float, n1: int = 4, n2: int = 4
) -> MetricGraph:
    """1-sum of two subdivided circles sharing one vertex (vertex 0).

    With the default subdivisions both cycles have Euclidean edges, so the
    result is a graph with Euclidean edges whose two cycles have lengths
    ``length1`` and ``length2``.
    """
    return one_sum([circle(length1, n1), circle(length2, n2)], [(0, 0)])


def tadpole(
    cycle_length: float, edge_length: float, n: int = 4
) -> MetricGraph:
    """Subdivided circle with a pendant edge attached at vertex 0."""
    return one_sum([circle(cycle_length, n), interval(edge_length)], [(0, 0)])


_CANONICAL_KINDS = frozenset(
    {"interval", "circle", "star", "figure-eight", "figure_eight", "tadpole"}
)


def canonical(spec: str) -> MetricGraph:
    """Parse a generator spec like ``"star:1,1,1"`` or ``"circle:2,4"``.

    Forms: ``interval:L`` | ``circle:L,N`` | ``star:L1,L2,...`` |
    ``figure-eight:L1,L2[,N1,N2]`` | ``tadpole:Lcycle,Ledge[,N]``.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind not in _CANONICAL_KINDS:
        raise GraphValidationError(f"unknown canonical graph kind {kind!r}")
    args = [s for s in rest.split(",") if s.strip()]
    try:
        if kind == "star":
            return star([float(a) for a in args])
        if kind == "interval":
            return interval(float(args[0])) if args else interval()
        if kind == "circle":
            return circle(float(args[0]), int(args[1]) if len(args) > 1 else 4)
        if kind in ("figure-eight", "figure_eight"):
            ns = [int(a) for a in args[2:4]] or [4, 4]
            return figure_eight(float(args[0]), float(args[1]), *ns)
        return tadpole(
            float(args[0]), float(args[1]), int(args[2]) if len(args) > 2 else 4
        )
    except (IndexError, ValueError) as exc:
        raise GraphValidationError(f"bad canonical spec {spec!r}: {exc}") from None


# -- meshing and subdivision -------------------------------------------------


def mesh(g: MetricGraph, h: float) -> list[PointOnGraph]:
    """Points covering the graph at spacing <= h, vertices deduplicated.

    Every edge contributes nodes at t = length * k / ceil(length / h); an
    endpoint is emitted only the first time its vertex appears (edge order,
    then t ascending), so each vertex shows up exactly once.
    """
    if not h > 0:
        raise PointError(f"mesh spacing must be positive, got {h}")
    pts: list[PointOnGraph] = []
    seen: set[int] = set()
    for e in g.edges:
        nel = max(1, math.ceil(e.length / h - 1e-12))
        for k in range(nel + 1):
            if k == 0 or k == nel:
                v = e.u if k == 0 else e.v
                if v in seen:
                    continue
                seen.add(v)
            pts.append(PointOnGraph(e.id, e.length * (k / nel)))
    return pts


def subdivide_edge(g: MetricGraph, edge_id: str, parts: int) -> MetricGraph:
    """Split one edge into ``parts`` pieces with new degree-2 vertices.

    New vertices are appended after the existing ones, so original vertex
    indices are preserved; the pieces are named ``<edge_id>.<k>``.
    """
    if parts < 2:
        raise GraphValidationError("subdivision needs parts >= 2")
    j = g.edge_index(edge_id)
    old = g.edges[j]
    nv = g.vertex_count
    chain = [old.u] + list(range(nv, nv + parts - 1)) + [old.v]
    pieces = tuple(
        Edge(f"{edge_id}.{k}", chain[k], chain[k + 1], old.length / parts)
        for k in range(parts)
    )
    edges = g.edges[:j] + pieces + g.edges[j + 1 :]
    return MetricGraph(nv + parts - 1, edges)
