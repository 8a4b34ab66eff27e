"""Graphs of graphs, substitution colimits, X-graphs, and bounded
enumeration of X-graphs up to labeled isomorphism.

A graph of graphs assigns a boundary-matched piece to each vertex of a
base graph (sticks go to sticks).  Its colimit performs substitution:
the union-find identifies each base edge copy with the matching piece
port, so base edges survive and piece inner structure is inserted at the
vertices.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .errors import BoundsTooLarge, InvalidGraphOfGraphs
from .etale import _UF, EtaleMorphism
from .graphs import (
    FeynmanGraph,
    canonical_form,
    canonical_labelings,
    sort_ids,
)

DEFAULT_MAX_SEARCH = 10 ** 7


def max_search_cap() -> int:
    return int(os.environ.get("FEYNGRAPH_MAX_SEARCH", DEFAULT_MAX_SEARCH))


@dataclass(frozen=True)
class XGraph:
    """A graph with ports bijectively labeled (edge -> label)."""
    graph: FeynmanGraph
    labeling: Mapping[Any, Any]

    def __post_init__(self):
        if set(self.labeling) != set(self.graph.ports):
            raise InvalidGraphOfGraphs("labeling must cover exactly the ports")
        if len(set(self.labeling.values())) != len(self.labeling):
            raise InvalidGraphOfGraphs("labeling must be injective")

    @property
    def labels(self) -> frozenset:
        return frozenset(self.labeling.values())

    def is_admissible(self) -> bool:
        return not self.graph.stick_components()

    def canonical_key(self) -> str:
        return canonical_form(self.graph, port_labels=dict(self.labeling)).certificate


class GraphOfGraphs:
    """Substitution rule: base graph + one piece per base vertex.

    pieces[v] = (piece_graph, boundary) where boundary maps each port of
    the piece to a half-edge of the base at v (bijectively).  Stick
    elements implicitly map to the stick.
    """

    def __init__(self, base: FeynmanGraph, pieces: Mapping[Any, tuple]):
        self.base = base
        self.pieces = dict(pieces)
        if set(self.pieces) != set(base.vertices):
            raise InvalidGraphOfGraphs("need exactly one piece per base vertex")
        for v in base.vertices:
            piece, boundary = self.pieces[v]
            halves = set(base.halves_at(v))
            if set(boundary) != set(piece.ports):
                raise InvalidGraphOfGraphs(f"boundary at {v!r} must cover the piece ports")
            if set(boundary.values()) != halves or len(boundary) != len(halves):
                raise InvalidGraphOfGraphs(f"boundary at {v!r} must biject onto H_v")
            if not piece.edges and not piece.vertices and halves:
                raise InvalidGraphOfGraphs("empty piece only allowed at an isolated vertex")

    @classmethod
    def identity(cls, base: FeynmanGraph) -> "GraphOfGraphs":
        """Each vertex maps to its own neighbourhood corolla."""
        from .etale import vertex_neighbourhood
        pieces = {}
        for v in base.vertices:
            emb = vertex_neighbourhood(base, v)
            c = emb.underlying.source
            boundary = {}
            for lab in c.ports:
                boundary[lab] = emb.underlying.half_map[("h", lab)]
            pieces[v] = (c, boundary)
        return cls(base, pieces)

    def is_nondegenerate(self) -> bool:
        return all(not piece.stick_components() for piece, _ in self.pieces.values())


@dataclass
class Substitution:
    colimit: FeynmanGraph
    edge_class: Mapping[Any, Any]     # base edge -> colimit edge
    piece_edge: Mapping[tuple, Any]   # (vertex, piece edge) -> colimit edge
    universal_maps: Mapping[Any, Any]  # base vertex -> EtaleMorphism piece -> colimit


def substitute(gog: GraphOfGraphs) -> Substitution:
    """Evaluate the substitution colimit.

    When the graph of graphs is nondegenerate with nonempty pieces, the
    colimit's edges are the base edges plus all piece inner edges, ports
    are the base ports identically, and the vertex set fibers over the
    base vertices.
    """
    base = gog.base
    uf = _UF()
    for e in base.edges:
        uf.add(("b", e))
    for v, (piece, _) in gog.pieces.items():
        for pe in piece.edges:
            uf.add(("p", v, pe))
    for v, (piece, boundary) in gog.pieces.items():
        for p_port, h in boundary.items():
            e = base.s[h]
            uf.union(("b", base.tau[e]), ("p", v, p_port))
            uf.union(("b", e), ("p", v, piece.tau[p_port]))
    cls = uf.classes()
    edge_of = {x: frozenset(cls[uf.find(x)]) for x in uf.parent}
    new_edges = set(edge_of.values())
    new_tau = {}
    for c in new_edges:
        imgs = set()
        for item in c:
            if item[0] == "b":
                imgs.add(edge_of[("b", base.tau[item[1]])])
            else:
                _, v, pe = item
                imgs.add(edge_of[("p", v, gog.pieces[v][0].tau[pe])])
        if len(imgs) != 1:
            raise InvalidGraphOfGraphs("piece boundaries are inconsistent with tau")
        new_tau[c] = imgs.pop()
    halves, s, t, verts = set(), {}, {}, set()
    for v, (piece, _) in gog.pieces.items():
        for h in piece.half_edges:
            hh = ("p", v, h)
            halves.add(hh)
            s[hh] = edge_of[("p", v, piece.s[h])]
            t[hh] = ("p", v, piece.t[h])
        verts.update(("p", v, w) for w in piece.vertices)
    colimit = FeynmanGraph(new_edges, new_tau, halves, s, t, verts)
    edge_class = {e: edge_of[("b", e)] for e in base.edges}
    piece_edge = {(v, pe): edge_of[("p", v, pe)]
                  for v, (piece, _) in gog.pieces.items() for pe in piece.edges}
    universal = {}
    for v, (piece, _) in gog.pieces.items():
        try:
            universal[v] = EtaleMorphism(
                piece, colimit,
                {pe: edge_of[("p", v, pe)] for pe in piece.edges},
                {h: ("p", v, h) for h in piece.half_edges},
                {w: ("p", v, w) for w in piece.vertices})
        except Exception:
            universal[v] = None  # degenerate collapse: no plain etale map
    return Substitution(colimit, edge_class, piece_edge, universal)


def substitute_xgraph(base_x: XGraph, gog: GraphOfGraphs) -> tuple:
    """Substitute and carry the port labeling across (ports are base ports)."""
    sub = compose_check(gog)
    labeling = {sub.edge_class[e]: lab for e, lab in base_x.labeling.items()}
    return XGraph(sub.colimit, labeling), sub


def compose_check(gog: GraphOfGraphs) -> Substitution:
    sub = substitute(gog)
    return sub


def check_nondegenerate(gog: GraphOfGraphs) -> bool:
    return gog.is_nondegenerate()


def compose_gogs(outer: GraphOfGraphs, sub: Substitution,
                 inner: GraphOfGraphs) -> GraphOfGraphs:
    """The composite graph of graphs: inner refines the colimit of outer.

    For each vertex v of outer.base, restrict inner to the piece at v
    (through the universal embedding) and substitute, giving the composite
    piece at v.  Substituting the composite equals substituting inner into
    outer's colimit (monad associativity).
    """
    if set(inner.pieces) != set(sub.colimit.vertices):
        raise InvalidGraphOfGraphs("inner must be based on the outer colimit")
    pieces = {}
    for v, (piece, boundary) in outer.pieces.items():
        inner_pieces = {}
        for w in piece.vertices:
            pg, pb = inner.pieces[("p", v, w)]
            # piece half-edges embed as ("p", v, h) in the colimit
            back = {}
            for p_port, h_col in pb.items():
                assert h_col[0] == "p" and h_col[1] == v
                back[p_port] = h_col[2]
            inner_pieces[w] = (pg, back)
        restricted = GraphOfGraphs(piece, inner_pieces)
        inner_sub = substitute(restricted)
        new_boundary = {}
        for p_port, h in boundary.items():
            # the port of the new piece is the class containing the old port
            new_boundary[inner_sub.edge_class[p_port]] = h
        pieces[v] = (inner_sub.colimit, new_boundary)
    return GraphOfGraphs(outer.base, pieces)


# -- enumeration ---------------------------------------------------------------

def _matchings(points: list):
    """All perfect matchings on an even list of points."""
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for i, p in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, p)] + m


def enumerate_x_graphs(labels, max_vertices: int, max_valency: int,
                       connected_only: bool = True, admissible_only: bool = True,
                       max_search: Optional[int] = None) -> list:
    """One canonical XGraph per labeled isomorphism class within bounds.

    Generates by vertex-valency multisets, then perfect matchings on the
    port set plus vertex stubs, deduplicating via canonical form.
    """
    labels = list(labels)
    cap = max_search if max_search is not None else max_search_cap()
    budget = [cap]
    found = {}
    for nv in range(max_vertices + 1):
        for valencies in itertools.combinations_with_replacement(
                range(0, max_valency + 1), nv):
            total = len(labels) + sum(valencies)
            if total % 2:
                continue
            points = [("x", x) for x in labels]
            for vi, d in enumerate(valencies):
                points += [("s", vi, j) for j in range(d)]
            for matching in _matchings(points):
                budget[0] -= 1
                if budget[0] < 0:
                    raise BoundsTooLarge(
                        f"enumeration exceeded FEYNGRAPH_MAX_SEARCH={cap}")
                g, labeling = _graph_from_matching(labels, valencies, matching)
                x = XGraph(g, labeling)
                if admissible_only and not x.is_admissible():
                    continue
                if connected_only and len(g.connected_components()) != 1:
                    continue
                key = x.canonical_key()
                if key not in found:
                    found[key] = x
    return [found[k] for k in sorted(found)]


def _graph_from_matching(labels, valencies, matching):
    edges = []
    tau = {}
    halves, s, t, verts = [], {}, {}, []
    for vi, d in enumerate(valencies):
        verts.append(("v", vi))
    for (a, b) in matching:
        edges += [a, b]
        tau[a], tau[b] = b, a
    for p in edges:
        if p[0] == "s":
            _, vi, j = p
            h = ("h", vi, j)
            halves.append(h)
            s[h] = p
            t[h] = ("v", vi)
    g = FeynmanGraph(edges, tau, halves, s, t, verts)
    labeling = {("x", x): x for x in labels}
    return g, labeling
