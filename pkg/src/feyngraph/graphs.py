"""Feynman graphs: the diagram E <-> E <- H -> V with a fixed-point-free
edge involution.

A graph is stored as three id-sets (edges, half_edges, vertices) and three
maps: s (half-edge to edge, injective), t (half-edge to vertex), tau (edge
involution without fixed points).  Ports are the edges outside the image of
s; they form the boundary.  Everything downstream (gluing, substitution,
free monads) is built on this one class.

Ids are opaque hashables internally (strings in files; tuples appear as
tags after disjoint unions and quotients).  Canonical labeling maps them to
dense integers deterministically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from .errors import (
    BadParameter,
    DanglingId,
    FixedPointInTau,
    NonInjectiveS,
    TauNotInvolutive,
    UnknownEdge,
    UnknownVertex,
)

Id = Any  # hashable opaque id


def idkey(x: Id) -> tuple:
    """Deterministic sort key for heterogeneous ids."""
    if isinstance(x, tuple):
        return (1, tuple(idkey(y) for y in x))
    return (0, type(x).__name__, repr(x))


def sort_ids(ids: Iterable[Id]) -> list:
    return sorted(ids, key=idkey)


class FeynmanGraph:
    """Immutable Feynman graph.  Construction validates all invariants."""

    __slots__ = ("edges", "half_edges", "vertices", "s", "t", "tau",
                 "_s_inv", "_halves_at", "_ports")

    def __init__(self, edges: Iterable[Id], tau: Mapping[Id, Id],
                 half_edges: Iterable[Id] = (), s: Optional[Mapping[Id, Id]] = None,
                 t: Optional[Mapping[Id, Id]] = None, vertices: Iterable[Id] = ()):
        self.edges = frozenset(edges)
        self.half_edges = frozenset(half_edges)
        self.vertices = frozenset(vertices)
        self.s = dict(s or {})
        self.t = dict(t or {})
        self.tau = dict(tau)
        self._validate()
        self._s_inv = {e: h for h, e in self.s.items()}
        halves_at: dict = {v: [] for v in self.vertices}
        for h in sort_ids(self.half_edges):
            halves_at[self.t[h]].append(h)
        self._halves_at = halves_at
        self._ports = frozenset(self.edges - set(self._s_inv))

    def _validate(self) -> None:
        if set(self.tau) != self.edges:
            raise DanglingId("tau must be defined on exactly the edge set")
        for e, f in self.tau.items():
            if f not in self.edges:
                raise DanglingId(f"tau({e!r}) = {f!r} is not an edge")
            if f == e:
                raise FixedPointInTau(f"tau fixes edge {e!r}")
            if self.tau.get(f) != e:
                raise TauNotInvolutive(f"tau(tau({e!r})) != {e!r}")
        if set(self.s) != self.half_edges or set(self.t) != self.half_edges:
            raise DanglingId("s and t must be defined on exactly the half-edge set")
        seen: dict = {}
        for h in self.half_edges:
            e = self.s[h]
            if e not in self.edges:
                raise DanglingId(f"s({h!r}) = {e!r} is not an edge")
            if e in seen:
                raise NonInjectiveS(f"s({h!r}) = s({seen[e]!r}) = {e!r}")
            seen[e] = h
            if self.t[h] not in self.vertices:
                raise DanglingId(f"t({h!r}) = {self.t[h]!r} is not a vertex")

    # -- structural queries -------------------------------------------------

    @property
    def ports(self) -> frozenset:
        """E0 = edges outside the image of s."""
        return self._ports

    def inner_edges(self) -> frozenset:
        """Maximal tau-closed subset of the image of s."""
        im = self.edges - self._ports
        return frozenset(e for e in im if self.tau[e] in im)

    def orbits(self) -> list:
        """tau-orbits as sorted (e, tau e) pairs, deterministic order."""
        out = []
        seen = set()
        for e in sort_ids(self.edges):
            if e not in seen:
                f = self.tau[e]
                seen.update((e, f))
                out.append((e, f))
        return out

    def halves_at(self, v: Id) -> list:
        if v not in self.vertices:
            raise UnknownVertex(repr(v))
        return list(self._halves_at[v])

    def edges_at(self, v: Id) -> list:
        """E_v: edges incident to v, in half-edge order."""
        return [self.s[h] for h in self.halves_at(v)]

    def valency(self, v: Id) -> int:
        return len(self.halves_at(v))

    def vertex_of_edge(self, e: Id) -> Optional[Id]:
        """The vertex an edge is attached to, or None for a port."""
        if e not in self.edges:
            raise UnknownEdge(repr(e))
        h = self._s_inv.get(e)
        return None if h is None else self.t[h]

    def half_of_edge(self, e: Id) -> Optional[Id]:
        return self._s_inv.get(e)

    def is_stick_component_edge(self, e: Id) -> bool:
        """True iff the orbit {e, tau e} is a stick component (both ports)."""
        return e in self._ports and self.tau[e] in self._ports

    def stick_components(self) -> list:
        return [(e, f) for (e, f) in self.orbits()
                if e in self._ports and f in self._ports]

    def connected_components(self):
        """Partition into connected subgraphs.

        Returns a list of (subgraph, inclusion) where inclusion is a dict
        with identity 'edge_map', 'half_map', 'vertex_map' into self.
        """
        parent: dict = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        items = [("e", e) for e in self.edges] + [("v", v) for v in self.vertices]
        for it in items:
            parent[it] = it
        for e in self.edges:
            union(("e", e), ("e", self.tau[e]))
        for h in self.half_edges:
            union(("e", self.s[h]), ("v", self.t[h]))
        groups: dict = {}
        for it in items:
            groups.setdefault(find(it), []).append(it)
        comps = []
        for root in sorted(groups, key=lambda r: idkey(min((i[1] for i in groups[r]), key=idkey))):
            es = {i for k, i in groups[root] if k == "e"}
            vs = {i for k, i in groups[root] if k == "v"}
            hs = {h for h in self.half_edges if self.s[h] in es}
            sub = FeynmanGraph(es, {e: self.tau[e] for e in es}, hs,
                               {h: self.s[h] for h in hs},
                               {h: self.t[h] for h in hs}, vs)
            inc = {"edge_map": {e: e for e in es},
                   "half_map": {h: h for h in hs},
                   "vertex_map": {v: v for v in vs}}
            comps.append((sub, inc))
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) == 1

    # -- builders ------------------------------------------------------------

    def relabel(self, edge_map: Mapping[Id, Id], half_map: Mapping[Id, Id],
                vertex_map: Mapping[Id, Id]) -> "FeynmanGraph":
        return FeynmanGraph(
            [edge_map[e] for e in self.edges],
            {edge_map[e]: edge_map[f] for e, f in self.tau.items()},
            [half_map[h] for h in self.half_edges],
            {half_map[h]: edge_map[e] for h, e in self.s.items()},
            {half_map[h]: vertex_map[v] for h, v in self.t.items()},
            [vertex_map[v] for v in self.vertices])

    def tagged(self, tag) -> "FeynmanGraph":
        return self.relabel({e: (tag, e) for e in self.edges},
                            {h: (tag, h) for h in self.half_edges},
                            {v: (tag, v) for v in self.vertices})

    def __repr__(self) -> str:
        return (f"FeynmanGraph(|E|={len(self.edges)}, |H|={len(self.half_edges)}, "
                f"|V|={len(self.vertices)}, ports={len(self.ports)})")


# -- named constructors -------------------------------------------------------

def empty_graph() -> FeynmanGraph:
    return FeynmanGraph((), {})


def stick() -> FeynmanGraph:
    return FeynmanGraph(["1", "2"], {"1": "2", "2": "1"})


def corolla(labels: Sequence[Id]) -> FeynmanGraph:
    """X-corolla: ports are the labels, each paired with an inner copy at
    the single vertex."""
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise BadParameter("corolla labels must be distinct")
    edges = list(labels) + [("in", x) for x in labels]
    tau = {}
    for x in labels:
        tau[x] = ("in", x)
        tau[("in", x)] = x
    halves = [("h", x) for x in labels]
    s = {("h", x): ("in", x) for x in labels}
    t = {("h", x): "*" for x in labels}
    return FeynmanGraph(edges, tau, halves, s, t, ["*"])


def isolated_vertex() -> FeynmanGraph:
    """C_0: one vertex, nothing else."""
    return FeynmanGraph((), {}, (), {}, {}, ["*"])


def line(k: int) -> FeynmanGraph:
    """L^k: 2k+2 edges l0..l(2k+1), tau(l_{2i}) = l_{2i+1}, k bivalent
    vertices with E_{v_i} = {l_{2i-1}, l_{2i}}; L^0 is the stick."""
    if k < 0:
        raise BadParameter("line(k) needs k >= 0")
    edges = [("l", i) for i in range(2 * k + 2)]
    tau = {}
    for i in range(k + 1):
        a, b = ("l", 2 * i), ("l", 2 * i + 1)
        tau[a], tau[b] = b, a
    halves, s, t, verts = [], {}, {}, []
    for i in range(1, k + 1):
        v = ("v", i)
        verts.append(v)
        for e in (("l", 2 * i - 1), ("l", 2 * i)):
            h = ("h",) + e[1:]
            halves.append(h)
            s[h] = e
            t[h] = v
    return FeynmanGraph(edges, tau, halves, s, t, verts)


def wheel(m: int) -> FeynmanGraph:
    """W^m: 2m edges in a cycle, m bivalent vertices, no ports."""
    if m < 1:
        raise BadParameter("wheel(m) needs m >= 1")
    n = 2 * m
    edges = [("l", i) for i in range(n)]
    tau = {}
    for i in range(m):
        a, b = ("l", 2 * i), ("l", 2 * i + 1)
        tau[a], tau[b] = b, a
    halves, s, t, verts = [], {}, {}, []
    for i in range(m):
        v = ("v", i)
        verts.append(v)
        for e in (("l", (2 * i - 1) % n), ("l", 2 * i)):
            h = ("h",) + e[1:]
            halves.append(h)
            s[h] = e
            t[h] = v
    return FeynmanGraph(edges, tau, halves, s, t, verts)


def disjoint_union(g: FeynmanGraph, h: FeynmanGraph) -> FeynmanGraph:
    a, b = g.tagged("L"), h.tagged("R")
    return FeynmanGraph(a.edges | b.edges, {**a.tau, **b.tau},
                        a.half_edges | b.half_edges, {**a.s, **b.s},
                        {**a.t, **b.t}, a.vertices | b.vertices)


def disjoint_union_all(graphs: Sequence[FeynmanGraph]) -> FeynmanGraph:
    tagged = [g.tagged(i) for i, g in enumerate(graphs)]
    edges: set = set()
    tau: dict = {}
    halves: set = set()
    s: dict = {}
    t: dict = {}
    verts: set = set()
    for g in tagged:
        edges |= g.edges
        tau.update(g.tau)
        halves |= g.half_edges
        s.update(g.s)
        t.update(g.t)
        verts |= g.vertices
    return FeynmanGraph(edges, tau, halves, s, t, verts)


def make_named(kind: str, **params) -> FeynmanGraph:
    if kind == "stick":
        return stick()
    if kind == "empty":
        return empty_graph()
    if kind == "isolated_vertex":
        return isolated_vertex()
    if kind == "corolla":
        return corolla(params["labels"])
    if kind == "wheel":
        return wheel(params["m"])
    if kind == "line":
        return line(params["k"])
    if kind == "disjoint_corollas":
        return disjoint_union(corolla(params["labels"]), corolla(params["labels2"]))
    raise BadParameter(f"unknown named graph {kind!r}")


def validate_graph(raw: Mapping) -> FeynmanGraph:
    """Build a graph from the file-format dict, checking all invariants."""
    try:
        edges = raw["edges"]
        tau = raw["tau"]
        halves = raw.get("half_edges", {})
        vertices = raw.get("vertices", [])
    except (KeyError, TypeError) as exc:
        raise DanglingId(f"missing field: {exc}") from exc
    s = {h: d["s"] for h, d in halves.items()}
    t = {h: d["t"] for h, d in halves.items()}
    return FeynmanGraph(edges, tau, list(halves), s, t, vertices)


# -- canonical labeling -------------------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    relabeled_graph: FeynmanGraph
    certificate: str
    edge_index: Mapping[Id, int]
    vertex_index: Mapping[Id, int]


def _token_str(tok) -> str:
    return repr(tok)


def _refine(edges, verts, tau, vert_of, edges_at, col):
    """Iterated colour refinement; returns a stable colouring by ints."""
    items = edges + verts
    while True:
        new = {}
        for e in edges:
            w = vert_of.get(e)
            new[e] = (col[e], col[tau[e]], None if w is None else col[w])
        for v in verts:
            new[v] = (col[v], tuple(sorted(col[e] for e in edges_at[v])))
        ranks = {t: i for i, t in enumerate(sorted(set(new.values()), key=repr))}
        nxt = {x: ranks[new[x]] for x in items}
        if _same_partition(items, col, nxt):
            return nxt
        col = nxt


def _same_partition(items, a, b) -> bool:
    cls_a: dict = {}
    cls_b: dict = {}
    for x in items:
        cls_a.setdefault(a[x], set()).add(x)
        cls_b.setdefault(b[x], set()).add(x)
    return set(map(frozenset, cls_a.values())) == set(map(frozenset, cls_b.values()))


def canonical_labelings(g: FeynmanGraph,
                        edge_tokens: Optional[Mapping[Id, Any]] = None,
                        vertex_tokens: Optional[Mapping[Id, Any]] = None):
    """Individualisation-refinement canonical labeling.

    Returns (certificate, labelings) where each labeling is a pair of dicts
    (edge -> int, vertex -> int) achieving the minimal certificate.  The set
    of labelings is the canonical map composed with every automorphism that
    preserves the given tokens.
    """
    edges = sort_ids(g.edges)
    verts = sort_ids(g.vertices)
    tau = g.tau
    vert_of = {e: g.vertex_of_edge(e) for e in edges if g.half_of_edge(e) is not None}
    edges_at = {v: g.edges_at(v) for v in verts}
    e_tok = {e: _token_str(("e", e in g.ports,
                            None if edge_tokens is None else edge_tokens.get(e)))
             for e in edges}
    v_tok = {v: _token_str(("v", g.valency(v),
                            None if vertex_tokens is None else vertex_tokens.get(v)))
             for v in verts}
    base = {}
    tok_rank = {t: i for i, t in enumerate(sorted(set(e_tok.values()) | set(v_tok.values())))}
    for e in edges:
        base[e] = tok_rank[e_tok[e]]
    for v in verts:
        base[v] = tok_rank[v_tok[v]]

    best: list = [None, []]  # [certificate, labelings]

    def finish(col):
        order_e = sorted(edges, key=lambda e: col[e])
        order_v = sorted(verts, key=lambda v: col[v])
        eidx = {e: i for i, e in enumerate(order_e)}
        vidx = {v: i for i, v in enumerate(order_v)}
        cert = (
            tuple((e_tok[e], eidx[tau[e]],
                   -1 if e not in vert_of else vidx[vert_of[e]])
                  for e in order_e),
            tuple(v_tok[v] for v in order_v),
        )
        if best[0] is None or cert < best[0]:
            best[0] = cert
            best[1] = [(eidx, vidx)]
        elif cert == best[0]:
            lab = (eidx, vidx)
            if lab not in best[1]:
                best[1].append(lab)

    def search(col):
        cells: dict = {}
        for x in edges + verts:
            cells.setdefault(col[x], []).append(x)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            finish(col)
            return
        n_colors = max(col.values()) + 1
        for x in target:
            col2 = dict(col)
            col2[x] = n_colors
            search(_refine(edges, verts, tau, vert_of, edges_at, col2))

    search(_refine(edges, verts, tau, vert_of, edges_at, base))
    return best[0], best[1]


def canonical_form(g: FeynmanGraph,
                   port_labels: Optional[Mapping[Id, Any]] = None) -> CanonicalForm:
    """Deterministic isomorphism-invariant relabeling onto dense ids.

    If port_labels is given (edge -> label on ports), labels are part of
    the certificate, so two X-graphs get equal forms iff they are
    isomorphic by a label-preserving isomorphism.
    """
    cert, labelings = canonical_labelings(g, edge_tokens=port_labels)
    eidx, vidx = labelings[0]
    edge_map = {e: f"e{eidx[e]}" for e in g.edges}
    vert_map = {v: f"v{vidx[v]}" for v in g.vertices}
    half_map = {h: f"h{eidx[g.s[h]]}" for h in g.half_edges}
    return CanonicalForm(g.relabel(edge_map, half_map, vert_map),
                         repr(cert), eidx, vidx)


def automorphisms(g: FeynmanGraph,
                  edge_tokens: Optional[Mapping[Id, Any]] = None,
                  vertex_tokens: Optional[Mapping[Id, Any]] = None) -> list:
    """All automorphisms preserving the given tokens, as
    (edge_map, half_map, vertex_map) triples."""
    _, labelings = canonical_labelings(g, edge_tokens, vertex_tokens)
    eidx0, vidx0 = labelings[0]
    inv_e = {i: e for e, i in eidx0.items()}
    inv_v = {i: v for v, i in vidx0.items()}
    out = []
    for eidx, vidx in labelings:
        em = {e: inv_e[eidx[e]] for e in g.edges}
        vm = {v: inv_v[vidx[v]] for v in g.vertices}
        hm = {h: g.half_of_edge(em[g.s[h]]) for h in g.half_edges}
        out.append((em, hm, vm))
    return out


def is_isomorphic(g: FeynmanGraph, h: FeynmanGraph,
                  port_labels_g: Optional[Mapping[Id, Any]] = None,
                  port_labels_h: Optional[Mapping[Id, Any]] = None):
    """Isomorphism witness (edge_map, half_map, vertex_map) or None.

    With port labelings on both sides the witness preserves labels.
    """
    cg, labs_g = canonical_labelings(g, edge_tokens=port_labels_g)
    ch, labs_h = canonical_labelings(h, edge_tokens=port_labels_h)
    if cg != ch:
        return None
    eg, vg = labs_g[0]
    eh, vh = labs_h[0]
    inv_eh = {i: e for e, i in eh.items()}
    inv_vh = {i: v for v, i in vh.items()}
    edge_map = {e: inv_eh[eg[e]] for e in g.edges}
    vertex_map = {v: inv_vh[vg[v]] for v in g.vertices}
    half_map = {hh: h.half_of_edge(edge_map[g.s[hh]]) for hh in g.half_edges}
    # sanity: this must be a structure-preserving bijection
    assert all(edge_map[g.tau[e]] == h.tau[edge_map[e]] for e in g.edges)
    assert all(h.s[half_map[hh]] == edge_map[g.s[hh]] for hh in g.half_edges)
    assert all(h.t[half_map[hh]] == vertex_map[g.t[hh]] for hh in g.half_edges)
    return (edge_map, half_map, vertex_map)
