"""Kleisli morphisms of the graphical category, finite presheaves, the
nerve of a finite circuit algebra, and the Segal-condition checker.

A Kleisli morphism G -> H is a refinement of G (a graph of graphs)
followed by a pointed free map from the refinement's colimit to H.  Two
presentations are equal when their normal forms agree: the normal form
keeps deletions of bivalent colimit vertices inside the refinement pieces
(so a deleted identity piece becomes a stick piece) and keeps deletions
of isolated vertices in the pointed tail, whose own normal form absorbs
maximally.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (ColourMismatch, CorpusNotElementClosed, FormatError,
                     Mismatch, OutOfBounds)
from .etale import EtaleMorphism
from .graphs import (FeynmanGraph, canonical_labelings, corolla, idkey,
                     isolated_vertex, sort_ids, stick)
from .monads import (PointedMorphism, deletable_vertices, delete_vertices,
                     half_order, hom_etale, pointed_from_parts)
from .species import CircuitAlgebraOps, Decoration, evaluate_species
from .substitution import GraphOfGraphs, Substitution, substitute

__all__ = [
    "KleisliMorphism", "FinitePresheaf",
    "graphs_equal", "make_kleisli", "kleisli_identity", "kleisli_from_etale",
    "kleisli_from_pointed", "kleisli_refinement", "kleisli_compose",
    "kleisli_deletion_homs", "refinement_of_corolla",
    "kleisli_equal", "nerve", "check_segal", "presheaf_maps",
    "algebra_morphisms", "fullness_probe", "mutated_presheaves",
    "restrict_kleisli", "algebra_evaluate", "decoration_key",
]


def graphs_equal(g: FeynmanGraph, h: FeynmanGraph) -> bool:
    """On-the-nose equality of graph presentations (same ids, same maps)."""
    return (set(g.edges) == set(h.edges)
            and all(g.tau[e] == h.tau[e] for e in g.edges)
            and set(g.half_edges) == set(h.half_edges)
            and all(g.s[x] == h.s[x] and g.t[x] == h.t[x]
                    for x in g.half_edges)
            and set(g.vertices) == set(h.vertices))


# -- Kleisli morphisms ---------------------------------------------------------------

@dataclass
class KleisliMorphism:
    source: FeynmanGraph
    target: FeynmanGraph
    refinement: GraphOfGraphs
    pointed_tail: PointedMorphism
    _sub: Substitution
    _key: tuple

    def key(self):
        return self._key


def _piece_labelings(piece: FeynmanGraph, boundary: dict):
    """Canonical labelings of a piece; ports carry distinct tokens (the
    attached base half), so every labeling fixes the boundary."""
    tokens = {e: ("port", repr(boundary[e])) if e in boundary else ("inner",)
              for e in piece.edges}
    cert, labs = canonical_labelings(piece, edge_tokens=tokens)
    out = []
    for eidx, vidx in labs:
        emap = {e: eidx[e] for e in piece.edges}
        vmap = {v: vidx[v] for v in piece.vertices}
        hmap = {h: ("h", eidx[piece.s[h]]) for h in piece.half_edges}
        out.append((emap, vmap, hmap))
    return cert, out


def _apply_labeling(piece, boundary, lab):
    emap, vmap, hmap = lab
    new = piece.relabel(emap, hmap, vmap)
    new_boundary = {emap[p]: h for p, h in boundary.items()}
    return new, new_boundary


def _build_tail_etale(colim, target, d, em, hm, vm, fresh_em):
    members = {}
    for x, c in d.edge_correspondence.items():
        members.setdefault(c, []).append(x)
    em_e = {}
    for c, xs in members.items():
        images = {repr(em[x]): em[x] for x in xs}
        if len(images) != 1:
            raise Mismatch("tail edge map inconsistent on merged classes")
        em_e[c] = next(iter(images.values()))
    for v, (a, b) in d.fresh_sticks.items():
        fa, fb = fresh_em[v]
        em_e[a], em_e[b] = fa, fb
    hm_e = {d.half_map[h]: hm[h] for h in d.half_map}
    vm_e = {d.vertex_map[v]: vm[v] for v in d.vertex_map}
    return EtaleMorphism(d.target, target, em_e, hm_e, vm_e)


def make_kleisli(source, target, pieces, w, em, hm, vm,
                 fresh_em=None) -> KleisliMorphism:
    """Normalize raw Kleisli data.  The tail data (w, em, hm, vm,
    fresh_em) refers to the colimit of substitute(pieces): w is a set of
    colimit vertices to delete, em maps every colimit edge to a target
    edge, hm/vm map the undeleted part, fresh_em gives target images for
    the fresh sticks of deleted isolated vertices."""
    fresh_em = dict(fresh_em or {})
    pieces = dict(pieces)
    while True:
        gog = GraphOfGraphs(source, pieces)
        sub = substitute(gog)
        colim = sub.colimit
        d = delete_vertices(colim, w)
        etale = _build_tail_etale(colim, target, d, em, hm, vm, fresh_em)
        tail = pointed_from_parts(colim, target, w, etale)
        push = {cv for cv in tail.deleted if colim.valency(cv) == 2}
        if not push:
            break
        # delete those vertices inside their pieces instead
        per_v = {}
        for cv in push:
            per_v.setdefault(cv[1], set()).add(cv[2])
        shrink = {}
        for v, ws in per_v.items():
            piece, boundary = pieces[v]
            dd = delete_vertices(piece, ws)
            nb = {dd.edge_correspondence[p]: h for p, h in boundary.items()}
            pieces[v] = (dd.target, nb)
            shrink[v] = dd
        # transport the tail data onto the new colimit through the
        # composite correspondences of the normalized tail
        gog2 = GraphOfGraphs(source, pieces)
        sub2 = substitute(gog2)

        def old_edges_for(cnew):
            out = []
            for m in cnew:
                if m[0] == "b":
                    out.append(sub.edge_class[m[1]])
                else:
                    _, v, pe = m
                    if v in shrink:
                        dd = shrink[v]
                        out += [sub.piece_edge[(v, p0)]
                                for p0, c0 in dd.edge_correspondence.items()
                                if c0 == pe]
                    else:
                        out.append(sub.piece_edge[(v, pe)])
            return out

        em = {c: tail.edge_image(old_edges_for(c)[0])
              for c in sub2.colimit.edges}
        w2, vm2, hm2, fresh2 = set(), {}, {}, {}
        inv_shrink_v = {v: {nv: ov for ov, nv in shrink[v].vertex_map.items()}
                        for v in shrink}
        for cv in sub2.colimit.vertices:
            _, v, wn = cv
            ov = inv_shrink_v[v][wn] if v in shrink else wn
            old_cv = ("p", v, ov)
            if old_cv in tail.deleted:
                w2.add(cv)
                fresh2[cv] = tail.fresh_images(old_cv)
            else:
                vm2[cv] = tail.vertex_image(old_cv)
                for hn in sub2.colimit.halves_at(cv):
                    hp = hn[2]
                    if v in shrink:
                        inv_h = {nh: oh for oh, nh
                                 in shrink[v].half_map.items()}
                        hp = inv_h[hp]
                    hm2[hn] = tail.half_image(("p", v, hp))
        w, em, hm, vm, fresh_em = w2, em, hm2, vm2, fresh2
    # canonicalize pieces and rebuild with transported tail data; when a
    # piece admits several minimal labelings, minimize the resulting key
    vs = sort_ids(source.vertices)
    certs, labsets = {}, {}
    for v in vs:
        piece, boundary = pieces[v]
        certs[v], labsets[v] = _piece_labelings(piece, boundary)
    combos = list(itertools.islice(
        itertools.product(*(labsets[v] for v in vs)), 128))
    gog_old = GraphOfGraphs(source, pieces)
    sub_old = substitute(gog_old)
    best = None
    for combo in combos:
        labs = dict(zip(vs, combo))
        canon = {v: _apply_labeling(pieces[v][0], pieces[v][1], labs[v])
                 for v in vs}
        gog = GraphOfGraphs(source, canon)
        sub2 = substitute(gog)
        inv_e = {v: {ne: oe for oe, ne in labs[v][0].items()} for v in vs}
        inv_v = {v: {nv: ov for ov, nv in labs[v][1].items()} for v in vs}
        inv_h = {v: {nh: oh for oh, nh in labs[v][2].items()} for v in vs}

        def resolve_edge(cnew):
            for m in cnew:
                if m[0] == "b":
                    return em[sub_old.edge_class[m[1]]]
                _, v, pe = m
                return em[sub_old.piece_edge[(v, inv_e[v][pe])]]
            raise Mismatch("empty colimit edge class")

        em2 = {c: resolve_edge(c) for c in sub2.colimit.edges}
        w2, vm2, hm2, fresh2 = set(), {}, {}, {}
        for cv in sub2.colimit.vertices:
            _, v, wn = cv
            old_cv = ("p", v, inv_v[v][wn])
            if old_cv in w:
                w2.add(cv)
                fresh2[cv] = fresh_em[old_cv]
            else:
                vm2[cv] = vm[old_cv]
                for hn in sub2.colimit.halves_at(cv):
                    hm2[hn] = hm[("p", v, inv_h[v][hn[2]])]
        d = delete_vertices(sub2.colimit, w2)
        etale = _build_tail_etale(sub2.colimit, target, d,
                                  em2, hm2, vm2, fresh2)
        tail = pointed_from_parts(sub2.colimit, target, w2, etale)
        key = (tuple((repr(v), certs[v]) for v in vs), tail.key())
        cand = KleisliMorphism(source, target, gog, tail, sub2, key)
        if best is None or key < best.key():
            best = cand
    return best


def _identity_data(g: FeynmanGraph):
    """Identity refinement pieces plus identity tail data on its colimit."""
    gog = GraphOfGraphs.identity(g)
    sub = substitute(gog)
    em = {sub.edge_class[e]: e for e in g.edges}
    vm, hm = {}, {}
    for v in g.vertices:
        vm[("p", v, "*")] = v
        for h in g.halves_at(v):
            hm[("p", v, ("h", ("p", repr(h))))] = h
    return gog.pieces, sub, em, hm, vm


def kleisli_identity(g: FeynmanGraph) -> KleisliMorphism:
    pieces, _, em, hm, vm = _identity_data(g)
    return make_kleisli(g, g, pieces, set(), em, hm, vm)


def kleisli_from_etale(e: EtaleMorphism) -> KleisliMorphism:
    pieces, _, em, hm, vm = _identity_data(e.source)
    em2 = {c: e.edge_map[x] for c, x in em.items()}
    hm2 = {c: e.half_map[x] for c, x in hm.items()}
    vm2 = {c: e.vertex_map[x] for c, x in vm.items()}
    return make_kleisli(e.source, e.target, pieces, set(), em2, hm2, vm2)


def kleisli_from_pointed(pm: PointedMorphism) -> KleisliMorphism:
    g = pm.source
    pieces, _, em, hm, vm = _identity_data(g)
    w, em2, hm2, vm2, fresh = set(), {}, {}, {}, {}
    for c, x in em.items():
        em2[c] = pm.edge_image(x)
    for cv in list(vm):
        v = vm[cv]
        if v in pm.deleted:
            w.add(cv)
            if g.valency(v) == 0:
                fresh[cv] = pm.fresh_images(v)
        else:
            vm2[cv] = pm.vertex_image(v)
    for ch, x in hm.items():
        if x in pm._hcorr:
            hm2[ch] = pm.half_image(x)
    return make_kleisli(g, pm.target, pieces, w, em2, hm2, vm2, fresh)


def kleisli_refinement(gog: GraphOfGraphs) -> KleisliMorphism:
    sub = substitute(gog)
    colim = sub.colimit
    em = {c: c for c in colim.edges}
    hm = {h: h for h in colim.half_edges}
    vm = {v: v for v in colim.vertices}
    return make_kleisli(gog.base, colim,
                        {v: gog.pieces[v] for v in gog.base.vertices},
                        set(), em, hm, vm)


def kleisli_compose(k2: KleisliMorphism, k1: KleisliMorphism) -> KleisliMorphism:
    """The composite k2 after k1 (k1: G -> H, k2: H -> K)."""
    if not graphs_equal(k1.target, k2.source):
        raise Mismatch("kleisli composition endpoints do not line up")
    g, k = k1.source, k2.target
    t1, t2 = k1.pointed_tail, k2.pointed_tail
    pieces, marks = {}, {}   # marks: composite colimit vertex id parts
    for v in sort_ids(g.vertices):
        pv, bnd_v = k1.refinement.pieces[v]
        inner = {}
        for u in pv.vertices:
            cu = ("p", v, u)
            if cu in t1.deleted:
                if pv.valency(u) == 0:
                    inner[u] = (isolated_vertex(), {})
                    marks[("p", v, ("p", u, "*"))] = ("fresh1", cu)
                else:
                    piece = stick().tagged(("del", u))
                    h1, h2 = half_order(pv, u)
                    inner[u] = (piece, {(("del", u), "1"): h1,
                                        (("del", u), "2"): h2})
            else:
                w_h = t1.vertex_image(cu)
                qw, bndq = k2.refinement.pieces[w_h]
                tb = {}
                for q_port, x_half in bndq.items():
                    pre = [hh for hh in pv.halves_at(u)
                           if t1.half_image(("p", v, hh)) == x_half]
                    if len(pre) != 1:
                        raise Mismatch("tail is not locally bijective")
                    tb[q_port] = pre[0]
                inner[u] = (qw, tb)
                for q in qw.vertices:
                    c2v = ("p", w_h, q)
                    if c2v in t2.deleted:
                        marks[("p", v, ("p", u, q))] = ("del2", c2v)
        sub_v = substitute(GraphOfGraphs(pv, inner))
        nb = {sub_v.edge_class[p]: h for p, h in bnd_v.items()}
        pieces[v] = (sub_v.colimit, nb)

    def trace1(c1_edge):
        """C1 edge -> K edge through the tails and k2's refinement."""
        eh = t1.edge_image(c1_edge)
        return t2.edge_image(k2._sub.edge_class[eh])

    gog = GraphOfGraphs(g, pieces)
    sub = substitute(gog)
    em, hm, vm, w, fresh = {}, {}, {}, set(), {}
    for c in sub.colimit.edges:
        img = None
        for m in c:
            if m[0] == "b":
                img = trace1(k1._sub.edge_class[m[1]])
                break
            _, v, x = m
            for m2 in x:
                if m2[0] == "b":
                    img = trace1(k1._sub.piece_edge[(v, m2[1])])
                    break
                _, u, qe = m2
                cu = ("p", v, u)
                if cu in t1.deleted:
                    continue   # stick-piece edge: resolve via a neighbour
                w_h = t1.vertex_image(cu)
                img = t2.edge_image(k2._sub.piece_edge[(w_h, qe)])
                break
            if img is not None:
                break
        if img is None:
            raise Mismatch("untraceable colimit edge")
        em[c] = img
    for cv in sub.colimit.vertices:
        _, v, x = cv
        mark = marks.get(cv)
        if mark and mark[0] == "fresh1":
            w.add(cv)
            a, b = t1.fresh_images(mark[1])
            fresh[cv] = (trace_h_edge(k2, a), trace_h_edge(k2, b))
        elif mark and mark[0] == "del2":
            w.add(cv)
            c2v = mark[1]
            if k2._sub.colimit.valency(c2v) == 0:
                fresh[cv] = t2.fresh_images(c2v)
        else:
            _, u, q = x
            w_h = t1.vertex_image(("p", v, u))
            vm[cv] = t2.vertex_image(("p", w_h, q))
            for hn in sub.colimit.halves_at(cv):
                qh = hn[2][2]
                hm[hn] = t2.half_image(("p", w_h, qh))
    return make_kleisli(g, k, pieces, w, em, hm, vm, fresh)


def trace_h_edge(k2: KleisliMorphism, eh):
    """Image in k2's target of an edge of k2's source."""
    return k2.pointed_tail.edge_image(k2._sub.edge_class[eh])


def kleisli_equal(a: KleisliMorphism, b: KleisliMorphism) -> bool:
    return (graphs_equal(a.source, b.source)
            and graphs_equal(a.target, b.target)
            and a.key() == b.key())


# -- decorations and their transport -------------------------------------------------

def decoration_key(dec: Decoration) -> tuple:
    return dec.key()


def algebra_evaluate(A: CircuitAlgebraOps, piece: FeynmanGraph,
                     boundary: dict, colours: dict, elems: dict):
    """Evaluate a decorated piece to a single algebra element whose
    positions follow the base vertex's sorted half order: box the vertex
    elements together, contract every internal edge pair, then realign the
    remaining (port) positions along the boundary."""
    S = A.species
    acc = A.unit0()
    slots = []
    for u in sort_ids(piece.vertices):
        order = half_order(piece, u)
        acc = A.box(acc, elems[u])
        if acc is None:
            raise OutOfBounds("piece evaluation exceeds the algebra bounds")
        slots += list(order)
    if not piece.vertices:
        # degenerate stick piece: the formal unit on its edge colour
        ports = sort_ids(piece.ports)
        if len(ports) != 2:
            raise FormatError("vertex-free piece must be a stick")
        return A.eps(colours[ports[0]]), ports
    # contract internal pairs
    changed = True
    while changed:
        changed = False
        for i in range(len(slots)):
            for j in range(i + 1, len(slots)):
                if piece.tau[piece.s[slots[i]]] == piece.s[slots[j]]:
                    acc = A.zeta(acc, i, j)
                    if acc is None:
                        raise OutOfBounds("contraction exceeds bounds")
                    del slots[j], slots[i]
                    changed = True
                    break
            if changed:
                break
    # remaining slots correspond to piece ports; realign to the base order
    base_halves = sorted(boundary.values(), key=idkey)
    pos_of = {}
    for i, h in enumerate(slots):
        pos_of[boundary[piece.tau[piece.s[h]]]] = i
    sigma = tuple(pos_of[h] for h in base_halves)
    return S.act(acc, sigma), [slots[i] for i in sigma]


def restrict_kleisli(A: CircuitAlgebraOps, kl: KleisliMorphism,
                     dec: Decoration) -> Decoration:
    """Restriction of the nerve of A along a Kleisli morphism: transport a
    decoration of the target back to the source (structure-map evaluation
    on refinement pieces, unit insertion on deletions)."""
    S = A.species
    tail = kl.pointed_tail
    colim = kl._sub.colimit
    # pull colours back to the colimit
    ccol = {c: dec.edge_colours[tail.edge_image(c)] for c in colim.edges}
    # vertex elements on the colimit
    celems, corders = {}, {}
    for cv in colim.vertices:
        order = half_order(colim, cv)
        corders[cv] = order
        if cv in tail.deleted:
            if colim.valency(cv) == 0:
                a, _ = tail.fresh_images(cv)
                e = A.eps(dec.edge_colours[a])
                z = A.zeta(e, 0, 1)
                if z is None:
                    raise OutOfBounds("unit insertion exceeds bounds")
                celems[cv] = z
            else:
                want = tuple(ccol[colim.tau[colim.s[h]]] for h in order)
                cand = A.eps(want[0])
                if S.colour_of(cand) != want:
                    raise ColourMismatch("unit colour does not match")
                celems[cv] = cand
        else:
            tv = tail.vertex_image(cv)
            telem = dec.vertex_elems[tv]
            torder = dec.half_orders[tv]
            sigma = tuple(torder.index(tail.half_image(h)) for h in order)
            celems[cv] = S.act(telem, sigma)
    # evaluate pieces
    ecol = {e: ccol[kl._sub.edge_class[e]] for e in kl.source.edges}
    velems, vorders = {}, {}
    for v in kl.source.vertices:
        piece, boundary = kl.refinement.pieces[v]
        pcol = {pe: ccol[kl._sub.piece_edge[(v, pe)]] for pe in piece.edges}
        pelems = {}
        for u in piece.vertices:
            cu = ("p", v, u)
            elem = celems[cu]
            order = [h[2] for h in corders[cu]]
            want = half_order(piece, u)
            sigma = tuple(order.index(h) for h in want)
            pelems[u] = S.act(elem, sigma)
        elem, _ = algebra_evaluate(A, piece, boundary, pcol, pelems)
        velems[v] = elem
        vorders[v] = half_order(kl.source, v)
    return Decoration(ecol, velems, vorders)


# -- finite presheaves ---------------------------------------------------------------

@dataclass
class FinitePresheaf:
    """A presheaf on an explicit finite corpus.  morphisms[name] is a
    record {kind, from_graph, to_graph, map, ...} where `map` sends
    element keys of P(from_graph) to element keys of P(to_graph); `from`
    is the morphism's codomain (restriction goes backwards)."""
    corpus: dict          # name -> FeynmanGraph
    sets: dict            # name -> list of element keys
    morphisms: dict       # name -> record

    def to_json(self):
        from .io import graph_to_json

        def kstr(k):
            return k if isinstance(k, str) else repr(k)

        return {
            "corpus": [{"name": n, "graph": graph_to_json(self.corpus[n])}
                       for n in sorted(self.corpus)],
            "sets": {n: [kstr(k) for k in ks]
                     for n, ks in self.sets.items()},
            "morphisms": [
                {"name": n,
                 "kind": r["kind"],
                 "from_graph": r["from_graph"],
                 "to_graph": r["to_graph"],
                 "map": {kstr(a): kstr(b) for a, b in r["map"].items()},
                 "edge_images": dict(r.get("edge_images", {})),
                 "vertex": r.get("vertex"),
                 "edge": r.get("edge")}
                for n, r in sorted(self.morphisms.items())],
        }

    @classmethod
    def from_json(cls, data):
        from .io import graph_from_json
        corpus = {rec["name"]: graph_from_json(rec["graph"])
                  for rec in data["corpus"]}
        sets = {n: list(ks) for n, ks in data["sets"].items()}
        morphisms = {}
        for r in data["morphisms"]:
            rec = {"kind": r["kind"], "from_graph": r["from_graph"],
                   "to_graph": r["to_graph"], "map": dict(r["map"])}
            if r.get("edge_images"):
                rec["edge_images"] = dict(r["edge_images"])
            if r.get("vertex") is not None:
                rec["vertex"] = r["vertex"]
            if r.get("edge") is not None:
                rec["edge"] = r["edge"]
            morphisms[r["name"]] = rec
        return cls(corpus, sets, morphisms)


def _find_corpus_name(corpus, g):
    for name, h in corpus.items():
        if graphs_equal(g, h):
            return name
    return None


def _is_elementary(g: FeynmanGraph) -> bool:
    """Sticks and corollas: graphs that are their own single element."""
    internal = [e for e in g.edges
                if e in set(g.s.values()) and g.tau[e] in set(g.s.values())]
    return not internal and len(g.vertices) <= 1


def nerve(A: CircuitAlgebraOps, corpus: dict,
          deletion_pairs=None, refinements=None) -> FinitePresheaf:
    """The nerve of a finite circuit algebra on a named corpus: object
    sets are the decorations of each graph; restrictions are generated by
    the element morphisms ch_x, all isomorphisms, pointed deletions
    between corpus graphs, and any declared refinements."""
    S = A.species
    decs = {}     # name -> {key: Decoration}
    for name, g in corpus.items():
        decs[name] = {decoration_key(d): d for d in evaluate_species(S, g)}
    sets = {name: sorted(decs[name]) for name in corpus}
    morphisms = {}

    def declare(mname, kind, kl, from_name, to_name, **meta):
        table = {}
        for key, d in decs[from_name].items():
            d2 = restrict_kleisli(A, kl, d)
            k2 = decoration_key(d2)
            if k2 not in decs[to_name]:
                raise FormatError(f"restriction left the carrier at {mname}")
            table[key] = k2
        rec = {"kind": kind, "from_graph": from_name, "to_graph": to_name,
               "map": table}
        rec.update(meta)
        morphisms[mname] = rec

    for name in sorted(corpus):
        g = corpus[name]
        # vertex elements
        for v in sort_ids(g.vertices):
            halves = half_order(g, v)
            k = len(halves)
            c = corolla(list(range(k)))
            cname = _find_corpus_name(corpus, c)
            if cname is None:
                raise CorpusNotElementClosed(
                    f"{name} needs a {k}-corolla in the corpus")
            em = {}
            for i, h in enumerate(halves):
                em[i] = g.tau[g.s[h]]
                em[("in", i)] = g.s[h]
            phi = EtaleMorphism(c, g, em,
                                {("h", i): halves[i] for i in range(k)},
                                {"*": v})
            declare(f"ch:{name}:v:{v!r}", "ch", kleisli_from_etale(phi),
                    name, cname, vertex=repr(v),
                    edge_images={repr(ce): repr(em[ce]) for ce in c.edges})
        # edge elements
        for e in sort_ids(g.edges):
            sname = _find_corpus_name(corpus, stick())
            if sname is None:
                raise CorpusNotElementClosed("corpus must contain the stick")
            phi = EtaleMorphism(stick(), g, {"1": e, "2": g.tau[e]}, {}, {})
            declare(f"ch:{name}:e:{e!r}", "ch",
                    kleisli_from_etale(phi), name, sname, edge=repr(e))
        # isomorphisms (etale self-maps of a graph to itself are isos here)
        for idx, psi in enumerate(hom_etale(g, g)):
            declare(f"iso:{name}:{idx}", "iso", kleisli_from_etale(psi),
                    name, name)
    # deletions between corpus graphs
    for gname, hname in (deletion_pairs or _auto_deletions(corpus)):
        g, h = corpus[gname], corpus[hname]
        for idx, kl in enumerate(kleisli_deletion_homs(g, h)):
            declare(f"del:{gname}:{hname}:{idx}", "deletion",
                    kl, hname, gname)
    auto = refinements is None
    if auto:
        refinements = _auto_refinements(corpus)
    for rname, kl in refinements.items():
        fn = _find_corpus_name(corpus, kl.target)
        tn = _find_corpus_name(corpus, kl.source)
        if fn is None or tn is None:
            raise FormatError("refinement endpoints must be in the corpus")
        try:
            declare(f"ref:{rname}", "refinement", kl, fn, tn)
        except OutOfBounds:
            if not auto:
                raise
            # intermediate arity exceeds the algebra's tables; the
            # automatically generated refinement is simply omitted
    return FinitePresheaf(dict(corpus), sets, morphisms)


def refinement_of_corolla(cor: FeynmanGraph, piece: FeynmanGraph,
                          boundary: dict) -> KleisliMorphism:
    """The refinement Kleisli morphism replacing the single vertex of a
    corolla by a boundary-matched graph; its target is the piece itself
    with its original ids, so it can be declared on a corpus."""
    v = next(iter(cor.vertices))
    sub = substitute(GraphOfGraphs(cor, {v: (piece, boundary)}))
    em = {}
    for c in sub.colimit.edges:
        member = next(m for m in c if m[0] == "p")
        em[c] = member[2]
    hm = {h: h[2] for h in sub.colimit.half_edges}
    vm = {w: w[2] for w in sub.colimit.vertices}
    return make_kleisli(cor, piece, {v: (piece, boundary)}, set(),
                        em, hm, vm)


def _auto_refinements(corpus) -> dict:
    """For every corolla in the corpus, refinements by every corpus graph
    with a matching number of ports (one per port/slot bijection)."""
    out = {}
    for cname in sorted(corpus):
        cor = corpus[cname]
        if len(cor.vertices) != 1 or cor.inner_edges():
            continue
        v = next(iter(cor.vertices))
        halves = half_order(cor, v)
        for hname in sorted(corpus):
            h = corpus[hname]
            if not h.vertices or len(h.ports) != len(halves):
                continue
            ports = sort_ids(h.ports)
            for idx, perm in enumerate(itertools.permutations(halves)):
                boundary = dict(zip(ports, perm))
                out[f"{cname}<-{hname}:{idx}"] = \
                    refinement_of_corolla(cor, h, boundary)
    return out


def kleisli_deletion_homs(g: FeynmanGraph, h: FeynmanGraph) -> list:
    """All Kleisli morphisms g -> h given by deleting a nonempty set of
    bivalent/isolated vertices followed by an etale map, without the
    similarity absorption used for pointed hom-set counting (an etale map
    and a deletion composite are distinct Kleisli morphisms)."""
    out, seen = [], set()
    dels = deletable_vertices(g)
    for r in range(1, len(dels) + 1):
        for w0 in itertools.combinations(dels, r):
            try:
                d = delete_vertices(g, list(w0))
            except Exception:
                continue
            for e in hom_etale(d.target, h):
                pm = pointed_from_parts(g, h, w0, e)
                kl = kleisli_from_pointed(pm)
                if kl.key() not in seen:
                    seen.add(kl.key())
                    out.append(kl)
    return out


def _auto_deletions(corpus):
    pairs = []
    for gname, g in corpus.items():
        if not any(g.valency(v) in (0, 2) for v in g.vertices):
            continue
        for hname, h in corpus.items():
            if len(h.vertices) < len(g.vertices):
                pairs.append((gname, hname))
    return pairs


# -- Segal condition -----------------------------------------------------------------

def check_segal(P: FinitePresheaf) -> dict:
    """For every non-elementary corpus graph, compare P(G) with the limit
    of P over the element category of G, computed from the declared ch
    restrictions.  Elementary graphs (sticks, corollas) pass trivially."""
    report = {"ok": True, "corpus": sorted(P.corpus), "per_graph": {}}
    for name in sorted(P.corpus):
        g = P.corpus[name]
        entry = {"ok": True, "size": len(P.sets[name])}
        if _is_elementary(g):
            entry["elementary"] = True
            report["per_graph"][name] = entry
            continue
        vch = {}    # vertex repr -> morphism record
        ech = {}    # edge repr -> record
        for mname, r in P.morphisms.items():
            if r["kind"] != "ch" or r["from_graph"] != name:
                continue
            if r.get("vertex") is not None:
                vch[r["vertex"]] = r
            elif r.get("edge") is not None:
                ech[r["edge"]] = r
        missing = ([repr(v) for v in g.vertices if repr(v) not in vch]
                   + [repr(e) for e in g.edges if repr(e) not in ech])
        if missing:
            raise CorpusNotElementClosed(
                f"{name}: missing element restrictions {missing[:3]}")
        # corolla-edge restrictions, needed for compatibility
        limit = _segal_limit(P, g, vch, ech)
        canonical = {}
        for x in P.sets[name]:
            fam = (tuple((vr, vch[vr]["map"][x]) for vr in sorted(vch)),
                   tuple((er, ech[er]["map"][x]) for er in sorted(ech)))
            canonical[x] = fam
        image = set(canonical.values())
        entry["limit"] = len(limit)
        if len(image) != len(P.sets[name]):
            entry["ok"] = False
            entry["witness"] = "non-injective canonical map"
        elif image != limit:
            entry["ok"] = False
            extra = limit - image
            missing_fams = image - limit
            entry["witness"] = (f"limit mismatch: |limit|={len(limit)}, "
                                f"|image|={len(image)}, "
                                f"extra={len(extra)}, "
                                f"outside={len(missing_fams)}")
        report["per_graph"][name] = entry
        report["ok"] = report["ok"] and entry["ok"]
    return report


def _segal_limit(P: FinitePresheaf, g, vch, ech) -> set:
    """Compatible families over the elements of g."""
    vreprs = sorted(vch)
    ereprs = sorted(ech)
    # corolla-edge restriction tables: for each vertex, relate its corolla
    # element to the sticks of the incident edges via the declared
    # edge_images metadata
    out = set()
    vdomains = [P.sets[vch[vr]["to_graph"]] for vr in vreprs]
    for vchoice in itertools.product(*vdomains):
        echoice = {}
        ok = True
        for vr, u in zip(vreprs, vchoice):
            r = vch[vr]
            cname = r["to_graph"]
            for ce, ger in r.get("edge_images", {}).items():
                if ger not in ech:
                    ok = False
                    break
                crec = _edge_ch_of(P, cname, ce)
                if crec is None:
                    ok = False
                    break
                val = crec["map"][u]
                if echoice.setdefault(ger, val) != val:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        if set(echoice) != set(ereprs):
            # an edge not incident to any vertex cannot be constrained;
            # such graphs (extra stick components) are not in scope
            continue
        out.add((tuple(zip(vreprs, vchoice)),
                 tuple((er, echoice[er]) for er in ereprs)))
    return out


def _edge_ch_of(P: FinitePresheaf, gname, edge_repr):
    for r in P.morphisms.values():
        if (r["kind"] == "ch" and r["from_graph"] == gname
                and r.get("edge") == edge_repr):
            return r
    return None


# -- mutation fixtures ---------------------------------------------------------------

def mutated_presheaves(P: FinitePresheaf, count: int = 10) -> list:
    """Deterministically broken copies of P, each of which must fail the
    Segal check: duplicated elements, dropped elements, rewired maps."""
    out = []
    names = [n for n in sorted(P.corpus)
             if not _is_elementary(P.corpus[n]) and len(P.sets[n]) >= 1]
    chs = sorted(
        (mn for mn, r in P.morphisms.items()
         if r["kind"] == "ch" and r["from_graph"] in names
         and len(set(r["map"].values())) >= 2),
        key=repr)

    def clone():
        return FinitePresheaf(
            dict(P.corpus), {n: list(ks) for n, ks in P.sets.items()},
            {mn: {**r, "map": dict(r["map"])}
             for mn, r in P.morphisms.items()})

    i = 0
    for n in names:
        if len(out) >= count:
            break
        q = clone()
        dup = q.sets[n][0]
        q.sets[n] = q.sets[n] + [("dup", dup)]
        for r in q.morphisms.values():
            if r["from_graph"] == n:
                r["map"][("dup", dup)] = r["map"][dup]
        out.append((f"duplicate element in {n}", q))
        i += 1
    for mn in chs:
        if len(out) >= count:
            break
        q = clone()
        r = q.morphisms[mn]
        keys = sorted(r["map"], key=repr)
        first = r["map"][keys[0]]
        r["map"] = {k: first for k in keys}
        out.append((f"rewired restriction {mn!r}", q))
    for n in names:
        if len(out) >= count:
            break
        if len(P.sets[n]) < 2:
            continue
        q = clone()
        dropped = q.sets[n][-1]
        q.sets[n] = q.sets[n][:-1]
        for r in q.morphisms.values():
            if r["from_graph"] == n:
                r["map"].pop(dropped, None)
        out.append((f"dropped element in {n}", q))
    return out[:count]


# -- fullness probe ------------------------------------------------------------------

def presheaf_maps(P: FinitePresheaf, Q: FinitePresheaf,
                  max_search: int = 10 ** 6) -> list:
    """All natural transformations P -> Q over the shared corpus: one
    function per corpus object commuting with every declared morphism
    present in both presheaves."""
    names = sorted(P.corpus)
    if sorted(Q.corpus) != names:
        raise Mismatch("presheaves must share a corpus")
    shared = [mn for mn in P.morphisms if mn in Q.morphisms]
    base = [n for n in names if _is_elementary(P.corpus[n])]
    rest = [n for n in names if n not in base]
    chs = {n: sorted(mn for mn in shared
                     if P.morphisms[mn]["kind"] == "ch"
                     and P.morphisms[mn]["from_graph"] == n)
           for n in rest}

    def family(presheaf, n, x):
        return tuple(presheaf.morphisms[mn]["map"][x] for mn in chs[n])

    def full_check(comp):
        for mn in shared:
            rp, rq = P.morphisms[mn], Q.morphisms[mn]
            fn, tn = rp["from_graph"], rp["to_graph"]
            for x in P.sets[fn]:
                if rq["map"][comp[fn][x]] != comp[tn][rp["map"][x]]:
                    return False
        return True

    spaces = []
    total = 1
    for n in base:
        fns = list(itertools.product(Q.sets[n], repeat=len(P.sets[n])))
        total *= max(len(fns), 1)
        if total > max_search:
            raise OutOfBounds("natural-transformation search too large")
        spaces.append(fns)
    out = []
    for combo in itertools.product(*spaces):
        comp = {n: dict(zip(P.sets[n], vals))
                for n, vals in zip(base, combo)}
        # extend to non-elementary objects through the ch-families: the
        # component image of x must have the translated family
        options = []
        ok = True
        for n in rest:
            qfam = {y: family(Q, n, y) for y in Q.sets[n]}
            per_x = []
            for x in P.sets[n]:
                want = tuple(comp[P.morphisms[mn]["to_graph"]][v]
                             for mn, v in zip(chs[n], family(P, n, x)))
                cands = [y for y in Q.sets[n] if qfam[y] == want]
                if not cands:
                    ok = False
                    break
                per_x.append(cands)
            if not ok:
                break
            options.append((n, per_x))
        if not ok:
            continue
        for choice in itertools.product(
                *(itertools.product(*per_x) for _, per_x in options)):
            for (n, _), vals in zip(options, choice):
                comp[n] = dict(zip(P.sets[n], vals))
            if full_check(comp):
                out.append({n: dict(comp[n]) for n in names})
    return out


def algebra_morphisms(A: CircuitAlgebraOps, B: CircuitAlgebraOps,
                      max_arity: int) -> list:
    """All palette-preserving maps A -> B commuting with the symmetric
    action, box, zeta, eps and the external unit, by exhaustive search."""
    SA, SB = A.species, B.species
    if SA.palette.colours != SB.palette.colours:
        raise Mismatch("palettes differ")
    per_arity = []
    for n in range(max_arity + 1):
        ea = list(SA.elements(n))
        eb = list(SB.elements(n))
        keys = [SA.key(x) for x in ea]
        maps = [dict(zip(keys, vals))
                for vals in itertools.product(eb, repeat=len(ea))
                if all(SB.colour_of(y) == SA.colour_of(x)
                       for x, y in zip(ea, vals))]
        per_arity.append(maps)
    out = []
    for combo in itertools.product(*per_arity):
        fwd = {}
        for f in combo:
            fwd.update(f)
        if _is_algebra_morphism(A, B, lambda x: fwd[SA.key(x)], max_arity):
            out.append(dict(fwd))
    return out


def _is_algebra_morphism(A, B, phi, max_arity):
    SA, SB = A.species, B.species
    for c in sort_ids(SA.palette.colours):
        if SB.key(phi(A.eps(c))) != SB.key(B.eps(c)):
            return False
    if SB.key(phi(A.unit0())) != SB.key(B.unit0()):
        return False
    om = SA.palette.omega
    for n in range(max_arity + 1):
        for x in SA.elements(n):
            if n >= 2:
                sigma = (1, 0) + tuple(range(2, n))
                if SB.key(phi(SA.act(x, sigma))) != \
                        SB.key(SB.act(phi(x), sigma)):
                    return False
            cols = SA.colour_of(x)
            for i in range(n):
                for j in range(i + 1, n):
                    if cols[i] != om[cols[j]]:
                        continue
                    za = A.zeta(x, i, j)
                    zb = B.zeta(phi(x), i, j)
                    if za is None or zb is None:
                        continue
                    if SB.key(phi(za)) != SB.key(zb):
                        return False
            for m in range(max_arity + 1 - n):
                for y in SA.elements(m):
                    ba = A.box(x, y)
                    if ba is None:
                        continue
                    bb = B.box(phi(x), phi(y))
                    if bb is None:
                        continue
                    if SB.key(phi(ba)) != SB.key(bb):
                        return False
    return True


def fullness_probe(A: CircuitAlgebraOps, B: CircuitAlgebraOps,
                   corpus: dict, max_arity: int) -> dict:
    """Compare natural transformations nerve(A) -> nerve(B) with algebra
    morphisms A -> B found by exhaustive search."""
    PA = nerve(A, corpus)
    PB = nerve(B, corpus)
    nats = presheaf_maps(PA, PB)
    homs = algebra_morphisms(A, B, max_arity)
    return {"ok": len(nats) == len(homs),
            "natural_transformations": len(nats),
            "algebra_morphisms": len(homs)}
