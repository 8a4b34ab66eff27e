"""Kleisli morphisms, nerve computation, and the Segal checker."""

import json

import pytest

from feyngraph.errors import (CorpusNotElementClosed, Mismatch,
                              ValencyOutOfRange)
from feyngraph.etale import EtaleMorphism
from feyngraph.graphs import corolla, line, sort_ids, stick, wheel
from feyngraph.monads import half_order, hom_pointed
from feyngraph.nerve import (FinitePresheaf, algebra_morphisms, check_segal,
                             decoration_key,
                             fullness_probe, graphs_equal, kleisli_compose,
                             kleisli_deletion_homs,
                             kleisli_equal, kleisli_from_etale,
                             kleisli_from_pointed, kleisli_identity,
                             kleisli_refinement, make_kleisli,
                             mutated_presheaves, nerve, presheaf_maps,
                             refinement_of_corolla, restrict_kleisli)
from feyngraph.species import evaluate_species
from feyngraph.substitution import GraphOfGraphs, substitute

from helpers_nerve import corpus14, dumbbell, parity_algebra, theta
from helpers_species import MONO, TWO, tuple_algebra


# -- Kleisli morphisms ---------------------------------------------------------------

CORPUS_GRAPHS = [stick(), corolla([0]), corolla([0, 1]), wheel(1), wheel(2),
                 line(1), line(2), corolla([])]


@pytest.mark.parametrize("g", CORPUS_GRAPHS, ids=lambda g: repr(g))
def test_identity_composes_to_itself(g):
    i = kleisli_identity(g)
    assert kleisli_equal(kleisli_compose(i, i), i)


def _line_refinement(g, v):
    """Refine a bivalent vertex v of g by a 2-line piece."""
    h1, h2 = half_order(g, v)
    pieces = dict(GraphOfGraphs.identity(g).pieces)
    pieces[v] = (line(1), {("l", 0): h1, ("l", 3): h2})
    return GraphOfGraphs(g, pieces)


def test_refinement_unit_laws():
    g = line(2)
    gog = _line_refinement(g, sort_ids(g.vertices)[0])
    kref = kleisli_refinement(gog)
    assert kleisli_equal(kleisli_compose(kref, kleisli_identity(g)), kref)
    assert kleisli_equal(
        kleisli_compose(kleisli_identity(kref.target), kref), kref)


def test_refinements_compose_to_nested_substitution():
    g = line(2)
    k1 = kleisli_refinement(_line_refinement(g, sort_ids(g.vertices)[0]))
    h = k1.target
    k2 = kleisli_refinement(
        _line_refinement(h, sort_ids(h.vertices)[0]))
    comp = kleisli_compose(k2, k1)
    assert graphs_equal(comp.source, g)
    assert graphs_equal(comp.target, k2.target)
    # a composite of refinements is a refinement: the tail deletes nothing
    assert not comp.pointed_tail.deleted
    # and its colimit carries exactly the nested substitution's vertices
    direct = substitute(comp.refinement)
    assert len(direct.colimit.vertices) == len(k2.target.vertices)


def _kappa_presentations():
    """The wheel-to-stick morphism, presented as a pointed deletion and as
    a stick-piece refinement with an etale tail."""
    w1, st = wheel(1), stick()
    pointed = [kleisli_from_pointed(pm) for pm in hom_pointed(w1, st)]
    v = next(iter(w1.vertices))
    h1, h2 = half_order(w1, v)
    pieces = {v: (stick(), {"1": h1, "2": h2})}
    colim = substitute(GraphOfGraphs(w1, pieces)).colimit
    ce = sort_ids(colim.edges)
    refined = [make_kleisli(w1, st, pieces, set(), amap, {}, {})
               for amap in ({ce[0]: "1", ce[1]: "2"},
                            {ce[0]: "2", ce[1]: "1"})
               if all(amap[colim.tau[c]] == st.tau[amap[c]] for c in ce)]
    return pointed, refined


def test_kappa_zigzag_equality():
    pointed, refined = _kappa_presentations()
    assert len(pointed) == 2 and len(refined) == 2
    matrix = [[kleisli_equal(a, b) for b in pointed] for a in refined]
    # each presentation matches exactly one pointed morphism, and the two
    # labelings (kappa vs tau

    # kappa) stay distinct
    assert sorted(map(tuple, matrix)) == [(False, True), (True, False)]


def test_deletion_composite_differs_from_identity():
    w1 = wheel(1)
    idw = kleisli_identity(w1)
    endos = [kleisli_from_pointed(pm) for pm in hom_pointed(w1, w1)]
    assert all(not kleisli_equal(idw, k) for k in endos if
               k.pointed_tail.deleted or not graphs_equal(
                   k.refinement.pieces[next(iter(w1.vertices))][0],
                   idw.refinement.pieces[next(iter(w1.vertices))][0]))


@pytest.mark.parametrize("G", [wheel(1), wheel(2)], ids=["W1", "W2"])
def test_ch_e_after_kappa_is_a_pointed_morphism(G):
    w1, st = wheel(1), stick()
    kappas = [kleisli_from_pointed(pm) for pm in hom_pointed(w1, st)]
    e = sort_ids(G.edges)[0]
    ch = kleisli_from_etale(
        EtaleMorphism(st, G, {"1": e, "2": G.tau[e]}, {}, {}))
    targets = [kleisli_from_pointed(p) for p in hom_pointed(w1, G)]
    for k in kappas:
        comp = kleisli_compose(ch, k)
        hits = [p for p in targets if kleisli_equal(comp, p)]
        assert len(hits) == 1


def test_equality_is_a_congruence():
    pointed, refined = _kappa_presentations()
    pairs = [(a, b) for a in refined for b in pointed
             if kleisli_equal(a, b)]
    assert pairs
    G = wheel(2)
    e = sort_ids(G.edges)[0]
    ch = kleisli_from_etale(
        EtaleMorphism(stick(), G, {"1": e, "2": G.tau[e]}, {}, {}))
    for a, b in pairs:
        assert kleisli_equal(kleisli_compose(ch, a), kleisli_compose(ch, b))
        i = kleisli_identity(wheel(1))
        assert kleisli_equal(kleisli_compose(a, i), kleisli_compose(b, i))


def test_compose_endpoint_mismatch():
    with pytest.raises(Mismatch):
        kleisli_compose(kleisli_identity(stick()),
                        kleisli_identity(wheel(1)))


def test_non_isomorphic_colimits_unequal():
    g = line(2)
    a = kleisli_identity(g)
    v = sort_ids(g.vertices)[0]
    h1, h2 = half_order(g, v)
    pieces = dict(GraphOfGraphs.identity(g).pieces)
    pieces[v] = (line(1), {("l", 0): h1, ("l", 3): h2})
    b = kleisli_refinement(GraphOfGraphs(g, pieces))
    assert not kleisli_equal(a, b)  # different targets
    assert a.key() != b.key()


# -- nerve and restrictions ----------------------------------------------------------

def test_nerve_of_terminal_algebra_is_singletons():
    A = tuple_algebra(MONO, 6)
    P = nerve(A, corpus14())
    assert all(len(ks) == 1 for ks in P.sets.values())
    assert check_segal(P)["ok"]


def test_ch_e_reads_off_edge_colour():
    A = tuple_algebra(TWO, 4)
    corpus = {"stick": stick(), "corolla2": corolla([0, 1]),
              "wheel1": wheel(1)}
    P = nerve(A, corpus)
    # identify each stick element by its colour at edge "1"
    by_key = {decoration_key(d): dict(d.edge_colours)["1"]
              for d in evaluate_species(A.species, stick())}
    w1 = wheel(1)
    e = sort_ids(w1.edges)[0]
    rec = next(r for r in P.morphisms.values()
               if r["kind"] == "ch" and r["from_graph"] == "wheel1"
               and r.get("edge") == repr(e))
    for d in evaluate_species(A.species, w1):
        assert by_key[rec["map"][decoration_key(d)]] == \
            dict(d.edge_colours)[e]


def test_refinement_restriction_is_the_structure_map():
    """Restriction along a refinement of a 2-corolla by the 2-vertex line
    graph equals box at the vertices followed by zeta on the inner pair."""
    A = tuple_algebra(TWO, 4)
    S = A.species
    cor, H = corolla([0, 1]), line(2)
    v = next(iter(cor.vertices))
    halves = half_order(cor, v)
    ports = sort_ids(H.ports)
    kl = refinement_of_corolla(cor, H, dict(zip(ports, halves)))
    boundary = dict(zip(ports, halves))
    for dec in evaluate_species(S, H):
        got = restrict_kleisli(A, kl, dec)
        acc = A.unit0()
        slots = []
        for u in sort_ids(H.vertices):
            order = dec.half_orders[u]
            want = half_order(H, u)
            sigma = tuple(order.index(h) for h in want)
            acc = A.box(acc, S.act(dec.vertex_elems[u], sigma))
            slots += list(want)
        hit = next((i, j) for i in range(len(slots))
                   for j in range(i + 1, len(slots))
                   if H.tau[H.s[slots[i]]] == H.s[slots[j]])
        acc = A.zeta(acc, *hit)
        del slots[hit[1]], slots[hit[0]]
        pos = {boundary[H.tau[H.s[h]]]: k for k, h in enumerate(slots)}
        sigma = tuple(pos[h] for h in sorted(halves, key=repr))
        assert S.key(got.vertex_elems[v]) == S.key(S.act(acc, sigma))
        assert {got.edge_colours[e] for e in cor.edges} <= {"+", "-"}


def test_deletion_restriction_inserts_the_unit():
    A = parity_algebra(4)
    w1, w2 = wheel(1), wheel(2)
    homs = kleisli_deletion_homs(w2, w1)
    single = [kl for kl in homs
              if sum(len(p.vertices) for p, _ in
                     kl.refinement.pieces.values()) == 1]
    assert single
    parity = {decoration_key(d): sum(x[1][2] for x in
                                     d.vertex_elems.items()) % 2
              for d in evaluate_species(A.species, w2)}
    for kl in single:
        for d in evaluate_species(A.species, w1):
            d2 = restrict_kleisli(A, kl, d)
            # the even unit at the deleted vertex keeps the total parity
            assert parity[decoration_key(d2)] == \
                sum(x[1][2] for x in d.vertex_elems.items()) % 2
    # deleting every vertex factors through the stick: all images are even
    full = [kl for kl in homs if kl not in single and
            all(not p.vertices for p, _ in kl.refinement.pieces.values())]
    for kl in full:
        for d in evaluate_species(A.species, w1):
            d2 = restrict_kleisli(A, kl, d)
            assert parity[decoration_key(d2)] == 0


def test_nerve_valency_out_of_range():
    A = tuple_algebra(MONO, 2)
    with pytest.raises(ValencyOutOfRange):
        nerve(A, {"stick": stick(), "corolla3": corolla([0, 1, 2])})


def test_nerve_requires_element_closure():
    A = tuple_algebra(MONO, 4)
    with pytest.raises(CorpusNotElementClosed):
        nerve(A, {"wheel1": wheel(1), "stick": stick()})   # no 2-corolla


# -- Segal condition -----------------------------------------------------------------

ALGEBRAS = [
    ("mono", lambda: tuple_algebra(MONO, 6)),
    ("two-colour", lambda: tuple_algebra(TWO, 6)),
    ("parity", lambda: parity_algebra(6)),
]


@pytest.mark.parametrize("name,mk", ALGEBRAS, ids=[a[0] for a in ALGEBRAS])
def test_segal_passes_for_bounded_algebras(name, mk):
    P = nerve(mk(), corpus14())
    rep = check_segal(P)
    assert rep["ok"], rep
    assert sorted(rep["corpus"]) == sorted(corpus14())
    assert len(rep["corpus"]) >= 12


def test_segal_elementary_graphs_trivially_pass():
    P = nerve(parity_algebra(4), {"stick": stick(), "corolla0": corolla([]),
                                  "corolla1": corolla([0]),
                                  "corolla2": corolla([0, 1])})
    rep = check_segal(P)
    assert rep["ok"]
    assert all(e.get("elementary") for e in rep["per_graph"].values())


def test_segal_corpus_extension_stability():
    A = parity_algebra(6)
    small = {n: g for n, g in corpus14().items()
             if n not in ("wheel3", "dumbbell")}
    assert check_segal(nerve(A, small))["ok"]
    assert check_segal(nerve(A, corpus14()))["ok"]


def test_segal_requires_element_restrictions():
    P = nerve(parity_algebra(4), {"stick": stick(),
                                  "corolla2": corolla([0, 1]),
                                  "wheel1": wheel(1)})
    broken = FinitePresheaf(
        dict(P.corpus), dict(P.sets),
        {n: r for n, r in P.morphisms.items()
         if not (r["kind"] == "ch" and r["from_graph"] == "wheel1"
                 and r.get("vertex"))})
    with pytest.raises(CorpusNotElementClosed):
        check_segal(broken)


def test_ten_mutants_fail_with_witnesses():
    P = nerve(parity_algebra(6), corpus14())
    muts = mutated_presheaves(P, 10)
    assert len(muts) == 10
    for name, Q in muts:
        rep = check_segal(Q)
        assert not rep["ok"], name
        bad = [n for n, e in rep["per_graph"].items() if not e["ok"]]
        assert bad, name
        assert all("witness" in rep["per_graph"][n] for n in bad), name


# -- fullness probe ------------------------------------------------------------------

def test_fullness_probe_terminal_to_parity():
    A = tuple_algebra(MONO, 6)
    B = parity_algebra(6)
    probe = fullness_probe(A, B, corpus14(), max_arity=4)
    assert probe["ok"], probe
    assert probe["natural_transformations"] == 2
    assert probe["algebra_morphisms"] == 2


def test_fullness_probe_parity_endomorphisms():
    B = parity_algebra(6)
    probe = fullness_probe(B, B, corpus14(), max_arity=4)
    assert probe["ok"], probe
    assert probe["natural_transformations"] == len(
        algebra_morphisms(B, B, 4))


def test_presheaf_maps_identity_exists():
    P = nerve(parity_algebra(4), {"stick": stick(), "corolla0": corolla([]),
                                  "corolla1": corolla([0]),
                                  "corolla2": corolla([0, 1]),
                                  "wheel1": wheel(1)})
    maps = presheaf_maps(P, P)
    ident = {n: {k: k for k in P.sets[n]} for n in P.corpus}
    assert ident in maps


# -- serialization -------------------------------------------------------------------

def test_presheaf_json_round_trip():
    P = nerve(parity_algebra(6), corpus14())
    data = json.loads(json.dumps(P.to_json(), sort_keys=True))
    P2 = FinitePresheaf.from_json(data)
    assert check_segal(P2)["ok"]
    assert json.dumps(P2.to_json(), sort_keys=True) == \
        json.dumps(P.to_json(), sort_keys=True)
