import pytest

from feyngraph import (
    corolla,
    disjoint_union,
    is_isomorphic,
    line,
    stick,
    wheel,
)
from feyngraph.errors import NotAPort, NotLocallyBijective, RepeatedPort
from feyngraph.etale import (
    EtaleMorphism,
    ch_edge,
    compose,
    elements_category,
    glue_ports,
    identity_morphism,
    vertex_neighbourhood,
)


class TestCheckEtale:
    def test_identity(self):
        identity_morphism(wheel(2))  # does not raise

    def test_double_cover(self):
        w2, w1 = wheel(2), wheel(1)
        # wrap edges of the 2-wheel twice around the 1-wheel
        em = {("l", 0): ("l", 0), ("l", 1): ("l", 1),
              ("l", 2): ("l", 0), ("l", 3): ("l", 1)}
        hm = {("h", 3): ("h", 1), ("h", 0): ("h", 0),
              ("h", 1): ("h", 1), ("h", 2): ("h", 0)}
        vm = {("v", 0): ("v", 0), ("v", 1): ("v", 0)}
        EtaleMorphism(w2, w1, em, hm, vm)  # valid cover

    def test_valency_mismatch(self):
        c2, c3 = corolla(["a", "b"]), corolla(["a", "b", "c"])
        em = {x: x for x in ["a", "b", ("in", "a"), ("in", "b")]}
        hm = {("h", "a"): ("h", "a"), ("h", "b"): ("h", "b")}
        with pytest.raises(NotLocallyBijective):
            EtaleMorphism(c2, c3, em, hm, {"*": "*"})

    def test_composition_closed(self):
        g = wheel(1)
        for e in g.edges:
            m = ch_edge(g, e)
            compose(m, identity_morphism(stick()))  # still etale


class TestChEdge:
    def test_count_on_wheel(self):
        g = wheel(1)
        assert len({ch_edge(g, e).key() for e in g.edges}) == 2

    def test_stick_identity_and_tau(self):
        s = stick()
        assert ch_edge(s, "1").edge_map == {"1": "1", "2": "2"}
        assert ch_edge(s, "2").edge_map == {"1": "2", "2": "1"}


class TestNeighbourhood:
    def test_wheel_loop(self):
        w = wheel(1)
        emb = vertex_neighbourhood(w, ("v", 0))
        assert not emb.injective_tail and len(emb.glued_pairs) == 1
        assert len(emb.underlying.source.ports) == 2

    def test_corolla_identity_shape(self):
        c = corolla(["a", "b", "c"])
        emb = vertex_neighbourhood(c, "*")
        assert emb.injective_tail
        assert is_isomorphic(emb.underlying.source, c) is not None

    def test_line_middle_vertex(self):
        g = line(2)
        emb = vertex_neighbourhood(g, ("v", 1))
        assert emb.injective_tail
        assert len(emb.underlying.source.ports) == 2


class TestElements:
    def test_counts(self):
        els, _ = elements_category(stick())
        assert len(els) == 2 and all(e.shape == "stick" for e in els)
        els, _ = elements_category(wheel(1))
        assert len(els) == 3
        els, _ = elements_category(corolla(["a", "b", "c"]))
        assert len(els) == 7
        assert sum(1 for e in els if e.shape == "corolla") == 1

    def test_count_formula(self):
        for g in [wheel(2), line(2), disjoint_union(stick(), corolla(["a"]))]:
            els, _ = elements_category(g)
            assert len(els) == len(g.edges) + len(g.vertices)


class TestGluePorts:
    def test_stick_self_glue_is_identity(self):
        g, _ = glue_ports(stick(), [("1", "2")])
        assert is_isomorphic(g, stick()) is not None

    def test_corolla2_glue_is_wheel(self):
        g, _ = glue_ports(corolla(["a", "b"]), [("a", "b")])
        assert is_isomorphic(g, wheel(1)) is not None

    def test_two_corollas_glue(self):
        u = disjoint_union(corolla(["x"]), corolla(["y"]))
        g, _ = glue_ports(u, [(("L", "x"), ("R", "y"))])
        assert len(g.vertices) == 2 and not g.ports
        assert len(g.orbits()) == 1

    def test_not_a_port(self):
        with pytest.raises(NotAPort):
            glue_ports(wheel(1), [(("l", 0), ("l", 1))])

    def test_repeated_port(self):
        c = corolla(["a", "b", "c"])
        with pytest.raises(RepeatedPort):
            glue_ports(c, [("a", "b"), ("a", "c")])

    def test_commutes_with_union(self):
        c = corolla(["a", "b", "c"])
        g1, _ = glue_ports(c, [("a", "b")])
        left = disjoint_union(g1, wheel(1))
        u = disjoint_union(c, wheel(1))
        right, _ = glue_ports(u, [(("L", "a"), ("L", "b"))])
        assert is_isomorphic(left, right) is not None

    def test_order_independent(self):
        u = disjoint_union(corolla(["a", "b"]), corolla(["c", "d"]))
        p = [(("L", "a"), ("R", "c")), (("L", "b"), ("R", "d"))]
        g1, _ = glue_ports(u, p)
        g2, _ = glue_ports(u, p[::-1])
        assert is_isomorphic(g1, g2) is not None
