"""Fixtures for the Kleisli/nerve/Segal tests: a parity circuit algebra
(one colour, two elements per arity) and an element-closed corpus of
fourteen named graphs."""

from feyngraph.graphs import (FeynmanGraph, corolla, disjoint_union, line,
                              stick, wheel)
from feyngraph.species import FiniteCircuitAlgebra, TableSpecies

from helpers_species import MONO


def parity_algebra(n_max: int) -> FiniteCircuitAlgebra:
    """S_n = Z/2 with trivial action; box adds parities, zeta keeps them,
    eps and the external unit are even."""
    arity = {n: [("p", n, 0), ("p", n, 1)] for n in range(n_max + 1)}
    colour = {e: ("*",) * e[1] for es in arity.values() for e in es}
    action = {(e, i): e for es in arity.values() for e in es
              for i in range(e[1] - 1)}
    S = TableSpecies(MONO, arity, colour, action)
    box, zeta = {}, {}
    for n in range(n_max + 1):
        for m in range(n_max + 1 - n):
            for a in (0, 1):
                for b in (0, 1):
                    box[(("p", n, a), ("p", m, b))] = \
                        ("p", n + m, (a + b) % 2)
    for n in range(2, n_max + 1):
        for a in (0, 1):
            for i in range(n):
                for j in range(i + 1, n):
                    zeta[(("p", n, a), i, j)] = ("p", n - 2, a)
    return FiniteCircuitAlgebra(S, box, zeta, {"*": ("p", 2, 0)},
                                external_unit=("p", 0, 0))


def theta() -> FeynmanGraph:
    """Two trivalent vertices joined by three parallel edges."""
    edges, tau, halves, s, t = [], {}, [], {}, {}
    for i in range(3):
        a, b = ("e", i, 0), ("e", i, 1)
        edges += [a, b]
        tau[a] = b
        tau[b] = a
        for v, e in ((("v", 0), a), (("v", 1), b)):
            h = ("h", v, i)
            halves.append(h)
            s[h] = e
            t[h] = v
    return FeynmanGraph(edges, tau, halves, s, t, [("v", 0), ("v", 1)])


def dumbbell() -> FeynmanGraph:
    """Two loops joined by a bridge edge; both vertices trivalent."""
    edges, tau, halves, s, t = [], {}, [], {}, {}
    for v in (0, 1):
        a, b = ("l", v, 0), ("l", v, 1)
        edges += [a, b]
        tau[a] = b
        tau[b] = a
        for k, e in ((0, a), (1, b)):
            h = ("h", v, k)
            halves.append(h)
            s[h] = e
            t[h] = ("v", v)
    a, b = ("m", 0), ("m", 1)
    edges += [a, b]
    tau[a] = b
    tau[b] = a
    for v, e in ((0, a), (1, b)):
        h = ("h", v, 2)
        halves.append(h)
        s[h] = e
        t[h] = ("v", v)
    return FeynmanGraph(edges, tau, halves, s, t, [("v", 0), ("v", 1)])


def corpus14() -> dict:
    """Element-closed corpus: all corollas up to valency 3, the stick,
    wheels, lines, the theta graph, the dumbbell, and two disjoint
    corolla pairs that pin down multiplicativity."""
    return {
        "stick": stick(),
        "corolla0": corolla([]),
        "corolla1": corolla([0]),
        "corolla2": corolla([0, 1]),
        "corolla3": corolla([0, 1, 2]),
        "wheel1": wheel(1),
        "wheel2": wheel(2),
        "wheel3": wheel(3),
        "line1": line(1),
        "line2": line(2),
        "theta": theta(),
        "dumbbell": dumbbell(),
        "cc1": disjoint_union(corolla([0]), corolla([0])),
        "cc12": disjoint_union(corolla([0]), corolla([0, 1])),
    }
