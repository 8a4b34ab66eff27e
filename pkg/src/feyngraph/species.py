"""Finite graphical species, evaluation on graphs, and circuit/modular
algebra structures with exhaustive axiom checkers.

A species assigns to each arity n a finite set of elements with a colour
tuple and a right permutation action.  Evaluation on a graph produces all
decorations: an edge colouring compatible with the palette involution and
an element at each vertex whose colours match the incident edges.

Axiom checking works with labeled elements (positions named by arbitrary
ids) so that all index bookkeeping lives in one place.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence

from .errors import (
    ColourMismatch,
    FormatError,
    OutOfBounds,
    ValencyOutOfRange,
)
from .graphs import FeynmanGraph, idkey, sort_ids


@dataclass(frozen=True)
class Palette:
    colours: frozenset
    omega: Mapping[Any, Any]

    def __post_init__(self):
        object.__setattr__(self, "colours", frozenset(self.colours))
        om = dict(self.omega)
        if set(om) != set(self.colours):
            raise FormatError("omega must be defined on exactly the colours")
        for c in self.colours:
            if om[om[c]] != c:
                raise FormatError("omega must be an involution")
        object.__setattr__(self, "omega", om)

    def to_json(self):
        return {"colours": sort_ids(self.colours),
                "omega": {repr(c): self.omega[c] for c in sort_ids(self.colours)}}


MONO = Palette(frozenset({"*"}), {"*": "*"})


class SpeciesOps:
    """Minimal interface: elements per arity, colours, right action."""

    palette: Palette
    n_max: int

    def elements(self, n: int) -> Sequence:
        raise NotImplementedError

    def colour_of(self, elem) -> tuple:
        raise NotImplementedError

    def act(self, elem, sigma: tuple):
        """Right action; colour_of(act(e, sigma))[i] == colour_of(e)[sigma[i]]."""
        raise NotImplementedError

    def arity(self, elem) -> int:
        return len(self.colour_of(elem))

    def key(self, elem):
        """Hashable identity of an element (overridden where elements are
        graph-valued and equality is by canonical form)."""
        return elem


class TableSpecies(SpeciesOps):
    """A species given by explicit finite tables.

    Element ids must be globally unique (across arities).  The action is
    stored for generating transpositions and composed on demand.
    """

    def __init__(self, palette: Palette, arity_sets: Mapping[int, Sequence],
                 colour_of: Mapping[Any, Sequence],
                 action: Optional[Mapping] = None):
        self.palette = palette
        self.arity_sets = {int(n): list(es) for n, es in arity_sets.items()}
        self.n_max = max(self.arity_sets, default=0)
        self._colour = {e: tuple(colour_of[e])
                        for es in self.arity_sets.values() for e in es}
        all_elems = [e for es in self.arity_sets.values() for e in es]
        if len(set(all_elems)) != len(all_elems):
            raise FormatError("element ids must be globally unique")
        for n, es in self.arity_sets.items():
            for e in es:
                if len(self._colour[e]) != n:
                    raise FormatError(f"element {e!r} must have {n} colours")
                if any(c not in palette.colours for c in self._colour[e]):
                    raise FormatError(f"element {e!r} uses unknown colours")
        # action[(elem, i)] = elem acted by the transposition (i, i+1), 0-based
        self._swap = dict(action or {})
        self._check_action()

    def _check_action(self):
        for n, es in self.arity_sets.items():
            for e in es:
                for i in range(n - 1):
                    f = self._swap.get((e, i))
                    if f is None:
                        if len(es) == 1:
                            self._swap[(e, i)] = e
                            f = e
                        else:
                            raise FormatError(
                                f"missing action of transposition {i} on {e!r}")
                    if f not in es:
                        raise FormatError("action must preserve arity")
                    col = self._colour[e]
                    want = col[:i] + (col[i + 1], col[i]) + col[i + 2:]
                    if self._colour[f] != want:
                        raise FormatError(
                            f"action on {e!r} at {i} is not colour-equivariant")
        # involutivity of generators
        for (e, i), f in list(self._swap.items()):
            if self._swap.get((f, i)) != e:
                raise FormatError("transposition action must be involutive")

    def elements(self, n):
        return list(self.arity_sets.get(n, []))

    def colour_of(self, elem):
        return self._colour[elem]

    def act(self, elem, sigma):
        n = len(sigma)
        if tuple(sigma) == tuple(range(n)):
            return elem
        # decompose sigma into adjacent transpositions (bubble sort);
        # applying them right-to-left realizes the right action.
        perm = list(sigma)
        e = elem
        # selection: repeatedly swap adjacent out-of-order entries of the
        # identity until it becomes sigma, acting on e along the way.
        cur = list(range(n))
        while cur != perm:
            for i in range(n - 1):
                # find a transposition moving cur closer to perm
                if cur[i] != perm[i]:
                    j = cur.index(perm[i])
                    while j > i:
                        cur[j - 1], cur[j] = cur[j], cur[j - 1]
                        e = self._swap[(e, j - 1)]
                        j -= 1
                    break
        return e


class TerminalSpecies(SpeciesOps):
    """One element per arity, monochrome."""

    def __init__(self, n_max: int = 8):
        self.palette = MONO
        self.n_max = n_max

    def elements(self, n):
        return [("k", n)] if 0 <= n <= self.n_max else []

    def colour_of(self, elem):
        return ("*",) * elem[1]

    def act(self, elem, sigma):
        return elem


def terminal_species(n_max: int = 8) -> TerminalSpecies:
    return TerminalSpecies(n_max)


# -- evaluation ------------------------------------------------------------------

@dataclass(frozen=True)
class Decoration:
    edge_colours: Mapping[Any, Any]
    vertex_elems: Mapping[Any, Any]
    half_orders: Mapping[Any, tuple]

    def key(self):
        ec = tuple(sorted(((repr(e), repr(c)) for e, c in self.edge_colours.items())))
        ve = tuple(sorted(((repr(v), repr(x)) for v, x in self.vertex_elems.items())))
        return (ec, ve)

    def __eq__(self, other):
        return isinstance(other, Decoration) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def half_order(g: FeynmanGraph, v) -> tuple:
    return tuple(sorted(g.halves_at(v), key=idkey))


def evaluate_species(S: SpeciesOps, g: FeynmanGraph,
                     port_colours: Optional[Mapping] = None) -> list:
    """All S-decorations of g.

    The colour at position i of the element at v is the colour of the
    edge arriving at v through the i-th half-edge, i.e. colour(tau s(h_i))
    for the sorted half-edge order.
    """
    for v in g.vertices:
        if g.valency(v) > S.n_max:
            raise ValencyOutOfRange(f"valency of {v!r} exceeds the species bound")
    omega = S.palette.omega
    orbit_reps = [min(o, key=idkey) for o in g.orbits()]
    orders = {v: half_order(g, v) for v in g.vertices}
    results = []

    def extend_edges(i, colouring):
        if i == len(orbit_reps):
            results.append(dict(colouring))
            return
        e = orbit_reps[i]
        for c in sort_ids(S.palette.colours):
            colouring[e] = c
            colouring[g.tau[e]] = omega[c]
            if port_colours:
                if e in port_colours and port_colours[e] != c:
                    continue
                te = g.tau[e]
                if te in port_colours and port_colours[te] != omega[c]:
                    continue
            extend_edges(i + 1, colouring)

    extend_edges(0, {})
    decorations = []
    for colouring in results:
        choices = []
        ok = True
        for v in sort_ids(g.vertices):
            want = tuple(colouring[g.tau[g.s[h]]] for h in orders[v])
            opts = [x for x in S.elements(len(want)) if S.colour_of(x) == want]
            if not opts:
                ok = False
                break
            choices.append((v, opts))
        if not ok:
            continue
        for combo in itertools.product(*(opts for _, opts in choices)):
            decorations.append(Decoration(
                dict(colouring),
                {v: x for (v, _), x in zip(choices, combo)},
                dict(orders)))
    return decorations


# -- labeled elements --------------------------------------------------------------

@dataclass(frozen=True)
class Labeled:
    """An element together with distinct names for its positions."""
    elem: Any
    labels: tuple

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise FormatError("position labels must be distinct")


class CircuitAlgebraOps:
    """Interface for circuit-algebra structure over a SpeciesOps.

    box/zeta return None when the result would exceed the carrier bounds;
    zeta raises ColourMismatch off its colour-matched domain.
    """

    species: SpeciesOps
    nonunital: bool = False

    def box(self, a, b):
        raise NotImplementedError

    def zeta(self, a, i: int, j: int):
        raise NotImplementedError

    def eps(self, c):
        raise NotImplementedError

    def unit0(self):
        raise NotImplementedError

    # labeled wrappers ----------------------------------------------------
    def lab(self, elem, labels) -> Labeled:
        return Labeled(elem, tuple(labels))

    def lab_normalize(self, a: Labeled) -> Labeled:
        order = sorted(range(len(a.labels)), key=lambda i: idkey(a.labels[i]))
        sigma = tuple(order)
        return Labeled(self.species.act(a.elem, sigma),
                       tuple(a.labels[i] for i in order))

    def lab_eq(self, a: Labeled, b: Labeled) -> bool:
        if set(a.labels) != set(b.labels):
            return False
        return self.species.key(self.lab_normalize(a).elem) == \
            self.species.key(self.lab_normalize(b).elem)

    def lab_box(self, a: Labeled, b: Labeled) -> Optional[Labeled]:
        r = self.box(a.elem, b.elem)
        if r is None:
            return None
        return Labeled(r, a.labels + b.labels)

    def lab_zeta(self, a: Labeled, x, y) -> Optional[Labeled]:
        i, j = a.labels.index(x), a.labels.index(y)
        if i > j:
            i, j = j, i
        r = self.zeta(a.elem, i, j)
        if r is None:
            return None
        rest = tuple(l for k, l in enumerate(a.labels) if k not in (i, j))
        return Labeled(r, rest)

    def lab_diamond(self, a: Labeled, b: Labeled, x, y) -> Optional[Labeled]:
        ab = self.lab_box(a, b)
        return None if ab is None else self.lab_zeta(ab, x, y)

    def lab_rename(self, a: Labeled, mapping: Mapping) -> Labeled:
        return Labeled(a.elem, tuple(mapping.get(l, l) for l in a.labels))

    def colour_at(self, a: Labeled, x):
        return self.species.colour_of(a.elem)[a.labels.index(x)]


class FiniteCircuitAlgebra(CircuitAlgebraOps):
    """Circuit algebra given by explicit tables over a TableSpecies."""

    def __init__(self, species: TableSpecies, box_table: Mapping,
                 zeta_table: Mapping, eps_table: Mapping,
                 external_unit=None, nonunital: bool = False):
        self.species = species
        self._box = dict(box_table)
        self._zeta = dict(zeta_table)
        self._eps = dict(eps_table)
        self._unit = external_unit
        self.nonunital = nonunital
        if not nonunital and external_unit is None:
            raise FormatError("a unital circuit algebra needs an external unit")
        for c in species.palette.colours:
            if c not in self._eps:
                raise FormatError(f"eps missing at colour {c!r}")
            col = species.colour_of(self._eps[c])
            if col != (c, species.palette.omega[c]):
                raise FormatError(f"eps({c!r}) must have colours (c, omega c)")

    def box(self, a, b):
        n = self.species.arity(a) + self.species.arity(b)
        if n > self.species.n_max:
            return None
        try:
            return self._box[(a, b)]
        except KeyError:
            raise FormatError(f"box undefined on ({a!r}, {b!r})")

    def zeta(self, a, i, j):
        col = self.species.colour_of(a)
        if col[i] != self.species.palette.omega[col[j]]:
            raise ColourMismatch(
                f"zeta needs colours c, omega c at positions {i}, {j}")
        try:
            return self._zeta[(a, i, j)]
        except KeyError:
            raise FormatError(f"zeta undefined on ({a!r}, {i}, {j})")

    def eps(self, c):
        return self._eps[c]

    def unit0(self):
        if self.nonunital:
            raise OutOfBounds("nonunital algebra has no external unit")
        return self._unit


# -- axiom checkers ---------------------------------------------------------------

def _all_labeled(A: CircuitAlgebraOps, max_arity: Optional[int] = None):
    S = A.species
    top = S.n_max if max_arity is None else min(max_arity, S.n_max)
    out = []
    for n in range(top + 1):
        for e in S.elements(n):
            out.append(A.lab(e, tuple(("p", i) for i in range(n))))
    return out


def _fresh(labels, k):
    return tuple(("q", i) for i in range(k))


def _relabel_disjoint(a: Labeled, tag) -> Labeled:
    return Labeled(a.elem, tuple((tag, l) for l in a.labels))


def _contractible_pairs(A, a: Labeled):
    om = A.species.palette.omega
    col = A.species.colour_of(a.elem)
    for i in range(len(a.labels)):
        for j in range(i + 1, len(a.labels)):
            if col[i] == om[col[j]]:
                yield a.labels[i], a.labels[j]


def check_circuit_axioms(A: CircuitAlgebraOps,
                         max_arity: Optional[int] = None) -> dict:
    """Exhaustively verify C1 (box associativity), commutativity, the
    external unit law, C2 (contractions commute), C3 (contraction and box
    commute), and the eps unit law within the carrier bounds.

    Returns {"ok": bool, "violations": [...], "checked": int}.
    """
    S = A.species
    elems = _all_labeled(A, max_arity)
    violations = []
    checked = 0

    def note(kind, *wit):
        violations.append((kind,) + tuple(repr(w) for w in wit))

    pool = [_relabel_disjoint(a, "a") for a in elems]
    pool_b = [_relabel_disjoint(a, "b") for a in elems]
    pool_c = [_relabel_disjoint(a, "c") for a in elems]
    # C1 associativity + commutativity
    for a in pool:
        for b in pool_b:
            ab = A.lab_box(a, b)
            if ab is None:
                continue
            ba = A.lab_box(b, a)
            if ba is not None:
                checked += 1
                if not A.lab_eq(ab, ba):
                    note("commutativity", a.elem, b.elem)
            for c in pool_c:
                abc1 = A.lab_box(ab, c)
                bc = A.lab_box(b, c)
                abc2 = None if bc is None else A.lab_box(a, bc)
                if abc1 is None or abc2 is None:
                    continue
                checked += 1
                if not A.lab_eq(abc1, abc2):
                    note("C1", a.elem, b.elem, c.elem)
    # external unit
    if not A.nonunital:
        u = A.lab(A.unit0(), ())
        for a in pool:
            checked += 1
            au = A.lab_box(a, u)
            ua = A.lab_box(u, a)
            if au is None or ua is None or not (A.lab_eq(au, a) and A.lab_eq(ua, a)):
                note("unit", a.elem)
    # C2: disjoint contractions commute
    for a in pool:
        prs = list(_contractible_pairs(A, a))
        for (x1, y1) in prs:
            for (x2, y2) in prs:
                if {x1, y1} & {x2, y2}:
                    continue
                first = A.lab_zeta(a, x1, y1)
                if first is None:
                    continue
                second = A.lab_zeta(first, x2, y2) \
                    if _still_contractible(A, first, x2, y2) else None
                other = A.lab_zeta(a, x2, y2)
                other2 = None if other is None or not _still_contractible(
                    A, other, x1, y1) else A.lab_zeta(other, x1, y1)
                if second is None or other2 is None:
                    continue
                checked += 1
                if not A.lab_eq(second, other2):
                    note("C2", a.elem, (x1, y1), (x2, y2))
    # C3: zeta(a box b) = zeta(a) box b for a contraction inside a
    for a in pool:
        for b in pool_b:
            ab = A.lab_box(a, b)
            if ab is None:
                continue
            for (x, y) in _contractible_pairs(A, a):
                lhs = A.lab_zeta(ab, x, y)
                za = A.lab_zeta(a, x, y)
                rhs = None if za is None else A.lab_box(za, b)
                if lhs is None or rhs is None:
                    continue
                checked += 1
                if not A.lab_eq(lhs, rhs):
                    note("C3", a.elem, b.elem, (x, y))
    # eps law: contracting a stick onto a position is a renaming
    om = S.palette.omega
    for a in pool:
        col = S.colour_of(a.elem)
        for i, x in enumerate(a.labels):
            e = A.lab(A.eps(om[col[i]]), (("e", 0), ("e", 1)))
            ae = A.lab_box(a, e)
            if ae is None:
                continue
            got = A.lab_zeta(ae, x, ("e", 0))
            if got is None:
                continue
            want = A.lab_rename(a, {x: ("e", 1)})
            checked += 1
            if not A.lab_eq(got, want):
                note("eps", a.elem, x)
    # eps compatibility with omega: eps(omega c) = swap . eps(c)
    for c in sort_ids(S.palette.colours):
        checked += 1
        if S.key(S.act(A.eps(c), (1, 0))) != S.key(A.eps(om[c])):
            note("eps-omega", c)
    violations.sort()
    return {"ok": not violations, "violations": violations, "checked": checked}


def _still_contractible(A, a: Labeled, x, y) -> bool:
    om = A.species.palette.omega
    cx = A.colour_at(a, x)
    cy = A.colour_at(a, y)
    return cx == om[cy]


def derive_multiplication(A: CircuitAlgebraOps) -> Callable:
    """The modular multiplication: contract one matched pair of a box."""
    def diamond(a: Labeled, b: Labeled, x, y) -> Optional[Labeled]:
        if A.colour_at(a, x) != A.species.palette.omega[A.colour_at(b, y)]:
            raise ColourMismatch("diamond needs matched colours")
        return A.lab_diamond(a, b, x, y)
    return diamond


def check_modular_axioms(A: CircuitAlgebraOps,
                         max_arity: Optional[int] = None) -> dict:
    """Verify M1 (diamond associativity), M2 (contractions commute),
    M3 (diamond and contraction commute), M4 (parallel multiplication),
    and the eps unit law for the derived multiplication.
    """
    S = A.species
    om = S.palette.omega
    diamond = derive_multiplication(A)
    elems = _all_labeled(A, max_arity)
    pool = [_relabel_disjoint(a, "a") for a in elems]
    pool_b = [_relabel_disjoint(a, "b") for a in elems]
    pool_c = [_relabel_disjoint(a, "c") for a in elems]
    violations = []
    checked = 0

    def note(kind, *wit):
        violations.append((kind,) + tuple(repr(w) for w in wit))

    def matched(a, b):
        for x in a.labels:
            for y in b.labels:
                if A.colour_at(a, x) == om[A.colour_at(b, y)]:
                    yield x, y

    # M1: (a <>_{x,y} b) <>_{u,v} c = a <>_{x,y} (b <>_{u,v} c)
    for a in pool:
        for b in pool_b:
            for (x, y) in matched(a, b):
                ab = diamond(a, b, x, y)
                for c in pool_c:
                    for u in b.labels:
                        if u == y:
                            continue
                        for v in c.labels:
                            if A.colour_at(b, u) != om[A.colour_at(c, v)]:
                                continue
                            try:
                                lhs = None if ab is None else diamond(ab, c, u, v)
                                bc = diamond(b, c, u, v)
                                rhs = None if bc is None else diamond(a, bc, x, y)
                            except ColourMismatch:
                                note("M1", a.elem, b.elem, c.elem, (x, y, u, v))
                                continue
                            if lhs is None or rhs is None:
                                continue
                            checked += 1
                            if not A.lab_eq(lhs, rhs):
                                note("M1", a.elem, b.elem, c.elem, (x, y, u, v))
    # M2: same statement as C2
    for a in pool:
        prs = list(_contractible_pairs(A, a))
        for (x1, y1) in prs:
            for (x2, y2) in prs:
                if {x1, y1} & {x2, y2}:
                    continue
                f = A.lab_zeta(a, x1, y1)
                s = None if f is None or not _still_contractible(A, f, x2, y2) \
                    else A.lab_zeta(f, x2, y2)
                o = A.lab_zeta(a, x2, y2)
                o2 = None if o is None or not _still_contractible(A, o, x1, y1) \
                    else A.lab_zeta(o, x1, y1)
                if s is None or o2 is None:
                    continue
                checked += 1
                if not A.lab_eq(s, o2):
                    note("M2", a.elem, (x1, y1), (x2, y2))
    # M3: zeta_{u,v}(a <>_{x,y} b) = zeta_{u,v}(a) <>_{x,y} b, u,v in a
    for a in pool:
        for b in pool_b:
            for (x, y) in matched(a, b):
                ab = diamond(a, b, x, y)
                for (u, v) in _contractible_pairs(A, a):
                    if {u, v} & {x}:
                        continue
                    try:
                        lhs = None if ab is None else A.lab_zeta(ab, u, v)
                        za = A.lab_zeta(a, u, v)
                        rhs = None if za is None or x not in za.labels \
                            else diamond(za, b, x, y)
                    except ColourMismatch:
                        note("M3", a.elem, b.elem, (x, y, u, v))
                        continue
                    if lhs is None or rhs is None:
                        continue
                    checked += 1
                    if not A.lab_eq(lhs, rhs):
                        note("M3", a.elem, b.elem, (x, y, u, v))
    # M4: two parallel edges between a and b can be contracted in either order
    for a in pool:
        for b in pool_b:
            ms = list(matched(a, b))
            for (x, y) in ms:
                for (u, v) in ms:
                    if x == u or y == v:
                        continue
                    try:
                        ab1 = diamond(a, b, x, y)
                        lhs = None if ab1 is None else A.lab_zeta(ab1, u, v)
                        ab2 = diamond(a, b, u, v)
                        rhs = None if ab2 is None else A.lab_zeta(ab2, x, y)
                    except ColourMismatch:
                        note("M4", a.elem, b.elem, (x, y, u, v))
                        continue
                    if lhs is None or rhs is None:
                        continue
                    checked += 1
                    if not A.lab_eq(lhs, rhs):
                        note("M4", a.elem, b.elem, (x, y, u, v))
    # unit law for diamond
    for a in pool:
        col = S.colour_of(a.elem)
        for i, x in enumerate(a.labels):
            e = A.lab(A.eps(om[col[i]]), (("e", 0), ("e", 1)))
            got = diamond(a, e, x, ("e", 0))
            want = A.lab_rename(a, {x: ("e", 1)})
            if got is None:
                continue
            checked += 1
            if not A.lab_eq(got, want):
                note("Munit", a.elem, x)
    violations.sort()
    return {"ok": not violations, "violations": violations, "checked": checked}


# -- JSON -------------------------------------------------------------------------

def palette_from_json(data: dict) -> Palette:
    try:
        colours = list(data["colours"])
        omega_raw = data["omega"]
        lookup = {str(c): c for c in colours}
        omega = {lookup.get(k, k): v for k, v in omega_raw.items()}
        return Palette(frozenset(colours), omega)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad palette: {exc}") from exc


def species_from_json(data: dict) -> TableSpecies:
    try:
        palette = palette_from_json(data["palette"])
        arity = {int(n): list(es) for n, es in data["arity"].items()}
        colour_of = {e: tuple(cs) for e, cs in data["colour_of"].items()}
        action = {}
        for k, v in data.get("action", {}).items():
            e, i = k.rsplit("|", 1)
            action[(e, int(i))] = v
        return TableSpecies(palette, arity, colour_of, action)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad species: {exc}") from exc


def algebra_from_json(data: dict) -> FiniteCircuitAlgebra:
    try:
        species = species_from_json(data)
        box = {}
        for k, v in data.get("box", {}).items():
            a, b = k.split("|")
            box[(a, b)] = v
        zeta = {}
        for k, v in data.get("zeta", {}).items():
            e, i, j = k.rsplit("|", 2)
            zeta[(e, int(i), int(j))] = v
        eps_raw = data.get("eps", {})
        lookup = {str(c): c for c in species.palette.colours}
        eps = {lookup.get(k, k): v for k, v in eps_raw.items()}
        return FiniteCircuitAlgebra(
            species, box, zeta, eps,
            external_unit=data.get("external_unit"),
            nonunital=bool(data.get("nonunital", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad algebra: {exc}") from exc
