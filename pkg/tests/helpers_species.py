"""Shared fixtures: explicit finite circuit algebras built as tables.

The tuple algebra has S_n = C^n with elements named by their colour
tuples; box is concatenation, zeta deletes a matched pair, eps(c) is the
pair (c, omega c).  Every axiom holds by construction, so it doubles as a
known-good input for the checkers and for mutation fixtures.
"""

import itertools

from feyngraph.species import FiniteCircuitAlgebra, Palette, TableSpecies


def _name(tup):
    return "t:" + ",".join(str(c) for c in tup)


def tuple_algebra(palette: Palette, n_max: int) -> FiniteCircuitAlgebra:
    colours = sorted(palette.colours, key=repr)
    arity = {}
    colour_of = {}
    tup_of = {}
    for n in range(n_max + 1):
        es = []
        for tup in itertools.product(colours, repeat=n):
            e = _name(tup)
            es.append(e)
            colour_of[e] = tup
            tup_of[e] = tup
        arity[n] = es
    action = {}
    for e, tup in tup_of.items():
        for i in range(len(tup) - 1):
            swapped = tup[:i] + (tup[i + 1], tup[i]) + tup[i + 2:]
            action[(e, i)] = _name(swapped)
    species = TableSpecies(palette, arity, colour_of, action)
    box = {}
    for a, ta in tup_of.items():
        for b, tb in tup_of.items():
            if len(ta) + len(tb) <= n_max:
                box[(a, b)] = _name(ta + tb)
    zeta = {}
    for a, ta in tup_of.items():
        for i in range(len(ta)):
            for j in range(i + 1, len(ta)):
                if ta[i] == palette.omega[ta[j]]:
                    rest = tuple(c for k, c in enumerate(ta) if k not in (i, j))
                    zeta[(a, i, j)] = _name(rest)
    eps = {c: _name((c, palette.omega[c])) for c in colours}
    return FiniteCircuitAlgebra(species, box, zeta, eps,
                                external_unit=_name(()))


MONO = Palette(frozenset({"*"}), {"*": "*"})
TWO = Palette(frozenset({"+", "-"}), {"+": "-", "-": "+"})


def algebra_to_json(A: FiniteCircuitAlgebra) -> dict:
    S = A.species
    data = {
        "palette": {"colours": sorted(S.palette.colours, key=repr),
                    "omega": {c: S.palette.omega[c]
                              for c in sorted(S.palette.colours, key=repr)}},
        "arity": {str(n): list(es) for n, es in S.arity_sets.items()},
        "colour_of": {e: list(S.colour_of(e))
                      for es in S.arity_sets.values() for e in es},
        "action": {f"{e}|{i}": v for (e, i), v in S._swap.items()},
        "box": {f"{a}|{b}": v for (a, b), v in A._box.items()},
        "zeta": {f"{e}|{i}|{j}": v for (e, i, j), v in A._zeta.items()},
        "eps": dict(A._eps),
        "external_unit": A._unit,
    }
    return data
