"""feyngraph: Feynman-graph combinatorics for circuit algebras.

Graphs and etale morphisms, port gluing and graph substitution, the Brauer
and wiring-diagram categories, finite graphical species with circuit /
modular axiom checkers, the free constructions T, D, L and their
distributive laws, and the nerve / Segal machinery -- all at finite,
desk-verifiable scale.
"""

from .graphs import (
    CanonicalForm,
    FeynmanGraph,
    automorphisms,
    canonical_form,
    corolla,
    disjoint_union,
    disjoint_union_all,
    empty_graph,
    is_isomorphic,
    isolated_vertex,
    line,
    make_named,
    stick,
    validate_graph,
    wheel,
)

from .etale import (
    EtaleMorphism,
    Embedding,
    ch_edge,
    check_etale,
    elements_category,
    glue_ports,
    identity_morphism,
    vertex_neighbourhood,
)
from .substitution import (
    GraphOfGraphs,
    Substitution,
    XGraph,
    compose_gogs,
    enumerate_x_graphs,
    substitute,
    substitute_xgraph,
)
from .brauer import (
    BrauerDiagram,
    Orientation,
    WiringDiagram,
    cap,
    compose_brauer,
    cup,
    enumerate_brauer,
    graph_to_wiring,
    identity_brauer,
    identity_wiring,
    is_downward,
    tensor_brauer,
    wd_compose,
    wiring_to_graph,
)
from .species import (
    CircuitAlgebraOps,
    Decoration,
    FiniteCircuitAlgebra,
    Palette,
    SpeciesOps,
    TableSpecies,
    TerminalSpecies,
    algebra_from_json,
    check_circuit_axioms,
    check_modular_axioms,
    derive_multiplication,
    evaluate_species,
    palette_from_json,
    species_from_json,
    terminal_species,
)
from .monads import (
    FreeCircuitAlgebra,
    PointedMorphism,
    VertexDeletion,
    check_beck,
    check_monad_laws,
    check_t_associativity,
    check_yang_baxter,
    delete_vertices,
    free_apply,
    free_species,
    hom_etale,
    hom_pointed,
    pointed_from_parts,
    similarity_terminal,
    yang_baxter_sweep,
)
from .nerve import (
    FinitePresheaf,
    KleisliMorphism,
    check_segal,
    fullness_probe,
    kleisli_compose,
    kleisli_identity,
    mutated_presheaves,
    nerve,
    presheaf_maps,
)
from .io import graph_from_json, graph_to_json, load_graph, parse_graph_arg

__all__ = [
    "BrauerDiagram",
    "CanonicalForm",
    "CircuitAlgebraOps",
    "Decoration",
    "Embedding",
    "EtaleMorphism",
    "FeynmanGraph",
    "FiniteCircuitAlgebra",
    "FinitePresheaf",
    "FreeCircuitAlgebra",
    "GraphOfGraphs",
    "KleisliMorphism",
    "Orientation",
    "Palette",
    "PointedMorphism",
    "SpeciesOps",
    "Substitution",
    "TableSpecies",
    "TerminalSpecies",
    "VertexDeletion",
    "WiringDiagram",
    "XGraph",
    "algebra_from_json",
    "cap",
    "ch_edge",
    "check_beck",
    "check_circuit_axioms",
    "check_etale",
    "check_modular_axioms",
    "check_monad_laws",
    "check_segal",
    "check_t_associativity",
    "check_yang_baxter",
    "compose_brauer",
    "compose_gogs",
    "cup",
    "delete_vertices",
    "derive_multiplication",
    "elements_category",
    "enumerate_brauer",
    "enumerate_x_graphs",
    "evaluate_species",
    "free_apply",
    "free_species",
    "fullness_probe",
    "glue_ports",
    "graph_from_json",
    "graph_to_json",
    "graph_to_wiring",
    "hom_etale",
    "hom_pointed",
    "identity_brauer",
    "identity_morphism",
    "identity_wiring",
    "is_downward",
    "kleisli_compose",
    "kleisli_identity",
    "load_graph",
    "mutated_presheaves",
    "nerve",
    "palette_from_json",
    "parse_graph_arg",
    "pointed_from_parts",
    "presheaf_maps",
    "similarity_terminal",
    "species_from_json",
    "substitute",
    "substitute_xgraph",
    "tensor_brauer",
    "terminal_species",
    "vertex_neighbourhood",
    "wd_compose",
    "wiring_to_graph",
    "automorphisms",
    "canonical_form",
    "corolla",
    "disjoint_union",
    "disjoint_union_all",
    "empty_graph",
    "is_isomorphic",
    "isolated_vertex",
    "line",
    "make_named",
    "stick",
    "validate_graph",
    "wheel",
]

__version__ = "0.1.0"
