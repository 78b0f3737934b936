"""Exact combinatorics of operadic resolutions.

Submodules: ``trees`` (tree grammars and contractions), ``psi`` (the
contraction categories of pearled trees), ``algebra`` (finite operads and
their modules), ``complex`` (exact homology, nerves, cosheaves), ``bv`` (the
tree families and their triangulations), ``verify`` (checks of the explicit
maps) and ``cli``.
"""

from .algebra import (
    El,
    FinBimodule,
    FinIbimodule,
    FinOperad,
    StructureError,
    builtin,
    matching_object,
    monoid_bimodule,
    rho_diagram,
    self_bimodule,
    self_ibimodule,
    truncate,
    validate_structure,
)
from .bv import BVElement, Family, build_family_complex, filtration_index, project_mu, w_construction
from .complex import DeltaComplex, HomologyResult, homology, hocolim_nerve, induced_homology_map, nerve
from .psi import build_psi, restrict
from .trees import Node, PearledTree, TreeClass, enumerate_tree_classes, parse_tree, tree_class
from .verify import (
    coherence_check,
    compare_models,
    fm_strata,
    mapping_cone,
    verify_delta,
    verify_gamma,
    verify_retraction,
    verify_xi,
)

__version__ = "0.1.0"

__all__ = [
    "El",
    "FinBimodule",
    "FinIbimodule",
    "FinOperad",
    "StructureError",
    "builtin",
    "matching_object",
    "monoid_bimodule",
    "rho_diagram",
    "self_bimodule",
    "self_ibimodule",
    "truncate",
    "validate_structure",
    "BVElement",
    "Family",
    "build_family_complex",
    "filtration_index",
    "project_mu",
    "w_construction",
    "DeltaComplex",
    "HomologyResult",
    "homology",
    "hocolim_nerve",
    "induced_homology_map",
    "nerve",
    "build_psi",
    "restrict",
    "Node",
    "PearledTree",
    "TreeClass",
    "enumerate_tree_classes",
    "parse_tree",
    "tree_class",
    "coherence_check",
    "compare_models",
    "fm_strata",
    "mapping_cone",
    "verify_delta",
    "verify_gamma",
    "verify_retraction",
    "verify_xi",
    "__version__",
]
