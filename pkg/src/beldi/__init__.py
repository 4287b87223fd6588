"""Exact direct images of split bundles under superelliptic Belyi covers.

The package computes, in exact arithmetic over a user-chosen number
field F, the pushforward of a split vector bundle along the degree-N
cover y^N = x^a (x-1)^b of the projective line, equips it with its
canonical parabolic structure at the branch points, and decides whether
split bundles upstairs are defined over F.
"""

from .errors import BeldiError, InputError, InternalError
from .exactfield import (FieldElem, FieldTower, Matrix, emit, is_algebraic,
                         poly_roots_in_tower, rref, subspace_is_rational,
                         tower_build)
from .curve import (Curve, CurveFunction, Divisor, Place, canonical_divisor,
                    curve_build, galois_translate, local_expansion,
                    places_over)
from .rrsolver import (DescentVerdict, FunctionBasis, hom_space, lin_equiv,
                       line_descent_oracle, rr_space)
from .pushpar import (FiberModel, ParabolicP1Bundle, SplitBundle,
                      assemble_parabolic, compute_splitting_maps,
                      fiber_decomposition, parabolic_filtration,
                      pushforward_splitting_type, verify_prop1)
from .descent import (BundleVerdict, ClassMatch, ConstrainedBundle,
                      EndAlgebra, TowerSpec, class_decompose, descent_verdict,
                      end_algebra, hom_from, hom_into, indecomposable_test,
                      invariants_transversal, parabolic_pullback,
                      pushdown_extract, verify_e18,
                      verify_invariant_subbundle)

__all__ = [
    "BeldiError", "InputError", "InternalError",
    "FieldTower", "FieldElem", "Matrix",
    "tower_build", "emit", "is_algebraic", "rref", "subspace_is_rational",
    "poly_roots_in_tower",
    "Curve", "CurveFunction", "Divisor", "Place",
    "curve_build", "places_over", "local_expansion", "canonical_divisor",
    "galois_translate",
    "FunctionBasis", "DescentVerdict",
    "rr_space", "lin_equiv", "hom_space", "line_descent_oracle",
    "SplitBundle", "FiberModel", "ParabolicP1Bundle",
    "pushforward_splitting_type", "fiber_decomposition",
    "parabolic_filtration", "compute_splitting_maps", "assemble_parabolic",
    "verify_prop1",
    "ConstrainedBundle", "ClassMatch", "EndAlgebra", "TowerSpec",
    "BundleVerdict",
    "parabolic_pullback", "hom_into", "hom_from", "class_decompose",
    "verify_e18", "invariants_transversal", "verify_invariant_subbundle",
    "pushdown_extract", "end_algebra", "indecomposable_test",
    "descent_verdict",
]

__version__ = "0.1.0"
