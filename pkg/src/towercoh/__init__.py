"""Completed cohomology of towers of finite covers of finite complexes.

Finite-level cohomology with coinduced Z/p^s coefficients is computed exactly
by Smith normal form over Z/p^s; colimits over tower levels and limits over
precisions are assembled with explicit stabilization certificates.
"""
from .complexes import ComplexError, DeltaComplex, Subcomplex
from .groups import GroupTower, TowerError, make_abelian_tower, make_heisenberg_tower, make_custom_tower
from .local_systems import DescriptorError, FlatDescriptor, make_descriptor, twisted_complex
from .smith import cohomology, local_snf, smith_normal_form
from .limits import colimit, completed_cohomology
from .catalog import build_builtin, BUILTIN_COMPLEXES

__version__ = "0.1.0"

__all__ = ["ComplexError", "DeltaComplex", "Subcomplex", "GroupTower", "TowerError", "make_abelian_tower",
           "make_heisenberg_tower", "make_custom_tower", "DescriptorError", "FlatDescriptor",
           "make_descriptor", "twisted_complex", "cohomology", "local_snf", "smith_normal_form", "colimit",
           "completed_cohomology", "build_builtin", "BUILTIN_COMPLEXES"]
