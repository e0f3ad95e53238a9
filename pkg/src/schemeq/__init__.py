"""Association schemes, their Bose-Mesner algebras, and the quantum
probability built on them: hypergroup walks, quantum Markov chains,
entangled Markov chains and interacting Fock spaces."""

from .errors import SchemeqError
from .groups import GroupTable, cyclic, dihedral, named_group, quaternion, symmetric
from .scheme import (
    AssociationScheme,
    build_conjugacy_scheme,
    build_grassmann,
    build_group_scheme,
    build_johnson,
    build_orbit_scheme,
    build_subscheme,
    fuse,
    intersection_numbers,
    verify_axioms,
)
from .spectral import (
    builtin_character_table,
    hypergroup,
    idempotents_from_characters,
    krein_parameters,
    primitive_idempotents,
)
from .tolerances import DEFAULT_SEED, DEFAULT_TOL, Tolerances

__version__ = "0.1.0"
