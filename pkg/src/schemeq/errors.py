"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and an optional
``witness`` payload; the CLI turns both into its one-line diagnostic.
"""

from __future__ import annotations

from typing import Any


class SchemeqError(ValueError):
    code = "error"

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class GroupTableError(SchemeqError):
    code = "group_table"


class NonTransitiveError(SchemeqError):
    code = "non_transitive"


class AutomorphismError(SchemeqError):
    code = "not_automorphism"


class ParameterError(SchemeqError):
    code = "parameter"


class UnsupportedFieldError(SchemeqError):
    code = "unsupported_field"


class ResourceError(SchemeqError):
    """A size cap would be exceeded."""

    code = "resource_cap"


class InconsistencyError(SchemeqError):
    """A class product is not in the span of the classes."""

    code = "axiom4"


class AxiomError(SchemeqError):
    code = "axiom"


class CommutativityError(SchemeqError):
    code = "non_commutative"


class DegeneracyError(SchemeqError):
    code = "degeneracy"


class BasisError(SchemeqError):
    code = "basis_residual"


class KreinViolationError(SchemeqError):
    code = "krein_violation"


class CharacterTableError(SchemeqError):
    code = "character_table"


class InvarianceError(SchemeqError):
    code = "invariance"


class ShapeError(SchemeqError):
    code = "shape"


class WindowError(SchemeqError):
    code = "window"


class TruncationError(SchemeqError):
    code = "truncation"


class JacobiConditionError(SchemeqError):
    code = "jacobi_condition"


class GraphInputError(SchemeqError):
    code = "graph_input"
