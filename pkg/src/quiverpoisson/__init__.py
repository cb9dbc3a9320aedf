"""Exact necklace-algebra calculus for quivers and their representation spaces."""

from .quiver import (
    Arrow,
    DimensionVector,
    DoubledQuiver,
    NonComposable,
    Quiver,
    QuiverError,
    build_quiver,
    kronecker_quiver,
    loop_quiver,
    quiver_to_text,
    word_endpoints,
)
from .freealg import FreeElement, MatrixPoint, evaluate
from .necklace import (
    CyclicElement,
    GradeError,
    NecklaceElement,
    TensorElement,
    compatible_pair_check,
    double_bracket,
    h0_bracket,
    homogeneous_parts,
    induced_derivation,
    is_poisson,
    normalize,
    schouten,
    superderivative,
)
from .parsing import ParseError, parse_element, parse_necklace, parse_rmatrix
from .polyvector import CoordSystem, Poly, PolyField, comm_schouten
from .representation import (
    BudgetExceeded,
    bracket_homomorphism_check,
    bracket_table,
    induced_bracket,
    induced_field,
    invariance_check,
)
from .contraction import (
    ContractionPlan,
    contract_bivector,
    contract_quiver,
    plan_multi,
    plan_single,
)
from .yangbaxter import (
    AdmissibilityError,
    RMatrix,
    StructureConstants,
    aguiar_rmatrix,
    algebra_to_linear,
    associativity_check,
    ayb_check,
    bivector_to_rmatrix,
    classical_yb_check,
    linear_to_algebra,
    rmatrix_to_bivector,
)

__all__ = [name for name in dir() if not name.startswith("_")]
