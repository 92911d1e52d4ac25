"""baerdec: maximal property projections and cell decompositions in matrix *-algebras.

Given matrices and a property defined by compression-equivariant functionals
(normality, partial isometry, unitarity, commutativity, double commutativity,
compatibility, or user-supplied expressions), compute the unique maximal
commuting projection splitting the input into a part with the property and a
part completely without it, combine properties into cell decompositions, test
canonical decomposability of pairs, and analyze power partial isometries into
unitary parts and truncated shifts.
"""

from .engine import (
    AuditResult,
    CanonicalReport,
    CellDecomposition,
    DecompositionReport,
    TripleDecomposition,
    audit_complete_absence,
    canonical_decompose,
    combine_properties,
    max_property_projection,
    triple_decompose,
)
from .errors import (
    BaerdecError,
    FixtureError,
    InputError,
    InternalConsistencyError,
    MatrixFileError,
    NumericalInstabilityError,
)
from .fixtures import (
    PlantedInstance,
    gen_paper_example,
    gen_planted,
    gen_power_partial_isometry,
    random_planted,
    random_unitary,
    truncated_shift,
)
from .matfile import (
    MatrixFile,
    load_matrix_file,
    parse_matrix_file,
    save_matrix_file,
    serialize_matrix_file,
)
from .numeric import (
    Frame,
    ToleranceProfile,
    preimage_subspace,
    rank_revealing_frame,
    subspace_equal,
    subspace_intersection,
)
from .properties import (
    BUILTIN_NAMES,
    PropertySpec,
    builtin_property,
    equivariance_check,
    evaluate,
    parse_functional,
    user_property,
)
from .ring import (
    Projection,
    TupleInstance,
    commutation_residual,
    corner_compress,
    corner_embed,
    left_projection,
    power_range_projection,
    proj_inf,
    proj_sup,
    projections_equal,
    right_projection,
)
from .structure import (
    HalmosWallenReport,
    ShiftProfile,
    WoldReport,
    WoldSlocinskiReport,
    defect_projection,
    defect_telescoping_residual,
    halmos_wallen,
    wold,
    wold_slocinski,
)

__version__ = "0.1.0"

__all__ = [
    "AuditResult",
    "BUILTIN_NAMES",
    "BaerdecError",
    "CanonicalReport",
    "CellDecomposition",
    "DecompositionReport",
    "FixtureError",
    "Frame",
    "HalmosWallenReport",
    "InputError",
    "InternalConsistencyError",
    "MatrixFile",
    "MatrixFileError",
    "NumericalInstabilityError",
    "PlantedInstance",
    "Projection",
    "PropertySpec",
    "ShiftProfile",
    "ToleranceProfile",
    "TripleDecomposition",
    "TupleInstance",
    "WoldReport",
    "WoldSlocinskiReport",
    "audit_complete_absence",
    "builtin_property",
    "canonical_decompose",
    "combine_properties",
    "commutation_residual",
    "corner_compress",
    "corner_embed",
    "defect_projection",
    "defect_telescoping_residual",
    "equivariance_check",
    "evaluate",
    "gen_paper_example",
    "gen_planted",
    "gen_power_partial_isometry",
    "halmos_wallen",
    "left_projection",
    "load_matrix_file",
    "max_property_projection",
    "parse_functional",
    "parse_matrix_file",
    "power_range_projection",
    "preimage_subspace",
    "proj_inf",
    "proj_sup",
    "projections_equal",
    "random_planted",
    "random_unitary",
    "rank_revealing_frame",
    "right_projection",
    "save_matrix_file",
    "serialize_matrix_file",
    "subspace_equal",
    "subspace_intersection",
    "triple_decompose",
    "truncated_shift",
    "TupleInstance",
    "user_property",
    "wold",
    "wold_slocinski",
]
