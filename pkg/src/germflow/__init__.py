"""Computer algebra for local dynamical systems at jet level.

Jordan-Chevalley decompositions of diffeomorphism and vector-field jets,
exact resonance classification over a declared logarithm basis, embedding
flow synthesis with obstruction certificates, and a generator for
embeddable maps carrying weak resonances.
"""

from .errors import (
    ContextMismatchError,
    EliminationError,
    ExpSeriesError,
    GermflowError,
    NonRealLinearPartError,
    NonRealMapError,
    NonUnipotentError,
    NotSemisimpleError,
    PartnerNotFoundError,
    PreconditionError,
    ProblemFileError,
    SingularLinearPartError,
    SmallDivisorError,
    SpectrumError,
    UnsupportedPrecisionError,
    VerificationError,
)
from .spectrum import (
    EigenLog,
    ResonanceClass,
    ResonanceLattice,
    Spectrum,
    SpectrumBasis,
    conjugate_monomial,
    enumerate_logarithms,
    resonance_class,
    resonance_lattice,
    weakly_resonant_monomials,
)
from .jets import (
    JetContext,
    JetField,
    JetMap,
    JetSeries,
    RealStructure,
    allclose,
    apply_field,
    bracket,
    compose,
    conjugate_map,
    homogeneous_component,
    invert,
    is_real,
    max_difference,
    pullback_field,
    pushforward_field,
    to_w_coords,
    to_z_coords,
)
from .explog import exp_field, exp_time, is_unipotent, log_unipotent
from .normalform import (
    FieldDecomposition,
    JetOperatorMatrix,
    MapDecomposition,
    field_normal_form,
    jet_operator_matrix,
    jordan_field,
    jordan_map,
    linearize_semisimple_field,
    map_normal_form,
)
from .embedding import (
    EmbeddingVerdict,
    LogChoice,
    check_uniqueness_hypothesis,
    obstruction_check,
    realify_flow,
    synthesize_flow,
)
from .generator import build_counterexample, find_weak_partner

__version__ = "0.1.0"
