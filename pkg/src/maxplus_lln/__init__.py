"""Max-plus stochastic recursions: component decomposition, Lyapunov exponents,
and law-of-large-numbers verdicts for ``x(n+1) = A(n) x(n)``."""

from .estimate import ExponentEstimate, compare_exponents
from .graph import (
    BlockStructureViolation,
    ComponentDecomposition,
    IncidenceGraph,
    block_split,
    decompose,
    extract_submodel,
    structural_decomposition,
)
from .lyapunov import (
    check_max_decomposition,
    component_exponent,
    estimate_bottom_exponent,
    estimate_top_exponent,
    final_states,
    max_cycle_mean,
    predicted_limit,
    trajectory,
)
from .models import (
    EntryDist,
    Kind,
    MatrixModel,
    ModelError,
    builtin_example,
    load_model,
    model_from_dict,
    model_to_dict,
    sample_sequence,
)
from .semiring import (
    BOTTOM,
    DimensionError,
    StructureMatrix,
    TropicalMatrix,
    TropicalScalar,
    TropicalVector,
    bottom_lines,
    brute_force_power,
    identity,
    left_product,
    mat_mul,
    mat_vec,
    right_product,
    structure_of,
)
from .verifier import (
    check_limit_consistency,
    empirical_convergence,
    reachability_chain,
    verdict,
)

__version__ = "0.1.0"
