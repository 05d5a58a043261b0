"""Local-in-time generators of open quantum dynamics from Lindblad exponent families."""

from .errors import (
    ConsistencyError,
    DimensionError,
    DomainError,
    NumericalError,
    NumericalRangeError,
    SingularityError,
    StiffnessError,
    ValidationError,
)
from .generator import (
    CallableZ,
    GeneratorFamily,
    LinearZ,
    integrated_generator,
    is_commutative,
    local_generator,
    x_at,
    z_at,
)
from .lindblad import (
    GKSDecomposition,
    LindbladSpec,
    Verdict,
    Witness,
    build_generator,
    gks_matrix,
    is_cpt_map,
    is_lindblad_generator,
)
from .propagate import (
    PropagationResult,
    TimeGrid,
    certify_trajectory,
    composition_defect,
    exp_map,
    markovianity_probe,
    solve_ordered,
)
from .scalar import ScalarFn
from .superop import (
    choi,
    expm,
    expm_frechet,
    hermitian_eigvals,
    sandwich_superop,
    unvec,
    vec,
)
from .tolerances import DEFAULT as DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
