"""Sequential sharing of CHSH and Svetlichny nonlocality by unsharp observers."""

__version__ = "0.1.0"

from .cascade import (
    CascadeConfig,
    CascadeResult,
    CascadeStep,
    chsh_bound_theorem1,
    chsh_expectation,
    chsh_first_value,
    luders_step,
    run_cascade,
    run_chsh_cascade,
    run_svetlichny_cascade,
    svetlichny_closed_form,
    svetlichny_expectation,
)
from .errors import (
    CascadeError,
    DimensionMismatch,
    InvalidGamma,
    InvalidState,
    InvalidTheta,
    NotHermitian,
    NotPsd,
    SearchFailed,
)
from .measurements import (
    PovmPair,
    SharpnessSchedule,
    alice_povms_bipartite,
    bob_povms_bipartite,
    find_theta_n,
    gamma_schedule_chsh,
    gamma_schedule_svetlichny,
    scan_svetlichny_theta,
    tripartite_povms,
)
from .states import GhzState, SchmidtState, density_bipartite, density_ghz, schmidt_L
