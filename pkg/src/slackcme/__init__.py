"""Slack-reactant state-space truncation for stochastic reaction networks.

Build a finite chemical master equation by rewriting the network so that
user-chosen linear combinations of species counts are exactly conserved,
then solve it directly (stationary laws, transient densities, first
passage times), cross-validate against exact stochastic simulation and
competing truncations, and certify the structural properties that
guarantee convergence.
"""

from .network import (
    Complex,
    MassAction,
    NetworkError,
    Reaction,
    ReactionNetwork,
    SlackGated,
    Species,
    StructuralMatrices,
    build_matrices,
    deficiency,
    intensity,
    linkage_classes,
    weak_reversibility,
)
from .dsl import DslError, format_network, parse_network
from .slack import (
    ConservationSpec,
    SlackMode,
    SlackNetwork,
    build_optimized_slack,
    build_regular_slack,
    default_candidates,
    score_conservation_vector,
    slack_intensity,
    suggest_conservation_vector,
)
from .statespace import (
    CommClass,
    Generator,
    StateSpace,
    accessibility,
    build_generator,
    communication_classes,
    enumerate_halfspace,
    enumerate_states,
)
from .solver import (
    Distribution,
    FptResult,
    NonAccessibleTarget,
    SolverError,
    l1_distance,
    mfpt,
    point_mass,
    stationary,
    survival,
    transient,
)
from .alttrunc import HalfSpaceSet, Rectangle, build_finite_buffer, build_fsp, build_sfsp
from .ssa import MfptEstimate, Trajectory, empirical_density, estimate_mfpt, simulate
from .certify import (
    ComplexBalanceCertificate,
    Inconclusive,
    LyapunovCertificate,
    NewtonNonConvergence,
    complex_balance_residual,
    find_complex_balance,
    lyapunov_certificate,
    product_form_stationary,
)

__version__ = "0.1.0"
