"""Coherent-attack secret-key-rate bounds for Gaussian two-way QKD."""

from .channels import (
    CONSTANT_VACUUM,
    IDENTITY,
    ChannelAction,
    ChannelKind,
    GaussianChannelSpec,
    action_of,
    amplifier,
    apply_to_joint,
    complementary_of,
    entropy_gain,
    phase_conjugator,
    pure_loss,
)
from .eve import (
    BINARY_PHASE,
    AttackStateParams,
    ChiResult,
    EncodingKind,
    EncodingSpec,
    IntrusionParams,
    build_joint_cm,
    chi_E,
    correlation_functional,
    f_single,
    mean_photon_after_psi,
    random_displacement,
)
from .gaussian import (
    ModeMoments,
    PhysicalityError,
    condition_on_heterodyne,
    cross_moments,
    entropy,
    g_func,
    is_physical,
    mean_photon,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_cm,
    tmsv_cm,
)
from .numopt import InfeasibleError, OptConfig, maximize_1d, maximize_grid_2d
from .protocols import (
    MeasuredConstraints,
    ProtocolFamily,
    ProtocolSpec,
    RatePoint,
    extract_intrusion,
    fiber_loss,
    fl_qkd,
    i_ab_flqkd,
    i_ab_tmsv_displacement,
    optimize_brightness,
    rate_point,
    ske,
    tmsv_displacement,
)

__version__ = "0.1.0"
