"""Qudit Unruh-DeWitt detectors on uniformly accelerated worldlines."""
from .diagnostics import (
    INDETERMINATE,
    EdrVerdict,
    coherence_norm,
    edr,
    gibbs_distance,
    secular_fit,
    trace_distance,
    transition_probability,
)
from .estimator import QuditDetector
from .exceptions import (
    ConfigError,
    InvalidStateError,
    QuadratureError,
    RegimeWarning,
    RegulatorScaleError,
    UnsupportedRegulatorError,
)
from .perturbation import (
    CorrectionReport,
    assemble_final_state,
    hw_oracle_diagonal,
    ququint_oracle_middle,
    qutrit_oracle_diagonal,
    qutrit_oracle_general,
    second_order_correction,
)
from .qudit_algebra import (
    DensityMatrix,
    DetectorModel,
    Transition,
    build_hw_model,
    build_su2_model,
    gibbs_state,
    spin_matrices,
    transition_table,
    x_o_split,
)
from .response_integrals import (
    IEpsilon,
    IntegralParams,
    NascentDelta,
    ResponseIntegralTable,
    TanhHeaviside,
    build_table,
    full_plane_transform,
    half_plane_transform,
    integral_I,
    integral_L,
    integral_Lq,
    integral_Q,
    integral_R,
    integral_Rq,
    integral_U,
    integral_V,
)
from .wightman import (
    KernelSplit,
    WorldlineParams,
    accel_wightman,
    inertial_thermal_wightman,
    kernel_split,
    kms_fourier_ratio,
    regular_part,
    vacuum_wightman,
)

__version__ = "0.1.0"
