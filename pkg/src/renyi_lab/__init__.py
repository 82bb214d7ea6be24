"""Order-alpha Renyi divergence numerics with randomized structure checks.

The package computes sandwiched and traditional Renyi divergences of
positive semidefinite operator pairs (with explicit conventions for
kernels, the order-1 limit, and the order-inf limit) and stress-tests the
structural facts the definitions rest on: monotonicity under quantum
channels, joint convexity, the Legendre-type representation of the trace
functional, and concavity of trace-power maps.
"""

from .channels import (
    QuantumChannel,
    StinespringDilation,
    apply_channel,
    apply_dilation,
    haar_unitary,
    random_channel,
    stinespring,
    twirl_second_factor,
    validate_cptp,
)
from .divergence import (
    DivergencePair,
    classical_renyi,
    d_alpha,
    d_prime_alpha,
    fidelity,
    q_alpha,
)
from .harness import (
    CampaignConfig,
    CampaignReport,
    ScanResult,
    SearchReport,
    run_alpha_scan,
    run_claim,
    run_joint_convexity,
    run_monotonicity,
    run_q_convexity,
    run_trace_power_campaign,
    run_two_variable_campaign,
    run_variational_campaign,
    run_young_campaign,
    search_violation,
    write_scan_csv,
)
from .linalg import (
    HermitianMatrix,
    PsdOperator,
    Spectrum,
    as_hermitian,
    as_psd,
    clamped_psd,
    eigh,
    gram_psd,
    kron,
    matrix_log_support,
    matrix_power,
    mix,
    operator_norm,
    partial_trace,
    support_contained,
)
from .matio import (
    load_channel,
    load_matrix,
    load_psd,
    save_channel,
    save_dilation,
    save_matrix,
)
from .rng import stream
from .variational import (
    TracePowerInstance,
    VariationalInstance,
    inf_representation_check,
    optimal_H,
    trace_power_functional,
    two_variable_form,
    variational_objective,
    verify_variational,
    young_trace_check,
)

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig",
    "CampaignReport",
    "DivergencePair",
    "HermitianMatrix",
    "PsdOperator",
    "QuantumChannel",
    "ScanResult",
    "SearchReport",
    "Spectrum",
    "StinespringDilation",
    "TracePowerInstance",
    "VariationalInstance",
    "apply_channel",
    "apply_dilation",
    "as_hermitian",
    "as_psd",
    "classical_renyi",
    "clamped_psd",
    "d_alpha",
    "d_prime_alpha",
    "eigh",
    "fidelity",
    "gram_psd",
    "haar_unitary",
    "inf_representation_check",
    "kron",
    "load_channel",
    "load_matrix",
    "load_psd",
    "matrix_log_support",
    "matrix_power",
    "mix",
    "operator_norm",
    "optimal_H",
    "partial_trace",
    "q_alpha",
    "random_channel",
    "run_alpha_scan",
    "run_claim",
    "run_joint_convexity",
    "run_monotonicity",
    "run_q_convexity",
    "run_trace_power_campaign",
    "run_two_variable_campaign",
    "run_variational_campaign",
    "run_young_campaign",
    "save_channel",
    "save_dilation",
    "save_matrix",
    "search_violation",
    "stinespring",
    "stream",
    "support_contained",
    "trace_power_functional",
    "twirl_second_factor",
    "two_variable_form",
    "validate_cptp",
    "variational_objective",
    "verify_variational",
    "write_scan_csv",
    "young_trace_check",
]
