"""Cache-aided broadcast delivery with delayed channel feedback.

A library (plus ``synergy`` CLI) that plans and executes coded delivery
to K cache-equipped users over a K-antenna broadcast link where channel
state reaches the transmitter only after each use.  It provides exact
rational schedule analytics (delivery time, converse lower bound,
optimality-gap certification below a factor of 4, per-user DoF metrics)
and a symbol-exact prime-field simulation with per-user backward
decoding to verify end-to-end decodability.
"""

from .bounds import (
    EULER_MASCHERONI,
    BoundReport,
    CertificateViolationError,
    EnvelopeCheckError,
    EnvelopeReport,
    GapCertificate,
    OuterBound,
    SynergyReport,
    achievable_time,
    bound_report,
    cache_fraction_for_gap,
    check_midrange_gap_envelope,
    dof,
    gap_certificate,
    min_cache_fraction_for_gap,
    outer_bound,
    synergy_report,
)
from .combinatorics import (
    Rational,
    Subset,
    binomial,
    enumerate_subsets,
    epsilon,
    format_rational,
    harmonic,
    iter_subsets,
)
from .decoder import (
    DecodeOutcome,
    DeliveryReport,
    MissingObservationError,
    UserReport,
    backward_decode,
    decode_user,
    verify_all,
)
from .field import (
    MODULUS,
    SeededRng,
    SingularMatrixError,
    cauchy_combining_matrix,
    inverse,
    is_invertible,
    is_prime,
    matmul,
    matrix_rank,
    solve,
)
from .placement import (
    CacheContents,
    LengthMismatchError,
    SubfileIndex,
    SystemConfig,
    fill_caches,
    load_library,
    random_library,
    save_library,
    subpacketize,
)
from .scheduler import (
    DeliveryPlan,
    GranularityError,
    PhasePlan,
    XorMessage,
    build_xors,
    default_config,
    minimal_granularity,
    plan_phases,
    plan_to_json,
    validate_demand,
)
from .simulator import (
    CausalityError,
    ChannelUse,
    DegenerateChannelError,
    DelayedCsitLedger,
    Transcript,
    load_transcript,
    reconstruct_transmissions,
    replay,
    run_delivery,
    save_transcript,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CacheContents",
    "CausalityError",
    "CertificateViolationError",
    "ChannelUse",
    "DecodeOutcome",
    "DegenerateChannelError",
    "DelayedCsitLedger",
    "DeliveryPlan",
    "DeliveryReport",
    "EnvelopeCheckError",
    "EnvelopeReport",
    "EULER_MASCHERONI",
    "GapCertificate",
    "GranularityError",
    "LengthMismatchError",
    "MissingObservationError",
    "MODULUS",
    "OuterBound",
    "PhasePlan",
    "Rational",
    "SeededRng",
    "SingularMatrixError",
    "Subset",
    "SubfileIndex",
    "SynergyReport",
    "SystemConfig",
    "Transcript",
    "UserReport",
    "XorMessage",
    "achievable_time",
    "backward_decode",
    "binomial",
    "bound_report",
    "build_xors",
    "cache_fraction_for_gap",
    "cauchy_combining_matrix",
    "check_midrange_gap_envelope",
    "decode_user",
    "default_config",
    "dof",
    "enumerate_subsets",
    "epsilon",
    "fill_caches",
    "format_rational",
    "gap_certificate",
    "harmonic",
    "inverse",
    "is_invertible",
    "is_prime",
    "iter_subsets",
    "load_library",
    "load_transcript",
    "matmul",
    "matrix_rank",
    "min_cache_fraction_for_gap",
    "minimal_granularity",
    "outer_bound",
    "plan_phases",
    "plan_to_json",
    "random_library",
    "reconstruct_transmissions",
    "replay",
    "run_delivery",
    "save_library",
    "save_transcript",
    "simulate",
    "solve",
    "subpacketize",
    "synergy_report",
    "validate_demand",
    "verify_all",
]
