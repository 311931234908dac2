"""Excitation-damping quantum channels.

Construction, verification (complete positivity, positivity, trace
preservation), inversion and time evolution of channels on a Hilbert space
split into an excited and a ground sector.
"""

from .matcore import (
    DEFAULT_TOL,
    devectorize,
    integral_of_exp,
    is_hermitian,
    is_psd,
    matexp,
    pinv,
    vectorize,
)
from .channel import (
    BlockOperator,
    EDMap,
    LinearMap,
    NonInvertibleError,
    apply,
    build_tp_omega,
    compose,
    invert,
    is_trace_preserving,
    qubit_map,
)
from .cpcheck import (
    BallDecomposition,
    ChoiMatrix,
    KrausSet,
    NotCompletelyPositiveError,
    PositivityVerdict,
    ball_decompose,
    choi,
    damped_excited_map,
    explicit_kraus_ed,
    is_cp,
    is_cp_ed,
    is_hermiticity_preserving,
    is_positive_ed_dg1,
    is_positive_sampled,
    is_trace_nonincreasing,
    kraus_from_choi,
)
from .dynamics import (
    ChannelTrajectory,
    GKLSGenerator,
    SemigroupSpec,
    build_td_trajectory,
    check_tp_condition,
    gkls_superop,
    is_cp_divisible,
    is_gkls_generator,
    K_from_spec,
    propagator,
    psi_from_sink,
    semigroup_at,
    semigroup_trajectory,
    time_local_generators,
    trajectory_observables,
    wigner_weisskopf_at,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "BallDecomposition",
    "BlockOperator",
    "ChannelTrajectory",
    "ChoiMatrix",
    "EDMap",
    "GKLSGenerator",
    "KrausSet",
    "K_from_spec",
    "LinearMap",
    "NonInvertibleError",
    "NotCompletelyPositiveError",
    "PositivityVerdict",
    "SemigroupSpec",
    "apply",
    "ball_decompose",
    "build_td_trajectory",
    "build_tp_omega",
    "check_tp_condition",
    "choi",
    "compose",
    "damped_excited_map",
    "devectorize",
    "explicit_kraus_ed",
    "gkls_superop",
    "integral_of_exp",
    "invert",
    "is_cp",
    "is_cp_divisible",
    "is_cp_ed",
    "is_gkls_generator",
    "is_hermiticity_preserving",
    "is_hermitian",
    "is_positive_ed_dg1",
    "is_positive_sampled",
    "is_psd",
    "is_trace_nonincreasing",
    "is_trace_preserving",
    "kraus_from_choi",
    "matexp",
    "pinv",
    "propagator",
    "psi_from_sink",
    "qubit_map",
    "semigroup_at",
    "semigroup_trajectory",
    "time_local_generators",
    "trajectory_observables",
    "vectorize",
    "wigner_weisskopf_at",
]
