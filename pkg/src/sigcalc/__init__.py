"""Coefficient calculus for signature-driven and polynomial diffusions:
truncated tensor algebra, path signatures, Riccati/transport/linear solvers
and Monte-Carlo cross-checks."""

from .tensor import Partition, TensorCoeffs, word_index, index_word
from .signature import PiecewisePath, path_signature, segment_signature, time_extend, is_grouplike
from .operators import (
    SdeSpec,
    R_op,
    L_op,
    poly_from_affine,
    linear_matrix,
    linear_to_riccati,
    brownian_spec,
    black_scholes_spec,
    expected_signature_matrix,
)
from .powerseries import (
    Seq,
    Model1D,
    R_pow,
    L_pow,
    R_sig,
    L_sig,
    exp_conv,
    log_conv,
    linear_matrix_1d,
    to_factorial_basis,
    from_factorial_basis,
)
from .schemes import (
    SchemeConfig,
    Trajectory,
    ode_integrate,
    scheme1_riccati,
    scheme2_transport,
    scheme3_linear,
    matrix_exp,
)
from .montecarlo import (
    SimConfig,
    McEstimate,
    estimate,
    simulate_1d,
    simulate_sigsde,
    gauss_hermite_expectation,
)

__version__ = "0.1.0"
