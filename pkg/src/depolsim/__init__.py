"""Residual degree-of-polarization analysis for rotating-waveplate depolarizers."""

__version__ = "0.1.0"

from .analysis import (
    ComboClass,
    DopReport,
    ErrorBox,
    classify_two_plate,
    scaling_exponent,
    two_plate_dop_approx,
    two_plate_mean_approx,
    uniform_chain_dop,
    worst_case_dop,
)
from .cascade import (
    HALF,
    QUARTER,
    CascadeSpec,
    PlateKind,
    PlateSpec,
    cascade_matrix_at,
    residual_dop_for_input,
    residual_dop_max,
    time_average,
)
from .search import Arrangement, enumerate_combos, equivalence_check, verify_table1
from .stokes import (
    apply,
    dop_for_input,
    hwp_approx_matrix,
    qwp_approx_matrix,
    retarder_matrix,
    singular_values,
)
