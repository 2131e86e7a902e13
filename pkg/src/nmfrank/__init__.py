"""NMF rank suggestion via residual-stability analysis, with classic
rank-selection baselines and a deterministic sweep harness."""

from ._backend import BACKEND_NAME
from .baselines import (
    MethodResult,
    RANGE_EXCEEDED,
    UNDETERMINED,
    adjusted_rand_index,
    ari_split_select,
    cluster_labels,
    consensus,
    cophenetic_coefficient,
    dispersion_coefficient,
    elbow_select,
    hungarian,
    ks_cv_select,
    madimput_select,
    permutation_select,
    savgol_derivative,
    select_cophenetic,
    select_dispersion,
)
from .inits import InitSet, make_init_set, slice_init
from .masked import estimate_iteration_cost, masked_error, masked_fit, masked_scd_step
from .matrices import (
    generate_swimmer,
    generate_wold_mask,
    load_matrix,
    save_matrix,
    shuffle_columns_per_row,
)
from .rsic import (
    MciCurve,
    ResidualStack,
    build_residual_stack,
    coordinatewise_iqr,
    detect_islands,
    max_delta_map,
    mci,
)
from .solver import FactorPair, fit, mu_step, objective, relative_residual, scd_step
from .sweep import NOT_AVAILABLE, SweepConfig, emit_report, run_sweep

__version__ = "0.1.0"
