"""Rényi information measures, quantum betting games and informativeness monotones."""

from .betting import blp_decomposition, ice, isoelastic_utility, log_ice, numeric_optimal_ice, optimal_ice, optimal_strategy
from .divergences import cond_renyi_div, renyi_capacity, renyi_div, sibson_capacity, variant_mi
from .errors import InputError, MinimaxGapExceeded, OptimizerDidNotConverge, QBettingError
from .games import (
    FreeSet,
    GapKind,
    QsbGame,
    arimoto_gap,
    arimoto_mi_quantum,
    discrimination_exclusion,
    max_noisy_arimoto_mi,
    noisy_arimoto_mi,
    nqsb_value,
    qcb_value,
    qsb_value,
    result_check,
)
from .prob_core import Order, arimoto_cond_entropy, arimoto_mi, renyi_entropy, renyi_probability, sgn
from .quantum_core import Ensemble, KrausChannel, born_cond_pmf, born_joint
from .resource import (
    alpha_measure,
    informativeness_measure,
    informativeness_minimax,
    monotone_suite,
    robustness_informativeness,
    weight_informativeness,
)

__version__ = "0.1.0"
