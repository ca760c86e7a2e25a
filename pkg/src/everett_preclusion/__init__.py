"""Everett branch weights, zero and positive preclusion, and the N_B threshold.

The numeric kernels run under numba when available; set
``EVERETT_DISABLE_NUMBA=1`` to use the pure-numpy path instead.
"""

from .ensemble import (
    BranchEnsemble,
    FrequencyBinning,
    QubitPreparation,
    bin_weights,
    branch_log_weight,
    build_ensemble,
    enumerate_sequences_oracle,
)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .learning import (
    Lineage,
    LineageOutcome,
    SurpriseDistribution,
    TrainedDevice,
    predict_surprise,
    run_lineages,
    train_device,
)
from .rules import ExistenceVerdict, PreclusionRule, exists, exists_log, survivors
from .threshold import (
    SurvivorReport,
    SweepRow,
    ThresholdResult,
    born_bins,
    count_survivors,
    find_nb,
    survivor_report,
    sweep_nb,
)
from .weights import (
    Projector,
    StateVector,
    UnitaryMatrix,
    heisenberg_weight,
    is_post_measurement_eigenstate,
    weight,
)

__version__ = "0.1.0"
