"""Safeguarded augmented Lagrangian solver for cardinality-constrained programs."""

from .auglag import (
    Multipliers,
    PenaltyProgress,
    SafeguardBounds,
    auglag_gradient,
    auglag_value,
    penalty_progress,
    project_safeguards,
    update_multipliers,
)
from .certificates import (
    Certificate,
    CcmResidualReport,
    SequenceDiagnostics,
    Verdict,
    ccm_residual,
    ccs_from_ccm,
    certify,
    sequence_diagnostics,
)
from .inner import DivergenceWarning, InnerConfig, InnerResult, InnerStatus, minimize
from .problem import (
    CcopProblem,
    EvaluationError,
    FeasibilityReport,
    IndexSets,
    RelaxedPoint,
    classify_indices,
    feasibility,
    pair_y_for_x,
    project_to_cardinality,
)
from .salm import RunTrace, SalmConfig, SalmResult, SalmStatus, penalty_update, solve

__version__ = "0.1.0"
