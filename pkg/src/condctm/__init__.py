"""Reference-conditional conformal test martingales for shift detection."""
from .betting import BetContext, apply_clip, bet_g, bet_gradient, bet_loss, scaling_constant
from .detector import Detector, DetectorConfig, StepOutcome, detector_init, detector_step
from .ecdf import (
    GrowingPool,
    ReferenceSet,
    build_reference,
    dkw_epsilon,
    ecdf_eval,
    pvalue_fixed,
    pvalue_fixed_randomized,
    pvalue_pooled_randomized,
)
from .ons import OnsState, ons_init, ons_update
from .sim import (
    PowerCurve,
    Scenario,
    SignalDiagnostic,
    TrialResult,
    aggregate_power,
    estimate_signal,
    generate_stream,
    rejection_time_ratio,
    run_trial,
    run_trials,
)

__version__ = "0.1.0"
