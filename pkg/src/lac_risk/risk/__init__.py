"""Risk estimators and the exact-risk oracle."""
from .estimators import (
    ObjectiveResult,
    eulac_ovr_risk,
    lac_risk,
    objective,
    pac_risk,
    parse_risk_config,
    penalty,
    penalty_slope,
    prior_shift_risk,
)
from .oracle import exact_risk_oracle, resample_lac_risks, support_losses

__all__ = [
    "ObjectiveResult",
    "eulac_ovr_risk",
    "lac_risk",
    "objective",
    "pac_risk",
    "parse_risk_config",
    "penalty",
    "penalty_slope",
    "prior_shift_risk",
    "exact_risk_oracle",
    "resample_lac_risks",
    "support_losses",
]
