"""Core types, configuration dataclasses and errors."""
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateKernelError,
    LacError,
    ScenarioError,
    TrainingDivergedError,
)
from .types import (
    Dataset,
    DiscreteDistributionSpec,
    EpochRecord,
    KernelConfig,
    LacScenario,
    LossKind,
    LossSpec,
    MetricsReport,
    PriorShiftConfig,
    RiskConfig,
    RiskVariant,
    ScenarioConfig,
    SyntheticSpec,
    ThetaEstimate,
    TrainConfig,
)

__all__ = [
    "ConfigError",
    "DataFormatError",
    "DegenerateKernelError",
    "LacError",
    "ScenarioError",
    "TrainingDivergedError",
    "Dataset",
    "DiscreteDistributionSpec",
    "EpochRecord",
    "KernelConfig",
    "LacScenario",
    "LossKind",
    "LossSpec",
    "MetricsReport",
    "PriorShiftConfig",
    "RiskConfig",
    "RiskVariant",
    "ScenarioConfig",
    "SyntheticSpec",
    "ThetaEstimate",
    "TrainConfig",
]
