"""Scenario sources: where a run's labeled/unlabeled/test data comes from."""
from abc import ABC, abstractmethod
from dataclasses import replace
from pathlib import Path
from typing import Optional

from lac_risk.core import Dataset, LacScenario, ScenarioConfig
from .csv_ingest import load_csv
from .scenario import make_scenario, make_synthetic_gaussians
from .scenario_io import load_scenario


class ScenarioSource(ABC):
    """Abstract base class for scenario sources."""

    @abstractmethod
    def build(self, seed: int) -> LacScenario:
        """Return the scenario for one seed."""
        pass


class SyntheticSource(ScenarioSource):
    """Fresh Gaussian draws per seed."""

    def __init__(self, config: ScenarioConfig):
        self.config = config

    def build(self, seed: int) -> LacScenario:
        return make_synthetic_gaussians(replace(self.config, seed=seed))


class CsvSource(ScenarioSource):
    """A labeled CSV file re-split per seed. The file is read once."""

    def __init__(self, path: Path, label_column: str, config: ScenarioConfig):
        self.path = Path(path)
        self.config = config
        self.label_column = label_column
        self._dataset: Optional[Dataset] = None

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = load_csv(self.path, self.label_column)
        return self._dataset

    def build(self, seed: int) -> LacScenario:
        return make_scenario(self.dataset, replace(self.config, seed=seed))


class DirectorySource(ScenarioSource):
    """A fixed scenario directory; every seed sees the same data."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self._scenario: Optional[LacScenario] = None

    def build(self, seed: int) -> LacScenario:
        if self._scenario is None:
            self._scenario = load_scenario(self.directory)
        return self._scenario
