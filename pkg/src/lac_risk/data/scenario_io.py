"""Scenario directories: labeled.csv, unlabeled.csv, test.csv and meta.json."""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from lac_risk.core import DataFormatError, Dataset, LacScenario
from .csv_ingest import read_table

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
LABEL_COLUMN = "label"


def save_scenario(scenario: LacScenario, directory: Path) -> Path:
    """Write a scenario directory. Rewriting the same scenario gives identical bytes."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    _write_split(directory / "labeled.csv", scenario.labeled)
    _write_split(directory / "unlabeled.csv", scenario.unlabeled)
    _write_split(directory / "test.csv", scenario.test)

    meta: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "k": scenario.k,
        "d": scenario.labeled.d,
        "theta_true": scenario.theta_true,
        "class_map": {str(original): label for original, label in sorted(scenario.class_map.items())},
        "seed": scenario.seed,
        "counts": {
            "labeled": scenario.labeled.n,
            "unlabeled": scenario.unlabeled.n,
            "test": scenario.test.n,
        },
        "known_priors": list(scenario.known_priors) if scenario.known_priors is not None else None,
    }
    with open(directory / "meta.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")

    logger.info("Wrote scenario to %s", directory)
    return directory


def load_scenario(directory: Path) -> LacScenario:
    """Read a scenario directory written by save_scenario."""
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"meta.json not found in {directory}")
    with open(meta_path, encoding="utf-8") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"invalid JSON: {e.msg}", path=meta_path, row=e.lineno) from None

    version = meta.get("version")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported scenario format version {version!r}", path=meta_path)

    k = int(meta["k"])
    labeled = _read_split(directory / "labeled.csv", k, labeled=True)
    unlabeled = _read_split(directory / "unlabeled.csv", k + 1, labeled=False)
    test = _read_split(directory / "test.csv", k + 1, labeled=True)

    known_priors = meta.get("known_priors")
    return LacScenario(
        labeled=labeled,
        unlabeled=unlabeled,
        test=test,
        k=k,
        theta_true=meta.get("theta_true"),
        class_map={int(original): int(label) for original, label in meta["class_map"].items()},
        seed=int(meta["seed"]),
        known_priors=tuple(known_priors) if known_priors is not None else None,
    )


def _write_split(path: Path, dataset: Dataset) -> None:
    header = [f"x{j + 1}" for j in range(dataset.d)]
    if dataset.labels is not None:
        header.append(LABEL_COLUMN)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.features[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            writer.writerow(row)


def _read_split(path: Path, class_count: int, labeled: bool) -> Dataset:
    _, features, raw_labels = read_table(path, LABEL_COLUMN if labeled else None)
    labels: Optional[np.ndarray] = None
    if raw_labels is not None:
        labels = np.empty(len(raw_labels), dtype=np.int64)
        for i, raw in enumerate(raw_labels):
            try:
                labels[i] = int(raw)
            except ValueError:
                raise DataFormatError(
                    f"label {raw!r} is not an integer", path=path, row=i + 2, column=LABEL_COLUMN
                ) from None
            if not 1 <= labels[i] <= class_count:
                raise DataFormatError(
                    f"label {raw} outside 1..{class_count}", path=path, row=i + 2, column=LABEL_COLUMN
                )
    return Dataset(features=features, labels=labels, class_count=class_count)
