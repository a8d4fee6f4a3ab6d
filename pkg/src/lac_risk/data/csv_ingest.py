"""CSV ingestion into Dataset values."""
import csv
import math
from pathlib import Path
from typing import Optional

import numpy as np

from lac_risk.core import DataFormatError, Dataset


def read_table(
    path: Path, label_column: Optional[str] = None
) -> tuple[list[str], np.ndarray, Optional[list[str]]]:
    """Read a comma-separated file with one header row.

    Returns the feature column names, the float64 feature matrix and the raw
    label cells (or None without a label column). Row numbers in errors are
    file line numbers, so the first data row is row 2.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or not any(cell.strip() for cell in header):
            raise DataFormatError("empty file", path=path, row=1)
        header = [cell.strip() for cell in header]

        label_index: Optional[int] = None
        if label_column is not None:
            if label_column not in header:
                raise DataFormatError(
                    f"label column not found in header {header}", path=path, row=1, column=label_column
                )
            label_index = header.index(label_column)

        feature_names = [name for i, name in enumerate(header) if i != label_index]
        rows: list[list[float]] = []
        raw_labels: list[str] = []

        for row_number, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise DataFormatError(
                    f"expected {len(header)} fields, found {len(cells)}", path=path, row=row_number
                )
            values = []
            for i, cell in enumerate(cells):
                if i == label_index:
                    raw_labels.append(cell.strip())
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"non-numeric feature value {cell!r}", path=path, row=row_number, column=header[i]
                    ) from None
                if not math.isfinite(value):
                    raise DataFormatError(
                        f"non-finite feature value {cell!r}", path=path, row=row_number, column=header[i]
                    )
                values.append(value)
            rows.append(values)

    if not rows:
        raise DataFormatError("no data rows", path=path, row=2)

    features = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    return feature_names, features, (raw_labels if label_index is not None else None)


def load_csv(path: Path, label_column: Optional[str] = None) -> Dataset:
    """Load a CSV file into a Dataset.

    Labels (integers or strings alike) are mapped to 1..K in order of first
    appearance; the original label text is kept in ``label_names``.
    """
    _, features, raw_labels = read_table(path, label_column)
    if raw_labels is None:
        return Dataset(features=features, labels=None, class_count=0)

    mapping: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, raw in enumerate(raw_labels):
        if raw == "":
            raise DataFormatError("empty label", path=Path(path), row=i + 2, column=label_column)
        labels[i] = mapping.setdefault(raw, len(mapping) + 1)

    return Dataset(
        features=features,
        labels=labels,
        class_count=len(mapping),
        label_names=tuple(mapping),
    )
