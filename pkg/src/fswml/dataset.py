"""Weld-run records, CSV ingestion, feature encoding and the seeded split."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Mapping, Sequence, Union

import numpy as np

from .rng import Xoshiro256

TOOL_MATERIALS = ("H13", "C40", "HSS")
CSV_COLUMNS = (
    "tool_material",
    "rotational_speed_rpm",
    "welding_speed_mm_min",
    "axial_force_kn",
    "uts_mpa",
)
NUMERIC_FEATURES = ("rotational_speed", "welding_speed", "axial_force")
TOOL_FEATURES = tuple(f"tool={t}" for t in TOOL_MATERIALS)


class DatasetError(ValueError):
    """Raised for malformed CSV input; the message names row and column."""


@dataclass(frozen=True)
class ProcessRecord:
    """One weld run: tool, rpm, mm/min, kN and the measured UTS in MPa."""

    tool_material: str
    rotational_speed: float
    welding_speed: float
    axial_force: float
    uts: float

    def __post_init__(self) -> None:
        if self.tool_material not in TOOL_MATERIALS:
            raise DatasetError(f"unknown tool material {self.tool_material!r}")
        for name in ("rotational_speed", "welding_speed", "axial_force", "uts"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise DatasetError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class Dataset:
    records: tuple[ProcessRecord, ...]
    source: str

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i: int) -> ProcessRecord:
        return self.records[i]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Row i always corresponds to record i of the encoded dataset."""

    feature_names: tuple[str, ...]
    rows: np.ndarray
    targets: np.ndarray
    includes_tool: bool

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class SplitPair:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_ratio: float


@dataclass(frozen=True)
class MissingReport:
    total_cells: int
    missing_cells: int
    locations: tuple[tuple[int, str], ...]


_EMBEDDED_BODY = """\
H13,900,25,2,251
H13,900,25,2,254
H13,900,25,2,257
H13,1200,35,3,264
H13,1200,35,3,260
H13,1200,35,3,268
H13,1500,45,4,284
H13,1500,45,4,284
H13,1500,45,4,281
H13,900,35,4,242
H13,900,35,4,244
H13,900,35,4,241
H13,1200,45,2,264
H13,1200,45,2,264
H13,1200,45,2,260
H13,1500,25,3,288
H13,1500,25,3,288
C40,1500,25,3,286
C40,900,45,3,238
C40,900,45,3,231
C40,900,45,3,236
C40,1200,25,4,271
C40,1200,25,4,268
C40,1200,25,4,273
C40,1500,35,2,281
C40,1500,35,2,278
C40,1500,35,2,280
C40,900,25,2,248
C40,900,25,2,248
C40,900,25,2,245
C40,1200,35,3,258
C40,1200,35,3,257
C40,1200,35,3,254
C40,1500,45,4,281
HSS,1500,45,4,286
HSS,1500,45,4,285
HSS,900,35,4,248
HSS,900,35,4,246
HSS,900,35,4,247
HSS,1200,45,2,266
HSS,1200,45,2,264
HSS,1200,45,2,269
HSS,1500,25,3,291
HSS,1500,25,3,292
HSS,1500,25,3,291
HSS,900,45,3,239
HSS,900,45,3,242
HSS,1200,25,4,276
HSS,1200,25,4,274
HSS,1500,35,2,286
HSS,1500,35,2,285
HSS,1500,35,2,285
"""

EMBEDDED_CSV = ",".join(CSV_COLUMNS) + "\n" + _EMBEDDED_BODY


def _fmt_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _decode(source: Union[bytes, str, BinaryIO]) -> str:
    if isinstance(source, str):
        return source
    raw = source if isinstance(source, bytes) else source.read()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"input is not UTF-8 text: {exc}") from None


def load_csv(source: Union[bytes, str, BinaryIO], name: str = "<stream>") -> Dataset:
    """Parse the weld CSV. Rejects (never imputes) blank or bad cells.

    Row numbers in error messages count data rows from 1, so the first
    record after the header is row 1.
    """
    reader = csv.reader(io.StringIO(_decode(source), newline=""))
    header = next(reader, None)
    if header is None:
        raise DatasetError("empty dataset: no header line")
    header = [h.strip() for h in header]
    if tuple(header) != CSV_COLUMNS:
        raise DatasetError(
            f"malformed header {','.join(header)!r}; expected {','.join(CSV_COLUMNS)!r}"
        )
    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise DatasetError(
                f"row {row_no}: expected {len(CSV_COLUMNS)} fields, got {len(row)}"
            )
        tool = row[0].strip()
        if tool not in TOOL_MATERIALS:
            raise DatasetError(
                f"row {row_no}, column tool_material: unknown tool label {tool!r}"
            )
        values = []
        for col, cell in zip(CSV_COLUMNS[1:], row[1:]):
            try:
                value = float(cell)
            except ValueError:
                raise DatasetError(
                    f"row {row_no}, column {col}: non-numeric value {cell.strip()!r}"
                ) from None
            if not (math.isfinite(value) and value > 0):
                raise DatasetError(f"row {row_no}, column {col}: must be positive, got {cell.strip()!r}")
            values.append(value)
        records.append(ProcessRecord(tool, *values))
    if not records:
        raise DatasetError("empty dataset: header present but no data rows")
    return Dataset(tuple(records), name)


def load_csv_path(path: str) -> Dataset:
    with open(path, "rb") as fh:
        return load_csv(fh, name=str(path))


def dumps_csv(dataset: Dataset) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in dataset.records:
        nums = (r.rotational_speed, r.welding_speed, r.axial_force, r.uts)
        lines.append(",".join([r.tool_material, *(_fmt_number(v) for v in nums)]))
    return "\n".join(lines) + "\n"


def embedded_fsw_dataset() -> Dataset:
    """The 52 experimental runs on 5 mm AA6061, in experiment order."""
    return load_csv(EMBEDDED_CSV, name="embedded")


def read_raw_table(source: Union[bytes, str, BinaryIO]) -> list[dict[str, str]]:
    """Rows as header-keyed string dicts, without any validation."""
    reader = csv.DictReader(io.StringIO(_decode(source), newline=""))
    return [dict(row) for row in reader]


def _cell_ok(column: str, cell) -> bool:
    if cell is None or not str(cell).strip():
        return False
    if column == "tool_material":
        return str(cell).strip() in TOOL_MATERIALS
    try:
        return math.isfinite(float(cell))
    except ValueError:
        return False


def check_missing(table: Union[Dataset, Sequence[Mapping[str, object]]]) -> MissingReport:
    """Count blank or unparseable cells over the five CSV columns."""
    if isinstance(table, Dataset):
        # load_csv already rejected every bad cell
        return MissingReport(len(table) * len(CSV_COLUMNS), 0, ())
    locations = []
    for i, row in enumerate(table):
        for col in CSV_COLUMNS:
            if not _cell_ok(col, row.get(col)):
                locations.append((i, col))
    return MissingReport(len(table) * len(CSV_COLUMNS), len(locations), tuple(locations))


def encode(dataset: Dataset, include_tool: bool = False) -> FeatureMatrix:
    if len(dataset) == 0:
        raise DatasetError("cannot encode an empty dataset")
    names = NUMERIC_FEATURES + (TOOL_FEATURES if include_tool else ())
    rows = np.zeros((len(dataset), len(names)))
    for i, r in enumerate(dataset.records):
        rows[i, :3] = (r.rotational_speed, r.welding_speed, r.axial_force)
        if include_tool:
            rows[i, 3 + TOOL_MATERIALS.index(r.tool_material)] = 1.0
    targets = np.array([r.uts for r in dataset.records], dtype=float)
    rows.setflags(write=False)
    targets.setflags(write=False)
    return FeatureMatrix(names, rows, targets, include_tool)


def n_test_rows(n: int, test_ratio: float) -> int:
    # tolerance keeps e.g. 0.29 * 100 from flooring to 28
    return math.floor(n * test_ratio + 1e-9)


def train_test_split(matrix: Union[FeatureMatrix, int], test_ratio: float = 0.2,
                     seed: int = 0) -> SplitPair:
    """Shuffle range(n) with xoshiro256** and peel off the first floor(n*ratio) as test.

    Index tuples are returned sorted.
    """
    n = matrix if isinstance(matrix, int) else matrix.n
    if not 0 < test_ratio < 1:
        raise ValueError(f"test_ratio must lie in (0, 1), got {test_ratio}")
    n_test = n_test_rows(n, test_ratio)
    if n < 2 or n_test < 1 or n_test >= n:
        raise ValueError(f"n={n} with test_ratio={test_ratio} leaves an empty train or test set")
    order = list(range(n))
    Xoshiro256(seed).shuffle(order)
    return SplitPair(tuple(sorted(order[n_test:])), tuple(sorted(order[:n_test])), seed, test_ratio)


def dataset_fingerprint(dataset: Dataset) -> str:
    return hashlib.sha256(dumps_csv(dataset).encode("utf-8")).hexdigest()
