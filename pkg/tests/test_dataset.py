from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fswml.dataset import (
    CSV_COLUMNS,
    EMBEDDED_CSV,
    TOOL_MATERIALS,
    Dataset,
    DatasetError,
    ProcessRecord,
    check_missing,
    dumps_csv,
    embedded_fsw_dataset,
    encode,
    load_csv,
    load_csv_path,
    read_raw_table,
    train_test_split,
)

REPO = Path(__file__).resolve().parents[1]
HEADER = ",".join(CSV_COLUMNS) + "\n"


def test_embedded_has_52_rows(dataset):
    assert len(dataset) == 52
    assert dataset.source == "embedded"


@pytest.mark.parametrize("index, expected", [
    (0, ("H13", 900, 25, 2, 251)),
    (43, ("HSS", 1500, 25, 3, 292)),
    (19, ("C40", 900, 45, 3, 231)),
    (17, ("C40", 1500, 25, 3, 286)),
    (51, ("HSS", 1500, 35, 2, 285)),
])
def test_embedded_rows(dataset, index, expected):
    r = dataset[index]
    assert (r.tool_material, r.rotational_speed, r.welding_speed, r.axial_force, r.uts) == expected


def test_extremes(dataset):
    uts = [r.uts for r in dataset.records]
    assert max(uts) == 292 and uts.index(292) == 43
    assert min(uts) == 231 and uts.index(231) == 19


def test_shipped_csv_matches_embedded():
    assert (REPO / "data" / "fsw_aa6061.csv").read_text() == EMBEDDED_CSV
    assert load_csv_path(REPO / "data" / "fsw_aa6061.csv").records == embedded_fsw_dataset().records


def test_crlf_and_bytes_accepted():
    text = EMBEDDED_CSV.replace("\n", "\r\n").encode()
    assert load_csv(text).records == embedded_fsw_dataset().records


def test_header_only_is_empty_error():
    with pytest.raises(DatasetError, match="empty dataset"):
        load_csv(HEADER)


def test_empty_file():
    with pytest.raises(DatasetError, match="empty dataset"):
        load_csv(b"")


def test_unknown_tool_names_row_and_label():
    with pytest.raises(DatasetError, match=r"row 2.*'X99'"):
        load_csv(HEADER + "H13,900,25,2,251\nX99,900,25,2,251\n")


def test_non_numeric_field_names_column():
    with pytest.raises(DatasetError, match=r"row 1, column welding_speed_mm_min"):
        load_csv(HEADER + "H13,900,fast,2,251\n")


def test_blank_cell_rejected():
    with pytest.raises(DatasetError, match=r"column uts_mpa"):
        load_csv(HEADER + "H13,900,25,2,\n")


def test_malformed_header():
    with pytest.raises(DatasetError, match="malformed header"):
        load_csv("tool,rpm,speed,force,uts\nH13,900,25,2,251\n")


def test_non_positive_rejected():
    with pytest.raises(DatasetError, match="positive"):
        load_csv(HEADER + "H13,0,25,2,251\n")


def test_record_invariants():
    with pytest.raises(DatasetError):
        ProcessRecord("W1", 900, 25, 2, 251)
    with pytest.raises(DatasetError):
        ProcessRecord("H13", 900, -25, 2, 251)


def test_round_trip_embedded(dataset):
    again = load_csv(dumps_csv(dataset), name="embedded")
    assert again == dataset


record_strategy = st.builds(
    ProcessRecord,
    st.sampled_from(TOOL_MATERIALS),
    st.floats(1e-3, 1e5, allow_nan=False),
    st.floats(1e-3, 1e5, allow_nan=False),
    st.floats(1e-3, 1e5, allow_nan=False),
    st.floats(1e-3, 1e5, allow_nan=False),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(record_strategy, min_size=1, max_size=12))
def test_round_trip_property(records):
    ds = Dataset(tuple(records), "x")
    assert load_csv(dumps_csv(ds), name="x") == ds


def test_missing_embedded_is_zero(dataset):
    report = check_missing(dataset)
    assert report.missing_cells == 0 and report.total_cells == 52 * 5


def test_missing_raw_blank_uts():
    rows = read_raw_table(HEADER + "H13,900,25,2,251\nC40,1200,35,3,\n")
    report = check_missing(rows)
    assert report.missing_cells == 1
    assert report.locations == ((1, "uts_mpa"),)
    assert report.total_cells == 10


def test_missing_raw_counts_unparseable():
    rows = read_raw_table(HEADER + "??,900,abc,2,251\n")
    assert check_missing(rows).locations == ((0, "tool_material"), (0, "welding_speed_mm_min"))


def test_missing_empty_table():
    report = check_missing([])
    assert (report.total_cells, report.missing_cells) == (0, 0)


def test_missing_raw_embedded_is_zero():
    assert check_missing(read_raw_table(EMBEDDED_CSV)).missing_cells == 0


def test_encode_without_tool(dataset):
    m = encode(dataset, include_tool=False)
    assert m.feature_names == ("rotational_speed", "welding_speed", "axial_force")
    assert m.rows.shape == (52, 3) and m.targets.shape == (52,)
    assert list(m.rows[0]) == [900, 25, 2] and m.targets[0] == 251


def test_encode_with_tool(dataset):
    m = encode(dataset, include_tool=True)
    assert m.p == 6
    assert list(m.rows[0, 3:]) == [1, 0, 0]
    assert list(m.rows[19, 3:]) == [0, 1, 0]
    assert list(m.rows[43, 3:]) == [0, 0, 1]
    assert np.all(m.rows[:, 3:].sum(axis=1) == 1)


def test_encode_preserves_row_order(dataset):
    m = encode(dataset, include_tool=True)
    for i, r in enumerate(dataset.records):
        assert tuple(m.rows[i, :3]) == (r.rotational_speed, r.welding_speed, r.axial_force)
        assert m.targets[i] == r.uts


def test_matrix_is_read_only(matrix):
    with pytest.raises(ValueError):
        matrix.rows[0, 0] = 1.0


def test_split_sizes(matrix):
    split = train_test_split(matrix, 0.2, 42)
    assert len(split.test_indices) == 10 and len(split.train_indices) == 42


def test_split_deterministic(matrix):
    assert train_test_split(matrix, 0.2, 9) == train_test_split(matrix, 0.2, 9)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 80), ratio=st.floats(0.05, 0.95), seed=st.integers(0, 2**64 - 1))
def test_split_partition_property(n, ratio, seed):
    try:
        split = train_test_split(n, ratio, seed)
    except ValueError:
        return
    train, test = set(split.train_indices), set(split.test_indices)
    assert not train & test
    assert train | test == set(range(n))
    assert len(test) >= 1 and len(train) >= 1


def test_split_seeds_differ():
    partitions = {train_test_split(52, 0.2, s).test_indices for s in range(10)}
    assert len(partitions) >= 2


def test_split_rejects_bad_ratio_and_tiny_n():
    with pytest.raises(ValueError):
        train_test_split(52, 1.5, 0)
    with pytest.raises(ValueError):
        train_test_split(3, 0.2, 0)


def test_split_floor_rounding():
    assert len(train_test_split(100, 0.29, 0).test_indices) == 29
    assert len(train_test_split(10, 0.3, 0).test_indices) == 3
