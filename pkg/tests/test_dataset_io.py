"""
Tests for CSV / FSK1 ingestion and standardization
"""

import struct

import numpy as np
import pytest

from qubits.data.dataset_io import (
    FRAME_MAGIC,
    Dataset,
    center_rows,
    crop_region,
    load_csv,
    load_frames,
    parse_roi,
    read_input,
    standardize,
    write_csv,
    write_frames,
)
from qubits.utils.errors import (
    DataFormatError,
    DataParseError,
    FrameFormatError,
    InputError,
    InsufficientDataError,
)


def _fsk1(path, frames, height, width, declared=None):
    n = declared if declared is not None else frames.shape[0]
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIII", FRAME_MAGIC, n, height, width))
        f.write(np.ascontiguousarray(frames, dtype="<f8").tobytes())
    return path


class TestLoadCsv:
    def test_labelled_rows(self, write_text):
        path = write_text("small.csv", "1,0.5,0.2\n1,0.4,0.3\n2,0.9,0.8\n")
        d = load_csv(path, has_labels=True)
        assert (d.n, d.m) == (3, 2)
        assert d.labels.tolist() == [1, 1, 2]
        np.testing.assert_array_equal(d.data[0], [0.5, 0.2])

    def test_zero_rows_without_labels(self, write_text):
        d = load_csv(write_text("zeros.csv", "0,0\n0,0\n"))
        assert (d.n, d.m) == (2, 2)
        assert d.labels is None

    def test_crop_width(self, write_text, rng):
        rows = rng.normal(size=(5, 46))
        text = "\n".join(f"{i % 3 + 1}," + ",".join(f"{v:.6f}" for v in row) for i, row in enumerate(rows))
        d = load_csv(write_text("crop.csv", text), has_labels=True)
        assert d.m == 46

    def test_row_order_preserved(self, write_text):
        d = load_csv(write_text("order.csv", "3,1\n1,2\n2,3\n"))
        np.testing.assert_array_equal(d.data[:, 0], [3, 1, 2])

    def test_header_skipped(self, write_text):
        d = load_csv(write_text("header.csv", "a,b\n1,2\n3,4\n"), header=True)
        np.testing.assert_array_equal(d.data, [[1, 2], [3, 4]])

    def test_ragged_row(self, write_text):
        with pytest.raises(DataFormatError) as info:
            load_csv(write_text("ragged.csv", "1,2,3\n4,5\n6,7,8\n"))
        assert info.value.row == 1

    def test_non_numeric_cell(self, write_text):
        with pytest.raises(DataParseError) as info:
            load_csv(write_text("bad.csv", "1,2\n3,abc\n"))
        assert (info.value.row, info.value.col) == (1, 1)

    def test_non_finite_cell(self, write_text):
        with pytest.raises(DataParseError):
            load_csv(write_text("inf.csv", "1,2\n3,inf\n"))

    def test_label_must_be_integer(self, write_text):
        with pytest.raises(DataParseError) as info:
            load_csv(write_text("label.csv", "1,2\n1.5,3\n"), has_labels=True)
        assert (info.value.row, info.value.col) == (1, 0)

    def test_single_row(self, write_text):
        with pytest.raises(InsufficientDataError):
            load_csv(write_text("one.csv", "1,2,3\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv")


class TestFrames:
    def test_shape_bookkeeping(self, tmp_path):
        frames = np.arange(24, dtype=np.float64).reshape(4, 6)
        d = load_frames(_fsk1(tmp_path / "s.fsk", frames, 2, 3))
        assert (d.n, d.m, d.frame_shape) == (4, 6, (2, 3))
        np.testing.assert_array_equal(d.data, frames)

    def test_single_frame(self, tmp_path):
        with pytest.raises(InsufficientDataError):
            load_frames(_fsk1(tmp_path / "one.fsk", np.zeros((1, 6)), 2, 3))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fsk"
        path.write_bytes(b"XXXX" + struct.pack("<III", 2, 1, 1) + np.zeros(2).tobytes())
        with pytest.raises(FrameFormatError):
            load_frames(path)

    def test_size_mismatch(self, tmp_path):
        with pytest.raises(FrameFormatError):
            load_frames(_fsk1(tmp_path / "short.fsk", np.zeros((3, 6)), 2, 3, declared=4))

    def test_round_trip_is_byte_identical(self, tmp_path, rng):
        original = _fsk1(tmp_path / "a.fsk", rng.normal(size=(5, 12)), 3, 4)
        copy = write_frames(load_frames(original), tmp_path / "b.fsk")
        assert copy.read_bytes() == original.read_bytes()

    def test_read_input_dispatch(self, tmp_path, write_text):
        frames = read_input(_fsk1(tmp_path / "f.fsk", np.ones((2, 4)), 2, 2))
        series = read_input(write_text("s.csv", "1,2\n3,4\n"))
        assert frames.frame_shape == (2, 2)
        assert series.frame_shape is None


class TestStandardize:
    def test_analytic_row(self):
        d = standardize(Dataset(data=[[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]]))
        r = np.sqrt(1.5)
        np.testing.assert_allclose(d.data[0], [-r, 0.0, r], atol=1e-12)

    def test_constant_row_warns(self):
        d = standardize(Dataset(data=[[5.0, 5.0, 5.0], [1.0, 2.0, 4.0]]))
        np.testing.assert_array_equal(d.data[0], [0.0, 0.0, 0.0])
        assert any("row 0" in note for note in d.warnings)

    def test_random_row_moments(self, rng):
        d = standardize(Dataset(data=rng.normal(3.0, 7.0, size=(4, 46))))
        assert np.max(np.abs(d.data.mean(axis=1))) < 1e-12
        np.testing.assert_allclose(d.data.var(axis=1), 1.0, atol=1e-12)

    def test_idempotent(self, rng):
        once = standardize(Dataset(data=rng.normal(size=(6, 20))))
        twice = standardize(once)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-12)

    def test_global_mode(self, rng):
        d = standardize(Dataset(data=rng.normal(2.0, 3.0, size=(5, 10))), mode="global")
        assert abs(d.data.mean()) < 1e-12
        assert abs(d.data.std() - 1.0) < 1e-12

    def test_none_mode_is_identity(self, rng):
        d = Dataset(data=rng.normal(size=(3, 4)))
        assert standardize(d, mode="none") is d

    def test_unknown_mode(self, rng):
        with pytest.raises(InputError):
            standardize(Dataset(data=rng.normal(size=(3, 4))), mode="bogus")

    def test_labels_carried(self):
        d = standardize(Dataset(data=[[1.0, 2.0], [3.0, 5.0]], labels=[7, 8]))
        assert d.labels.tolist() == [7, 8]


class TestDatasetHelpers:
    def test_data_is_read_only(self):
        d = Dataset(data=[[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(ValueError):
            d.data[0, 0] = 9.0

    def test_frame_shape_must_match(self):
        with pytest.raises(FrameFormatError):
            Dataset(data=np.zeros((2, 6)), frame_shape=(2, 2))

    def test_center_rows(self, rng):
        d = center_rows(Dataset(data=rng.normal(5.0, 1.0, size=(4, 9))))
        assert np.max(np.abs(d.data.mean(axis=1))) < 1e-12

    def test_crop_region(self):
        frames = np.arange(2 * 3 * 4, dtype=np.float64).reshape(2, 12)
        d = crop_region(Dataset(data=frames, frame_shape=(3, 4)), (1, 0, 3, 2))
        assert d.frame_shape == (2, 2)
        np.testing.assert_array_equal(d.data[0], [1, 2, 5, 6])

    def test_crop_outside_frame(self):
        d = Dataset(data=np.zeros((2, 12)), frame_shape=(3, 4))
        with pytest.raises(InputError):
            crop_region(d, (0, 0, 5, 2))

    def test_parse_roi(self):
        assert parse_roi("1, 2,3,4") == (1, 2, 3, 4)
        with pytest.raises(InputError):
            parse_roi("1,2,3")

    def test_digest_tracks_content(self):
        a = Dataset(data=[[1.0, 2.0], [3.0, 4.0]])
        b = Dataset(data=[[1.0, 2.0], [3.0, 4.0]])
        c = Dataset(data=[[1.0, 2.0], [3.0, 4.5]])
        assert a.digest() == b.digest() != c.digest()

    def test_write_csv_round_trip(self, tmp_path, rng):
        matrix = rng.normal(size=(3, 4))
        loaded = load_csv(write_csv(matrix, tmp_path / "m.csv"))
        np.testing.assert_array_equal(loaded.data, matrix)
