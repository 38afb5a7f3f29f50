"""
Dataset loading, validation and reshaping

Samples are rows of the data matrix throughout the package. Scalar series come
from CSV files; image time series come from FSK1 frame stacks and are
flattened row-major, one frame per row.

FSK1 layout (little endian)::

    b"FSK1" | u32 n_frames | u32 height | u32 width | n*h*w float64 values

Values are stored frame-major, then row-major within a frame.
"""

import errno
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.errors import (
    DataFormatError,
    DataParseError,
    FrameFormatError,
    InputError,
    InsufficientDataError,
)
from ..utils.helpers import array_digest, ensure_directory
from ..utils.logger import get_logger

logger = get_logger(__name__)

FRAME_MAGIC = b"FSK1"
_FRAME_HEADER = struct.Struct("<4sIII")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """n samples (rows) by m features, with optional labels and frame geometry"""
    data: np.ndarray
    labels: Optional[np.ndarray] = None
    frame_shape: Optional[Tuple[int, int]] = None
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 2:
            raise DataFormatError(f"data must be 2-dimensional, got shape {data.shape}")
        n, m = data.shape
        if n < 2:
            raise InsufficientDataError(f"need at least 2 samples, got {n}", n=n)
        if m < 1:
            raise DataFormatError("data must have at least one column")
        if not np.all(np.isfinite(data)):
            row, col = np.argwhere(~np.isfinite(data))[0]
            raise DataParseError("non-finite value in data", row=int(row), col=int(col))
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64, copy=True)
            if labels.shape != (n,):
                raise DataFormatError(f"expected {n} labels, got {labels.size}")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

        if self.frame_shape is not None:
            height, width = (int(v) for v in self.frame_shape)
            if height * width != m:
                raise FrameFormatError(
                    f"frame shape {height}x{width} does not match {m} columns",
                    height=height, width=width, columns=m,
                )
            object.__setattr__(self, "frame_shape", (height, width))

        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def digest(self) -> str:
        """Content digest used to tie reports to their input data"""
        return array_digest(self.data, self.labels)

    def with_data(self, data: np.ndarray, *, frame_shape="keep", warnings=None) -> "Dataset":
        """Copy with new data; labels carried through"""
        shape = self.frame_shape if frame_shape == "keep" else frame_shape
        notes = self.warnings if warnings is None else tuple(warnings)
        return replace(self, data=data, frame_shape=shape, warnings=notes)


def load_csv(path: PathLike, has_labels: bool = False, header: bool = False) -> Dataset:
    """
    Load a comma-separated file of series, one series per row

    Args:
        path: CSV file path (UTF-8)
        has_labels: first column holds an integer class label
        header: skip one header line

    Returns:
        Dataset with rows in file order
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "CSV not found", str(path))

    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if header:
        lines = lines[1:]
    lines = [line for line in lines if line.strip()]

    widths = [line.count(",") + 1 for line in lines]
    for row, width in enumerate(widths):
        if width != widths[0]:
            raise DataFormatError(
                f"row {row} has {width} columns, expected {widths[0]}",
                row=row, expected=widths[0], found=width,
            )

    if len(lines) < 2:
        raise InsufficientDataError(f"need at least 2 rows, got {len(lines)}", n=len(lines), path=str(path))

    frame = pd.read_csv(
        path,
        header=None,
        skiprows=1 if header else 0,
        dtype=str,
        keep_default_na=False,
        skip_blank_lines=True,
    )
    frame = frame.apply(lambda column: column.str.strip())

    labels = None
    if has_labels:
        label_column = frame.iloc[:, 0]
        is_integer = label_column.str.fullmatch(r"[+-]?\d+")
        if not is_integer.all():
            row = int(np.flatnonzero(~is_integer.to_numpy())[0])
            raise DataParseError(
                f"label {label_column.iloc[row]!r} in row {row} is not an integer",
                row=row, col=0,
            )
        labels = label_column.astype(np.int64).to_numpy()
        frame = frame.iloc[:, 1:]
        if frame.shape[1] == 0:
            raise DataFormatError("no data columns after the label column")

    numeric = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(numeric)
    if bad.any():
        row, col = (int(v) for v in np.argwhere(bad)[0])
        file_col = col + 1 if has_labels else col
        raise DataParseError(
            f"cell ({row}, {file_col}) = {frame.iat[row, col]!r} is not a finite number",
            row=row, col=file_col,
        )

    dataset = Dataset(data=numeric, labels=labels)
    logger.info(f"Loaded {dataset.n} series of length {dataset.m} from {path}")
    return dataset


def load_frames(path: PathLike) -> Dataset:
    """Load an FSK1 frame stack, flattening each frame into one row"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "frame stack not found", str(path))

    payload = path.read_bytes()
    if len(payload) < _FRAME_HEADER.size:
        raise FrameFormatError("file too short for an FSK1 header", path=str(path))

    magic, n_frames, height, width = _FRAME_HEADER.unpack_from(payload)
    if magic != FRAME_MAGIC:
        raise FrameFormatError(
            f"bad magic {magic!r}, expected {FRAME_MAGIC!r}", path=str(path)
        )

    expected = n_frames * height * width * 8
    body = len(payload) - _FRAME_HEADER.size
    if body != expected:
        raise FrameFormatError(
            f"header declares {n_frames}x{height}x{width} values ({expected} bytes) "
            f"but payload has {body} bytes",
            path=str(path), expected_bytes=expected, payload_bytes=body,
        )
    if n_frames < 2:
        raise InsufficientDataError(f"need at least 2 frames, got {n_frames}", n=n_frames, path=str(path))
    if height * width == 0:
        raise FrameFormatError("frames have zero pixels", path=str(path))

    values = np.frombuffer(payload, dtype="<f8", offset=_FRAME_HEADER.size)
    data = values.reshape(n_frames, height * width).astype(np.float64)

    dataset = Dataset(data=data, frame_shape=(height, width))
    logger.info(f"Loaded {n_frames} frames of {height}x{width} from {path}")
    return dataset


def write_frames(d: Dataset, path: PathLike) -> Path:
    """Write a frame dataset as an FSK1 stack"""
    if d.frame_shape is None:
        raise FrameFormatError("dataset has no frame shape to write")
    height, width = d.frame_shape
    path = ensure_directory(path)
    with open(path, "wb") as f:
        f.write(_FRAME_HEADER.pack(FRAME_MAGIC, d.n, height, width))
        f.write(np.ascontiguousarray(d.data, dtype="<f8").tobytes())
    return path


def write_frame_stack(frames: np.ndarray, frame_shape: Tuple[int, int], path: PathLike) -> Path:
    """Write any (count, h*w) float array as FSK1; count may be below 2"""
    height, width = frame_shape
    frames = np.ascontiguousarray(frames, dtype="<f8").reshape(-1, height * width)
    path = ensure_directory(path)
    with open(path, "wb") as f:
        f.write(_FRAME_HEADER.pack(FRAME_MAGIC, frames.shape[0], height, width))
        f.write(frames.tobytes())
    return path


def write_csv(matrix: np.ndarray, path: PathLike, columns: Optional[Sequence[str]] = None) -> Path:
    """Dump a 1-D or 2-D array as plain CSV (header only when columns given)"""
    array = np.asarray(matrix, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    path = ensure_directory(path)
    frame = pd.DataFrame(array, columns=list(columns) if columns is not None else None)
    frame.to_csv(path, index=False, header=columns is not None, float_format="%.17g")
    return path


def read_input(path: PathLike, has_labels: bool = False, header: bool = False) -> Dataset:
    """Load either format, dispatching on the FSK1 magic bytes"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "input not found", str(path))
    with open(path, "rb") as f:
        magic = f.read(len(FRAME_MAGIC))
    if magic == FRAME_MAGIC:
        return load_frames(path)
    return load_csv(path, has_labels=has_labels, header=header)


def standardize(d: Dataset, mode: str = "row") -> Dataset:
    """
    Shift and scale to mean 0, population variance 1

    Args:
        d: input dataset
        mode: "row" (each series independently), "global" (one mean/std for
            the whole matrix) or "none"

    Returns:
        Standardized dataset; constant rows become zeros and add a warning
    """
    if mode == "none":
        return d
    data = d.data
    notes: List[str] = list(d.warnings)

    if mode == "global":
        mean = data.mean()
        std = data.std()
        if std <= _flat_tolerance(mean):
            logger.warning("Dataset is constant; standardized to zeros")
            notes.append("constant dataset standardized to zeros")
            return d.with_data(np.zeros_like(data), warnings=notes)
        return d.with_data((data - mean) / std, warnings=notes)

    if mode != "row":
        raise InputError(f"unknown standardization mode {mode!r}", mode=mode)

    mean = data.mean(axis=1, keepdims=True)
    std = data.std(axis=1, keepdims=True)
    flat = (std <= _flat_tolerance(mean)).ravel()
    safe_std = np.where(flat[:, None], 1.0, std)
    result = (data - mean) / safe_std
    result[flat] = 0.0

    for row in np.flatnonzero(flat):
        notes.append(f"row {int(row)} is constant; standardized to zeros")
    if flat.any():
        logger.warning(f"{int(flat.sum())} constant row(s) standardized to zeros")

    return d.with_data(result, warnings=notes)


def _flat_tolerance(mean) -> np.ndarray:
    return np.finfo(np.float64).eps * np.maximum(1.0, np.abs(mean))


def center_rows(d: Dataset) -> Dataset:
    """Remove each row's mean (direction-only comparisons of near-constant frames)"""
    return d.with_data(d.data - d.data.mean(axis=1, keepdims=True))


def crop_region(d: Dataset, roi: Tuple[int, int, int, int]) -> Dataset:
    """
    Keep only a rectangular region of every frame

    Args:
        d: frame dataset
        roi: (x0, y0, x1, y1) with x the column and y the row, half-open

    Returns:
        Dataset of the cropped frames
    """
    if d.frame_shape is None:
        raise InputError("--roi applies to frame datasets only")
    height, width = d.frame_shape
    x0, y0, x1, y1 = (int(v) for v in roi)
    if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
        raise InputError(
            f"region {roi} outside frame {height}x{width}", roi=list(roi), height=height, width=width
        )
    frames = d.data.reshape(d.n, height, width)[:, y0:y1, x0:x1]
    new_shape = (y1 - y0, x1 - x0)
    return d.with_data(frames.reshape(d.n, -1), frame_shape=new_shape)


def parse_roi(text: str) -> Tuple[int, int, int, int]:
    """Parse an "x0,y0,x1,y1" flag value"""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise InputError(f"--roi expects x0,y0,x1,y1, got {text!r}")
    try:
        x0, y0, x1, y1 = (int(p) for p in parts)
    except ValueError as e:
        raise InputError(f"--roi values must be integers: {text!r}") from e
    return x0, y0, x1, y1
