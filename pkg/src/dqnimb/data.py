"""Dataset ingestion and preparation.

Covers CSV and IDX (big-endian image/label pair) loading, label binarization,
imbalance-ratio subsampling (all negatives kept, positives reduced to
floor(rho * N)), synthetic Gaussian blobs, stratified train/validation
splitting, and feature normalization whose statistics are fit on training
data only.

Convention after binarization: label 1 is the positive class, label 0 the
negative class, and the minority class is whichever has fewer samples (ties
resolve to 1, since the positive class is the one that gets reduced).
"""
from __future__ import annotations

import csv
import gzip
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError, ParseError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    minority_label: int | None = None
    note: str = ""

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise InputError(f"features must be 2-D (n, d), got shape {feats.shape}")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise InputError("labels must be 1-D with one entry per feature row")
        if not np.all(np.isfinite(feats)):
            raise InputError("features must be finite")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    @property
    def is_binary(self) -> bool:
        return set(self.class_counts()) <= {0, 1}

    def minority_count(self) -> int:
        self._require_binary_with_minority()
        return int(np.sum(self.labels == self.minority_label))

    def majority_count(self) -> int:
        return self.n - self.minority_count()

    @property
    def rho(self) -> float:
        """Imbalance ratio: minority count over majority count."""
        return self.minority_count() / self.majority_count()

    def _require_binary_with_minority(self):
        if not self.is_binary or self.minority_label is None:
            raise InputError("operation requires a binarized dataset with a minority label")
        counts = self.class_counts()
        if len(counts) < 2 or 0 not in counts or 1 not in counts:
            raise InputError("operation requires both classes to be present")


def _infer_minority(labels: np.ndarray) -> int:
    # ties resolve to the positive class, the one reduced by subsampling
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    return 1 if n_pos <= n_neg else 0


def require_both_classes(ds: Dataset) -> None:
    counts = ds.class_counts()
    if counts.get(0, 0) == 0 or counts.get(1, 0) == 0:
        raise InputError("dataset must contain both classes (labels 0 and 1)")


# ---------------------------------------------------------------------------
# loaders


def load_csv(path: str | Path, label_column: int | str = "label", has_header: bool = True) -> Dataset:
    """Numeric CSV with one binary label column; all other columns are features.

    label_column may be a header name (needs has_header) or a 0-based index.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ParseError(f"{path}: empty file")

    header = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header only, no data rows")

    if isinstance(label_column, str):
        if header is None:
            raise ParseError(f"{path}: label column given by name {label_column!r} but has_header=False")
        if label_column not in header:
            raise ParseError(f"{path}: missing label column {label_column!r} in header {header}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)

    width = len(rows[0])
    if not (-width <= label_idx < width):
        raise ParseError(f"{path}: label column index {label_idx} out of range for width {width}")
    label_idx %= width

    features = []
    labels = []
    first_data_row = 2 if has_header else 1
    for offset, row in enumerate(rows):
        rownum = first_data_row + offset
        if len(row) != width:
            raise ParseError(f"{path}: row {rownum}: expected {width} cells, got {len(row)}")
        try:
            values = [float(c) for c in row]
        except ValueError as exc:
            raise ParseError(f"{path}: row {rownum}: non-numeric cell ({exc})") from exc
        label = values.pop(label_idx)
        if label not in (0.0, 1.0):
            raise ParseError(f"{path}: row {rownum}: non-binary label {label!r}")
        features.append(values)
        labels.append(int(label))

    labels_arr = np.array(labels, dtype=np.int64)
    return Dataset(
        np.array(features, dtype=np.float64),
        labels_arr,
        minority_label=_infer_minority(labels_arr),
        note=f"csv:{path.name}",
    )


def save_csv(ds: Dataset, path: str | Path, header: bool = True) -> None:
    """Write features plus a final `label` column; floats keep full repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"f{j}" for j in range(ds.dim)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def _open_maybe_gzip(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return path.open("rb")


def _read_exact(fh, nbytes: int, path: Path, what: str) -> bytes:
    data = fh.read(nbytes)
    if len(data) != nbytes:
        raise FormatError(f"{path}: truncated {what} (wanted {nbytes} bytes, got {len(data)})")
    return data


def load_idx(images_path: str | Path, labels_path: str | Path) -> Dataset:
    """IDX image/label pair: big-endian magic 0x00000803 / 0x00000801.

    Pixels are flattened row-major to d = rows*cols, values 0..255 as floats.
    Labels stay 0..9; binarize() maps them afterwards.
    """
    images_path = Path(images_path)
    labels_path = Path(labels_path)

    with _open_maybe_gzip(images_path) as fh:
        magic, n_images, n_rows, n_cols = struct.unpack(">IIII", _read_exact(fh, 16, images_path, "header"))
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(
                f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
            )
        payload = _read_exact(fh, n_images * n_rows * n_cols, images_path, "pixel payload")
        if fh.read(1):
            raise FormatError(f"{images_path}: trailing bytes after pixel payload")

    with _open_maybe_gzip(labels_path) as fh:
        magic, n_labels = struct.unpack(">II", _read_exact(fh, 8, labels_path, "header"))
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(
                f"{labels_path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
            )
        label_bytes = _read_exact(fh, n_labels, labels_path, "label payload")
        if fh.read(1):
            raise FormatError(f"{labels_path}: trailing bytes after label payload")

    if n_images != n_labels:
        raise FormatError(f"image count {n_images} does not match label count {n_labels}")

    features = np.frombuffer(payload, dtype=np.uint8).reshape(n_images, n_rows * n_cols)
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    return Dataset(
        features.astype(np.float64),
        labels,
        minority_label=None,
        note=f"idx:{images_path.name}",
    )


# ---------------------------------------------------------------------------
# transforms


def binarize(ds: Dataset, positive_labels, negative_labels=None) -> Dataset:
    """Map raw labels to 1 (positive) / 0 (negative).

    With an explicit negative set, samples outside both sets are dropped;
    otherwise every non-positive label counts as negative.
    """
    positive = set(int(v) for v in positive_labels)
    if not positive:
        raise InputError("positive label set must be non-empty")
    present = set(int(v) for v in np.unique(ds.labels))
    if negative_labels is None:
        negative = present - positive
    else:
        negative = set(int(v) for v in negative_labels)
        if positive & negative:
            raise InputError(f"positive and negative sets overlap: {sorted(positive & negative)}")

    is_pos = np.isin(ds.labels, sorted(positive))
    is_neg = np.isin(ds.labels, sorted(negative))
    keep = is_pos | is_neg
    if not np.any(is_pos & keep):
        raise InputError("binarization produced an empty positive class")
    if not np.any(is_neg):
        raise InputError("binarization produced an empty negative class")

    labels = np.where(is_pos[keep], 1, 0).astype(np.int64)
    return Dataset(
        ds.features[keep],
        labels,
        minority_label=_infer_minority(labels),
        note=ds.note + f"|binarized(pos={sorted(positive)})",
    )


def make_imbalanced(ds: Dataset, rho: float, rng: np.random.Generator) -> Dataset:
    """Keep all negatives, subsample positives without replacement to
    min(P, floor(rho * N))."""
    if not 0 < rho <= 1:
        raise InputError(f"rho must lie in (0, 1], got {rho}")
    if not ds.is_binary:
        raise InputError("make_imbalanced requires a binarized dataset")
    require_both_classes(ds)

    pos_idx = np.flatnonzero(ds.labels == 1)
    n_neg = int(np.sum(ds.labels == 0))
    target = math.floor(rho * n_neg)
    if target == 0:
        raise InputError(f"floor(rho * N) = 0 for rho={rho}, N={n_neg}; nothing to keep")
    if target >= len(pos_idx):
        return ds

    kept_pos = rng.choice(pos_idx, size=target, replace=False)
    keep = np.zeros(ds.n, dtype=bool)
    keep[ds.labels == 0] = True
    keep[kept_pos] = True
    labels = ds.labels[keep]
    return Dataset(
        ds.features[keep],
        labels,
        minority_label=_infer_minority(labels),
        note=ds.note + f"|imbalanced(rho={rho})",
    )


@dataclass(frozen=True)
class BlobSpec:
    mean_pos: tuple[float, ...]
    mean_neg: tuple[float, ...]
    n_pos: int
    n_neg: int
    std_pos: float = 1.0
    std_neg: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if len(self.mean_pos) != len(self.mean_neg):
            raise InputError("class means must have the same dimension")
        if self.n_pos < 1 or self.n_neg < 1:
            raise InputError("class counts must be >= 1")
        if self.std_pos <= 0 or self.std_neg <= 0:
            raise InputError("standard deviations must be > 0")


def gen_blobs(spec: BlobSpec) -> Dataset:
    """Two isotropic Gaussian clouds, positives (label 1) first."""
    rng = np.random.default_rng(spec.seed)
    d = len(spec.mean_pos)
    pos = np.asarray(spec.mean_pos, dtype=np.float64) + spec.std_pos * rng.standard_normal((spec.n_pos, d))
    neg = np.asarray(spec.mean_neg, dtype=np.float64) + spec.std_neg * rng.standard_normal((spec.n_neg, d))
    labels = np.concatenate([np.ones(spec.n_pos, dtype=np.int64), np.zeros(spec.n_neg, dtype=np.int64)])
    return Dataset(
        np.vstack([pos, neg]),
        labels,
        minority_label=_infer_minority(labels),
        note=f"blobs(seed={spec.seed})",
    )


def split(ds: Dataset, val_fraction: float, rng: np.random.Generator) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive, class-stratified (train, validation) split.

    Each class contributes round(val_fraction * count) samples to validation,
    clamped so both splits keep at least one sample of each class.
    """
    if not 0 < val_fraction < 1:
        raise InputError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    if not ds.is_binary:
        raise InputError("split requires a binarized dataset")
    require_both_classes(ds)
    counts = ds.class_counts()
    if min(counts.values()) < 2:
        raise InputError(
            "stratified split needs at least 2 samples per class; "
            "provide more data or disable early stopping"
        )

    val_idx: list[np.ndarray] = []
    for label in (0, 1):
        idx = np.flatnonzero(ds.labels == label)
        n_val = int(round(val_fraction * len(idx)))
        n_val = min(max(n_val, 1), len(idx) - 1)
        perm = rng.permutation(idx)
        val_idx.append(perm[:n_val])

    val_mask = np.zeros(ds.n, dtype=bool)
    val_mask[np.concatenate(val_idx)] = True

    def _take(mask: np.ndarray, tag: str) -> Dataset:
        labels = ds.labels[mask]
        return Dataset(ds.features[mask], labels, ds.minority_label, ds.note + f"|{tag}")

    return _take(~val_mask, "train"), _take(val_mask, "val")


# ---------------------------------------------------------------------------
# normalization


@dataclass
class Normalizer:
    """Per-feature affine transform (x - offset) / scale, fit on training data
    and reused verbatim on any other split."""

    mode: str
    offset: np.ndarray
    scale: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def transform(self, ds: Dataset) -> Dataset:
        if ds.dim != self.offset.shape[0]:
            raise InputError(f"normalizer fit for {self.offset.shape[0]} features, got {ds.dim}")
        return Dataset(
            (ds.features - self.offset) / self.scale,
            ds.labels,
            ds.minority_label,
            ds.note + f"|{self.mode}",
        )


def _looks_like_byte_pixels(x: np.ndarray) -> bool:
    return (
        x.min() >= 0.0
        and x.max() <= 255.0
        and x.max() > 1.0
        and np.all(x == np.trunc(x))
    )


def fit_normalizer(ds: Dataset, mode: str) -> Normalizer:
    if mode not in ("unit_range", "zscore"):
        raise InputError(f"unknown normalization mode {mode!r}")
    x = ds.features
    warnings: list[str] = []
    if mode == "unit_range":
        if _looks_like_byte_pixels(x):
            offset = np.zeros(ds.dim)
            scale = np.full(ds.dim, 255.0)
        else:
            lo = x.min(axis=0)
            hi = x.max(axis=0)
            span = hi - lo
            const = span == 0
            if np.any(const):
                warnings.append(f"constant features set to 0: {np.flatnonzero(const).tolist()}")
                span = np.where(const, 1.0, span)
            offset = lo
            scale = span
    else:
        offset = x.mean(axis=0)
        std = x.std(axis=0)
        const = std == 0
        if np.any(const):
            warnings.append(f"constant features set to 0: {np.flatnonzero(const).tolist()}")
            std = np.where(const, 1.0, std)
        scale = std
    return Normalizer(mode, offset, scale, warnings)


def normalize(ds: Dataset, mode: str) -> Dataset:
    """Fit on ds and transform it; use fit_normalizer() when a held-out set
    must reuse the training statistics."""
    return fit_normalizer(ds, mode).transform(ds)
