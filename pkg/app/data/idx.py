"""Reader and fixture writer for the big-endian IDX files MNIST ships in."""
import logging
from pathlib import Path

import numpy as np

from app.core.utils import DataFormatError
from app.engine.types import LabeledDataset

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

_HEADER = np.dtype(">u4")


def _read_header(raw, words, path):
    needed = words * _HEADER.itemsize
    if len(raw) < needed:
        raise DataFormatError(f"{path}: truncated header")
    return [int(w) for w in np.frombuffer(raw[:needed], dtype=_HEADER)], needed


def _read_labels(path):
    raw = Path(path).read_bytes()
    (magic, count), offset = _read_header(raw, 2, path)
    if magic != LABELS_MAGIC:
        raise DataFormatError(f"{path}: bad label magic 0x{magic:08x}")
    body = np.frombuffer(raw, dtype=np.uint8, offset=offset)
    if body.shape[0] < count:
        raise DataFormatError(
            f"{path}: expected {count} labels, found {body.shape[0]}"
        )
    return body[:count].astype(np.int64)


def _read_images(path):
    raw = Path(path).read_bytes()
    (magic, count, rows, cols), offset = _read_header(raw, 4, path)
    if magic != IMAGES_MAGIC:
        raise DataFormatError(f"{path}: bad image magic 0x{magic:08x}")
    pixels = count * rows * cols
    body = np.frombuffer(raw, dtype=np.uint8, offset=offset)
    if body.shape[0] < pixels:
        raise DataFormatError(
            f"{path}: expected {pixels} pixel bytes, found {body.shape[0]}"
        )
    return body[:pixels].reshape(count, rows * cols)


def load_idx(images_path, labels_path) -> LabeledDataset:
    images = _read_images(images_path)
    labels = _read_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{images.shape[0]} images but {labels.shape[0]} labels"
        )
    logger.info(f"loaded {labels.shape[0]} samples from {images_path}")
    return LabeledDataset(features=images / 255.0, labels=labels)


def write_idx(dataset: LabeledDataset, images_path, labels_path, shape):
    """Write ``dataset`` as IDX; features are expected in [0, 1]."""
    rows, cols = shape
    count = len(dataset)
    pixels = np.clip(np.rint(dataset.features * 255.0), 0, 255).astype(np.uint8)
    header = np.array([IMAGES_MAGIC, count, rows, cols], dtype=_HEADER)
    Path(images_path).write_bytes(header.tobytes() + pixels.tobytes())

    header = np.array([LABELS_MAGIC, count], dtype=_HEADER)
    labels = dataset.labels.astype(np.uint8)
    Path(labels_path).write_bytes(header.tobytes() + labels.tobytes())
