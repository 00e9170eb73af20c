import numpy as np

from app.core.utils import ConfigurationError, make_rng
from app.engine.types import LabeledDataset


def class_means(num_classes, dim):
    """Class ``c`` sits on axis ``c % dim``; later passes flip sign, then grow."""
    means = np.zeros((num_classes, dim))
    for c in range(num_classes):
        lap = c // dim
        sign = -1.0 if lap % 2 else 1.0
        means[c, c % dim] = sign * (1 + lap // 2)
    return means


def make_blobs(num_classes, per_class, dim, spread, seed) -> LabeledDataset:
    if min(num_classes, per_class, dim) < 1 or spread < 0:
        raise ConfigurationError("Blob sizes must be positive, spread >= 0.")
    rng = make_rng(seed)
    means = class_means(num_classes, dim)
    labels = np.repeat(np.arange(num_classes), per_class)
    noise = rng.normal(0.0, 1.0, size=(labels.shape[0], dim))
    features = means[labels] + spread * noise
    order = rng.permutation(labels.shape[0])
    return LabeledDataset(features=features[order], labels=labels[order])
