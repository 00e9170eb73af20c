import numpy as np

from app.attacks.types import TriggerSpec, poisoned_count
from app.core.utils import ConfigurationError, make_rng
from app.engine.types import LabeledDataset


def _victims(size, pdr, rng):
    return np.sort(rng.choice(size, size=poisoned_count(pdr, size), replace=False))


def label_flip(data: LabeledDataset, pdr, num_classes, seed) -> LabeledDataset:
    """Move a ``pdr`` share of the labels to a uniformly drawn other class."""
    if num_classes < 2:
        raise ConfigurationError("Label flipping needs at least two classes.")
    rng = make_rng(seed)
    victims = _victims(len(data), pdr, rng)
    labels = data.labels.copy()
    offsets = rng.integers(1, num_classes, size=victims.shape[0])
    labels[victims] = (labels[victims] + offsets) % num_classes
    return LabeledDataset(features=data.features.copy(), labels=labels)


def pixel_backdoor_poison(
    data: LabeledDataset, trigger: TriggerSpec, target, pdr, seed
) -> LabeledDataset:
    trigger.check_fits(data.num_features)
    rng = make_rng(seed)
    victims = _victims(len(data), pdr, rng)
    features = data.features.copy()
    labels = data.labels.copy()
    rows = victims[:, None]
    features[rows, list(trigger.pixel_indices)] = trigger.pixel_value
    labels[victims] = target
    return LabeledDataset(features=features, labels=labels)


def clean_portion(data: LabeledDataset, pdr, seed) -> LabeledDataset:
    """Rows a poisoning call with the same ``pdr`` and ``seed`` leaves alone."""
    rng = make_rng(seed)
    keep = np.ones(len(data), dtype=bool)
    keep[_victims(len(data), pdr, rng)] = False
    return data.subset(np.flatnonzero(keep))
