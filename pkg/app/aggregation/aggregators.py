import math
from dataclasses import dataclass

import numpy as np

from app.core.utils import (
    ConfigurationError,
    DimensionMismatchError,
    EmptySelectionError,
    InsufficientModelsError,
)
from app.engine.types import ParameterVector


@dataclass(frozen=True, eq=False)
class ClientContribution:
    params: ParameterVector
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigurationError("A contribution needs at least one sample.")


def _stack(models):
    if not models:
        raise EmptySelectionError("Nothing to aggregate.")
    arch = models[0].arch
    for index, model in enumerate(models):
        if model.arch != arch:
            raise DimensionMismatchError(
                f"Model {index} has architecture {model.arch.layer_dims}, "
                f"expected {arch.layer_dims}"
            )
    return np.vstack([m.values for m in models]), arch


def mean_accepted(models, accepted) -> ParameterVector:
    """Unweighted coordinate-wise mean over the accepted models only."""
    accepted = list(accepted)
    if not accepted:
        raise EmptySelectionError("The accepted set is empty.")
    if min(accepted) < 0 or max(accepted) >= len(models):
        raise EmptySelectionError(
            f"Accepted indices {accepted} fall outside {len(models)} models."
        )
    stacked, arch = _stack([models[i] for i in accepted])
    return ParameterVector(values=stacked.mean(axis=0), arch=arch)


def fedavg_weighted(contribs) -> ParameterVector:
    stacked, arch = _stack([c.params for c in contribs])
    weights = np.array([c.sample_count for c in contribs], dtype=np.float64)
    return ParameterVector(
        values=np.average(stacked, axis=0, weights=weights), arch=arch
    )


def krum_scores(models, f):
    k = len(models)
    if k < 2 * f + 3:
        raise InsufficientModelsError(
            f"Krum with f={f} needs at least {2 * f + 3} models, got {k}."
        )
    stacked, _ = _stack(models)
    squared = np.array(
        [np.sum((stacked - stacked[i]) ** 2, axis=1) for i in range(k)]
    )
    neighbours = k - f - 2
    scores = np.empty(k)
    for i in range(k):
        others = np.delete(squared[i], i)
        scores[i] = np.sum(np.sort(others)[:neighbours])
    return scores


def krum_select(models, f):
    # argmin keeps the lowest index among equal scores.
    return int(np.argmin(krum_scores(models, f)))


def krum(models, f) -> ParameterVector:
    return models[krum_select(models, f)]


def coordinate_median(models) -> ParameterVector:
    stacked, arch = _stack(models)
    return ParameterVector(values=np.median(stacked, axis=0), arch=arch)


def trimmed_mean(models, beta) -> ParameterVector:
    if not 0 <= beta < 0.5:
        raise ConfigurationError(f"trim beta must lie in [0, 0.5), got {beta}")
    stacked, arch = _stack(models)
    k = stacked.shape[0]
    cut = math.floor(beta * k)
    if k - 2 * cut < 1:
        raise InsufficientModelsError(
            f"Trimming {cut} from each end of {k} models leaves nothing."
        )
    ordered = np.sort(stacked, axis=0)
    return ParameterVector(values=ordered[cut : k - cut].mean(axis=0), arch=arch)
