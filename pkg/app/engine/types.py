from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from django.db import models

from app.core.utils import (
    ConfigurationError,
    DimensionMismatchError,
    NonFiniteInputError,
)


class Activation(models.TextChoices):
    RELU = "relu", "ReLU"
    TANH = "tanh", "tanh"


@dataclass(frozen=True)
class ModelArch:
    layer_dims: Tuple[int, ...]
    activation: str = Activation.RELU

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        if len(dims) < 2:
            raise ConfigurationError(
                "An architecture needs at least an input and an output dim."
            )
        if any(d < 1 for d in dims):
            raise ConfigurationError(f"Layer dims must be positive, got {dims}")
        if self.activation not in Activation.values:
            raise ConfigurationError(f"Unknown activation {self.activation!r}")
        object.__setattr__(self, "layer_dims", dims)

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def num_classes(self):
        return self.layer_dims[-1]

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        return list(zip(self.layer_dims[:-1], self.layer_dims[1:]))

    @property
    def param_count(self):
        return sum(d_in * d_out + d_out for d_in, d_out in self.layer_shapes)


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """All trainable weights of one model, flattened layer by layer.

    Each layer contributes its ``(fan_in, fan_out)`` weight matrix in
    row-major order followed by its bias vector.
    """

    values: np.ndarray
    arch: ModelArch

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.arch.param_count:
            raise DimensionMismatchError(
                f"Expected {self.arch.param_count} parameters for "
                f"{self.arch.layer_dims}, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteInputError("Parameter vector has non-finite entries.")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    def layers(self):
        """Yield ``(weights, bias)`` views into ``values``."""
        offset = 0
        for d_in, d_out in self.arch.layer_shapes:
            weights = self.values[offset : offset + d_in * d_out]
            offset += d_in * d_out
            bias = self.values[offset : offset + d_out]
            offset += d_out
            yield weights.reshape(d_in, d_out), bias

    def with_values(self, values):
        return ParameterVector(values=values, arch=self.arch)

    def same_arch(self, other):
        return self.arch == other.arch


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.1
    local_epochs: int = 1
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        # A zero step size is allowed: it is the identity update.
        if not self.learning_rate >= 0:
            raise ConfigurationError("learning_rate must be non-negative")
        if self.local_epochs < 1:
            raise ConfigurationError("local_epochs must be at least 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1")

    def with_seed(self, seed):
        return TrainingConfig(
            learning_rate=self.learning_rate,
            local_epochs=self.local_epochs,
            batch_size=self.batch_size,
            seed=seed,
        )


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.shape[0] != labels.shape[0]:
            raise DimensionMismatchError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if labels.size and labels.min() < 0:
            raise DimensionMismatchError("Labels must be non-negative class ids")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def num_features(self):
        return self.features.shape[1]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[indices], labels=self.labels[indices]
        )

    def check_compatible(self, arch: ModelArch):
        if self.num_features != arch.input_dim:
            raise DimensionMismatchError(
                f"Data has {self.num_features} features, model expects "
                f"{arch.input_dim}"
            )
        if len(self) and self.labels.max() >= arch.num_classes:
            raise DimensionMismatchError(
                f"Label {self.labels.max()} outside the model's "
                f"{arch.num_classes} classes"
            )
