import factory
import numpy as np

from app.core.utils import make_rng
from app.engine.types import (
    Activation,
    LabeledDataset,
    ModelArch,
    ParameterVector,
    TrainingConfig,
)


class ModelArchFactory(factory.Factory):
    class Meta:
        model = ModelArch

    layer_dims = (4, 3, 2)
    activation = Activation.RELU


class TrainingConfigFactory(factory.Factory):
    class Meta:
        model = TrainingConfig

    learning_rate = 0.1
    local_epochs = 1
    batch_size = 4
    seed = factory.Sequence(lambda n: n)


class LabeledDatasetFactory(factory.Factory):
    """Gaussian features with labels cycling through ``classes``."""

    class Meta:
        model = LabeledDataset

    class Params:
        rows = 12
        dim = 4
        classes = 2
        seed = 0

    features = factory.LazyAttribute(
        lambda o: make_rng(o.seed).normal(size=(o.rows, o.dim))
    )
    labels = factory.LazyAttribute(lambda o: np.arange(o.rows) % o.classes)


class ParameterVectorFactory(factory.Factory):
    class Meta:
        model = ParameterVector

    class Params:
        seed = 0
        scale = 0.5

    arch = factory.SubFactory(ModelArchFactory)
    values = factory.LazyAttribute(
        lambda o: make_rng(o.seed).normal(0.0, o.scale, size=o.arch.param_count)
    )
