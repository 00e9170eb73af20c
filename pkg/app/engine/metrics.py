import numpy as np

from app.core.utils import EmptySelectionError
from app.engine.network import predict
from app.engine.types import LabeledDataset, ParameterVector


def evaluate_ma(model: ParameterVector, test: LabeledDataset) -> float:
    if not len(test):
        raise EmptySelectionError("Main-task accuracy needs test samples.")
    test.check_compatible(model.arch)
    predictions = predict(model, test.features)
    return float(np.mean(predictions == test.labels))


def evaluate_ba(
    model: ParameterVector, triggered_test: LabeledDataset, target_label
) -> float:
    """Share of triggered samples pushed to ``target_label``.

    Samples whose true label already is the target are left out of both
    numerator and denominator, so an attack-free model scores 0.
    """
    triggered_test.check_compatible(model.arch)
    eligible = triggered_test.labels != target_label
    if not np.any(eligible):
        raise EmptySelectionError(
            "Every triggered sample already carries the target label."
        )
    predictions = predict(model, triggered_test.features[eligible])
    return float(np.mean(predictions == target_label))
