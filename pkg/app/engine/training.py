import logging

import numpy as np

from app.core.utils import DivergedTrainingError, EmptySelectionError, make_rng
from app.engine.network import loss_and_grad
from app.engine.types import (
    LabeledDataset,
    ModelArch,
    ParameterVector,
    TrainingConfig,
)

logger = logging.getLogger(__name__)


def init_model(arch: ModelArch, seed) -> ParameterVector:
    """Uniform fan-based weights, zero biases; deterministic per seed."""
    rng = make_rng(seed)
    chunks = []
    for fan_in, fan_out in arch.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-limit, limit, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return ParameterVector(values=np.concatenate(chunks), arch=arch)


def classification_gradient(params, features, labels):
    return loss_and_grad(params, features, labels)


def run_sgd(
    start: ParameterVector,
    data: LabeledDataset,
    cfg: TrainingConfig,
    gradient=classification_gradient,
    ascent=False,
    project=None,
    before_epoch=None,
) -> ParameterVector:
    """Mini-batch SGD shared by benign and malicious clients.

    ``gradient(params, features, labels)`` returns ``(loss, flat_grad)``.
    Batches are drawn from a permutation seeded by ``cfg.seed``, so two runs
    with the same config visit identical batches in identical order.
    ``project`` maps raw values after every step, ``before_epoch`` maps them
    before every epoch.
    """
    if not len(data):
        raise EmptySelectionError("Cannot train on an empty dataset.")
    data.check_compatible(start.arch)

    rng = make_rng(cfg.seed)
    arch = start.arch
    values = start.values.copy()
    step = cfg.learning_rate

    for epoch in range(cfg.local_epochs):
        if before_epoch is not None:
            values = before_epoch(epoch, values)
        order = rng.permutation(len(data))
        for lo in range(0, len(data), cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            loss, grad = gradient(
                ParameterVector(values=values, arch=arch),
                data.features[batch],
                data.labels[batch],
            )
            if not np.isfinite(loss):
                raise DivergedTrainingError(
                    f"Loss became {loss} in epoch {epoch + 1}."
                )
            if ascent:
                values = values + step * grad
            else:
                values = values - step * grad
            if not np.all(np.isfinite(values)):
                raise DivergedTrainingError(
                    f"Weights became non-finite in epoch {epoch + 1}."
                )
            if project is not None:
                values = project(values)
        logger.debug(f"epoch {epoch + 1}/{cfg.local_epochs} last loss {loss:.5f}")

    return ParameterVector(values=values, arch=arch)


def client_update(
    global_model: ParameterVector, data: LabeledDataset, cfg: TrainingConfig
) -> ParameterVector:
    return run_sgd(global_model, data, cfg)
